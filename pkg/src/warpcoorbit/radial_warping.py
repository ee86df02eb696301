"""Radial and tensor-product warping maps.

A radial component ``rho`` is an odd, strictly increasing diffeomorphism of
``R`` that is linear near the origin.  It generates the radial warping

    Phi_rho(xi) = rho~(|xi|) xi,   rho~(t) = rho(t) / t,

whose inverse Jacobian splits along the radial projector ``pi`` and its
complement:

    A(tau) = rho_*~(|tau|) (I - pi) + rho_*'(|tau|) pi,
    w(tau) = rho_*'(|tau|) * rho_*~(|tau|)^(d-1).

Components are obtained from a weakly admissible profile ``sigma`` by the
slow start construction

    rho(xi) = c xi Omega(xi) + sgn(xi) (1 - Omega(xi)) sigma(|xi|),

where ``Omega`` is a smooth bump equal to one on ``[-eps, eps]`` and zero
outside ``[-2 eps, 2 eps]``.  Two profiles are provided: the power family
``sigma_alpha(t) = (1 + t)^(1 - alpha) - 1`` for ``alpha < 1`` and the
logarithm ``sigma_1(t) = ln(1 + t)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .warping_core import ControlWeight, WarpingMap, identity_map

ScalarFn = Callable[[np.ndarray], np.ndarray]

#: Bisection tolerance on the blend zone.
BISECTION_TOL = 1e-12


# ---------------------------------------------------------------------------
# weakly admissible profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeaklyAdmissibleComponent:
    """A profile ``sigma: [0, inf) -> [0, inf)`` with closed-form inverse.

    Attributes
    ----------
    name : str
        Catalog id (``"ln"`` or ``"alpha:<a>"``).
    value, derivative, inverse, inverse_derivative : callable
        Vectorized evaluators of ``sigma``, ``sigma'``, ``sigma_*`` and
        ``sigma_*'`` on non-negative arrays.
    control : callable
        Growth profile ``u`` of the control weight (the constant is unknown).
    family : tuple
        ``("ln",)`` or ``("alpha", alpha)``; used for closed-form asymptotics.
    """

    name: str
    value: ScalarFn
    derivative: ScalarFn
    inverse: ScalarFn
    inverse_derivative: ScalarFn
    control: ScalarFn
    family: tuple

    def describe(self) -> dict:
        return {"name": self.name, "family": list(self.family)}


def sigma_alpha(alpha: float) -> WeaklyAdmissibleComponent:
    """Power profile ``(1 + t)^(1 - alpha) - 1`` with inverse ``(1 + t)^beta - 1``.

    Parameters
    ----------
    alpha : float
        Exponent, must satisfy ``alpha < 1``; ``beta = 1 / (1 - alpha)``.
    """
    alpha = float(alpha)
    if not alpha < 1.0:
        raise ValueError(f"the power profile needs alpha < 1, got {alpha}")
    gamma = 1.0 - alpha
    beta = 1.0 / gamma
    return WeaklyAdmissibleComponent(
        name=f"alpha:{alpha:g}",
        value=lambda t: np.power(1.0 + t, gamma) - 1.0,
        derivative=lambda t: gamma * np.power(1.0 + t, gamma - 1.0),
        inverse=lambda s: np.power(1.0 + s, beta) - 1.0,
        inverse_derivative=lambda s: beta * np.power(1.0 + s, beta - 1.0),
        control=lambda s: np.power(1.0 + s, abs(beta - 1.0)),
        family=("alpha", alpha),
    )


def sigma_ln() -> WeaklyAdmissibleComponent:
    """Logarithmic profile ``ln(1 + t)`` with inverse ``e^s - 1``."""
    return WeaklyAdmissibleComponent(
        name="ln",
        value=np.log1p,
        derivative=lambda t: 1.0 / (1.0 + t),
        inverse=np.expm1,
        inverse_derivative=np.exp,
        control=np.exp,
        family=("ln",),
    )


# ---------------------------------------------------------------------------
# smooth bump
# ---------------------------------------------------------------------------


def _glue(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _glue_prime(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos]) / t[pos] ** 2
    return out


def smooth_step(t) -> np.ndarray:
    """``S(t) = f(t) / (f(t) + f(1 - t))`` with ``f(t) = exp(-1/t)``; 0 below 0, 1 above 1."""
    t = np.asarray(t, dtype=float)
    a, b = _glue(t), _glue(1.0 - t)
    return a / (a + b)


def smooth_step_prime(t) -> np.ndarray:
    """Derivative of :func:`smooth_step`."""
    t = np.asarray(t, dtype=float)
    a, b = _glue(t), _glue(1.0 - t)
    da, db = _glue_prime(t), _glue_prime(1.0 - t)
    return (da * b + a * db) / (a + b) ** 2


@dataclass(frozen=True)
class SlowStartParams:
    """Linear zone ``(eps, c)`` of the slow start construction.

    ``c = None`` selects the default ``0.9 * sigma(eps) / (2 eps)``.
    The bump is ``Omega(xi) = S((2 eps - |xi|) / eps)`` with :func:`smooth_step`.
    """

    epsilon: float = 1.0
    c: Optional[float] = None

    def resolve(self, sigma: WeaklyAdmissibleComponent) -> "SlowStartParams":
        eps = float(self.epsilon)
        if not eps > 0:
            raise ValueError("epsilon must be positive")
        bound = float(sigma.value(np.array(eps))) / (2.0 * eps)
        c = 0.9 * bound if self.c is None else float(self.c)
        if not 0.0 < c < bound:
            raise ValueError(f"slow start constant c={c} must lie in (0, sigma(eps)/(2 eps)) = (0, {bound})")
        return SlowStartParams(eps, c)

    def bump(self, xi) -> np.ndarray:
        eps = float(self.epsilon)
        return smooth_step((2.0 * eps - np.abs(np.asarray(xi, dtype=float))) / eps)

    def bump_prime(self, xi) -> np.ndarray:
        """Derivative of ``Omega`` (odd, non-positive on ``[0, inf)``)."""
        eps = float(self.epsilon)
        xi = np.asarray(xi, dtype=float)
        return -np.sign(xi) * smooth_step_prime((2.0 * eps - np.abs(xi)) / eps) / eps

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "c": self.c}


# ---------------------------------------------------------------------------
# radial components
# ---------------------------------------------------------------------------


class RadialComponent:
    """Odd increasing diffeomorphism ``rho`` of ``R``, linear on ``(-eps, eps)``.

    The evaluators below receive the half-line versions ``rho_+`` etc. on
    ``[0, inf)``; odd and even extensions are handled here.

    Parameters
    ----------
    value, derivative : callable
        ``rho_+`` and ``rho_+'`` on ``[0, inf)``.
    inverse, inverse_derivative : callable
        ``rho_*`` and ``rho_*'`` on ``[0, inf)``.
    epsilon, c : float
        Linear zone ``rho(t) = c t`` for ``|t| < epsilon``.
    name : str
    sigma : WeaklyAdmissibleComponent, optional
        Profile the component was built from.
    """

    def __init__(
        self,
        value: ScalarFn,
        derivative: ScalarFn,
        inverse: ScalarFn,
        inverse_derivative: ScalarFn,
        epsilon: float,
        c: float,
        name: str,
        sigma: Optional[WeaklyAdmissibleComponent] = None,
        control: Optional[ScalarFn] = None,
    ):
        self._value = value
        self._derivative = derivative
        self._inverse = inverse
        self._inverse_derivative = inverse_derivative
        self.epsilon = float(epsilon)
        self.c = float(c)
        self.name = name
        self.sigma = sigma
        self._control = control if control is not None else (lambda s: np.ones_like(s))

    @property
    def family(self) -> tuple:
        return self.sigma.family if self.sigma is not None else ("custom",)

    def describe(self) -> dict:
        return {"name": self.name, "epsilon": self.epsilon, "c": self.c, "family": list(self.family)}

    def value(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return np.sign(xi) * self._value(np.abs(xi))

    __call__ = value

    def derivative(self, xi) -> np.ndarray:
        return self._derivative(np.abs(np.asarray(xi, dtype=float)))

    def inverse(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        return np.sign(tau) * self._inverse(np.abs(tau))

    def inverse_derivative(self, tau) -> np.ndarray:
        return self._inverse_derivative(np.abs(np.asarray(tau, dtype=float)))

    def tilde(self, t) -> np.ndarray:
        """``rho(t) / t`` on ``[0, inf)``, equal to ``c`` at zero."""
        t = np.abs(np.asarray(t, dtype=float))
        out = np.full(t.shape, self.c)
        big = t >= self.epsilon
        out[big] = self._value(t[big]) / t[big]
        return out

    def inverse_tilde(self, t) -> np.ndarray:
        """``rho_*(t) / t`` on ``[0, inf)``, equal to ``1 / c`` on the linear zone."""
        t = np.abs(np.asarray(t, dtype=float))
        out = np.full(t.shape, 1.0 / self.c)
        big = t >= self.c * self.epsilon
        out[big] = self._inverse(t[big]) / t[big]
        return out

    def inverse_second_derivative(self, t, rel_step: float = 1e-4) -> np.ndarray:
        """``rho_*''`` by central differences with step ``rel_step * (1 + t)``."""
        t = np.asarray(t, dtype=float)
        h = rel_step * (1.0 + np.abs(t))
        return (self.inverse_derivative(t + h) - self.inverse_derivative(t - h)) / (2.0 * h)

    def control(self, s) -> np.ndarray:
        """Growth profile ``u`` of the control weight."""
        return self._control(np.abs(np.asarray(s, dtype=float)))


def linear_component(c: float = 1.0) -> RadialComponent:
    """``rho(xi) = c xi`` on all of ``R`` (``c = 1`` gives the identity)."""
    c = float(c)
    return RadialComponent(
        value=lambda t: c * t,
        derivative=lambda t: np.full_like(t, c),
        inverse=lambda s: s / c,
        inverse_derivative=lambda s: np.full_like(s, 1.0 / c),
        epsilon=np.inf,
        c=c,
        name=f"linear:{c:g}",
    )


def slow_start(sigma: WeaklyAdmissibleComponent, params: Optional[SlowStartParams] = None) -> RadialComponent:
    """Slow start regularization of a weakly admissible profile.

    Parameters
    ----------
    sigma : WeaklyAdmissibleComponent
    params : SlowStartParams, optional
        Defaults to ``eps = 1`` and ``c = 0.9 sigma(eps) / (2 eps)``.

    Returns
    -------
    RadialComponent
        ``rho = c t`` on ``[0, eps)``, the bump blend on ``[eps, 2 eps)`` and
        ``sigma`` beyond.  The inverse is ``t / c`` below ``c eps``, the
        closed form ``sigma_*`` above ``sigma(2 eps)`` and bisection in between.

    Raises
    ------
    ValueError
        If ``c`` lies outside ``(0, sigma(eps) / (2 eps))``.
    """
    p = (params or SlowStartParams()).resolve(sigma)
    eps, c = p.epsilon, p.c
    s_lo = c * eps
    s_hi = float(sigma.value(np.array(2.0 * eps)))

    def value(t):
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        lin = t < eps
        far = t >= 2.0 * eps
        mid = ~(lin | far)
        out[lin] = c * t[lin]
        out[far] = sigma.value(t[far])
        tm = t[mid]
        om = p.bump(tm)
        out[mid] = c * tm * om + (1.0 - om) * sigma.value(tm)
        return out

    def derivative(t):
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        lin = t < eps
        far = t >= 2.0 * eps
        mid = ~(lin | far)
        out[lin] = c
        out[far] = sigma.derivative(t[far])
        tm = t[mid]
        om = p.bump(tm)
        dom = p.bump_prime(tm)
        out[mid] = c * om + (1.0 - om) * sigma.derivative(tm) + dom * (c * tm - sigma.value(tm))
        return out

    def inverse(s):
        s = np.asarray(s, dtype=float)
        out = np.empty_like(s)
        lin = s < s_lo
        far = s >= s_hi
        mid = ~(lin | far)
        out[lin] = s[lin] / c
        out[far] = sigma.inverse(s[far])
        if np.any(mid):
            target = s[mid]
            lo = np.full_like(target, eps)
            hi = np.full_like(target, 2.0 * eps)
            n_iter = int(np.ceil(np.log2(eps / BISECTION_TOL))) + 2
            for _ in range(n_iter):
                m = 0.5 * (lo + hi)
                below = value(m) < target
                lo = np.where(below, m, lo)
                hi = np.where(below, hi, m)
            out[mid] = 0.5 * (lo + hi)
        return out

    def inverse_derivative(s):
        s = np.asarray(s, dtype=float)
        out = np.empty_like(s)
        lin = s < s_lo
        far = s >= s_hi
        mid = ~(lin | far)
        out[lin] = 1.0 / c
        out[far] = sigma.inverse_derivative(s[far])
        if np.any(mid):
            out[mid] = 1.0 / derivative(inverse(s[mid]))
        return out

    comp = RadialComponent(
        value,
        derivative,
        inverse,
        inverse_derivative,
        eps,
        c,
        name=sigma.name,
        sigma=sigma,
        control=sigma.control,
    )
    comp.params = p
    return comp


def family_component(kind: str, alpha: Optional[float] = None, params: Optional[SlowStartParams] = None) -> RadialComponent:
    """Slow start component of a named family.

    Parameters
    ----------
    kind : str
        ``"ln"``, ``"alpha"`` (with ``alpha`` given) or ``"alpha:<a>"``.
    alpha : float, optional
        Exponent of the power family, ``alpha < 1``.
    params : SlowStartParams, optional
    """
    kind = kind.strip()
    if kind.startswith("alpha:"):
        alpha = float(kind.split(":", 1)[1])
        kind = "alpha"
    if kind == "ln":
        return slow_start(sigma_ln(), params)
    if kind == "alpha":
        if alpha is None:
            raise ValueError("the power family needs an exponent alpha")
        return slow_start(sigma_alpha(alpha), params)
    raise ValueError(f"unknown radial family {kind!r}")


# ---------------------------------------------------------------------------
# maps
# ---------------------------------------------------------------------------


def radial_map(rho: RadialComponent, d: int) -> WarpingMap:
    """Radial warping ``Phi_rho(xi) = rho~(|xi|) xi`` on ``R^d``.

    The control weight has the form ``C (1 + |tau|) u(|tau|)`` with the
    profile ``u`` of ``rho`` and an empirically calibrated constant ``C``.
    """
    d = int(d)

    def forward(xi):
        r = np.linalg.norm(xi, axis=-1)
        return rho.tilde(r)[:, None] * xi

    def inverse(tau):
        r = np.linalg.norm(tau, axis=-1)
        return rho.inverse_tilde(r)[:, None] * tau

    def jac_inverse(tau):
        r = np.linalg.norm(tau, axis=-1)
        a = rho.inverse_tilde(r)
        b = rho.inverse_derivative(r)
        safe = np.where(r > 0, r, 1.0)
        e = tau / safe[:, None]
        proj = e[:, :, None] * e[:, None, :]
        eye = np.eye(d)[None]
        return a[:, None, None] * (eye - proj) + b[:, None, None] * proj

    def weight(tau):
        r = np.linalg.norm(tau, axis=-1)
        return rho.inverse_derivative(r) * rho.inverse_tilde(r) ** (d - 1)

    def control_profile(tau):
        r = np.linalg.norm(tau, axis=-1)
        return (1.0 + r) * rho.control(r)

    if np.isinf(rho.epsilon) and rho.c == 1.0:
        m = identity_map(d)
        m.radial_component = rho
        return m
    name = rho.name
    return WarpingMap(
        d,
        forward,
        inverse,
        jac_inverse,
        weight=weight,
        control=ControlWeight(control_profile, None, f"C(1+|tau|)u(|tau|), u of {name}"),
        smoothness=d + 1,
        name=name,
        radial_component=rho,
        weight_tag="radial",
    )


def tensor_map(parts: Sequence[WarpingMap]) -> WarpingMap:
    """Block product ``Phi_1 x ... x Phi_N`` acting on ``R^(d_1 + ... + d_N)``.

    The inverse Jacobian is block diagonal, the weight is the product of the
    factor weights and the control weight is ``max_i v_i(|tau| e_1)``.
    """
    parts = list(parts)
    if not parts:
        raise ValueError("tensor_map needs at least one factor")
    if len(parts) == 1:
        return parts[0]
    dims = [p.dim for p in parts]
    d = int(sum(dims))
    cuts = np.cumsum([0] + dims)

    def blockwise(method):
        def fn(x):
            return np.concatenate(
                [getattr(p, method)(x[:, cuts[i] : cuts[i + 1]]) for i, p in enumerate(parts)], axis=-1
            )

        return fn

    def jac_inverse(tau):
        out = np.zeros((tau.shape[0], d, d))
        for i, p in enumerate(parts):
            sl = slice(cuts[i], cuts[i + 1])
            out[:, sl, sl] = p.jacobian_inverse(tau[:, sl])
        return out

    def weight(tau):
        w = np.ones(tau.shape[0])
        for i, p in enumerate(parts):
            w = w * p.weight(tau[:, cuts[i] : cuts[i + 1]])
        return w

    def control_profile(tau):
        r = np.linalg.norm(tau, axis=-1)
        return np.max(np.stack([p.control.radial(r, p.dim) for p in parts]), axis=0)

    return WarpingMap(
        d,
        blockwise("forward"),
        blockwise("inverse"),
        jac_inverse,
        weight=weight,
        control=ControlWeight(control_profile, 1.0, "max of factor control weights"),
        smoothness=min(p.smoothness for p in parts),
        name="tensor:" + ",".join(p.name for p in parts),
        parts=parts,
        weight_tag="product",
    )


def catalog_map(spec: str, d: int = 1, params: Optional[SlowStartParams] = None) -> WarpingMap:
    """Build a catalog map from its string id.

    Parameters
    ----------
    spec : str
        ``"identity"``, ``"ln"``, ``"alpha:<a>"`` or ``"tensor:<id>,<id>,..."``.
        Tensor factors are one-dimensional and ``d`` is ignored for them.
    d : int
        Dimension for non-tensor ids.
    params : SlowStartParams, optional
        Slow start parameters for radial families.
    """
    spec = spec.strip()
    if spec == "identity":
        return identity_map(d)
    if spec.startswith("tensor:"):
        ids = [s for s in spec[len("tensor:"):].split(",") if s]
        return tensor_map([catalog_map(s, 1, params) for s in ids])
    if spec == "ln" or spec.startswith("alpha:"):
        return radial_map(family_component(spec, params=params), d)
    raise ValueError(f"unknown map id {spec!r}")


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


def besov_curvature_ratio(rho: RadialComponent, gamma) -> np.ndarray:
    """``|rho_*(g) rho_*''(g) / rho_*'(g)^2|`` with ``rho_*''`` differenced."""
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0):
        raise ValueError("gamma must be non-negative")
    num = rho.inverse(gamma) * rho.inverse_second_derivative(gamma)
    return np.abs(num / rho.inverse_derivative(gamma) ** 2)


def derivative_ratio_bound(rho1: RadialComponent, rho2: RadialComponent, grid=None) -> tuple[float, float]:
    """Sup over ``grid`` of ``rho1'/rho2'`` and of ``rho2'/rho1'``.

    The default grid is 4001 points on ``[0, 100]``.
    """
    xi = np.linspace(0.0, 100.0, 4001) if grid is None else np.abs(np.asarray(grid, dtype=float))
    r = rho1.derivative(xi) / rho2.derivative(xi)
    return float(np.max(r)), float(np.max(1.0 / r))


def scaling_bound(rho: RadialComponent, a: float, grid=None) -> float:
    """Smallest ``C(a)`` with ``rho'(a xi) / rho'(xi)`` in ``[1/C, C]`` on ``grid``."""
    xi = np.linspace(0.0, 100.0, 4001) if grid is None else np.abs(np.asarray(grid, dtype=float))
    r = rho.derivative(a * xi) / rho.derivative(xi)
    return float(max(np.max(r), np.max(1.0 / r)))
