"""Warping maps and their numerical verification.

A warping map is a diffeomorphism ``Phi`` from a frequency domain onto
``R^d`` whose inverse has a Jacobian ``A = D(Phi^{-1})`` with positive
determinant.  The determinant ``w = det A`` is the associated weight, and a
control weight ``v0`` bounds the derivatives of the transition matrices

    phi_tau(upsilon) = A(upsilon + tau)^T . A(tau)^{-T}.

Everything here is a *falsification* tool: admissibility, moderateness and
Jacobian consistency are checked on finite grids and each report carries the
worst offender that was found.
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

Evaluator = Callable[[np.ndarray], np.ndarray]

#: Determinants with absolute value below this floor count as singular.
DET_FLOOR = 1e-300

#: Default relative slack for admissibility and moderateness ratios.
DEFAULT_TOL = 1e-2


class SingularJacobianError(ValueError):
    """Raised when ``det A(tau)`` is not safely positive."""


# ---------------------------------------------------------------------------
# point handling
# ---------------------------------------------------------------------------


def as_points(x, d: int) -> np.ndarray:
    """Coerce ``x`` to an array of points with trailing axis of length ``d``.

    For ``d == 1`` a scalar or a flat array is read as a list of points.

    Parameters
    ----------
    x : array_like
        Point or points.
    d : int
        Ambient dimension.

    Returns
    -------
    numpy.ndarray
        Float array of shape ``(..., d)``.
    """
    arr = np.asarray(x, dtype=float)
    if d == 1 and (arr.ndim == 0 or arr.shape[-1] != 1):
        arr = arr[..., None]
    if arr.ndim == 0 or arr.shape[-1] != d:
        raise ValueError(f"expected points with trailing dimension {d}, got shape {arr.shape}")
    return arr


def _flatten(points: np.ndarray) -> tuple[np.ndarray, tuple[int, ...]]:
    lead = points.shape[:-1]
    return points.reshape(-1, points.shape[-1]), lead


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------


def fd_stencil(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Central stencil of fourth-order accuracy for the ``order``-th derivative.

    The stencil uses the integer offsets ``-p..p`` with
    ``p = floor((order + 1) / 2) + 1`` and weights obtained from the moment
    (Vandermonde) conditions.

    Parameters
    ----------
    order : int
        Derivative order ``m >= 0``.

    Returns
    -------
    offsets, weights : numpy.ndarray
        Integer offsets and weights such that
        ``f^(m)(x) ~ sum(weights * f(x + offsets * h)) / h**m``.
    """
    if order < 0:
        raise ValueError("derivative order must be non-negative")
    if order == 0:
        return np.zeros(1), np.ones(1)
    p = (order + 1) // 2 + 1
    offsets = np.arange(-p, p + 1, dtype=float)
    n = offsets.size
    vander = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = math.factorial(order)
    weights = np.linalg.solve(vander, rhs)
    return offsets, weights


def _tensor_stencil(alpha: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Tensor-product stencil for the mixed derivative ``d^alpha``."""
    per_axis = [fd_stencil(a) for a in alpha]
    offsets = np.array(list(itertools.product(*[o for o, _ in per_axis])))
    weights = np.array([np.prod(w) for w in itertools.product(*[w for _, w in per_axis])])
    return offsets.reshape(-1, len(alpha)), weights


def partial_derivative(f: Evaluator, x: np.ndarray, alpha: Sequence[int], h: np.ndarray) -> np.ndarray:
    """Finite-difference estimate of ``d^alpha f`` at each row of ``x``.

    Parameters
    ----------
    f : callable
        Vectorized function mapping ``(n, d)`` points to ``(n, ...)`` values.
    x : numpy.ndarray
        Base points of shape ``(n, d)``.
    alpha : sequence of int
        Multi-index of length ``d``.
    h : numpy.ndarray
        Step per base point, shape ``(n,)``.

    Returns
    -------
    numpy.ndarray
        Derivative estimates of shape ``(n, ...)``.
    """
    x = np.asarray(x, dtype=float)
    n, d = x.shape
    offsets, weights = _tensor_stencil(alpha)
    s = offsets.shape[0]
    pts = x[:, None, :] + h[:, None, None] * offsets[None, :, :]
    vals = np.asarray(f(pts.reshape(n * s, d)))
    vals = vals.reshape((n, s) + vals.shape[1:])
    acc = np.tensordot(weights, np.moveaxis(vals, 1, 0), axes=(0, 0))
    scale = h ** int(sum(alpha))
    return acc / scale.reshape((n,) + (1,) * (acc.ndim - 1))


def fd_jacobian(f: Evaluator, x: np.ndarray, rel_step: float = 1e-3) -> np.ndarray:
    """Finite-difference Jacobian of a vector field ``f: R^d -> R^d``.

    Uses the fourth-order stencil with step ``rel_step * (1 + |x|)``.

    Returns
    -------
    numpy.ndarray
        Array of shape ``(n, d, d)`` with ``J[:, i, j] = d f_i / d x_j``.
    """
    x = np.asarray(x, dtype=float)
    n, d = x.shape
    h = rel_step * (1.0 + np.linalg.norm(x, axis=1))
    cols = []
    for j in range(d):
        alpha = [0] * d
        alpha[j] = 1
        cols.append(partial_derivative(f, x, alpha, h))
    return np.stack(cols, axis=-1)


def multi_indices(d: int, order: int) -> list[tuple[int, ...]]:
    """All multi-indices ``alpha`` in ``N_0^d`` with ``|alpha| <= order``."""
    return [a for a in itertools.product(range(order + 1), repeat=d) if sum(a) <= order]


# ---------------------------------------------------------------------------
# domain, reports and control weights
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Domain:
    """Frequency domain descriptor: all of ``R^d`` or an open axis-aligned box."""

    lower: Optional[tuple[float, ...]] = None
    upper: Optional[tuple[float, ...]] = None

    @property
    def is_full_space(self) -> bool:
        return self.lower is None and self.upper is None

    def contains(self, xi: np.ndarray) -> np.ndarray:
        """Boolean membership for points of shape ``(..., d)``."""
        xi = np.asarray(xi, dtype=float)
        inside = np.ones(xi.shape[:-1], dtype=bool)
        if self.lower is not None:
            inside &= np.all(xi > np.asarray(self.lower), axis=-1)
        if self.upper is not None:
            inside &= np.all(xi < np.asarray(self.upper), axis=-1)
        return inside

    def to_dict(self) -> dict:
        if self.is_full_space:
            return {"kind": "full"}
        return {"kind": "box", "lower": list(self.lower or ()), "upper": list(self.upper or ())}


FULL_SPACE = Domain()


@dataclass
class CheckReport:
    """Outcome of a grid-based check, serializable as a JSON record."""

    check: str
    max_ratio: float
    witness: Optional[dict]
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "max_ratio": float(self.max_ratio),
            "witness": self.witness,
            "pass": bool(self.passed),
            "details": self.details,
        }


class ControlWeight:
    """Radially increasing submultiplicative weight ``v0 = C * profile``.

    Parameters
    ----------
    profile : callable
        Vectorized map from ``(n, d)`` points to positive values.
    constant : float or None
        Multiplicative constant ``C >= 1``.  ``None`` means the constant is
        estimated from the map the weight gets attached to (see
        :func:`calibrate_control_constant`).
    name : str
        Human-readable description of the profile.
    """

    def __init__(self, profile: Evaluator, constant: Optional[float] = 1.0, name: str = "custom"):
        self._profile = profile
        self._constant = None if constant is None else float(constant)
        self._calibrator: Optional[Callable[[], float]] = None
        self._lock = threading.Lock()
        self.name = name

    @property
    def needs_calibration(self) -> bool:
        return self._constant is None

    def attach_calibrator(self, calibrator: Callable[[], float]) -> None:
        self._calibrator = calibrator

    @property
    def constant(self) -> float:
        if self._constant is None:
            with self._lock:
                if self._constant is None:
                    if self._calibrator is None:
                        raise ValueError("control weight constant is unknown and no calibrator is attached")
                    self._constant = float(self._calibrator())
        return self._constant

    def profile(self, tau) -> np.ndarray:
        pts = np.asarray(tau, dtype=float)
        flat, lead = _flatten(pts)
        return np.asarray(self._profile(flat), dtype=float).reshape(lead)

    def __call__(self, tau) -> np.ndarray:
        return self.constant * self.profile(tau)

    def radial(self, t, d: int) -> np.ndarray:
        """Evaluate ``v0(t * e_1)`` for scalar radii ``t``."""
        t = np.asarray(t, dtype=float)
        pts = np.zeros(t.shape + (d,))
        pts[..., 0] = t
        return self(pts)

    def to_dict(self) -> dict:
        return {"name": self.name, "constant": self._constant}


def check_control_weight(v0: ControlWeight, d: int, samples: np.ndarray, tol: float = 1e-12) -> CheckReport:
    """Probe ``v0 >= 1``, radial monotonicity and submultiplicativity.

    Parameters
    ----------
    v0 : ControlWeight
        Weight to probe.
    d : int
        Dimension.
    samples : numpy.ndarray
        Probe points of shape ``(n, d)``; all pairs are used for
        submultiplicativity, each point's ray for monotonicity.
    """
    samples = as_points(samples, d).reshape(-1, d)
    vals = v0(samples)
    worst = {"ratio": 0.0, "witness": None}
    lower_ok = bool(np.all(vals >= 1.0 - tol))
    # submultiplicativity v0(s + t) <= v0(s) v0(t)
    sums = samples[:, None, :] + samples[None, :, :]
    ratio = v0(sums) / (vals[:, None] * vals[None, :])
    i, j = np.unravel_index(np.argmax(ratio), ratio.shape)
    worst["ratio"] = float(ratio[i, j])
    worst["witness"] = {"sigma": samples[i].tolist(), "tau": samples[j].tolist()}
    # radial monotonicity along each ray
    scales = np.linspace(0.0, 1.0, 17)
    ray_vals = v0(scales[None, :, None] * samples[:, None, :])
    mono_ok = bool(np.all(np.diff(ray_vals, axis=1) >= -tol * ray_vals[:, 1:]))
    passed = lower_ok and mono_ok and worst["ratio"] <= 1.0 + tol
    return CheckReport(
        "control_weight",
        worst["ratio"],
        worst["witness"],
        passed,
        {"at_least_one": lower_ok, "radially_increasing": mono_ok},
    )


# ---------------------------------------------------------------------------
# the warping map
# ---------------------------------------------------------------------------


class WarpingMap:
    """Immutable warping map ``Phi`` with inverse, inverse Jacobian and weight.

    Parameters
    ----------
    dim : int
        Dimension ``d``.
    forward, inverse : callable
        Vectorized evaluators ``(n, d) -> (n, d)`` for ``Phi`` and ``Phi^{-1}``.
    jac_inverse : callable, optional
        Evaluator ``(n, d) -> (n, d, d)`` for ``A = D(Phi^{-1})``.  When
        omitted it is synthesized by finite differences of ``inverse`` and
        :attr:`jac_synthesized` is set.
    weight : callable, optional
        Closed form ``(n, d) -> (n,)`` for ``w = det A``.  Defaults to the
        determinant of ``jac_inverse``.
    control : ControlWeight, optional
        Control weight.  A weight with unknown constant is calibrated
        lazily against this map.
    domain : Domain, optional
        Frequency domain, full space by default.
    smoothness : int, optional
        Differentiability order ``k`` used by admissibility checks.
    name : str
        Catalog id or description.
    """

    def __init__(
        self,
        dim: int,
        forward: Evaluator,
        inverse: Evaluator,
        jac_inverse: Optional[Evaluator] = None,
        weight: Optional[Evaluator] = None,
        control: Optional[ControlWeight] = None,
        domain: Domain = FULL_SPACE,
        smoothness: Optional[int] = None,
        name: str = "custom",
        radial_component=None,
        parts: Sequence["WarpingMap"] = (),
        weight_tag: Optional[str] = None,
    ):
        if int(dim) < 1:
            raise ValueError("dimension must be a positive integer")
        self.dim = int(dim)
        self._forward = forward
        self._inverse = inverse
        self.jac_synthesized = jac_inverse is None
        if jac_inverse is None:
            inv = inverse

            def jac_inverse(tau):
                return fd_jacobian(inv, tau)

        self._jac_inverse = jac_inverse
        self._weight = weight
        self.weight_tag = weight_tag
        self.domain = domain
        self.smoothness = int(self.dim + 1 if smoothness is None else smoothness)
        self.name = name
        self.radial_component = radial_component
        self.parts = tuple(parts)
        if control is None:
            control = ControlWeight(lambda t: np.ones(t.shape[0]), 1.0, "unknown")
        if control.needs_calibration:
            control.attach_calibrator(lambda: calibrate_control_constant(self, control))
        self.control = control

    def __repr__(self) -> str:
        return f"WarpingMap(name={self.name!r}, dim={self.dim})"

    # evaluators with arbitrary leading shape
    def _apply(self, fn: Evaluator, x, tail: tuple[int, ...]) -> np.ndarray:
        pts = as_points(x, self.dim)
        flat, lead = _flatten(pts)
        out = np.asarray(fn(flat), dtype=float)
        return out.reshape(lead + tail)

    def forward(self, xi) -> np.ndarray:
        """``Phi(xi)`` for points of shape ``(..., d)``."""
        return self._apply(self._forward, xi, (self.dim,))

    def inverse(self, tau) -> np.ndarray:
        """``Phi^{-1}(tau)`` for points of shape ``(..., d)``."""
        return self._apply(self._inverse, tau, (self.dim,))

    def jacobian_inverse(self, tau) -> np.ndarray:
        """``A(tau) = D(Phi^{-1})(tau)`` with shape ``(..., d, d)``."""
        return self._apply(self._jac_inverse, tau, (self.dim, self.dim))

    def jacobian_forward(self, xi) -> np.ndarray:
        """``D Phi(xi) = A(Phi(xi))^{-1}``."""
        return np.linalg.inv(self.jacobian_inverse(self.forward(xi)))

    def weight(self, tau) -> np.ndarray:
        """Associated weight ``w(tau) = det A(tau)`` (unchecked)."""
        if self._weight is not None:
            return self._apply(self._weight, tau, ())
        return np.linalg.det(self.jacobian_inverse(tau))

    def describe(self) -> dict:
        info = {
            "name": self.name,
            "dim": self.dim,
            "smoothness": self.smoothness,
            "domain": self.domain.to_dict(),
            "jac_synthesized": self.jac_synthesized,
            "control": self.control.to_dict(),
        }
        if self.radial_component is not None:
            info["radial_component"] = self.radial_component.describe()
        if self.parts:
            info["parts"] = [p.describe() for p in self.parts]
        return info


def identity_map(d: int) -> WarpingMap:
    """The identity warping on ``R^d`` with ``v0 = 1``."""

    def fwd(x):
        return np.array(x, dtype=float, copy=True)

    def jac(t):
        return np.broadcast_to(np.eye(d), (t.shape[0], d, d)).copy()

    return WarpingMap(
        d,
        fwd,
        fwd,
        jac,
        weight=lambda t: np.ones(t.shape[0]),
        control=ControlWeight(lambda t: np.ones(t.shape[0]), 1.0, "one"),
        smoothness=d + 1,
        name="identity",
        weight_tag="one",
    )


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def eval_weight(map_: WarpingMap, tau) -> np.ndarray:
    """Associated weight ``w(tau) = det A(tau)``, checked to be positive.

    Raises
    ------
    SingularJacobianError
        If any determinant is below :data:`DET_FLOOR` in absolute value or
        negative.
    """
    w = np.asarray(map_.weight(tau), dtype=float)
    if np.any(~np.isfinite(w)) or np.any(np.abs(w) < DET_FLOOR):
        raise SingularJacobianError("Jacobian of the inverse map is singular at a probed point")
    if np.any(w < 0):
        raise SingularJacobianError("Jacobian of the inverse map has negative determinant")
    return w[()] if w.ndim == 0 else w


def _phi_tau_from(A_shift: np.ndarray, A_base_inv_T: np.ndarray) -> np.ndarray:
    return np.swapaxes(A_shift, -1, -2) @ A_base_inv_T


def phi_tau(map_: WarpingMap, tau, upsilon) -> np.ndarray:
    """Transition matrix ``phi_tau(upsilon) = A(upsilon + tau)^T A(tau)^{-T}``.

    Parameters
    ----------
    map_ : WarpingMap
    tau, upsilon : array_like
        Base points and offsets, broadcastable, trailing axis ``d``.

    Returns
    -------
    numpy.ndarray
        Matrices of shape ``(..., d, d)``.
    """
    d = map_.dim
    tau = as_points(tau, d)
    upsilon = as_points(upsilon, d)
    tau, upsilon = np.broadcast_arrays(tau, upsilon)
    A_base = map_.jacobian_inverse(tau)
    det = np.linalg.det(A_base)
    if np.any(np.abs(det) < DET_FLOOR):
        raise SingularJacobianError("A(tau) is singular")
    A_shift = map_.jacobian_inverse(tau + upsilon)
    if np.any(np.abs(np.linalg.det(A_shift)) < DET_FLOOR):
        raise SingularJacobianError("A(tau + upsilon) is singular")
    inv_T = np.swapaxes(np.linalg.inv(A_base), -1, -2)
    return _phi_tau_from(A_shift, inv_T)


def standard_grid(d: int, extent: float = 10.0, n: Optional[int] = None) -> np.ndarray:
    """Uniform tensor grid on ``[-extent, extent]^d`` used by default sweeps.

    The number of nodes per axis defaults to 41, 11 and 5 for ``d = 1, 2, 3``
    and 3 beyond, which keeps pairwise sweeps affordable.
    """
    if n is None:
        n = {1: 41, 2: 11, 3: 5}.get(d, 3)
    axis = np.linspace(-extent, extent, n)
    return np.array(list(itertools.product(axis, repeat=d)), dtype=float)


def _split_grid(map_: WarpingMap, grid) -> tuple[np.ndarray, np.ndarray]:
    d = map_.dim
    if grid is None:
        g = standard_grid(d)
        return g, g
    if isinstance(grid, tuple) and len(grid) == 2:
        return as_points(grid[0], d).reshape(-1, d), as_points(grid[1], d).reshape(-1, d)
    g = as_points(grid, d).reshape(-1, d)
    return g, g


def _admissibility_ratios(
    map_: WarpingMap,
    profile: Callable[[np.ndarray], np.ndarray],
    order: int,
    taus: np.ndarray,
    ups: np.ndarray,
    chunk: int = 2048,
) -> tuple[float, dict]:
    """Max over pairs and ``|alpha| <= order`` of ``||d^alpha phi_tau(ups)|| / profile(ups)``."""
    d = map_.dim
    tt = np.repeat(taus, ups.shape[0], axis=0)
    uu = np.tile(ups, (taus.shape[0], 1))
    best = (-np.inf, None)
    alphas = multi_indices(d, order)
    for start in range(0, tt.shape[0], chunk):
        t = tt[start : start + chunk]
        u = uu[start : start + chunk]
        inv_T = np.swapaxes(np.linalg.inv(map_.jacobian_inverse(t)), -1, -2)
        h = 1e-3 * (1.0 + np.linalg.norm(u, axis=1))
        denom = profile(u)
        for alpha in alphas:
            offsets, weights = _tensor_stencil(alpha)
            s = offsets.shape[0]
            pts = u[:, None, :] + h[:, None, None] * offsets[None, :, :] + t[:, None, :]
            A = map_.jacobian_inverse(pts.reshape(-1, d)).reshape(t.shape[0], s, d, d)
            phis = _phi_tau_from(A, inv_T[:, None, :, :])
            deriv = np.einsum("s,nsij->nij", weights, phis) / (h ** sum(alpha))[:, None, None]
            norms = np.linalg.norm(deriv, ord=2, axis=(-2, -1))
            ratio = norms / denom
            i = int(np.argmax(ratio))
            if ratio[i] > best[0]:
                best = (
                    float(ratio[i]),
                    {"tau": t[i].tolist(), "upsilon": u[i].tolist(), "alpha": list(alpha)},
                )
    return best


def calibrate_control_constant(
    map_: WarpingMap,
    control: ControlWeight,
    order: Optional[int] = None,
    extent: float = 10.0,
    margin: float = 1.25,
) -> float:
    """Estimate the constant ``C`` of a control weight ``C * profile``.

    The smallest constant that makes the admissibility bound hold on a
    calibration grid is multiplied by ``margin``.  The constant is an
    empirical estimate; no analytic value is claimed.
    """
    d = map_.dim
    order = map_.smoothness if order is None else order
    n = {1: 81, 2: 13, 3: 5}.get(d, 3)
    grid = standard_grid(d, extent, n)
    ratio, _ = _admissibility_ratios(map_, control.profile, order, grid, grid)
    return max(1.0, margin * ratio)


def verify_admissibility(
    map_: WarpingMap,
    v0: Optional[ControlWeight] = None,
    order: Optional[int] = None,
    grid=None,
    tol: float = DEFAULT_TOL,
) -> CheckReport:
    """Finite-difference check of ``||d^alpha phi_tau(upsilon)|| <= v0(upsilon)``.

    Parameters
    ----------
    map_ : WarpingMap
    v0 : ControlWeight, optional
        Defaults to the map's own control weight.
    order : int, optional
        Largest ``|alpha|``; defaults to ``map_.smoothness``.
    grid : array_like or tuple, optional
        Either one point set used for both ``tau`` and ``upsilon`` or a pair
        ``(taus, upsilons)``.  Defaults to :func:`standard_grid`.
    tol : float
        The check passes iff the maximal ratio is ``<= 1 + tol``.

    Returns
    -------
    CheckReport
        ``max_ratio`` and the worst ``(tau, upsilon, alpha)``.
    """
    v0 = map_.control if v0 is None else v0
    order = map_.smoothness if order is None else int(order)
    if order > map_.smoothness:
        raise ValueError(f"order {order} exceeds the map's smoothness {map_.smoothness}")
    taus, ups = _split_grid(map_, grid)
    ratio, witness = _admissibility_ratios(map_, v0, order, taus, ups)
    return CheckReport(
        "admissibility",
        ratio,
        witness,
        ratio <= 1.0 + tol,
        {"order": order, "tol": tol, "jac_synthesized": map_.jac_synthesized, "pairs": int(taus.shape[0] * ups.shape[0])},
    )


def jacobian_consistency(
    map_: WarpingMap, probes, tol: float = 1e-6, roundtrip_tol: float = 1e-8, rel_step: float = 1e-4
) -> CheckReport:
    """Compare the weight and inverse Jacobian with finite differences.

    For frequency probes ``xi`` with ``tau = Phi(xi)`` three residuals are
    measured:

    * ``|w(tau) det(D Phi(xi)) - 1|`` with ``D Phi`` differenced,
    * ``|det(D Phi^{-1}(tau)) - w(tau)| / w(tau)`` with ``D Phi^{-1}``
      differenced,
    * the round trip ``|Phi(Phi^{-1}(tau)) - tau|``.

    ``max_ratio`` is the larger of the two weight residuals.  The
    difference step is ``rel_step * (1 + |x|)``; the smooth blend of a slow
    start has large high derivatives, so the step is smaller than the one
    used for admissibility sweeps.
    """
    d = map_.dim
    xi = as_points(probes, d).reshape(-1, d)
    tau = map_.forward(xi)
    w = map_.weight(tau)
    jf = fd_jacobian(map_.forward, xi, rel_step)
    res_fwd = np.abs(w * np.linalg.det(jf) - 1.0)
    ji = fd_jacobian(map_.inverse, tau, rel_step)
    res_inv = np.abs(np.linalg.det(ji) - w) / w
    A = map_.jacobian_inverse(tau)
    res_mat = np.linalg.norm(ji - A, axis=(-2, -1)) / np.linalg.norm(A, axis=(-2, -1))
    rt = np.linalg.norm(map_.forward(map_.inverse(tau)) - tau, axis=-1)
    res = np.maximum(res_fwd, res_inv)
    i = int(np.argmax(res))
    passed = bool(res[i] <= tol and rt.max() <= roundtrip_tol and np.all(w > 0))
    return CheckReport(
        "jacobian_consistency",
        float(res[i]),
        {"xi": xi[i].tolist(), "tau": tau[i].tolist()},
        passed,
        {
            "max_forward_residual": float(res_fwd.max()),
            "max_inverse_residual": float(res_inv.max()),
            "max_matrix_residual": float(res_mat.max()),
            "max_roundtrip": float(rt.max()),
            "probes": int(xi.shape[0]),
        },
    )


def check_moderate(f: Callable, v: Callable, pairs, d: int = 1, tol: float = DEFAULT_TOL) -> CheckReport:
    """Probe ``f(tau + upsilon) <= f(upsilon) v(tau)`` on sample pairs.

    Parameters
    ----------
    f, v : callable
        Positive fields evaluated on arrays of shape ``(n, d)``.
    pairs : array_like or tuple
        Either ``(taus, upsilons)`` (all combinations are used) or one point
        set used for both.
    d : int
        Dimension.
    """
    if isinstance(pairs, tuple) and len(pairs) == 2:
        taus, ups = as_points(pairs[0], d).reshape(-1, d), as_points(pairs[1], d).reshape(-1, d)
    else:
        taus = ups = as_points(pairs, d).reshape(-1, d)
    tt = np.repeat(taus, ups.shape[0], axis=0)
    uu = np.tile(ups, (taus.shape[0], 1))
    with np.errstate(over="ignore", invalid="ignore"):
        num = np.asarray(f(tt + uu), dtype=float)
        den = np.asarray(f(uu), dtype=float) * np.asarray(v(tt), dtype=float)
        ratio = num / den
    ratio = np.where(np.isnan(ratio), np.inf, ratio)
    i = int(np.argmax(ratio))
    return CheckReport(
        "moderate",
        float(ratio[i]),
        {"tau": tt[i].tolist(), "upsilon": uu[i].tolist()},
        bool(ratio[i] <= 1.0 + tol),
        {"tol": tol, "pairs": int(tt.shape[0])},
    )
