"""Decision procedures for embeddings between decomposition-type spaces.

Every criterion reduces to the question whether a positive sequence lies in
some ``l^s``.  Sequences of the catalog families are carried in closed
power-log form ``C 2^{a j} (1 + j)^b``, for which membership is decided
exactly.  Sampled sequences go through a regression onto the same model and
may come back ``"undetermined"`` near the summability boundary.

Lattice-indexed sequences (``k in Z^d`` with a radial profile in ``|k|``)
are tagged with ``lattice_dim = d``; the ``|k|^{d-1}`` shell multiplicity
then shifts the log exponent by ``(d - 1) / s``.

The verdicts rest on hypotheses (tight semi-structured coverings, relative
moderateness) that are probed numerically on windows and are not proven
here; each verdict says so in its ``note`` field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .radial_warping import (
    RadialComponent,
    besov_curvature_ratio,
    catalog_map,
    family_component,
    scaling_bound,
)
from .warping_core import WarpingMap, as_points

INF = math.inf
HYPOTHESES_NOTE = "hypotheses probed, not proven"

#: Numeric mode: fitted ``|a|`` below this counts as exactly zero.
A_ZERO = 1e-8
#: Numeric mode: ``0 < |a|`` below this is too close to the boundary.
A_BOUNDARY = 1e-3
#: Numeric mode: ``|b s + 1|`` (or ``|b|`` for ``s = inf``) below this is undetermined.
B_BOUNDARY = 0.05


# ---------------------------------------------------------------------------
# exponent algebra
# ---------------------------------------------------------------------------


def _check_exponent(p) -> None:
    if not (isinstance(p, (int, float, Fraction)) and (p >= 1)):
        raise ValueError(f"exponent {p!r} must lie in [1, inf]")


def recip(p) -> Fraction:
    """``1/p`` as an exact fraction with ``1/inf = 0``."""
    _check_exponent(p)
    if p == INF:
        return Fraction(0)
    return 1 / Fraction(p).limit_denominator(10**9)


def conjugate(p) -> float:
    """Conjugate exponent with ``p' = inf`` for ``p <= 1``."""
    if p <= 1:
        return INF
    if p == INF:
        return 1.0
    return float(Fraction(p) / (Fraction(p) - 1))


def norm_exponent(q1, q2) -> float:
    """``q2 (q1/q2)'``: infinite when ``q1 <= q2``, else ``q1 q2 / (q1 - q2)``."""
    _check_exponent(q1)
    _check_exponent(q2)
    if q1 <= q2:
        return INF
    if q1 == INF:
        return float(q2)
    return float(Fraction(q1) * Fraction(q2) / (Fraction(q1) - Fraction(q2)))


def t_exponents(p1, p2, q1, q2) -> tuple[float, float]:
    """``t = max(0, 1/q2 - min(1/p1, 1 - 1/p1))`` and ``t~ = max(0, max(1/p2, 1 - 1/p2) - 1/q1)``."""
    a1, a2, b1, b2 = recip(p1), recip(p2), recip(q1), recip(q2)
    t = max(Fraction(0), b2 - min(a1, 1 - a1))
    tt = max(Fraction(0), max(a2, 1 - a2) - b1)
    return float(t), float(tt)


# ---------------------------------------------------------------------------
# sequences and l^s membership
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticSequence:
    """Sequence ``c 2^{a j} (1 + j)^b`` or a raw sample ``values[j]``.

    Attributes
    ----------
    a, b, c : float
        Closed-form parameters (ignored in raw mode).
    values : ndarray, optional
        Raw samples for ``j = 0, 1, ...``; presence selects raw mode.
    lattice_dim : int
        ``1`` for sequences over ``N_0``; ``d`` for radial profiles over
        ``Z^d`` indexed by the radius.
    label : str
    """

    a: float = 0.0
    b: float = 0.0
    c: float = 1.0
    values: Optional[np.ndarray] = field(default=None, compare=False)
    lattice_dim: int = 1
    label: str = ""

    @property
    def exact(self) -> bool:
        return self.values is None

    @classmethod
    def raw(cls, values, lattice_dim: int = 1, label: str = "") -> "AsymptoticSequence":
        return cls(values=np.asarray(values, dtype=float), lattice_dim=lattice_dim, label=label)

    def sample(self, n: int) -> np.ndarray:
        if not self.exact:
            return np.asarray(self.values[:n], dtype=float)
        j = np.arange(n, dtype=float)
        return self.c * np.exp2(self.a * j) * (1.0 + j) ** self.b

    def __len__(self) -> int:
        return 0 if self.exact else len(self.values)

    def _combine(self, other: "AsymptoticSequence", sign: int) -> "AsymptoticSequence":
        if self.lattice_dim != other.lattice_dim:
            raise ValueError("cannot combine sequences over different index sets")
        if self.exact and other.exact:
            return AsymptoticSequence(
                self.a + sign * other.a,
                self.b + sign * other.b,
                self.c * other.c**sign,
                lattice_dim=self.lattice_dim,
            )
        n = max(len(self), len(other))
        n = min(v for v in (len(self), len(other)) if v > 0) if n else n
        vals = self.sample(n) * other.sample(n) ** sign
        return AsymptoticSequence.raw(vals, self.lattice_dim)

    def __mul__(self, other: "AsymptoticSequence") -> "AsymptoticSequence":
        return self._combine(other, 1)

    def __truediv__(self, other: "AsymptoticSequence") -> "AsymptoticSequence":
        return self._combine(other, -1)

    def __pow__(self, e: float) -> "AsymptoticSequence":
        e = float(e)
        if self.exact:
            return AsymptoticSequence(self.a * e, self.b * e, self.c**e, lattice_dim=self.lattice_dim)
        return AsymptoticSequence.raw(np.abs(self.values) ** e, self.lattice_dim)

    def to_dict(self) -> dict:
        if self.exact:
            return {"mode": "exact", "a": self.a, "b": self.b, "c": self.c, "lattice_dim": self.lattice_dim}
        return {"mode": "raw", "length": len(self.values), "lattice_dim": self.lattice_dim}


def geometric(a: float = 0.0, b: float = 0.0, c: float = 1.0, lattice_dim: int = 1) -> AsymptoticSequence:
    """Shorthand for the closed form ``c 2^{a j} (1 + j)^b``."""
    return AsymptoticSequence(float(a), float(b), float(c), lattice_dim=lattice_dim)


#: Closed-form exponents are sums of float fractions; this absorbs rounding.
EXACT_TOL = 1e-12


def _membership_rule(a: float, b: float, s: float, lattice_dim: int) -> str:
    if s != INF:
        b = b + (lattice_dim - 1) / s
    if a < -EXACT_TOL:
        return "finite"
    if a > EXACT_TOL:
        return "infinite"
    if s == INF:
        return "finite" if b <= EXACT_TOL else "infinite"
    return "finite" if b * s < -1 - EXACT_TOL else "infinite"


def fit_power_log(values, tail: float = 0.5) -> dict:
    """Least-squares fit of ``log|x_j| = c + a j ln 2 + b ln(1 + j)`` on the tail."""
    x = np.abs(np.asarray(values, dtype=float))
    n = len(x)
    start = int(n * (1.0 - tail))
    j = np.arange(start, n, dtype=float)
    y = x[start:]
    keep = y > 0
    if keep.sum() < 4:
        return {"a": -INF if not np.any(x) else math.nan, "b": 0.0, "residual": 0.0, "points": int(keep.sum())}
    design = np.stack([np.ones(keep.sum()), j[keep] * math.log(2.0), np.log1p(j[keep])], axis=1)
    coef, *_ = np.linalg.lstsq(design, np.log(y[keep]), rcond=None)
    resid = np.log(y[keep]) - design @ coef
    return {"a": float(coef[1]), "b": float(coef[2]), "residual": float(np.sqrt(np.mean(resid**2))), "points": int(keep.sum())}


def ellq_membership(seq: AsymptoticSequence, s: float, mode: str = "auto") -> str:
    """Decide ``seq in l^s`` as ``"finite"``, ``"infinite"`` or ``"undetermined"``.

    Parameters
    ----------
    seq : AsymptoticSequence
    s : float
        Exponent in ``[1, inf]``.
    mode : {"auto", "exact", "numeric"}
        ``"numeric"`` samples closed forms (64 terms) and fits them, which is
        how sampled sequences are always treated.
    """
    _check_exponent(s)
    if mode == "exact" and not seq.exact:
        raise ValueError("exact mode needs a closed-form sequence")
    if seq.exact and mode != "numeric":
        if seq.c == 0:
            return "finite"
        return _membership_rule(seq.a, seq.b, s, seq.lattice_dim)
    vals = seq.sample(64) if seq.exact else seq.values
    fit = fit_power_log(vals)
    a, b = fit["a"], fit["b"]
    if a == -INF:
        return "finite"
    if math.isnan(a) or fit["residual"] > 0.1:
        return "undetermined"
    if abs(a) < A_ZERO:
        a = 0.0
    elif abs(a) < A_BOUNDARY:
        return "undetermined"
    if a == 0.0:
        if s == INF:
            if abs(b) < A_ZERO:
                b = 0.0
            elif abs(b) < B_BOUNDARY:
                return "undetermined"
        else:
            beff = b + (seq.lattice_dim - 1) / s
            if abs(beff * s + 1.0) < B_BOUNDARY:
                return "undetermined"
    return _membership_rule(a, b, s, seq.lattice_dim)


# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------


@dataclass
class EmbeddingVerdict:
    """Outcome of one embedding question ``source -> target``."""

    relation: str
    direction: str
    t: Optional[float]
    t_tilde: Optional[float]
    sequence: dict
    exponent: Optional[float]
    citation: str
    note: str = HYPOTHESES_NOTE
    reason: str = ""

    @property
    def embeds(self) -> bool:
        return self.relation in ("embeds", "equal")

    def to_dict(self) -> dict:
        return {
            "relation": self.relation,
            "direction": self.direction,
            "t": self.t,
            "t_tilde": self.t_tilde,
            "sequence": self.sequence,
            "exponent": "inf" if self.exponent == INF else self.exponent,
            "citation": self.citation,
            "note": self.note,
            "reason": self.reason,
        }


def _verdict(seq: AsymptoticSequence, s: float, direction: str, citation: str, t=None, tt=None) -> EmbeddingVerdict:
    m = ellq_membership(seq, s)
    relation = {"finite": "embeds", "infinite": "fails", "undetermined": "undetermined"}[m]
    return EmbeddingVerdict(relation, direction, t, tt, {**seq.to_dict(), "membership": m}, s, citation)


def _p_fail(direction: str, citation: str, t=None, tt=None) -> EmbeddingVerdict:
    return EmbeddingVerdict("fails", direction, t, tt, {}, None, citation, reason="p1 > p2")


def embed_same_covering(
    u: AsymptoticSequence,
    v: AsymptoticSequence,
    det_t: AsymptoticSequence,
    p1,
    p2,
    q1,
    q2,
    direction: str = "D(u) -> D(v)",
) -> EmbeddingVerdict:
    """Embedding of ``D(Q, L^p1, l^q1_u)`` into ``D(Q, L^p2, l^q2_v)`` on one covering.

    Holds iff ``p1 <= p2`` and ``(v_i / u_i) |det T_i|^{1/p1 - 1/p2}`` lies in
    ``l^{q2 (q1/q2)'}``.
    """
    cite = "same-covering decomposition embedding"
    for e in (p1, p2, q1, q2):
        _check_exponent(e)
    if p1 > p2:
        return _p_fail(direction, cite)
    pd = float(recip(p1) - recip(p2))
    return _verdict((v / u) * det_t**pd, norm_exponent(q1, q2), direction, cite)


def decomposition_embedding(
    item: int,
    weight_ratio: AsymptoticSequence,
    det_t: AsymptoticSequence,
    det_s: AsymptoticSequence,
    p1,
    p2,
    q1,
    q2,
    direction: str = "",
) -> EmbeddingVerdict:
    """Two-covering criteria with ``P`` almost subordinate to ``Q``.

    ``item=1``: ``D(Q, L^p1, l^q1_u) -> D(P, L^p2, l^q2_v)`` with
    ``weight_ratio = v_{j_i} / u_i`` and exponent ``t``.
    ``item=2``: ``D(P, L^p1, l^q1_v) -> D(Q, L^p2, l^q2_u)`` with
    ``weight_ratio = u_i / v_{j_i}`` and exponent ``t~``.
    In both cases ``det_t`` belongs to ``Q`` and ``det_s`` to the chosen
    ``P``-partner.
    """
    cite = "coarse-to-fine decomposition embedding" if item == 1 else "fine-to-coarse decomposition embedding"
    t, tt = t_exponents(p1, p2, q1, q2)
    if p1 > p2:
        return _p_fail(direction, cite, t, tt)
    pd = float(recip(p1) - recip(p2))
    e = t if item == 1 else tt
    seq = weight_ratio * det_t**e * det_s ** (pd - e)
    return _verdict(seq, norm_exponent(q1, q2), direction, cite, t, tt)


# ---------------------------------------------------------------------------
# lattice asymptotics of catalog maps
# ---------------------------------------------------------------------------


def lattice_weight(spec: str, d: int, delta: float = 1.0) -> AsymptoticSequence:
    """``w(delta k)`` for a catalog map as a profile in ``n = |k|``.

    ``ln``: ``e^{d delta n} (delta n)^{1-d}``; ``alpha:<a>``:
    ``(1 + delta n)^{d (beta - 1)}`` with ``beta = 1/(1 - a)``; identity: 1.
    """
    if spec == "identity":
        return geometric(lattice_dim=d)
    if spec == "ln":
        return geometric(d * delta / math.log(2.0), 1.0 - d, lattice_dim=d)
    if spec.startswith("alpha:"):
        alpha = float(spec.split(":", 1)[1])
        beta = 1.0 / (1.0 - alpha)
        return geometric(0.0, d * (beta - 1.0), lattice_dim=d)
    raise ValueError(f"no closed-form lattice asymptotics for {spec!r}")


def lattice_power_weight(spec: str, d: int, s: float, delta: float = 1.0) -> AsymptoticSequence:
    """``kappa(Phi^{-1}(delta k))`` for ``kappa = (1 + |xi|)^s`` as a profile in ``|k|``."""
    if spec == "identity":
        return geometric(0.0, s, lattice_dim=d)
    if spec == "ln":
        return geometric(s * delta / math.log(2.0), 0.0, lattice_dim=d)
    if spec.startswith("alpha:"):
        alpha = float(spec.split(":", 1)[1])
        return geometric(0.0, s / (1.0 - alpha), lattice_dim=d)
    raise ValueError(f"no closed-form lattice asymptotics for {spec!r}")


def warped_same_map(
    w: AsymptoticSequence,
    kappa1: AsymptoticSequence,
    kappa2: AsymptoticSequence,
    p1,
    p2,
    q1,
    q2,
) -> EmbeddingVerdict:
    """``Co(Phi, L^{p1,q1}_{kappa1}) -> Co(Phi, L^{p2,q2}_{kappa2})``.

    Uses ``u = kappa1 w^{1/q1 - 1/2}``, ``v = kappa2 w^{1/q2 - 1/2}`` and
    ``|det T_k| = w(delta k)``, so the test sequence is
    ``w^{p_delta - q_delta} kappa2 / kappa1`` with
    ``p_delta = 1/p1 - 1/p2`` and ``q_delta = 1/q1 - 1/q2``.
    """
    u = kappa1 * w ** (float(recip(q1)) - 0.5)
    v = kappa2 * w ** (float(recip(q2)) - 0.5)
    verdict = embed_same_covering(u, v, w, p1, p2, q1, q2, "Co(kappa1) -> Co(kappa2)")
    verdict.citation = "same-warping coorbit embedding"
    return verdict


# ---------------------------------------------------------------------------
# Besov comparisons
# ---------------------------------------------------------------------------


def besov_gamma(rho: RadialComponent, d: int, n_terms: int = 64) -> AsymptoticSequence:
    """``gamma_j = rho_*'(rho(2^j)) (2^j / rho(2^j))^{d-1}``.

    Closed forms (up to constants): ``2^{jd} (1+j)^{1-d}`` for the
    logarithmic family and ``2^{j alpha d}`` for the power family; other
    components are sampled.
    """
    fam = rho.family
    if fam[0] == "ln":
        return geometric(d, 1.0 - d)
    if fam[0] == "alpha":
        return geometric(fam[1] * d, 0.0)
    x = np.exp2(np.arange(n_terms, dtype=float))
    r = rho.value(x)
    return AsymptoticSequence.raw(rho.inverse_derivative(r) * (x / r) ** (d - 1))


def besov_vs_warped(
    rho: RadialComponent,
    s1: float,
    s2: float,
    p1,
    p2,
    q1,
    q2,
    d: int,
    curvature_limit: float = 10.0,
) -> dict:
    """Both embeddings between ``Co(Phi_rho, L^{p1,q1}_kappa)`` and ``B^{p2,q2}_{s2}``.

    ``kappa = (1 + |xi|)^{s1}``.  Returns ``{"coorbit_into_besov": verdict,
    "besov_into_coorbit": verdict, "curvature": probe}``.

    Raises
    ------
    ValueError
        If the curvature ratio ``|rho_* rho_*'' / rho_*'^2|`` exceeds
        ``curvature_limit`` on the probe window.
    """
    for e in (p1, p2, q1, q2):
        _check_exponent(e)
    gam_probe = np.linspace(5.0, 30.0, 26)
    curv = float(np.max(besov_curvature_ratio(rho, gam_probe)))
    if not curv <= curvature_limit:
        raise ValueError(f"curvature ratio {curv:.3g} exceeds {curvature_limit}")
    gamma = besov_gamma(rho, d)
    a1, a2, b1 = float(recip(p1)), float(recip(p2)), float(recip(q1))
    cite = "radial coorbit vs Besov criterion"

    _, tt = t_exponents(p1, p2, q1, q2)
    if p1 > p2:
        into_b = _p_fail("Co -> B", cite, None, tt)
    else:
        seq = geometric(s2 - s1 + d * tt) * gamma ** (a1 - a2 - tt + 0.5 - b1)
        into_b = _verdict(seq, norm_exponent(q1, q2), "Co -> B", cite, None, tt)

    t, _ = t_exponents(p2, p1, q2, q1)
    if p2 > p1:
        into_c = _p_fail("B -> Co", cite, t, None)
    else:
        seq = geometric(s1 - s2 + d * t) * gamma ** (a2 - a1 - t + b1 - 0.5)
        into_c = _verdict(seq, norm_exponent(q2, q1), "B -> Co", cite, t, None)
    return {"coorbit_into_besov": into_b, "besov_into_coorbit": into_c, "curvature": curv}


def besov_identification_exponent(s: float, q, d: int) -> float:
    """Exponent ``s + d (1/2 - 1/q)`` of the Besov identification weight."""
    return s + d * (0.5 - float(recip(q)))


def besov_ln_relation(d: int, p, q, s: float = 0.0) -> dict:
    """Relation between ``B^{p,q}_s`` and ``Co(Phi_ln, L^{p,q}_{kappa^{(s,q)}})``.

    Returns the two verdicts and a summary ``relation`` in ``{"equal",
    "besov_into_coorbit", "coorbit_into_besov", "neither"}``.
    """
    rho = family_component("ln")
    res = besov_vs_warped(rho, besov_identification_exponent(s, q, d), s, p, p, q, q, d)
    a = res["coorbit_into_besov"].embeds
    b = res["besov_into_coorbit"].embeds
    rel = "equal" if a and b else "coorbit_into_besov" if a else "besov_into_coorbit" if b else "neither"
    return {"relation": rel, **res, "citation": "ln-warped Besov identification"}


# ---------------------------------------------------------------------------
# warped vs warped
# ---------------------------------------------------------------------------


@dataclass
class EqualityReport:
    """Directional Lipschitz bounds of ``Phi_2 o Phi_1^{-1}`` and its inverse."""

    verdict: str
    sup_12: float
    sup_21: float
    bounded_12: bool
    bounded_21: bool
    method: str
    levels: dict
    subordinate: list

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "sup_12": self.sup_12,
            "sup_21": self.sup_21,
            "bounded_12": self.bounded_12,
            "bounded_21": self.bounded_21,
            "method": self.method,
            "levels": self.levels,
            "almost_subordinate": self.subordinate,
            "citation": "warped coorbit equality criterion",
            "note": HYPOTHESES_NOTE,
        }


def _stable(levels: Sequence[float], tol: float) -> bool:
    return levels[-1] <= (1.0 + tol) * levels[-2]


def _radial_grid(R: float) -> np.ndarray:
    return np.concatenate([np.linspace(0.0, 10.0, 2001), np.geomspace(10.0, R, 2001)[1:]])


def equality_check(map1: WarpingMap, map2: WarpingMap, grid=None, growth_tol: float = 1e-2) -> EqualityReport:
    """Test ``sup ||D Phi_{3-j}(Phi_j^{-1}(tau)) D Phi_j^{-1}(tau)|| < inf`` for ``j = 1, 2``.

    Suprema are taken over nested windows; a direction counts as bounded when
    the supremum stops growing (relative increase below ``growth_tol``
    between the last two windows).  For two radial maps the derivative ratios
    ``rho_2'/rho_1'`` and ``rho_1'/rho_2'`` are used on radii up to ``1e6``;
    bounded ``rho_2' <= C rho_1'`` makes the covering of ``Phi_1`` almost
    subordinate to that of ``Phi_2``.
    """
    if map1.dim != map2.dim:
        raise ValueError("maps must have the same dimension")
    rc1, rc2 = map1.radial_component, map2.radial_component
    if rc1 is not None and rc2 is not None and grid is None:
        radii = [1e1, 1e2, 1e3, 1e4, 1e5, 1e6]
        lv12, lv21 = [], []
        for R in radii:
            xi = _radial_grid(R)
            r = rc2.derivative(xi) / rc1.derivative(xi)
            lv12.append(float(np.max(r)))
            lv21.append(float(np.max(1.0 / r)))
        method = "radial derivative ratio"
        levels = {"radii": radii, "sup_12": lv12, "sup_21": lv21}
    else:
        d = map1.dim
        radii = [2.0, 4.0, 8.0, 16.0, 32.0] if grid is None else list(grid)
        if d == 1:
            dirs = np.array([[1.0], [-1.0]])
        else:
            rng = np.random.default_rng(0)
            dirs = np.concatenate([np.eye(d), -np.eye(d), rng.normal(size=(64, d))])
            dirs /= np.linalg.norm(dirs, axis=1)[:, None]

        def sup_dir(ma, mb, R):
            ts = np.linspace(0.0, R, 257)[1:]
            tau = (ts[:, None, None] * dirs[None, :, :]).reshape(-1, d)
            tau = np.concatenate([np.zeros((1, d)), tau])
            xi = ma.inverse(tau)
            a_inv = ma.jacobian_inverse(tau)
            db = mb.jacobian_forward(xi)
            return float(np.max(np.linalg.norm(db @ a_inv, ord=2, axis=(-2, -1))))

        lv12 = [sup_dir(map1, map2, R) for R in radii]
        lv21 = [sup_dir(map2, map1, R) for R in radii]
        method = "jacobian product"
        levels = {"radii": radii, "sup_12": lv12, "sup_21": lv21}
    b12, b21 = _stable(lv12, growth_tol), _stable(lv21, growth_tol)
    sub = []
    if b12:
        sub.append("Q(map1) almost subordinate to Q(map2)")
    if b21:
        sub.append("Q(map2) almost subordinate to Q(map1)")
    verdict = "equal" if b12 and b21 else "not equal"
    return EqualityReport(verdict, lv12[-1], lv21[-1], b12, b21, method, levels, sub)


@dataclass
class Sandwich:
    """``Co(Phi_1, kappa_{-t~}) -> Co(Phi_2, kappa) -> Co(Phi_1, kappa_t)``."""

    lower_weight: Callable
    upper_weight: Callable
    t: float
    t_tilde: float
    chain: list
    probes: dict

    def to_dict(self) -> dict:
        return {"t": self.t, "t_tilde": self.t_tilde, "chain": self.chain, "probes": self.probes, "citation": "radial warping sandwich", "note": HYPOTHESES_NOTE}


class HypothesisError(ValueError):
    """A probed hypothesis of a criterion failed."""


def radial_embedding(
    rho1: RadialComponent,
    rho2: RadialComponent,
    kappa: Callable,
    p,
    q,
    d: int,
    scaling_factors: Sequence[float] = (2.0, 4.0, 8.0),
    scaling_limit: float = 1e3,
) -> Sandwich:
    """Sandwich ``rho_2`` coorbit spaces between two ``rho_1`` coorbit spaces.

    The weights are ``kappa_{rho1,rho2,t} = kappa [w_2 o Phi_2 / w_1 o Phi_1]^{1/q - 1/2 - t}``
    with ``t`` and ``-t~``.

    Raises
    ------
    HypothesisError
        If ``rho_2' <= C rho_1'`` is not bounded on the probe radii, or the
        two-point scaling bound of ``rho_1'`` exceeds ``scaling_limit``.
    """
    m1, m2 = _radial(rho1, d), _radial(rho2, d)
    rep = equality_check(m1, m2)
    if not rep.bounded_12:
        raise HypothesisError("rho_2' / rho_1' is unbounded on the probe radii")
    scal = {str(a): scaling_bound(rho1, a, _radial_grid(1e4)) for a in scaling_factors}
    if max(scal.values()) > scaling_limit:
        raise HypothesisError(f"scaling bound of rho_1' exceeds {scaling_limit}")
    t, tt = t_exponents(p, p, q, q)
    b = float(recip(q))

    def factory(tv):
        e = b - 0.5 - tv

        def kap(xi):
            xi = as_points(xi, d)
            ratio = m2.weight(m2.forward(xi)) / m1.weight(m1.forward(xi))
            return np.asarray(kappa(xi), dtype=float).reshape(-1) * ratio**e

        return kap

    chain = [f"Co({rho1.name}, kappa_-t~)", f"Co({rho2.name}, kappa)", f"Co({rho1.name}, kappa_t)"]
    probes = {"derivative_ratio_sup": rep.sup_12, "scaling_bounds": scal}
    return Sandwich(factory(-tt), factory(t), t, tt, chain, probes)


def _radial(rho: RadialComponent, d: int) -> WarpingMap:
    from .radial_warping import radial_map

    return radial_map(rho, d)


# ---------------------------------------------------------------------------
# identifications
# ---------------------------------------------------------------------------


@dataclass
class SpaceDescriptor:
    """A function space named by kind and parameters.

    ``kind`` is one of ``"warped"``, ``"besov"``, ``"alpha_mod"`` or
    ``"mixed"``.  Warped descriptors carry the map id and a weight evaluator.
    """

    kind: str
    params: dict
    map_spec: Optional[str] = None
    kappa: Optional[Callable] = field(default=None, compare=False)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, **self.params}
        if self.map_spec is not None:
            out["map"] = self.map_spec
        return out


def alpha_weight_exponent(alpha: float, s: float, q, d: int) -> float:
    """``gamma = s - d alpha (1/q - 1/2)``."""
    return s - d * alpha * (float(recip(q)) - 0.5)


def identify_alpha_modulation(alpha: float, s: float, p, q, d: int, verify: bool = False) -> SpaceDescriptor:
    """Warped form of the alpha-modulation space ``M^{s,alpha}_{p,q}``.

    The map is the radial power warping and the weight is
    ``(1 + |xi|)^{s - d alpha (1/q - 1/2)}``.  With ``verify=True`` the
    induced covering is checked with the alpha-covering test.
    """
    _check_exponent(p)
    _check_exponent(q)
    if not alpha < 1:
        raise ValueError(f"alpha-modulation identification needs alpha < 1, got {alpha}")
    gamma = alpha_weight_exponent(alpha, s, q, d)
    spec = f"alpha:{alpha:g}"

    def kappa(xi):
        return (1.0 + np.linalg.norm(as_points(xi, d), axis=-1)) ** gamma

    params = {"alpha": alpha, "s": s, "p": p, "q": q, "d": d, "kappa_exponent": gamma, "citation": "alpha-modulation identification"}
    if verify:
        from .covering import alpha_verify, induced_covering

        rep = alpha_verify(induced_covering(catalog_map(spec, d), 1.0, 0.5 * math.sqrt(d) + 0.3), alpha)
        params["alpha_verify"] = rep.to_dict()
    return SpaceDescriptor("warped", params, spec, kappa)


def mixed_weight(s: Sequence[float], q) -> Callable:
    """``kappa(xi) = prod_i (1 + |xi_i|)^{s_i + 1/2 - 1/q}``."""
    e = np.asarray(s, dtype=float) + 0.5 - float(recip(q))

    def kappa(xi):
        pts = as_points(xi, len(e))
        return np.prod((1.0 + np.abs(pts)) ** e, axis=-1)

    return kappa


def identify_mixed_smoothness(s: Sequence[float], p, q) -> SpaceDescriptor:
    """Warped form of the dominating mixed smoothness space ``S^s_{p,q} B``.

    The map is the tensor product of ``d`` one-dimensional logarithmic
    warpings and the weight is :func:`mixed_weight`.
    """
    _check_exponent(p)
    _check_exponent(q)
    s = [float(v) for v in s]
    spec = "tensor:" + ",".join(["ln"] * len(s))
    params = {"s": s, "p": p, "q": q, "d": len(s), "citation": "mixed smoothness identification"}
    return SpaceDescriptor("warped", params, spec, mixed_weight(s, q))


def _mixed_term(ell: np.ndarray, p, N: float) -> np.ndarray:
    inf_comp = np.where(ell >= 2, np.exp2(ell - 2.0), 0.0)
    return np.exp2(ell.sum(axis=-1) * float(recip(p))) * (1.0 + np.linalg.norm(inf_comp, axis=-1)) ** (-N)


def mixed_weight_summability(N: float, p, d: int, n_max: int = 40) -> dict:
    """Partial sums of ``w_l = 2^{|l|_1 / p} [inf over B_{d,l*} of (1 + |xi|)]^{-N}``.

    The infimum over the neighbour box is ``1 + |m|`` with
    ``m_i = 2^{l_i - 2}`` for ``l_i >= 2`` and ``0`` otherwise.  Terms are
    summed over shells ``|l|_inf = n`` for ``n <= n_max``; the tail is
    extrapolated geometrically from the last shell ratio.
    """
    _check_exponent(p)
    cond = N > d * float(recip(p))
    shells = []
    for n in range(n_max + 1):
        ax = np.arange(n + 1)
        grid = np.stack(np.meshgrid(*([ax] * d), indexing="ij"), axis=-1).reshape(-1, d)
        grid = grid[grid.max(axis=1) == n]
        shells.append(float(np.sum(_mixed_term(grid.astype(float), p, N))))
    partial = float(np.sum(shells))
    ratio = shells[-1] / shells[-2] if shells[-2] > 0 else 0.0
    if ratio < 1.0:
        tail = shells[-1] * ratio / (1.0 - ratio)
    else:
        tail = INF
    report = {
        "N": N,
        "p": p,
        "d": d,
        "n_max": n_max,
        "partial_sum": partial,
        "last_shell": shells[-1],
        "shell_ratio": ratio,
        "tail_estimate": tail,
        "tail_fraction": tail / partial if partial > 0 else INF,
        "citation": "mixed smoothness summable weight",
    }
    if not cond:
        report["verdict"] = "condition-violated"
    else:
        report["verdict"] = "finite" if math.isfinite(tail) else "undetermined"
    return report


def ln_alpha_weight(s: float, q, d: int) -> Callable:
    """``(1 + |xi|)^{s + d(1/2 - 1/q)} (1 + ln(1 + |xi|))^{(1 - d)(1/2 - 1/q)}``."""
    e = 0.5 - float(recip(q))

    def kappa(xi):
        r = np.linalg.norm(as_points(xi, d), axis=-1)
        return (1.0 + r) ** (s + d * e) * (1.0 + np.log1p(r)) ** ((1 - d) * e)

    return kappa


def besov_alpha_sandwich(alpha: float, s: float, p, q, d: int, eps: float) -> dict:
    """Embedding chains around the logarithmic warping.

    Returns the Besov chain
    ``Co(ln, kappa^{(s+eps,q)}) -> B^{p,q}_s -> Co(ln, kappa^{(s-eps,q)})`` and
    the alpha-modulation chain
    ``M^{s+T~,alpha} -> Co(ln, kappa^{(1,s,d,q)}) -> M^{s-T,alpha}`` with
    ``T = t d (1 - alpha)`` and ``T~ = t~ d (1 - alpha)``, both non-negative.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not alpha < 1:
        raise ValueError("alpha must be < 1")
    t, tt = t_exponents(p, p, q, q)
    T = t * d * (1.0 - alpha)
    Tt = tt * d * (1.0 - alpha)
    rel = besov_ln_relation(d, p, q, s)["relation"]
    besov_chain = [
        {"kind": "warped", "map": "ln", "kappa_exponent": besov_identification_exponent(s + eps, q, d)},
        {"kind": "besov", "s": s, "p": p, "q": q, "d": d},
        {"kind": "warped", "map": "ln", "kappa_exponent": besov_identification_exponent(s - eps, q, d)},
    ]
    alpha_chain = [
        {"kind": "alpha_mod", "alpha": alpha, "s": s + Tt, "p": p, "q": q, "d": d},
        {"kind": "warped", "map": "ln", "kappa": "ln-alpha weight", "s": s, "q": q, "d": d},
        {"kind": "alpha_mod", "alpha": alpha, "s": s - T, "p": p, "q": q, "d": d},
    ]
    return {
        "t": t,
        "t_tilde": tt,
        "T": T,
        "T_tilde": Tt,
        "besov_chain": besov_chain,
        "besov_collapses": rel == "equal",
        "besov_relation": rel,
        "alpha_chain": alpha_chain,
        "alpha_collapses": T == 0 and Tt == 0,
        "weight": ln_alpha_weight(s, q, d),
        "citation": "Besov and alpha-modulation sandwich",
        "note": HYPOTHESES_NOTE,
    }
