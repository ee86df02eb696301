"""Frequency coverings induced by warping maps and their comparison.

The central object is the ``(delta, r)``-fine covering induced by a warping
map ``Phi``,

    Q_k = Phi^{-1}(delta * B_r(k)),   k in Z^d,

with affine normalization ``Q_k = T_k Q'_k + b_k`` where ``T_k = A(delta k)``
and ``b_k = Phi^{-1}(delta k)``.  Because ``Phi`` is a bijection, two elements
meet exactly when the warped balls meet, so neighbour sets are computed
exactly in warped coordinates.

Also provided are the structured (ellipsoid) variant, dyadic Besov annuli,
product coverings, cross-covering intersection counts, tightness radii,
element measures and the alpha-covering check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import qmc

from .warping_core import WarpingMap, as_points

Index = tuple

#: Gauss-Legendre order used for element and cube measures.
QUAD_ORDER = 24

#: Quasi-Monte-Carlo sample count per element for approximate intersections.
QMC_POINTS = 4096


# ---------------------------------------------------------------------------
# index windows and small helpers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IndexWindow:
    """Finite index set with the rule that generated it."""

    indices: tuple
    rule: str

    def __iter__(self):
        return iter(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def to_dict(self) -> dict:
        return {"rule": self.rule, "size": len(self.indices)}


def lattice_ball(d: int, radius: float, center=None, strict: bool = False) -> np.ndarray:
    """Integer points ``k`` with ``|k - center| <= radius`` (``<`` when ``strict``)."""
    c = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    lo = np.floor(c - radius).astype(int)
    hi = np.ceil(c + radius).astype(int)
    axes = [np.arange(lo[i], hi[i] + 1) for i in range(d)]
    pts = np.array(list(itertools.product(*axes)), dtype=int).reshape(-1, d)
    dist = np.linalg.norm(pts - c, axis=1)
    keep = dist < radius if strict else dist <= radius + 1e-12
    return pts[keep]


def norm_window(d: int, radius: float) -> IndexWindow:
    """All ``k`` in ``Z^d`` with ``|k| <= radius``."""
    pts = lattice_ball(d, radius)
    return IndexWindow(tuple(tuple(int(v) for v in p) for p in pts), f"|k| <= {radius:g}")


def _gauss(order: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def ball_rule(d: int, radius: float, order: int = QUAD_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes and weights on the ball ``B_radius(0)``.

    Spherical substitution with Gauss-Legendre factors for ``d <= 3``,
    scrambled-free Sobol points for higher dimensions.
    """
    if d == 1:
        x, w = _gauss(order, -radius, radius)
        return x[:, None], w
    if d == 2:
        s, ws = _gauss(order, 0.0, radius)
        a, wa = _gauss(order, 0.0, 2 * np.pi)
        S, A = np.meshgrid(s, a, indexing="ij")
        W = np.outer(ws * s, wa)
        pts = np.stack([S * np.cos(A), S * np.sin(A)], axis=-1)
        return pts.reshape(-1, 2), W.ravel()
    if d == 3:
        s, ws = _gauss(order, 0.0, radius)
        p, wp = _gauss(order, 0.0, np.pi)
        a, wa = _gauss(order, 0.0, 2 * np.pi)
        S, P, A = np.meshgrid(s, p, a, indexing="ij")
        W = (ws * s**2)[:, None, None] * (wp * np.sin(p))[None, :, None] * wa[None, None, :]
        pts = np.stack([S * np.sin(P) * np.cos(A), S * np.sin(P) * np.sin(A), S * np.cos(P)], axis=-1)
        return pts.reshape(-1, 3), W.ravel()
    u = _ball_samples(d, 2 ** 14) * radius
    vol = math.pi ** (d / 2) / math.gamma(d / 2 + 1) * radius**d
    return u, np.full(u.shape[0], vol / u.shape[0])


def _ball_samples(d: int, n: int) -> np.ndarray:
    """Deterministic Sobol points of the unit cube kept inside the unit ball."""
    m = int(np.ceil(np.log2(max(n, 2))))
    pts = qmc.Sobol(d, scramble=False).random_base2(m + 1 + d // 2)
    pts = 2.0 * pts - 1.0
    pts = pts[np.linalg.norm(pts, axis=1) < 1.0]
    return pts[:n]


def _unit_directions(d: int, n: int) -> np.ndarray:
    if d == 1:
        return np.array([[-1.0], [1.0]])
    if d == 2:
        a = np.linspace(0, 2 * np.pi, n, endpoint=False)
        return np.stack([np.cos(a), np.sin(a)], axis=1)
    g = qmc.Sobol(d, scramble=False).random_base2(int(np.ceil(np.log2(n))) + 1)[1:]
    g = 2.0 * g - 1.0
    g = g[np.linalg.norm(g, axis=1) > 1e-3]
    return g / np.linalg.norm(g, axis=1)[:, None]


def _is_radial(map_: WarpingMap) -> bool:
    return map_.radial_component is not None or map_.name == "identity"


def _radial_inverse(map_: WarpingMap) -> Callable[[np.ndarray], np.ndarray]:
    if map_.radial_component is not None:
        return map_.radial_component.inverse
    return lambda t: np.asarray(t, dtype=float)


def _radial_forward(map_: WarpingMap) -> Callable[[np.ndarray], np.ndarray]:
    if map_.radial_component is not None:
        return map_.radial_component.value
    return lambda t: np.asarray(t, dtype=float)


def same_map(m1: WarpingMap, m2: WarpingMap) -> bool:
    """True when both handles describe the same warping."""
    if m1 is m2:
        return True
    if m1.dim != m2.dim or m1.name != m2.name:
        return False
    r1, r2 = m1.radial_component, m2.radial_component
    if (r1 is None) != (r2 is None):
        return False
    if r1 is not None and r1.describe() != r2.describe():
        return False
    return len(m1.parts) == len(m2.parts) and all(same_map(a, b) for a, b in zip(m1.parts, m2.parts))


# ---------------------------------------------------------------------------
# coverings
# ---------------------------------------------------------------------------


class FrequencyCovering:
    """Common interface of all coverings.

    Subclasses implement :meth:`neighbors`, :meth:`contains`,
    :meth:`indices_containing`, :meth:`sample_element` and
    :meth:`default_window`.
    """

    kind = "custom"
    dim = 1

    def neighbors(self, k: Index, n: int = 1) -> set:
        raise NotImplementedError

    def contains(self, k: Index, xi) -> np.ndarray:
        raise NotImplementedError

    def indices_containing(self, xi) -> list:
        raise NotImplementedError

    def sample_element(self, k: Index, n: int = QMC_POINTS) -> np.ndarray:
        raise NotImplementedError

    def default_window(self) -> IndexWindow:
        raise NotImplementedError

    def norm_range(self, k: Index) -> Optional[tuple[float, float]]:
        """Exact range of ``|xi|`` over the element when available."""
        return None

    def describe(self) -> dict:
        return {"kind": self.kind, "dim": self.dim}


class InducedCovering(FrequencyCovering):
    """``(delta, r)``-fine covering ``Q_k = Phi^{-1}(delta B_r(k))``."""

    kind = "induced"

    def __init__(self, map_: WarpingMap, delta: float, r: float):
        d = map_.dim
        if not delta > 0:
            raise ValueError("delta must be positive")
        bound = math.sqrt(d) / 2.0
        if not r > bound:
            raise ValueError(
                f"r = {r} does not exceed sqrt(d)/2 = {bound:.6g}; the balls B_r(k), k in Z^{d}, "
                "then miss the half-integer corner points and do not cover R^d"
            )
        self.map = map_
        self.dim = d
        self.delta = float(delta)
        self.r = float(r)
        self._offsets = tuple(tuple(int(v) for v in p) for p in lattice_ball(d, 2.0 * self.r, strict=True))
        self._sums: dict[int, frozenset] = {0: frozenset({(0,) * d}), 1: frozenset(self._offsets)}

    def describe(self) -> dict:
        return {"kind": self.kind, "dim": self.dim, "delta": self.delta, "r": self.r, "map": self.map.name}

    # geometry in warped coordinates
    def center(self, k) -> np.ndarray:
        """``b_k = Phi^{-1}(delta k)``."""
        return self.map.inverse(self.delta * np.asarray(k, dtype=float))

    def normalization(self, k) -> np.ndarray:
        """``T_k = A(delta k)``."""
        return self.map.jacobian_inverse(self.delta * np.asarray(k, dtype=float))

    def warped_distance(self, k, xi) -> np.ndarray:
        pts = as_points(xi, self.dim)
        return np.linalg.norm(self.map.forward(pts) / self.delta - np.asarray(k, dtype=float), axis=-1)

    def contains(self, k, xi) -> np.ndarray:
        return self.warped_distance(k, xi) < self.r

    def indices_containing(self, xi) -> list:
        pts = as_points(xi, self.dim).reshape(-1, self.dim)
        y = self.map.forward(pts) / self.delta
        out = []
        for row in y:
            cand = lattice_ball(self.dim, self.r, center=row, strict=True)
            out.append({tuple(int(v) for v in c) for c in cand})
        return out

    def sample_element(self, k, n: int = QMC_POINTS) -> np.ndarray:
        u = _ball_samples(self.dim, n)
        return self.map.inverse(self.delta * (np.asarray(k, dtype=float) + self.r * u))

    def norm_range(self, k) -> Optional[tuple[float, float]]:
        if not _is_radial(self.map):
            return None
        inv = _radial_inverse(self.map)
        t = self.delta * float(np.linalg.norm(k))
        lo = max(0.0, t - self.delta * self.r)
        hi = t + self.delta * self.r
        return float(inv(np.array(lo))), float(inv(np.array(hi)))

    # neighbour algebra
    def offset_sum(self, n: int) -> frozenset:
        """``S_n``: ``n``-fold Minkowski sum of the intersecting offsets."""
        if n < 0:
            raise ValueError("n must be non-negative")
        while max(self._sums) < n:
            m = max(self._sums)
            prev = self._sums[m]
            self._sums[m + 1] = frozenset(
                tuple(a + b for a, b in zip(p, o)) for p in prev for o in self._offsets
            )
        return self._sums[n]

    def neighbors(self, k, n: int = 1) -> set:
        k = tuple(int(v) for v in np.atleast_1d(k))
        return {tuple(a + b for a, b in zip(k, o)) for o in self.offset_sum(n)}

    def intersects(self, k, l) -> bool:
        return float(np.linalg.norm(np.subtract(k, l))) < 2.0 * self.r

    def default_window(self, radius: Optional[float] = None) -> IndexWindow:
        if radius is None:
            radius = 64 if self.dim <= 2 else 8
        return norm_window(self.dim, radius)


def induced_covering(map_: WarpingMap, delta: float, r: float) -> InducedCovering:
    """The ``(delta, r)``-fine covering induced by ``map_``.

    Raises
    ------
    ValueError
        If ``r <= sqrt(d) / 2``: the balls then fail to cover ``R^d``.
    """
    return InducedCovering(map_, delta, r)


def corner_probe(d: int, r: float, delta: float = 1.0) -> dict:
    """Nearest-lattice distance at the corner ``delta (1/2, ..., 1/2)``.

    The corner is the point of ``delta R^d`` farthest from ``delta Z^d``; it
    lies in some ``delta B_r(k)`` iff the distance is below ``delta r``.
    """
    y = np.full(d, 0.5)
    cand = np.array(list(itertools.product(*[(0, 1)] * d)), dtype=float)
    dist = float(np.min(np.linalg.norm(cand - y, axis=1)))
    return {"point": (delta * y).tolist(), "nearest_distance": delta * dist, "covered": dist < r}


class StructuredCovering(FrequencyCovering):
    """Ellipsoids ``S_k = Phi^{-1}(delta k) + A(delta k) B_r(0)``."""

    kind = "structured"

    def __init__(self, map_: WarpingMap, delta: float, r: float):
        d = map_.dim
        v_e1 = float(map_.control.radial(1.0, d))
        v_half = float(map_.control.radial(0.5, d))
        theta0 = 1.0 / (2 * d * v_e1)
        if not 0 < r < theta0 / 4:
            raise ValueError(f"r = {r} must lie in (0, theta0/4) = (0, {theta0 / 4:.6g})")
        dmax = min(1.0, 4 * r) / (2 * math.sqrt(d) * v_half)
        if not 0 < delta < dmax:
            raise ValueError(f"delta = {delta} must lie in (0, {dmax:.6g})")
        self.map = map_
        self.dim = d
        self.delta = float(delta)
        self.r = float(r)
        self.theta0 = theta0
        self.search = int(math.ceil(4 * r / delta)) + 1

    def describe(self) -> dict:
        return {"kind": self.kind, "dim": self.dim, "delta": self.delta, "r": self.r, "map": self.map.name}

    def center(self, k) -> np.ndarray:
        return self.map.inverse(self.delta * np.asarray(k, dtype=float))

    def normalization(self, k) -> np.ndarray:
        return self.map.jacobian_inverse(self.delta * np.asarray(k, dtype=float))

    def contains(self, k, xi) -> np.ndarray:
        pts = as_points(xi, self.dim)
        T = self.normalization(k)
        u = np.linalg.solve(T, (pts - self.center(k)).reshape(-1, self.dim).T).T
        return (np.linalg.norm(u, axis=-1) < self.r).reshape(pts.shape[:-1])

    def _candidates(self, y: np.ndarray) -> np.ndarray:
        base = np.round(y).astype(int)
        rng = range(-self.search, self.search + 1)
        offs = np.array(list(itertools.product(rng, repeat=self.dim)), dtype=int)
        return base[None, :] + offs

    def indices_containing(self, xi) -> list:
        pts = as_points(xi, self.dim).reshape(-1, self.dim)
        y = self.map.forward(pts) / self.delta
        out = []
        for p, row in zip(pts, y):
            cand = self._candidates(row)
            centers = self.map.inverse(self.delta * cand.astype(float))
            T = self.map.jacobian_inverse(self.delta * cand.astype(float))
            u = np.linalg.solve(T, (p[None, :] - centers)[..., None])[..., 0]
            hit = np.linalg.norm(u, axis=1) < self.r
            out.append({tuple(int(v) for v in c) for c in cand[hit]})
        return out

    def sample_element(self, k, n: int = QMC_POINTS) -> np.ndarray:
        u = _ball_samples(self.dim, n) * self.r
        return self.center(k) + u @ self.normalization(k).T

    def intersects(self, k, l) -> bool:
        return ellipsoids_intersect(
            self.center(k), self.r * self.normalization(k), self.center(l), self.r * self.normalization(l)
        )

    def neighbors(self, k, n: int = 1) -> set:
        k = tuple(int(v) for v in np.atleast_1d(k))
        current = {k}
        for _ in range(n):
            nxt = set()
            for c in current:
                rng = range(-2 * self.search, 2 * self.search + 1)
                for o in itertools.product(rng, repeat=self.dim):
                    l = tuple(a + b for a, b in zip(c, o))
                    if l in nxt:
                        continue
                    if self.intersects(c, l):
                        nxt.add(l)
            current = current | nxt
        return current

    def default_window(self, radius: Optional[float] = None) -> IndexWindow:
        return norm_window(self.dim, 64 if radius is None else radius)

    def coverage_check(self, probes) -> dict:
        """Every probe must lie in some element; returns the first miss."""
        pts = as_points(probes, self.dim).reshape(-1, self.dim)
        hits = self.indices_containing(pts)
        missing = [i for i, h in enumerate(hits) if not h]
        return {
            "probes": int(pts.shape[0]),
            "uncovered": len(missing),
            "witness": pts[missing[0]].tolist() if missing else None,
            "pass": not missing,
        }


def structured_covering(map_: WarpingMap, delta: float, r: float) -> StructuredCovering:
    """Structured ellipsoid covering; validates the admissible ``(delta, r)`` range."""
    return StructuredCovering(map_, delta, r)


def ellipsoids_intersect(c1, M1, c2, M2) -> bool:
    """Exact test for open ellipsoids ``c_i + M_i B_1(0)``.

    With ``S_i = M_i M_i^T`` the ellipsoids meet iff
    ``max_{lambda in (0,1)} D^T (S_1/lambda + S_2/(1-lambda))^{-1} D < 1`` for
    ``D = c_2 - c_1``; the objective is concave in ``lambda``.
    """
    c1 = np.atleast_1d(np.asarray(c1, dtype=float))
    c2 = np.atleast_1d(np.asarray(c2, dtype=float))
    M1 = np.atleast_2d(np.asarray(M1, dtype=float))
    M2 = np.atleast_2d(np.asarray(M2, dtype=float))
    D = c2 - c1
    if not np.any(D):
        return True
    S1, S2 = M1 @ M1.T, M2 @ M2.T

    def neg(lam):
        K = S1 / lam + S2 / (1.0 - lam)
        return -float(D @ np.linalg.solve(K, D))

    res = minimize_scalar(neg, bounds=(1e-12, 1 - 1e-12), method="bounded", options={"xatol": 1e-12})
    return -res.fun < 1.0


class BesovCovering(FrequencyCovering):
    """Dyadic annuli ``B_0 = {|xi| < 2}``, ``B_j = {2^(j-1) < |xi| < 2^(j+1)}``."""

    kind = "besov"

    def __init__(self, d: int = 1):
        self.dim = int(d)

    def describe(self) -> dict:
        return {"kind": self.kind, "dim": self.dim}

    @staticmethod
    def bounds(j: int) -> tuple[float, float]:
        j = int(j)
        return (0.0, 2.0) if j == 0 else (2.0 ** (j - 1), 2.0 ** (j + 1))

    def norm_range(self, k) -> tuple[float, float]:
        return self.bounds(int(np.atleast_1d(k)[0]))

    def contains(self, k, xi) -> np.ndarray:
        lo, hi = self.norm_range(k)
        r = np.linalg.norm(as_points(xi, self.dim), axis=-1)
        return (r < hi) & ((r > lo) if lo > 0 else True)

    def indices_containing(self, xi) -> list:
        r = np.linalg.norm(as_points(xi, self.dim).reshape(-1, self.dim), axis=-1)
        out = []
        for v in r:
            s = set()
            if v < 2.0:
                s.add((0,))
            if v > 0:
                j0 = int(np.floor(np.log2(v)))
                for j in (j0, j0 + 1):
                    if j >= 1:
                        lo, hi = self.bounds(j)
                        if lo < v < hi:
                            s.add((j,))
            out.append(s)
        return out

    def sample_element(self, k, n: int = QMC_POINTS) -> np.ndarray:
        lo, hi = self.norm_range(k)
        u = _ball_samples(self.dim, 4 * n) * hi
        r = np.linalg.norm(u, axis=1)
        return u[(r > lo) & (r < hi)][:n]

    def neighbors(self, k, n: int = 1) -> set:
        j = int(np.atleast_1d(k)[0])
        return {(l,) for l in range(max(0, j - n), j + n + 1)}

    def intervals(self, k) -> list[tuple[float, float]]:
        """Element as a union of open intervals (``d = 1`` only)."""
        if self.dim != 1:
            raise ValueError("intervals are defined for one-dimensional annuli")
        lo, hi = self.norm_range(k)
        return [(-hi, hi)] if lo == 0 else [(-hi, -lo), (lo, hi)]

    def default_window(self, jmax: int = 20) -> IndexWindow:
        return IndexWindow(tuple((j,) for j in range(jmax + 1)), f"j <= {jmax}")


def besov_covering(d: int = 1) -> BesovCovering:
    return BesovCovering(d)


class ProductCovering(FrequencyCovering):
    """Cartesian product of coverings; indices are concatenated tuples."""

    kind = "product"

    def __init__(self, parts: Sequence[FrequencyCovering]):
        parts = list(parts)
        if not parts:
            raise ValueError("product_covering needs at least one factor")
        self.parts = parts
        self.dim = sum(p.dim for p in parts)
        self._cuts = np.cumsum([0] + [p.dim for p in parts])
        if all(isinstance(p, BesovCovering) and p.dim == 1 for p in parts):
            self.kind = "besov_product"

    def describe(self) -> dict:
        return {"kind": self.kind, "dim": self.dim, "parts": [p.describe() for p in self.parts]}

    def _split_index(self, k) -> list[tuple]:
        k = tuple(int(v) for v in np.atleast_1d(k))
        return [k[self._cuts[i] : self._cuts[i + 1]] for i in range(len(self.parts))]

    def _split_points(self, xi) -> list[np.ndarray]:
        pts = as_points(xi, self.dim)
        return [pts[..., self._cuts[i] : self._cuts[i + 1]] for i in range(len(self.parts))]

    def contains(self, k, xi) -> np.ndarray:
        out = None
        for part, ki, xs in zip(self.parts, self._split_index(k), self._split_points(xi)):
            c = part.contains(ki, xs)
            out = c if out is None else (out & c)
        return out

    def indices_containing(self, xi) -> list:
        per = [p.indices_containing(x) for p, x in zip(self.parts, self._split_points(xi))]
        out = []
        for sets in zip(*per):
            out.append({sum(combo, ()) for combo in itertools.product(*sets)})
        return out

    def sample_element(self, k, n: int = QMC_POINTS) -> np.ndarray:
        m = max(2, int(np.ceil(n ** (1.0 / len(self.parts)))))
        samples = [p.sample_element(ki, m) for p, ki in zip(self.parts, self._split_index(k))]
        grids = np.meshgrid(*[np.arange(s.shape[0]) for s in samples], indexing="ij")
        return np.concatenate([s[g.ravel()] for s, g in zip(samples, grids)], axis=1)

    def neighbors(self, k, n: int = 1) -> set:
        per = [p.neighbors(ki, n) for p, ki in zip(self.parts, self._split_index(k))]
        return {sum(combo, ()) for combo in itertools.product(*per)}

    def boxes(self, k) -> list[list[tuple[float, float]]]:
        """Element as a union of boxes (one-dimensional factors with intervals)."""
        per = [p.intervals(ki) for p, ki in zip(self.parts, self._split_index(k))]
        return [list(c) for c in itertools.product(*per)]

    def intersects_bruteforce(self, k, l) -> bool:
        """Box-by-box intersection test, independent of the factorization."""
        for b1 in self.boxes(k):
            for b2 in self.boxes(l):
                if all(lo1 < hi2 and lo2 < hi1 for (lo1, hi1), (lo2, hi2) in zip(b1, b2)):
                    return True
        return False

    def default_window(self, jmax: int = 8) -> IndexWindow:
        wins = [p.default_window(jmax) for p in self.parts]
        return IndexWindow(tuple(sum(c, ()) for c in itertools.product(*wins)), f"product, each factor <= {jmax}")


def product_covering(parts: Sequence[FrequencyCovering]) -> FrequencyCovering:
    """Product of coverings; a single factor is returned unchanged."""
    parts = list(parts)
    if not parts:
        raise ValueError("product_covering needs at least one factor")
    if len(parts) == 1:
        return parts[0]
    return ProductCovering(parts)


def _interval_intervals_meet(a: tuple[float, float], b: tuple[float, float]) -> bool:
    return a[0] < b[1] and b[0] < a[1]


class IntervalCovering(FrequencyCovering):
    """One-dimensional covering given by an explicit list of open intervals."""

    kind = "custom"

    def __init__(self, intervals: dict):
        self.dim = 1
        self._iv = {tuple(np.atleast_1d(k)): tuple(v) for k, v in intervals.items()}

    def intervals(self, k):
        return [self._iv[tuple(np.atleast_1d(k))]]

    def contains(self, k, xi):
        lo, hi = self._iv[tuple(np.atleast_1d(k))]
        x = as_points(xi, 1)[..., 0]
        return (x > lo) & (x < hi)

    def neighbors(self, k, n: int = 1) -> set:
        current = {tuple(np.atleast_1d(k))}
        for _ in range(n):
            current = current | {
                l for l, iv in self._iv.items() if any(_interval_intervals_meet(iv, self._iv[c]) for c in current)
            }
        return current


# ---------------------------------------------------------------------------
# neighbour diagnostics and cross intersections
# ---------------------------------------------------------------------------


def neighbors(cov: FrequencyCovering, k, n: int = 1) -> set:
    """Exact cluster set ``k^{n*}``."""
    return cov.neighbors(k, n)


@dataclass
class NeighborReport:
    """Neighbour cluster sizes ``|k^{n*}|`` with reference curves."""

    index: tuple
    counts: list
    reference_power: list
    reference_linear: list

    def to_dict(self) -> dict:
        return {
            "index": list(self.index),
            "counts": self.counts,
            "reference_(1+2n)^d": self.reference_power,
            "reference_1+2n": self.reference_linear,
        }


def neighbor_growth_diagnostic(cov: FrequencyCovering, k, n_max: int) -> NeighborReport:
    """``|k^{n*}|`` for ``n = 0..n_max`` against ``(1+2n)^d`` and ``1+2n``."""
    k = tuple(int(v) for v in np.atleast_1d(k))
    counts = [len(cov.neighbors(k, n)) for n in range(n_max + 1)]
    return NeighborReport(
        k,
        counts,
        [(1 + 2 * n) ** cov.dim for n in range(n_max + 1)],
        [1 + 2 * n for n in range(n_max + 1)],
    )


@dataclass
class CrossReport:
    """Intersection counts between two coverings.

    ``counts_b[j]`` is ``|{k : Q_k meets P_j}|`` for ``j`` in the window of
    ``B`` and ``counts_a[k]`` is ``|{j : P_j meets Q_k}|`` for ``k`` in the
    window of ``A``.
    """

    counts_a: dict
    counts_b: dict
    exact: bool
    method: str
    details: dict = field(default_factory=dict)

    @property
    def sup_a(self) -> int:
        return max(self.counts_a.values()) if self.counts_a else 0

    @property
    def sup_b(self) -> int:
        return max(self.counts_b.values()) if self.counts_b else 0

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "exact": self.exact,
            "sup_a": self.sup_a,
            "sup_b": self.sup_b,
            "counts_a": {",".join(map(str, k)): v for k, v in self.counts_a.items()},
            "counts_b": {",".join(map(str, k)): v for k, v in self.counts_b.items()},
            **self.details,
        }


def _annulus_lattice(cov: InducedCovering, lo_norm: float, hi_norm: float) -> np.ndarray:
    """Lattice indices whose element norm range meets the open interval ``(lo, hi)``.

    For radial maps the norm range of ``Q_k`` is
    ``(rho_*(max(0, delta|k| - delta r)), rho_*(delta|k| + delta r))``, so the
    condition is ``delta|k| in (rho(lo) - delta r, rho(hi) + delta r)``.
    """
    fwd = _radial_forward(cov.map)
    d, dr = cov.delta, cov.delta * cov.r
    t_lo = float(fwd(np.array(lo_norm))) - dr
    t_hi = float(fwd(np.array(hi_norm))) + dr
    pts = lattice_ball(cov.dim, t_hi / d)
    t = d * np.linalg.norm(pts, axis=1)
    keep = t < t_hi
    if lo_norm > 0:
        keep &= t > t_lo
    return pts[keep]


def cross_intersections(
    cov_a: FrequencyCovering,
    cov_b: FrequencyCovering,
    window_a: Optional[Iterable] = None,
    window_b: Optional[Iterable] = None,
    qmc_points: int = QMC_POINTS,
) -> CrossReport:
    """Intersection counts in both directions.

    Dispatch:

    * two induced coverings of the same map: exact ball test in warped
      coordinates, ``|delta_1 k - delta_2 l| < delta_1 r_1 + delta_2 r_2``;
    * a radial induced covering against annuli: exact comparison of norm
      intervals, counting over all of ``Z^d``;
    * anything else: quasi-Monte-Carlo membership sampling, flagged
      approximate.
    """
    win_a = list(window_a) if window_a is not None else list(cov_a.default_window())
    win_b = list(window_b) if window_b is not None else list(cov_b.default_window())
    win_a = [tuple(int(v) for v in np.atleast_1d(k)) for k in win_a]
    win_b = [tuple(int(v) for v in np.atleast_1d(k)) for k in win_b]

    if isinstance(cov_a, InducedCovering) and isinstance(cov_b, InducedCovering) and same_map(cov_a.map, cov_b.map):
        da, db = cov_a.delta, cov_b.delta
        reach = da * cov_a.r + db * cov_b.r

        def partners(k, d_self, d_other):
            c = d_self * np.asarray(k, dtype=float) / d_other
            pts = lattice_ball(cov_a.dim, reach / d_other, center=c, strict=True)
            return len(pts)

        return CrossReport(
            {k: partners(k, da, db) for k in win_a},
            {j: partners(j, db, da) for j in win_b},
            True,
            "warped-ball",
        )

    pair = None
    if isinstance(cov_a, InducedCovering) and isinstance(cov_b, BesovCovering) and _is_radial(cov_a.map):
        pair = (cov_a, cov_b, False)
    elif isinstance(cov_b, InducedCovering) and isinstance(cov_a, BesovCovering) and _is_radial(cov_b.map):
        pair = (cov_b, cov_a, True)
    if pair is not None:
        ind, bes, swapped = pair
        win_ind, win_bes = (win_b, win_a) if swapped else (win_a, win_b)

        def besov_partners(k):
            lo, hi = ind.norm_range(k)
            j_hi = int(np.floor(np.log2(hi))) + 1 if hi > 0 else 0
            count = 0
            for j in range(0, j_hi + 2):
                blo, bhi = bes.bounds(j)
                if lo < bhi and blo < hi:
                    count += 1
            return count

        ind_counts = {k: besov_partners(k) for k in win_ind}
        bes_counts = {j: len(_annulus_lattice(ind, *bes.bounds(j[0]))) for j in win_bes}
        counts_a, counts_b = (bes_counts, ind_counts) if swapped else (ind_counts, bes_counts)
        return CrossReport(counts_a, counts_b, True, "norm-interval")

    # quasi-Monte-Carlo fallback
    hits_a: dict = {k: set() for k in win_a}
    hits_b: dict = {j: set() for j in win_b}
    for k in win_a:
        for s in cov_b.indices_containing(cov_a.sample_element(k, qmc_points)):
            hits_a[k] |= s
    for j in win_b:
        for s in cov_a.indices_containing(cov_b.sample_element(j, qmc_points)):
            hits_b[j] |= s
    for k, js in list(hits_a.items()):
        for j in js:
            if j in hits_b:
                hits_b[j].add(k)
    for j, ks in list(hits_b.items()):
        for k in ks:
            if k in hits_a:
                hits_a[k].add(j)
    return CrossReport(
        {k: len(v) for k, v in hits_a.items()},
        {j: len(v) for j, v in hits_b.items()},
        False,
        "qmc",
        {"qmc_points": qmc_points, "confidence": "approximate: sampled membership"},
    )


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------


def element_measures(cov: InducedCovering, ks, order: int = QUAD_ORDER) -> np.ndarray:
    """``mu(Q_k) = integral of w over delta B_r(k)`` for each ``k``."""
    ks = np.asarray(list(ks), dtype=float).reshape(-1, cov.dim)
    nodes, weights = ball_rule(cov.dim, cov.delta * cov.r, order)
    out = np.empty(ks.shape[0])
    chunk = max(1, 200000 // nodes.shape[0])
    for s in range(0, ks.shape[0], chunk):
        c = cov.delta * ks[s : s + chunk]
        pts = c[:, None, :] + nodes[None, :, :]
        w = cov.map.weight(pts.reshape(-1, cov.dim)).reshape(pts.shape[:2])
        out[s : s + chunk] = w @ weights
    return out


def element_measure(cov: InducedCovering, k, check: bool = False):
    """``mu(Q_k)`` by Gauss-Legendre quadrature of ``w`` over the warped ball.

    With ``check=True`` a pair ``(value, converged)`` is returned, where
    ``converged`` compares against the half-order rule at relative ``1e-6``.
    """
    if not isinstance(cov, InducedCovering):
        raise TypeError("element measures are defined for induced coverings")
    val = float(element_measures(cov, [k])[0])
    if not check:
        return val
    coarse = float(element_measures(cov, [k], QUAD_ORDER // 2)[0])
    return val, abs(val - coarse) <= 1e-6 * abs(val)


def cube_measures(map_: WarpingMap, delta: float, ks, order: int = QUAD_ORDER) -> np.ndarray:
    """``mu(M_k)`` for the warped cubes ``M_k = Phi^{-1}(delta (k + [-1/2, 1/2)^d))``.

    One-dimensional maps use the exact antiderivative ``Phi^{-1}``; tensor
    maps multiply factor measures; otherwise tensor Gauss-Legendre.
    """
    d = map_.dim
    ks = np.asarray(list(ks), dtype=float).reshape(-1, d)
    if d == 1:
        hi = map_.inverse(delta * (ks + 0.5))[:, 0]
        lo = map_.inverse(delta * (ks - 0.5))[:, 0]
        return hi - lo
    if map_.parts:
        out = np.ones(ks.shape[0])
        c = 0
        for p in map_.parts:
            out *= cube_measures(p, delta, ks[:, c : c + p.dim], order)
            c += p.dim
        return out
    x, w = _gauss(order, -0.5 * delta, 0.5 * delta)
    nodes = np.array(list(itertools.product(x, repeat=d)))
    weights = np.array([np.prod(v) for v in itertools.product(w, repeat=d)])
    out = np.empty(ks.shape[0])
    chunk = max(1, 200000 // nodes.shape[0])
    for s in range(0, ks.shape[0], chunk):
        pts = delta * ks[s : s + chunk, None, :] + nodes[None]
        vals = map_.weight(pts.reshape(-1, d)).reshape(pts.shape[:2])
        out[s : s + chunk] = vals @ weights
    return out


# ---------------------------------------------------------------------------
# tightness, outer radius and alpha coverings
# ---------------------------------------------------------------------------


@dataclass
class TightnessReport:
    radius: float
    theta0: float
    theta: float
    verified: bool
    witness: Optional[dict]
    samples: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _sample_indices(cov: InducedCovering, n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    ks = rng.integers(-40, 41, size=(n, cov.dim))
    ks[0] = 0
    return ks


def tightness_radius(cov: InducedCovering, ks=None, n_dir: int = 64) -> TightnessReport:
    """Inner radius ``theta/4`` with ``theta = min(delta r, 1/(2 d v0(e_1)))``.

    Membership ``b_k + T_k B_{theta/4}(0) in Q_k`` is verified through the
    forward map on sphere and interior samples for the indices ``ks``.
    """
    d = cov.dim
    theta0 = 1.0 / (2 * d * float(cov.map.control.radial(1.0, d)))
    theta = min(cov.delta * cov.r, theta0)
    rad = theta / 4.0
    ks = _sample_indices(cov, 16) if ks is None else np.asarray(list(ks), dtype=float).reshape(-1, d)
    dirs = _unit_directions(d, n_dir)
    pts_unit = np.concatenate([dirs, 0.5 * dirs, np.zeros((1, d))])
    witness = None
    for k in ks:
        T = cov.normalization(k)
        p = cov.center(k) + rad * pts_unit @ T.T
        dist = cov.warped_distance(k, p)
        if np.any(dist >= cov.r):
            i = int(np.argmax(dist))
            witness = {"k": np.asarray(k).tolist(), "point": p[i].tolist(), "warped_distance": float(dist[i])}
            break
    return TightnessReport(rad, theta0, theta, witness is None, witness, int(len(ks) * pts_unit.shape[0]))


def outer_radius_check(cov: InducedCovering, ks=None, n_dir: int = 64) -> dict:
    """Check ``Q'_k in closed ball of radius delta r v0(delta r e_1)``.

    Boundary preimages ``Phi^{-1}(delta (k + r u))`` are normalized by
    ``T_k^{-1}(. - b_k)`` and their largest norm is compared with the bound.
    """
    d = cov.dim
    dr = cov.delta * cov.r
    bound = dr * float(cov.map.control.radial(dr, d))
    ks = _sample_indices(cov, 16) if ks is None else np.asarray(list(ks), dtype=float).reshape(-1, d)
    dirs = _unit_directions(d, n_dir)
    worst = 0.0
    for k in ks:
        eta = cov.map.inverse(cov.delta * (np.asarray(k, dtype=float) + cov.r * dirs))
        T = cov.normalization(k)
        q = np.linalg.solve(T, (eta - cov.center(k)).T).T
        worst = max(worst, float(np.max(np.linalg.norm(q, axis=1))))
    return {"bound": bound, "max_normalized_radius": worst, "pass": worst <= bound}


@dataclass
class AlphaReport:
    alpha: float
    ratio_band: tuple
    band_ratio: float
    radius_ratio_band: tuple
    window: dict
    passed: bool
    band_limit: float

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "ratio_band": list(self.ratio_band),
            "band_ratio": self.band_ratio,
            "R_over_r_band": list(self.radius_ratio_band),
            "window": self.window,
            "pass": self.passed,
            "band_limit": self.band_limit,
        }


def _norm_extremes(cov: InducedCovering, k) -> tuple[float, float]:
    rng = cov.norm_range(k)
    if rng is not None:
        return rng
    pts = cov.sample_element(k, 512)
    r = np.linalg.norm(pts, axis=1)
    return float(r.min()), float(r.max())


def alpha_verify(cov: InducedCovering, alpha: float, window=None, band_limit: float = 10.0) -> AlphaReport:
    """Check that an induced covering behaves like an ``alpha``-covering.

    The measure ratio ``mu(Q_k) / (1 + |xi|)^(alpha d)`` is evaluated at both
    extremes of ``|xi|`` over ``Q_k``; its band over the window must have
    ``max / min <= band_limit``.  The roundness ratio ``R_Q / r_Q`` is
    ``cond(T_k) * R' / (theta / 4)`` with the outer radius ``R'`` of the
    normalized element.

    Raises
    ------
    ValueError
        If ``alpha > 1``: no alpha-covering of ``R^d`` exists then.
    """
    alpha = float(alpha)
    if alpha > 1:
        raise ValueError(f"alpha = {alpha} > 1: element measures cannot grow faster than the distance to the origin allows")
    d = cov.dim
    win = list(window) if window is not None else list(cov.default_window(200 if d == 1 else None))
    ks = np.asarray(win, dtype=float).reshape(-1, d)
    mu = element_measures(cov, ks)
    ratios = []
    for k, m in zip(ks, mu):
        lo, hi = _norm_extremes(cov, k)
        ratios.append(m / (1.0 + lo) ** (alpha * d))
        ratios.append(m / (1.0 + hi) ** (alpha * d))
    ratios = np.asarray(ratios)
    inner = tightness_radius(cov, ks=ks[:: max(1, len(ks) // 16)])
    dr = cov.delta * cov.r
    outer = dr * float(cov.map.control.radial(dr, d))
    T = cov.map.jacobian_inverse(cov.delta * ks)
    sv = np.linalg.svd(T, compute_uv=False)
    rr = sv[:, 0] / sv[:, -1] * outer / inner.radius
    band = (float(ratios.min()), float(ratios.max()))
    band_ratio = band[1] / band[0]
    passed = bool(band_ratio <= band_limit and np.all(np.isfinite(rr)) and inner.verified)
    return AlphaReport(
        alpha,
        band,
        band_ratio,
        (float(rr.min()), float(rr.max())),
        {"size": len(win), "rule": "|k| <= 200" if window is None and d == 1 else "custom/default"},
        passed,
        band_limit,
    )


def sequence_moderateness(cov: FrequencyCovering, values: Callable[[tuple], float], window) -> float:
    """``max over k in window, l in k* of values(l) / values(k)``."""
    worst = 0.0
    for k in window:
        k = tuple(int(v) for v in np.atleast_1d(k))
        vk = values(k)
        for l in cov.neighbors(k, 1):
            worst = max(worst, values(l) / vk)
    return worst
