"""Bounded admissible partition of unity for an induced covering.

For a mollifier ``zeta >= 0`` with unit mass and support in a small box, the
members

    phi_k(eta) = integral of zeta over Phi(eta) - delta (k + [-1/2, 1/2)^d)

sum to one because the translated cubes tile ``R^d``.  With a tensor
mollifier the cube integral factorizes into differences of a one-dimensional
antiderivative ``Z``, which is tabulated once and interpolated with a cubic
Hermite spline whose slopes are the exact bump values.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline

from .covering import InducedCovering
from .warping_core import as_points

#: Nodes of the antiderivative table on the reference interval [-1, 1].
TABLE_NODES = 4097


def unit_bump(t) -> np.ndarray:
    """``exp(-1 / (1 - t^2))`` on ``(-1, 1)``, zero elsewhere."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


@lru_cache(maxsize=1)
def _reference_table() -> tuple[float, CubicHermiteSpline]:
    """Mass of :func:`unit_bump` and the spline of its normalized antiderivative."""
    nodes = np.linspace(-1.0, 1.0, TABLE_NODES)
    f = lambda t: float(unit_bump(np.array(t)))
    pieces = np.array(
        [quad(f, a, b, epsabs=1e-15, epsrel=1e-13)[0] for a, b in zip(nodes[:-1], nodes[1:])]
    )
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    mass = cum[-1]
    spline = CubicHermiteSpline(nodes, cum / mass, unit_bump(nodes) / mass)
    return mass, spline


def bump_mass() -> float:
    """``integral of exp(-1/(1-t^2))`` over ``(-1, 1)``."""
    return _reference_table()[0]


@dataclass(frozen=True)
class Mollifier:
    """Tensor bump ``zeta(x) = prod_i b(x_i / a) / (a m)`` with unit mass.

    Attributes
    ----------
    dim : int
    half_width : float
        Each factor is supported in ``[-a, a]``; the support lies in the ball of
        radius ``a sqrt(d)``.
    """

    dim: int
    half_width: float

    @property
    def support_radius(self) -> float:
        return self.half_width * math.sqrt(self.dim)

    def factor(self, x) -> np.ndarray:
        a = self.half_width
        return unit_bump(np.asarray(x, dtype=float) / a) / (a * bump_mass())

    def __call__(self, x) -> np.ndarray:
        pts = as_points(x, self.dim)
        return np.prod(self.factor(pts), axis=-1)

    def antiderivative(self, x) -> np.ndarray:
        """``Z(x) = integral of the 1-d factor up to x``; exactly 0 and 1 outside."""
        x = np.asarray(x, dtype=float)
        t = x / self.half_width
        out = np.where(t >= 1.0, 1.0, 0.0)
        inside = np.abs(t) < 1.0
        if np.any(inside):
            out = out.astype(float)
            out[inside] = _reference_table()[1](t[inside])
        return out

    def to_dict(self) -> dict:
        return {"kind": "bump", "dim": self.dim, "half_width": self.half_width, "support_radius": self.support_radius}


class Bapu:
    """Partition of unity ``(phi_k)`` subordinate to an induced covering.

    Parameters
    ----------
    covering : InducedCovering
    theta_param : float, optional
        Support parameter ``vartheta`` with ``0 < vartheta < r - sqrt(d)/2``;
        defaults to 90 % of the upper bound.  The mollifier half-width is
        ``delta vartheta / sqrt(d)`` so that its support lies in
        ``delta B_vartheta(0)``.
    """

    def __init__(self, covering: InducedCovering, theta_param: Optional[float] = None):
        if not isinstance(covering, InducedCovering):
            raise TypeError("the partition of unity is built on an induced covering")
        d = covering.dim
        slack = covering.r - math.sqrt(d) / 2.0
        if theta_param is None:
            theta_param = 0.9 * slack
        if not 0 < theta_param < slack:
            raise ValueError(f"support parameter {theta_param} must lie in (0, r - sqrt(d)/2) = (0, {slack:.6g})")
        self.covering = covering
        self.theta_param = float(theta_param)
        self.mollifier = Mollifier(d, covering.delta * self.theta_param / math.sqrt(d))

    @property
    def dim(self) -> int:
        return self.covering.dim

    @property
    def delta(self) -> float:
        return self.covering.delta

    def describe(self) -> dict:
        return {"covering": self.covering.describe(), "theta_param": self.theta_param, "mollifier": self.mollifier.to_dict()}

    def _factors(self, x: np.ndarray, k: np.ndarray) -> np.ndarray:
        Z = self.mollifier.antiderivative
        u = x - self.delta * k
        # spline rounding can leave differences of order -1e-49 in the tails
        return np.maximum(Z(u + 0.5 * self.delta) - Z(u - 0.5 * self.delta), 0.0)

    def evaluate_warped(self, k, x) -> np.ndarray:
        """``phi_k`` as a function of warped coordinates ``x = Phi(eta)``."""
        x = as_points(x, self.dim)
        return np.prod(self._factors(x, np.asarray(k, dtype=float)), axis=-1)

    def __call__(self, k, eta) -> np.ndarray:
        return self.evaluate_warped(k, self.covering.map.forward(as_points(eta, self.dim)))

    def support_candidates(self, x: np.ndarray) -> np.ndarray:
        """Indices ``k`` whose cube lies within the mollifier reach of ``x``."""
        reach = 0.5 + self.mollifier.half_width / self.delta
        lo = np.ceil(x / self.delta - reach - 1e-12).astype(int)
        hi = np.floor(x / self.delta + reach + 1e-12).astype(int)
        return np.array(list(itertools.product(*[range(l, h + 1) for l, h in zip(lo, hi)])), dtype=int)

    def sum_at(self, eta) -> np.ndarray:
        """``sum_k phi_k(eta)`` over the exact support candidates of each probe."""
        pts = as_points(eta, self.dim).reshape(-1, self.dim)
        x = self.covering.map.forward(pts)
        out = np.empty(x.shape[0])
        for i, row in enumerate(x):
            ks = self.support_candidates(row)
            out[i] = np.sum(np.prod(self._factors(row[None, :], ks.astype(float)), axis=-1))
        return out


def bapu_eval(bapu: Bapu, k, eta) -> np.ndarray:
    """``phi_k(eta)`` via per-axis antiderivative differences."""
    val = bapu(k, eta)
    return val[()] if np.ndim(val) == 0 else val


def partition_defect(bapu: Bapu, probes) -> float:
    """``max |sum_k phi_k(eta) - 1|`` over probe points."""
    return float(np.max(np.abs(bapu.sum_at(probes) - 1.0)))


def support_check(bapu: Bapu, k, samples=None, push: float = 1e-3) -> dict:
    """Assert ``phi_k = 0`` at sampled points outside ``Q_k``.

    Default samples are boundary points of ``Q_k`` pushed outward by ``push``
    in warped coordinates plus far points.
    """
    cov = bapu.covering
    d = cov.dim
    k = np.asarray(np.atleast_1d(k), dtype=float)
    if samples is None:
        if d == 1:
            dirs = np.array([[-1.0], [1.0]])
        else:
            rng = np.random.default_rng(0)
            dirs = rng.normal(size=(256, d))
            dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        radii = np.array([cov.r + push, cov.r + 0.25, cov.r + 1.0, cov.r + 5.0])
        x = cov.delta * (k[None, None, :] + radii[None, :, None] * dirs[:, None, :])
        samples = cov.map.inverse(x.reshape(-1, d))
    pts = as_points(samples, d).reshape(-1, d)
    outside = ~cov.contains(k, pts)
    vals = bapu(k, pts)
    bad = outside & (vals != 0.0)
    idx = np.flatnonzero(bad)
    return {
        "k": k.astype(int).tolist(),
        "samples_outside": int(outside.sum()),
        "violations": int(bad.sum()),
        "witness": pts[idx[0]].tolist() if idx.size else None,
        "pass": idx.size == 0,
    }


def member_support_box(bapu: Bapu, k) -> tuple[np.ndarray, np.ndarray]:
    """Bounding box of ``supp phi_k`` in frequency coordinates."""
    cov = bapu.covering
    d = cov.dim
    half = 0.5 * cov.delta + bapu.mollifier.half_width
    k = np.asarray(np.atleast_1d(k), dtype=float)
    if d == 1:
        edge = np.array([[-half], [half]])
    else:
        s = np.linspace(-half, half, 33)
        faces = []
        for axis in range(d):
            for sign in (-1, 1):
                g = np.array(list(itertools.product(s, repeat=d - 1)))
                faces.append(np.insert(g, axis, sign * half, axis=1))
        edge = np.concatenate(faces)
    pts = cov.map.inverse(cov.delta * k + edge)
    return pts.min(axis=0), pts.max(axis=0)


def fourier_l1_estimate(bapu: Bapu, k, grid_size: Optional[int] = None) -> dict:
    """Discrete ``L^1`` norm of the inverse Fourier transform of ``phi_k``.

    The grid spans four times the support box with ``grid_size`` points per
    axis (``2^14`` in one dimension, ``2^8`` otherwise).
    """
    d = bapu.dim
    n = grid_size or (2 ** 14 if d == 1 else 2 ** 8)
    lo, hi = member_support_box(bapu, k)
    center, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    length = 8.0 * half
    axes = [center[i] - 0.5 * length[i] + length[i] * np.arange(n) / n for i in range(d)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    vals = bapu(k, mesh.reshape(-1, d)).reshape((n,) * d)
    edge = max(float(np.max(np.abs(np.take(vals, [0, -1], axis=i)))) for i in range(d))
    dxi = np.prod(length / n)
    spatial = np.fft.ifftn(vals) * (n**d) * dxi
    dy = np.prod(1.0 / length)
    l1 = float(np.sum(np.abs(spatial)) * dy)
    return {"k": np.atleast_1d(k).tolist(), "l1": l1, "grid": n, "aliasing_warning": edge > 1e-12}
