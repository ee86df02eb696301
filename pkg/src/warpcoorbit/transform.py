"""Sampled warped voice transform.

Atoms are defined on the frequency side,

    g_omega(xi) = w(Phi(omega))^{-1/2} theta(Phi(xi) - Phi(omega)),

and the voice transform is ``V f(y, omega) = F^{-1}[conj(g_omega) f^](y)``.
Signals live on a centered uniform frequency grid with ``N`` points per
axis and extent ``L``; the implied time grid has spacing ``1/L``.  The
frequency parameter ``omega`` runs over the lattice ``Phi^{-1}(delta k)`` and
the integral over ``omega`` is replaced by the measures of the warped cubes
``M_k``.  The transform is a tight frame with bound ``||theta||_2^2``, so
analysis followed by synthesis reproduces the signal up to the Riemann sum
error in warped coordinates.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .bapu import Bapu, bump_mass, unit_bump
from .covering import cube_measures
from .warping_core import WarpingMap, as_points


# ---------------------------------------------------------------------------
# prototypes and signals
# ---------------------------------------------------------------------------


@lru_cache(maxsize=1)
def _bump_square_mass() -> float:
    return quad(lambda t: float(unit_bump(np.array(t)) ** 2), -1.0, 1.0, epsabs=1e-15)[0]


@dataclass(frozen=True)
class Prototype:
    """Tensor bump ``theta(x) = scale * prod_i b(x_i / a)``.

    Use :func:`bump_prototype` to build the two presets.
    """

    dim: int
    half_width: float
    scale: float
    preset: str = "custom"

    @property
    def support_radius(self) -> float:
        return self.half_width * math.sqrt(self.dim)

    @property
    def l2_norm(self) -> float:
        return self.scale * (self.half_width * _bump_square_mass()) ** (self.dim / 2.0)

    def __call__(self, x) -> np.ndarray:
        pts = as_points(x, self.dim)
        return self.scale * np.prod(unit_bump(pts / self.half_width), axis=-1)

    def to_dict(self) -> dict:
        return {"preset": self.preset, "dim": self.dim, "half_width": self.half_width, "l2_norm": self.l2_norm}


def bump_prototype(d: int, half_width: float, preset: str = "bump") -> Prototype:
    """Bump prototype with ``preset`` ``"bump"`` (unit mass) or ``"unit-l2"``."""
    a = float(half_width)
    if not a > 0:
        raise ValueError("half width must be positive")
    if preset == "bump":
        scale = 1.0 / (a * bump_mass()) ** d
    elif preset == "unit-l2":
        scale = 1.0 / (a * _bump_square_mass()) ** (d / 2.0)
    else:
        raise ValueError(f"unknown prototype preset {preset!r}")
    return Prototype(int(d), a, scale, preset)


def prototype_from_bapu(bapu: Bapu) -> Prototype:
    """The prototype equal to the partition's mollifier."""
    m = bapu.mollifier
    return bump_prototype(m.dim, m.half_width, "bump")


@dataclass
class SampledSignal:
    """Frequency samples ``f^`` on the centered grid ``(m - N/2) L / N``."""

    dim: int
    n: int
    length: float
    fhat: np.ndarray
    label: str = "signal"

    def __post_init__(self):
        self.fhat = np.asarray(self.fhat, dtype=complex)
        if self.n % 2:
            raise ValueError("grid size must be even")
        if self.fhat.shape != (self.n,) * self.dim:
            raise ValueError(f"expected samples of shape {(self.n,) * self.dim}, got {self.fhat.shape}")

    @property
    def dxi(self) -> float:
        return self.length / self.n

    @property
    def dy(self) -> float:
        return 1.0 / self.length

    def frequency_axis(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.dxi

    def time_axis(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.dy

    def frequency_points(self) -> np.ndarray:
        ax = self.frequency_axis()
        return np.stack(np.meshgrid(*([ax] * self.dim), indexing="ij"), axis=-1)

    def norm(self) -> float:
        """``||f||_2`` by Plancherel on the frequency grid."""
        return float(np.sqrt(np.sum(np.abs(self.fhat) ** 2) * self.dxi**self.dim))

    def boundary_energy(self) -> float:
        """Fraction of energy in the outermost grid layer (truncation proxy)."""
        tot = np.sum(np.abs(self.fhat) ** 2)
        if tot == 0:
            return 0.0
        edge = 0.0
        for ax in range(self.dim):
            edge += np.sum(np.abs(np.take(self.fhat, [0, -1], axis=ax)) ** 2)
        return float(edge / tot)

    def time_samples(self) -> np.ndarray:
        return to_time(self.fhat, self.dxi)

    def scaled(self, c: complex) -> "SampledSignal":
        return SampledSignal(self.dim, self.n, self.length, c * self.fhat, self.label)

    def to_header(self) -> dict:
        return {"d": self.dim, "N": self.n, "L": self.length, "dtype": "complex128", "byteorder": "little"}


def to_time(h: np.ndarray, dxi: float) -> np.ndarray:
    """``V(y_m) = dxi^d sum_n h_n exp(2 pi i y_m xi_n)`` on the centered grids."""
    d = h.ndim
    n = h.shape[0]
    axes = tuple(range(d))
    return np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(h, axes=axes), axes=axes), axes=axes) * (n * dxi) ** d


def to_freq(v: np.ndarray, dy: float) -> np.ndarray:
    """Inverse of :func:`to_time`: ``dy^d sum_m v_m exp(-2 pi i y_m xi_n)``."""
    d = v.ndim
    axes = tuple(range(d))
    return np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(v, axes=axes), axes=axes), axes=axes) * dy**d


def gaussian_signal(d: int, n: int, length: float, center=0.0, width: float = 1.0, shift=0.0, label: str = "gaussian") -> SampledSignal:
    """``f^(xi) = exp(-|xi - c|^2 / (2 s^2)) exp(-2 pi i <y0, xi>)``."""
    sig = SampledSignal(d, n, length, np.zeros((n,) * d, dtype=complex), label)
    xi = sig.frequency_points()
    c = np.broadcast_to(np.asarray(center, dtype=float), (d,))
    y0 = np.broadcast_to(np.asarray(shift, dtype=float), (d,))
    g = np.exp(-np.sum((xi - c) ** 2, axis=-1) / (2.0 * width**2))
    sig.fhat = g * np.exp(-2j * np.pi * (xi @ y0))
    return sig


def random_bandlimited(d: int, n: int, length: float, band: float, seed: int, n_bumps: int = 4, width: float = 0.5) -> SampledSignal:
    """Sum of Gaussian wave packets with seeded centers in ``[-band, band]^d``."""
    rng = np.random.default_rng(seed)
    sig = SampledSignal(d, n, length, np.zeros((n,) * d, dtype=complex), f"random-{seed}")
    xi = sig.frequency_points()
    acc = np.zeros((n,) * d, dtype=complex)
    for _ in range(n_bumps):
        c = rng.uniform(-band, band, d)
        y0 = rng.uniform(-0.25, 0.25, d) * length / 8.0
        amp = rng.normal() + 1j * rng.normal()
        s = width * rng.uniform(0.5, 1.5)
        acc += amp * np.exp(-np.sum((xi - c) ** 2, axis=-1) / (2 * s**2)) * np.exp(-2j * np.pi * (xi @ y0))
    sig.fhat = acc
    return sig


def write_signal(path, signal: SampledSignal) -> None:
    """Binary format: one JSON header line, then raw little-endian complex128."""
    path = Path(path)
    with path.open("wb") as fh:
        fh.write((json.dumps(signal.to_header()) + "\n").encode())
        fh.write(np.ascontiguousarray(signal.fhat, dtype="<c16").tobytes())


def read_signal(path) -> SampledSignal:
    """Read the format produced by :func:`write_signal`."""
    raw = Path(path).read_bytes()
    nl = raw.index(b"\n")
    header = json.loads(raw[:nl].decode())
    d, n, L = int(header["d"]), int(header["N"]), float(header["L"])
    data = np.frombuffer(raw[nl + 1 :], dtype="<c16")
    if data.size != n**d:
        raise ValueError(f"signal payload has {data.size} samples, header announces {n ** d}")
    return SampledSignal(d, n, L, data.reshape((n,) * d).astype(complex), Path(path).stem)


# ---------------------------------------------------------------------------
# atoms and analysis
# ---------------------------------------------------------------------------


def atom_freq(map_: WarpingMap, theta: Prototype, omega, xi) -> np.ndarray:
    """``g_omega(xi) = w(Phi(omega))^{-1/2} theta(Phi(xi) - Phi(omega))``.

    Parameters
    ----------
    omega : array_like
        A single frequency parameter.
    xi : array_like
        Frequency points of shape ``(..., d)``; points outside the domain
        give zero.
    """
    d = map_.dim
    xi = as_points(xi, d)
    tau = map_.forward(as_points(omega, d).reshape(1, d))[0]
    return _atom_from_warped(map_, theta, tau, map_.forward(xi), xi)


def _atom_from_warped(map_, theta, tau, x, xi=None) -> np.ndarray:
    w = float(map_.weight(tau.reshape(1, -1))[0])
    vals = theta(x - tau) / math.sqrt(w)
    if xi is not None and not map_.domain.is_full_space:
        vals = np.where(map_.domain.contains(xi), vals, 0.0)
    return vals


@dataclass
class WarpedCoefficients:
    """Voice transform samples ``V(y, omega_k)`` for ``k`` in a window."""

    ks: np.ndarray
    omega: np.ndarray
    values: np.ndarray
    mu: np.ndarray
    delta: float
    dim: int
    n: int
    length: float
    flags: dict = field(default_factory=dict)

    @property
    def dy(self) -> float:
        return 1.0 / self.length

    def time_axis(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.dy

    def slice_energy(self) -> np.ndarray:
        """``integral |V(y, omega_k)|^2 dy`` per channel."""
        axes = tuple(range(1, self.values.ndim))
        return np.sum(np.abs(self.values) ** 2, axis=axes) * self.dy**self.dim


def _warped_points(signal: SampledSignal, map_: WarpingMap) -> tuple[np.ndarray, np.ndarray]:
    xi = signal.frequency_points()
    return xi, map_.forward(xi.reshape(-1, signal.dim)).reshape(xi.shape)


def auto_window(signal: SampledSignal, map_: WarpingMap, theta: Prototype, delta: float, rel: float = 1e-12) -> np.ndarray:
    """Lattice indices whose atoms can meet the effective spectral support.

    The support is where ``|f^| > rel * max |f^|``; an index is kept when
    ``delta k`` lies within the prototype box of some warped support point.
    """
    return support_window(signal, map_, theta.half_width, delta, rel)


def support_window(signal: SampledSignal, map_: WarpingMap, reach: float, delta: float, rel: float = 1e-12) -> np.ndarray:
    """Indices ``k`` with ``delta k`` within ``reach`` (per axis) of a warped support point."""
    d = signal.dim
    mag = np.abs(signal.fhat)
    if mag.max() == 0:
        return np.zeros((0, d), dtype=int)
    _, x = _warped_points(signal, map_)
    pts = x[mag > rel * mag.max()].reshape(-1, d)
    lo_all = np.floor((pts - reach) / delta).astype(int)
    hi_all = np.ceil((pts + reach) / delta).astype(int)
    if d == 1:
        return np.arange(lo_all.min(), hi_all.max() + 1)[:, None]
    base = np.unique(np.round(pts / delta).astype(int), axis=0)
    m = int(math.ceil(reach / delta)) + 1
    offsets = np.array(list(np.ndindex(*([2 * m + 1] * d)))) - m
    cells = np.unique((base[:, None, :] + offsets[None, :, :]).reshape(-1, d), axis=0)
    return cells


def analyze(
    signal: SampledSignal,
    map_: WarpingMap,
    theta: Prototype,
    delta: float,
    window=None,
    workers: int = 1,
) -> WarpedCoefficients:
    """Voice transform ``V(., omega_k) = F^{-1}[conj(g_k) f^]`` for each ``k``.

    Parameters
    ----------
    signal : SampledSignal
    map_ : WarpingMap
    theta : Prototype
    delta : float
        Lattice spacing in warped coordinates; ``omega_k = Phi^{-1}(delta k)``.
    window : array_like, optional
        Indices ``k``; defaults to :func:`auto_window`.
    workers : int
        Threads used for the independent per-``k`` channels.
    """
    d = signal.dim
    if map_.dim != d:
        raise ValueError("map and signal dimensions differ")
    ks = auto_window(signal, map_, theta, delta) if window is None else np.asarray(window, dtype=int).reshape(-1, d)
    xi, x = _warped_points(signal, map_)
    taus = delta * ks.astype(float)
    omega = map_.inverse(taus) if len(ks) else np.zeros((0, d))
    mu = cube_measures(map_, delta, ks) if len(ks) else np.zeros(0)
    values = np.zeros((len(ks),) + signal.fhat.shape, dtype=complex)
    truncated = []

    def channel(i):
        g = _atom_from_warped(map_, theta, taus[i], x, xi)
        values[i] = to_time(np.conj(g) * signal.fhat, signal.dxi)
        edge = max(float(np.max(np.abs(np.take(g, [0, -1], axis=a)))) for a in range(d))
        if edge > 1e-10 * max(float(np.max(np.abs(g))), 1e-300):
            truncated.append(int(i))

    if workers > 1 and len(ks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(channel, range(len(ks))))
    else:
        for i in range(len(ks)):
            channel(i)
    flags = {"window_size": int(len(ks)), "atoms_truncated": len(truncated), "boundary_energy": signal.boundary_energy()}
    return WarpedCoefficients(ks, omega, values, mu, float(delta), d, signal.n, signal.length, flags)


def parseval_defect(
    signal: SampledSignal,
    map_: WarpingMap,
    theta: Prototype,
    delta: float,
    window=None,
    coeffs: Optional[WarpedCoefficients] = None,
) -> dict:
    """Relative tight-frame defect ``|sum_k mu_k ||V_k||^2 - ||theta||^2 ||f||^2| / (||theta||^2 ||f||^2)``."""
    fn = signal.norm()
    if fn == 0:
        return {"defect": 0.0, "window_size": 0, "captured": 1.0}
    if coeffs is None:
        coeffs = analyze(signal, map_, theta, delta, window)
    target = theta.l2_norm**2 * fn**2
    energy = float(np.sum(coeffs.mu * coeffs.slice_energy()))
    return {
        "defect": abs(energy - target) / target,
        "energy": energy,
        "target": target,
        "window_size": coeffs.flags["window_size"],
        "atoms_truncated": coeffs.flags["atoms_truncated"],
        "boundary_energy": coeffs.flags["boundary_energy"],
    }


def synthesize(
    coeffs: WarpedCoefficients,
    map_: WarpingMap,
    theta: Prototype,
    original: Optional[SampledSignal] = None,
) -> tuple[SampledSignal, Optional[float]]:
    """Tight-frame inversion ``||theta||^{-2} sum_k mu_k F[V_k] g_k``.

    Returns the reconstruction and, when ``original`` is given, the relative
    ``L^2`` error.
    """
    d, n, L = coeffs.dim, coeffs.n, coeffs.length
    out = SampledSignal(d, n, L, np.zeros((n,) * d, dtype=complex), "synthesis")
    xi, x = _warped_points(out, map_)
    acc = np.zeros((n,) * d, dtype=complex)
    for i in range(len(coeffs.ks)):
        tau = coeffs.delta * coeffs.ks[i].astype(float)
        g = _atom_from_warped(map_, theta, tau, x, xi)
        acc += coeffs.mu[i] * g * to_freq(coeffs.values[i], coeffs.dy)
    out.fhat = acc / theta.l2_norm**2
    err = None
    if original is not None:
        ref = original.norm()
        diff = SampledSignal(d, n, L, out.fhat - original.fhat).norm()
        err = diff / ref if ref > 0 else diff
    return out, err


def coorbit_norm(coeffs: WarpedCoefficients, p: float, q: float, kappa: Optional[Callable] = None) -> float:
    """Discrete mixed norm ``|| (kappa(omega_k) ||V(., omega_k)||_p)_k ||`` in weighted ``l^q``.

    The inner norm uses the uniform time-grid weight ``dy^d``; the outer sum
    carries the cube measures ``mu(M_k)``.  Infinite exponents are maxima.
    """
    if len(coeffs.ks) == 0:
        return 0.0
    axes = tuple(range(1, coeffs.values.ndim))
    a = np.abs(coeffs.values)
    if math.isinf(p):
        inner = np.max(a, axis=axes)
    else:
        inner = (np.sum(a**p, axis=axes) * coeffs.dy**coeffs.dim) ** (1.0 / p)
    kv = np.ones(len(coeffs.ks)) if kappa is None else np.asarray(kappa(coeffs.omega), dtype=float).reshape(-1)
    vals = kv * inner
    if math.isinf(q):
        return float(np.max(vals))
    return float(np.sum(coeffs.mu * vals**q) ** (1.0 / q))


def kernel(map_: WarpingMap, theta: Prototype, signal_grid: SampledSignal, point_a, point_b) -> complex:
    """Reproducing kernel ``<g_{y,omega}, g_{z,eta}>`` evaluated on a frequency grid.

    ``point_a = (y, omega)`` and ``point_b = (z, eta)``; the atom
    ``g_{y,omega}`` has Fourier transform ``exp(-2 pi i <y, xi>) g_omega(xi)``.
    """
    d = map_.dim
    xi = signal_grid.frequency_points().reshape(-1, d)
    (y, om), (z, et) = point_a, point_b
    ga = atom_freq(map_, theta, om, xi) * np.exp(-2j * np.pi * (xi @ np.atleast_1d(np.asarray(y, dtype=float))))
    gb = atom_freq(map_, theta, et, xi) * np.exp(-2j * np.pi * (xi @ np.atleast_1d(np.asarray(z, dtype=float))))
    return complex(np.sum(ga * np.conj(gb)) * signal_grid.dxi**d)


def fourier_localization_check(
    signal: SampledSignal,
    bapu: Bapu,
    k,
    y_indices=None,
    order: int = 64,
) -> dict:
    """Compare ``F^{-1}(phi_k f^)(y)`` with the ``M_k`` integral of ``w^{-1/2} V f(y, .)``.

    The prototype is the partition's mollifier.  The ``M_k`` integral is
    computed in warped coordinates: with ``omega = Phi^{-1}(tau)`` and
    ``d omega = w(tau) d tau`` it becomes a Gauss-Legendre rule of ``order``
    nodes per axis over the cube ``delta (k + [-1/2, 1/2)^d)``.

    Returns the maximal absolute difference relative to the largest
    ``|F^{-1}(phi_k f^)(y)|`` over the probed ``y``.
    """
    map_ = bapu.covering.map
    d = map_.dim
    delta = bapu.delta
    theta = prototype_from_bapu(bapu)
    k = np.asarray(np.atleast_1d(k), dtype=float)
    xi, x = _warped_points(signal, map_)
    phi = bapu.evaluate_warped(k, x.reshape(-1, d)).reshape(signal.fhat.shape)
    lhs_full = to_time(phi * signal.fhat, signal.dxi)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes = 0.5 * delta * nodes
    weights = 0.5 * delta * weights
    grid = np.array(np.meshgrid(*([nodes] * d), indexing="ij")).reshape(d, -1).T
    wgrid = np.prod(np.array(np.meshgrid(*([weights] * d), indexing="ij")).reshape(d, -1), axis=0)
    taus = delta * k[None, :] + grid
    w_tau = map_.weight(taus)
    rhs_full = np.zeros_like(lhs_full)
    for tau, wq, wt in zip(taus, wgrid, w_tau):
        g = _atom_from_warped(map_, theta, tau, x, xi)
        v = to_time(np.conj(g) * signal.fhat, signal.dxi)
        rhs_full += wq * wt * v / math.sqrt(wt)
    if y_indices is None:
        lhs, rhs = lhs_full.ravel(), rhs_full.ravel()
    else:
        idx = np.asarray(y_indices)
        lhs, rhs = lhs_full.ravel()[idx], rhs_full.ravel()[idx]
    scale = float(np.max(np.abs(lhs)))
    diff = float(np.max(np.abs(lhs - rhs)))
    return {
        "k": k.astype(int).tolist(),
        "max_abs_difference": diff,
        "scale": scale,
        "relative_difference": diff / scale if scale > 0 else diff,
        "quadrature_order": order,
    }
