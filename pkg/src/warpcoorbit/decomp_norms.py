"""Decomposition-space norms and the coorbit comparison.

A decomposition norm measures each frequency piece ``F^{-1}(phi_k f^)`` in
``L^p`` and aggregates the results in a weighted ``l^q``.  For an induced
covering the weight that identifies the decomposition space with the warped
coorbit space is

    u_k = kappa(Phi^{-1}(delta k)) * w(delta k)^{1/q - 1/2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .bapu import Bapu
from .covering import FrequencyCovering, InducedCovering, sequence_moderateness
from .transform import (
    SampledSignal,
    analyze,
    coorbit_norm,
    prototype_from_bapu,
    support_window,
    to_time,
)
from .warping_core import WarpingMap


class WindowCoverageError(ValueError):
    """The index window does not cover the spectral support of the signal."""


def _inv(q: float) -> float:
    return 0.0 if math.isinf(q) else 1.0 / q


@dataclass
class WeightSequence:
    """Positive weight ``k -> u_k`` with a tag naming its formula."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    tag: str
    params: dict = field(default_factory=dict)

    def __call__(self, ks) -> np.ndarray:
        ks = np.asarray(ks, dtype=float)
        if ks.ndim == 1:
            ks = ks[:, None] if self.params.get("dim", 1) == 1 else ks[None, :]
        return np.asarray(self.evaluator(ks), dtype=float).reshape(-1)

    def at(self, k) -> float:
        return float(self(np.atleast_1d(np.asarray(k, dtype=float))[None, :])[0])

    def scaled(self, c: float) -> "WeightSequence":
        ev = self.evaluator
        return WeightSequence(lambda ks: c * ev(ks), f"{c}*{self.tag}", dict(self.params))


def constant_weight(d: int = 1, value: float = 1.0) -> WeightSequence:
    return WeightSequence(lambda ks: np.full(len(ks), value), "constant", {"dim": d, "value": value})


def weight_u(map_: WarpingMap, kappa: Optional[Callable], q: float, delta: float) -> WeightSequence:
    """``u_k = kappa(Phi^{-1}(delta k)) w(delta k)^{1/q - 1/2}``.

    ``kappa=None`` means ``kappa = 1``.
    """
    expo = _inv(q) - 0.5

    def ev(ks):
        tau = delta * np.asarray(ks, dtype=float)
        u = map_.weight(tau) ** expo
        if kappa is not None:
            u = u * np.asarray(kappa(map_.inverse(tau)), dtype=float).reshape(-1)
        return u

    return WeightSequence(ev, "coorbit-identification", {"dim": map_.dim, "q": q, "delta": delta, "exponent": expo, "map": map_.name})


@dataclass
class DecompositionNormSpec:
    """Covering, partition of unity, exponents and weight of a decomposition norm."""

    covering: InducedCovering
    bapu: Bapu
    p: float
    q: float
    weight: WeightSequence

    def __post_init__(self):
        for e in (self.p, self.q):
            if not (e >= 1):
                raise ValueError("exponents must lie in [1, inf]")
        if self.bapu.covering is not self.covering:
            raise ValueError("partition of unity and covering differ")


def lp_norm_grid(values: np.ndarray, p: float, cell: float) -> float:
    """``L^p`` norm of grid samples with uniform cell volume; ``p = inf`` is a maximum."""
    a = np.abs(values)
    if math.isinf(p):
        return float(a.max()) if a.size else 0.0
    return float((np.sum(a**p) * cell) ** (1.0 / p))


def lq_aggregate(values: np.ndarray, q: float) -> float:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0
    if math.isinf(q):
        return float(values.max())
    return float(np.sum(values**q) ** (1.0 / q))


def decomposition_window(signal: SampledSignal, bapu: Bapu) -> np.ndarray:
    """Indices whose member can meet the spectral support, plus one ring."""
    reach = 0.5 * bapu.delta + bapu.mollifier.half_width + bapu.delta
    return support_window(signal, bapu.covering.map, reach, bapu.delta)


def coverage_defect(signal: SampledSignal, bapu: Bapu, window) -> float:
    """Relative energy of ``(1 - sum_k phi_k) f^`` for ``k`` in the window."""
    d = signal.dim
    tot = np.sum(np.abs(signal.fhat) ** 2)
    if tot == 0:
        return 0.0
    x = bapu.covering.map.forward(signal.frequency_points().reshape(-1, d))
    s = np.zeros(x.shape[0])
    for k in np.asarray(window).reshape(-1, d):
        s += bapu.evaluate_warped(k, x)
    resid = (1.0 - s).reshape(signal.fhat.shape)
    return float(np.sum(np.abs(resid * signal.fhat) ** 2) / tot)


def decomposition_pieces(signal: SampledSignal, bapu: Bapu, window) -> tuple[np.ndarray, list]:
    """Yield ``(k, F^{-1}(phi_k f^))`` on the time grid for ``k`` in the window."""
    d = signal.dim
    x = bapu.covering.map.forward(signal.frequency_points().reshape(-1, d))
    ks = np.asarray(window, dtype=int).reshape(-1, d)
    pieces = []
    for k in ks:
        phi = bapu.evaluate_warped(k, x).reshape(signal.fhat.shape)
        pieces.append(to_time(phi * signal.fhat, signal.dxi))
    return ks, pieces


def decomposition_norm(
    signal: SampledSignal,
    spec: DecompositionNormSpec,
    window=None,
    coverage_tol: float = 1e-8,
    details: bool = False,
):
    """Weighted ``l^q`` of the ``L^p`` norms of ``F^{-1}(phi_k f^)``.

    Raises
    ------
    WindowCoverageError
        If more than ``coverage_tol`` of the signal energy lies where the
        window's members do not sum to one.
    """
    d = signal.dim
    if window is None:
        window = decomposition_window(signal, spec.bapu)
    window = np.asarray(window, dtype=int).reshape(-1, d)
    if len(window) == 0 or not np.any(signal.fhat):
        return (0.0, {"window_size": len(window), "coverage_defect": 0.0}) if details else 0.0
    cov = coverage_defect(signal, spec.bapu, window)
    if cov > coverage_tol:
        raise WindowCoverageError(f"window misses {cov:.3g} of the signal energy")
    ks, pieces = decomposition_pieces(signal, spec.bapu, window)
    norms = np.array([lp_norm_grid(v, spec.p, signal.dy**d) for v in pieces])
    u = spec.weight(ks.astype(float))
    val = lq_aggregate(u * norms, spec.q)
    if details:
        return val, {"window_size": int(len(ks)), "coverage_defect": cov, "piece_norms": norms.tolist()}
    return val


def moderateness_constant(weight: WeightSequence, covering: FrequencyCovering, window: Iterable) -> float:
    """``max_{k in window, l in k*} u_l / u_k``."""
    return sequence_moderateness(covering, lambda k: weight.at(k), window)


@dataclass
class ProbeResult:
    """Per-signal coorbit and decomposition norms with their ratio band."""

    rows: list
    band: tuple
    p: float
    q: float
    params: dict

    @property
    def band_width(self) -> float:
        lo, hi = self.band
        return hi / lo if lo > 0 else math.inf

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "band": list(self.band),
            "band_width": self.band_width,
            "params": self.params,
            "signals": self.rows,
        }


def norm_equivalence_probe(
    signals: Sequence[SampledSignal],
    map_: WarpingMap,
    kappa: Optional[Callable],
    p: float,
    q: float,
    delta: float,
    r: float,
    theta_param: Optional[float] = None,
    workers: int = 1,
) -> ProbeResult:
    """Ratio ``coorbit_norm / decomposition_norm`` over a signal family.

    The prototype equals the partition's unit-mass mollifier, which couples
    the two sides through the localization identity.  Zero signals are
    skipped.
    """
    from .covering import induced_covering

    cov = induced_covering(map_, delta, r)
    bapu = Bapu(cov, theta_param)
    theta = prototype_from_bapu(bapu)
    spec = DecompositionNormSpec(cov, bapu, p, q, weight_u(map_, kappa, q, delta))
    rows = []
    ratios = []
    for sig in signals:
        if not np.any(sig.fhat):
            rows.append({"signal_id": sig.label, "skipped": "zero signal"})
            continue
        co = coorbit_norm(analyze(sig, map_, theta, delta, workers=workers), p, q, kappa)
        de = decomposition_norm(sig, spec)
        ratios.append(co / de)
        rows.append({"signal_id": sig.label, "coorbit": co, "decomposition": de, "ratio": co / de})
    band = (float(min(ratios)), float(max(ratios))) if ratios else (math.nan, math.nan)
    params = {"map": map_.name, "delta": delta, "r": r, "theta_param": bapu.theta_param, "prototype": theta.to_dict()}
    return ProbeResult(rows, band, p, q, params)
