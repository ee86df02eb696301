"""Decomposition norms, identification weights and the norm-ratio probe."""

import math

import numpy as np
import pytest

from warpcoorbit.bapu import Bapu
from warpcoorbit.covering import induced_covering
from warpcoorbit.decomp_norms import (
    DecompositionNormSpec,
    WindowCoverageError,
    constant_weight,
    decomposition_norm,
    decomposition_window,
    lp_norm_grid,
    lq_aggregate,
    moderateness_constant,
    norm_equivalence_probe,
    weight_u,
)
from warpcoorbit.radial_warping import catalog_map
from warpcoorbit.transform import SampledSignal, gaussian_signal, random_bandlimited
from warpcoorbit.warping_core import identity_map


def _spec(map_, delta, r, p, q):
    cov = induced_covering(map_, delta, r)
    b = Bapu(cov)
    return DecompositionNormSpec(cov, b, p, q, weight_u(map_, None, q, delta))


class TestAggregates:
    def test_lp_grid(self):
        v = np.array([3.0, -4.0])
        assert lp_norm_grid(v, 2, 1.0) == pytest.approx(5.0)
        assert lp_norm_grid(v, math.inf, 1.0) == 4.0
        assert lp_norm_grid(v, 1, 0.5) == pytest.approx(3.5)

    def test_lq(self):
        assert lq_aggregate([1.0, 2.0, 2.0], 2) == pytest.approx(3.0)
        assert lq_aggregate([1.0, 5.0], math.inf) == 5.0
        assert lq_aggregate([], 1) == 0.0


class TestWeights:
    def test_identity_weight_is_one(self):
        u = weight_u(identity_map(1), None, 1.0, 0.5)
        np.testing.assert_allclose(u(np.arange(-5, 6)), 1.0)

    def test_ln_weight_formula(self):
        m = catalog_map("ln", 1)
        u = weight_u(m, None, 1.0, 0.25)
        ks = np.arange(0, 40, 7)
        np.testing.assert_allclose(u(ks), m.weight(0.25 * ks[:, None]) ** 0.5)

    def test_kappa_composed_with_inverse(self):
        m = catalog_map("ln", 1)
        kappa = lambda xi: 1.0 + np.abs(xi[..., 0])
        u = weight_u(m, kappa, 2.0, 0.5)
        k = 9
        np.testing.assert_allclose(u.at([k]), 1.0 + abs(m.inverse(np.array([[0.5 * k]]))[0, 0]))

    def test_moderateness(self):
        cov = induced_covering(catalog_map("ln", 1), 0.5, 0.75)
        c = moderateness_constant(weight_u(cov.map, None, 1.0, 0.5), cov, [(k,) for k in range(0, 60)])
        assert 1.0 <= c < 10.0

    def test_constant_weight_scaled(self):
        assert constant_weight(1, 2.0).scaled(3.0).at([4]) == pytest.approx(6.0)


class TestDecompositionNorm:
    def test_identity_l2_oracle(self):
        # p = q = 2 with weight one: ||f||^2 = sum_k integral phi_k^2 |f^|^2 by Plancherel
        sig = random_bandlimited(1, 1024, 32.0, 4.0, seed=7)
        spec = _spec(identity_map(1), 0.5, 0.75, 2.0, 2.0)
        win = decomposition_window(sig, spec.bapu)
        val = decomposition_norm(sig, spec, win)
        xi = sig.frequency_points().reshape(-1, 1)
        phi2 = sum(spec.bapu(k, xi) ** 2 for k in win)
        ref = math.sqrt(np.sum(phi2 * np.abs(sig.fhat) ** 2) * sig.dxi)
        np.testing.assert_allclose(val, ref, rtol=1e-10)

    def test_small_window_raises(self):
        sig = gaussian_signal(1, 1024, 64.0, center=5.0, width=1.0)
        spec = _spec(identity_map(1), 0.5, 0.75, 2.0, 2.0)
        with pytest.raises(WindowCoverageError):
            decomposition_norm(sig, spec, window=[[0]])

    def test_zero_signal(self):
        sig = SampledSignal(1, 128, 8.0, np.zeros(128))
        assert decomposition_norm(sig, _spec(identity_map(1), 0.5, 0.75, 1.0, 1.0)) == 0.0

    def test_spec_validation(self):
        cov = induced_covering(identity_map(1), 0.5, 0.75)
        other = induced_covering(identity_map(1), 0.5, 0.75)
        with pytest.raises(ValueError):
            DecompositionNormSpec(cov, Bapu(other), 2, 2, constant_weight())
        with pytest.raises(ValueError):
            DecompositionNormSpec(cov, Bapu(cov), 0.5, 2, constant_weight())

    def test_lp_monotone_in_q(self):
        sig = random_bandlimited(1, 1024, 32.0, 4.0, seed=8)
        vals = [decomposition_norm(sig, _spec(identity_map(1), 0.5, 0.75, 2.0, q)) for q in (1.0, 2.0, math.inf)]
        assert vals[0] >= vals[1] >= vals[2]


class TestProbe:
    def test_identity_band_is_tight(self):
        sigs = [random_bandlimited(1, 2048, 64.0, 6.0, seed=s) for s in range(4)]
        res = norm_equivalence_probe(sigs, identity_map(1), None, 2.0, 2.0, 0.125, 2.0)
        assert res.band_width < 1.01

    def test_zero_signals_skipped(self):
        sigs = [SampledSignal(1, 512, 32.0, np.zeros(512)), random_bandlimited(1, 512, 32.0, 3.0, seed=1)]
        res = norm_equivalence_probe(sigs, identity_map(1), None, 1.0, math.inf, 0.25, 1.0)
        assert res.rows[0]["skipped"] == "zero signal"
        assert res.band[0] == res.band[1]
