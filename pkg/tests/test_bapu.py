"""Partition of unity built from cube integrals of a tensor mollifier."""

import numpy as np
import pytest
from scipy.integrate import quad

from warpcoorbit.bapu import (
    Bapu,
    Mollifier,
    bump_mass,
    fourier_l1_estimate,
    member_support_box,
    partition_defect,
    support_check,
    unit_bump,
)
from warpcoorbit.covering import induced_covering
from warpcoorbit.radial_warping import catalog_map
from warpcoorbit.warping_core import identity_map


class TestMollifier:
    def test_bump_mass_reference(self):
        # integral of exp(-1/(1-t^2)) over (-1, 1), known to ~1e-12
        np.testing.assert_allclose(bump_mass(), 0.44399381616807943, rtol=1e-12)

    def test_unit_mass(self):
        m = Mollifier(1, 0.3)
        val = quad(lambda x: float(m.factor(np.array(x))), -0.3, 0.3, epsabs=1e-14)[0]
        np.testing.assert_allclose(val, 1.0, rtol=1e-10)

    def test_antiderivative_limits_and_monotone(self):
        m = Mollifier(1, 0.5)
        x = np.linspace(-1, 1, 2001)
        Z = m.antiderivative(x)
        assert Z[0] == 0.0 and Z[-1] == 1.0
        assert np.all(np.diff(Z) >= -1e-15)
        np.testing.assert_allclose(m.antiderivative(np.array([0.0])), [0.5], atol=1e-13)

    def test_antiderivative_matches_quadrature(self):
        m = Mollifier(1, 0.5)
        for x in (-0.3, 0.1, 0.45):
            ref = quad(lambda t: float(m.factor(np.array(t))), -0.5, x, epsabs=1e-14)[0]
            np.testing.assert_allclose(m.antiderivative(np.array([x])), [ref], atol=1e-10)

    def test_bump_vanishes_outside(self):
        np.testing.assert_array_equal(unit_bump(np.array([-1.0, 1.0, 2.0])), 0.0)


class TestPartition:
    @pytest.mark.parametrize("spec,d", [("identity", 1), ("ln", 1), ("alpha:0.5", 2), ("tensor:ln,ln", 2)])
    def test_sums_to_one(self, spec, d):
        cov = induced_covering(catalog_map(spec, d), 0.5, np.sqrt(d) / 2 + 0.25)
        b = Bapu(cov)
        probes = np.random.default_rng(4).uniform(-25, 25, size=(300, d))
        assert partition_defect(b, probes) <= 1e-12

    def test_members_nonnegative_and_bounded(self):
        b = Bapu(induced_covering(catalog_map("ln", 1), 1.0, 0.75))
        eta = np.linspace(-20, 20, 4001)
        for k in (-2, 0, 3):
            v = b(k, eta[:, None])
            assert v.min() >= 0.0 and v.max() <= 1.0 + 1e-15

    def test_support(self):
        b = Bapu(induced_covering(catalog_map("alpha:0.5", 2), 1.0, 0.95))
        for k in [(0, 0), (3, -1)]:
            assert support_check(b, k)["pass"]

    def test_theta_bounds(self):
        cov = induced_covering(identity_map(1), 1.0, 0.75)
        with pytest.raises(ValueError):
            Bapu(cov, 0.25)
        assert Bapu(cov, 0.2).mollifier.half_width == pytest.approx(0.2)

    def test_support_box_contains_support(self):
        b = Bapu(induced_covering(catalog_map("ln", 1), 1.0, 0.75))
        lo, hi = member_support_box(b, 2)
        eta = np.linspace(lo[0] - 5, hi[0] + 5, 20001)
        v = b(2, eta[:, None])
        inside = (eta >= lo[0]) & (eta <= hi[0])
        assert np.all(v[~inside] == 0.0)


class TestFourierL1:
    def test_translation_invariant_for_identity(self):
        b = Bapu(induced_covering(identity_map(1), 1.0, 0.75))
        a, c = fourier_l1_estimate(b, 0)["l1"], fourier_l1_estimate(b, 7)["l1"]
        np.testing.assert_allclose(a, c, rtol=1e-6)
        assert a >= 1.0 - 1e-9  # ||F^{-1} phi||_1 >= ||phi||_inf = 1

    def test_bounded_along_ln(self):
        b = Bapu(induced_covering(catalog_map("ln", 1), 1.0, 0.75))
        vals = [fourier_l1_estimate(b, k)["l1"] for k in (0, 2, 5, 10)]
        assert max(vals) / min(vals) < 5.0
