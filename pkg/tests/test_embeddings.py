"""Exponent algebra, sequence membership and embedding decisions."""

import math
from fractions import Fraction

import numpy as np
import pytest

from warpcoorbit.embeddings import (
    INF,
    AsymptoticSequence,
    HypothesisError,
    besov_alpha_sandwich,
    besov_identification_exponent,
    besov_ln_relation,
    besov_vs_warped,
    conjugate,
    ellq_membership,
    embed_same_covering,
    equality_check,
    fit_power_log,
    geometric,
    identify_alpha_modulation,
    identify_mixed_smoothness,
    lattice_power_weight,
    lattice_weight,
    mixed_weight,
    mixed_weight_summability,
    norm_exponent,
    radial_embedding,
    recip,
    t_exponents,
    warped_same_map,
)
from warpcoorbit.radial_warping import SlowStartParams, catalog_map, family_component


class TestExponents:
    def test_recip_exact(self):
        assert recip(3) == Fraction(1, 3)
        assert recip(INF) == 0

    def test_conjugate(self):
        assert conjugate(1) == INF
        assert conjugate(2) == 2.0
        assert conjugate(INF) == 1.0
        assert conjugate(3) == pytest.approx(1.5)

    def test_norm_exponent(self):
        assert norm_exponent(1, 2) == INF
        assert norm_exponent(2, 2) == INF
        assert norm_exponent(2, 1) == 2.0
        assert norm_exponent(INF, 1) == 1.0
        assert norm_exponent(4, 2) == 4.0

    def test_bad_exponent(self):
        with pytest.raises(ValueError):
            t_exponents(0.5, 1, 1, 1)

    @pytest.mark.parametrize(
        "p1,p2,q1,q2,t,tt",
        [
            (1, 2, 1, 1, 1.0, 0.0),
            (2, 4, 2, 1, 0.5, 0.25),
            (4, 4, INF, 2, 0.25, 0.75),
        ],
    )
    def test_mixed_configurations(self, p1, p2, q1, q2, t, tt):
        assert t_exponents(p1, p2, q1, q2) == pytest.approx((t, tt))


class TestMembership:
    @pytest.mark.parametrize(
        "a,b,s,dim,expected",
        [
            (-0.5, 3.0, 1, 1, "finite"),
            (0.1, -5.0, INF, 1, "infinite"),
            (0.0, -2.0, 1, 1, "finite"),
            (0.0, -1.0, 1, 1, "infinite"),
            (0.0, 0.0, INF, 1, "finite"),
            (0.0, 0.1, INF, 1, "infinite"),
            (0.0, -2.0, 1, 2, "infinite"),
            (0.0, -3.0, 1, 2, "finite"),
            (0.0, -1.0, 2, 2, "infinite"),
        ],
    )
    def test_exact_rule(self, a, b, s, dim, expected):
        assert ellq_membership(geometric(a, b, lattice_dim=dim), s, "exact") == expected

    def test_numeric_agrees_away_from_boundary(self):
        assert ellq_membership(geometric(-0.3, 1.0), 2, "numeric") == "finite"
        assert ellq_membership(geometric(0.0, -3.0), 1, "numeric") == "finite"
        assert ellq_membership(geometric(0.2), INF, "numeric") == "infinite"

    def test_numeric_boundary_undetermined(self):
        assert ellq_membership(geometric(0.0, -1.0), 1, "numeric") == "undetermined"
        assert ellq_membership(geometric(1e-4), INF, "numeric") == "undetermined"

    def test_zero_and_noisy_samples(self):
        assert ellq_membership(AsymptoticSequence.raw(np.zeros(40)), 1) == "finite"
        noisy = AsymptoticSequence.raw(np.exp(np.random.default_rng(0).normal(0, 3, 64)))
        assert ellq_membership(noisy, 1) == "undetermined"

    def test_exact_mode_needs_closed_form(self):
        with pytest.raises(ValueError):
            ellq_membership(AsymptoticSequence.raw(np.ones(10)), 1, "exact")

    def test_fit_recovers_parameters(self):
        fit = fit_power_log(geometric(0.3, -1.5, 2.0).sample(64))
        assert fit["a"] == pytest.approx(0.3, abs=1e-9)
        assert fit["b"] == pytest.approx(-1.5, abs=1e-8)

    def test_sequence_algebra(self):
        u = geometric(0.5, 1.0, 2.0) * geometric(-0.25, 2.0, 3.0)
        assert (u.a, u.b, u.c) == (0.25, 3.0, 6.0)
        v = (u / geometric(0.25, 3.0, 6.0)) ** 2
        assert (v.a, v.b, v.c) == (0.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            geometric(lattice_dim=1) * geometric(lattice_dim=2)


class TestSameCovering:
    def test_p_order_required(self):
        v = embed_same_covering(geometric(), geometric(), geometric(), 2, 1, 1, 1)
        assert v.relation == "fails" and v.reason == "p1 > p2"

    def test_lq_inclusion(self):
        # with equal weights l^1 -> l^2 holds and l^2 -> l^1 does not
        one = geometric()
        assert embed_same_covering(one, one, one, 2, 2, 1, 2).embeds
        assert not embed_same_covering(one, one, one, 2, 2, 2, 1).embeds

    def test_weight_gain_allows_lq_reversal(self):
        # u_k = 2^{k}, v = 1: (v/u) = 2^{-k} lies in l^2, so l^2_u -> l^1_v
        assert embed_same_covering(geometric(1.0), geometric(), geometric(), 2, 2, 2, 1).embeds

    def test_lattice_profiles(self):
        assert lattice_weight("identity", 2) == geometric(lattice_dim=2)
        w = lattice_weight("ln", 2, 0.5)
        assert w.a == pytest.approx(1.0 / math.log(2.0)) and w.b == -1.0
        k = lattice_power_weight("alpha:0.5", 1, 1.0)
        assert k.b == pytest.approx(2.0)
        with pytest.raises(ValueError):
            lattice_weight("tensor:ln,ln", 2)

    def test_warped_same_map_p_increase_with_weight(self):
        w = lattice_weight("ln", 1)
        # Co(L^{1,2}_kappa1) -> Co(L^{2,2}) needs kappa2/kappa1 w^{1/2} summable in l^inf
        low = lattice_power_weight("ln", 1, 0.0)
        high = lattice_power_weight("ln", 1, 1.0)
        assert warped_same_map(w, high, low, 1, 2, 2, 2).embeds
        assert not warped_same_map(w, low, low, 1, 2, 2, 2).embeds


class TestBesov:
    def test_identification_exponent(self):
        assert besov_identification_exponent(1.0, 1, 2) == pytest.approx(0.0)
        assert besov_identification_exponent(0.0, INF, 3) == pytest.approx(1.5)

    def test_truth_table_rows(self):
        assert besov_ln_relation(1, 3, 1)["relation"] == "equal"
        assert besov_ln_relation(2, 2, 1)["relation"] == "besov_into_coorbit"
        assert besov_ln_relation(2, 2, INF)["relation"] == "coorbit_into_besov"
        assert besov_ln_relation(2, 1, 2)["relation"] == "neither"

    @pytest.mark.parametrize("spec", ["alpha:0.5", "ln"])
    def test_hilbert_case_is_sobolev(self, spec):
        # p = q = 2 with kappa = (1 + |xi|)^s gives H^s on both sides
        res = besov_vs_warped(family_component(spec), 1.0, 1.0, 2, 2, 2, 2, 2)
        assert res["coorbit_into_besov"].embeds and res["besov_into_coorbit"].embeds

    def test_alpha_family_q1_one_sided(self):
        # gamma_j = 2^{j alpha d}; with q = 1 the identification weight differs by gamma^{1/2}
        res = besov_vs_warped(family_component("alpha:0.5"), 0.0, 0.0, 2, 2, 1, 1, 1)
        assert res["coorbit_into_besov"].embeds != res["besov_into_coorbit"].embeds

    def test_curvature_guard(self):
        with pytest.raises(ValueError):
            besov_vs_warped(family_component("alpha:0.5"), 0, 0, 2, 2, 2, 2, 1, curvature_limit=1e-6)


class TestEquality:
    def test_slow_start_variants_equal(self):
        a = catalog_map("ln", 1)
        b = catalog_map("ln", 1, SlowStartParams(epsilon=2.0))
        rep = equality_check(a, b)
        assert rep.verdict == "equal" and rep.method == "radial derivative ratio"

    def test_ln_vs_alpha(self):
        rep = equality_check(catalog_map("ln", 1), catalog_map("alpha:0.5", 1))
        assert rep.verdict == "not equal"
        assert not rep.bounded_12 and rep.bounded_21
        assert rep.subordinate == ["Q(map2) almost subordinate to Q(map1)"]

    def test_jacobian_path(self):
        rep = equality_check(catalog_map("tensor:ln,ln"), catalog_map("tensor:ln,ln", params=SlowStartParams(epsilon=2.0)))
        assert rep.method == "jacobian product" and rep.verdict == "equal"

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            equality_check(catalog_map("ln", 1), catalog_map("ln", 2))

    def test_radial_sandwich(self):
        ln, al = family_component("ln"), family_component("alpha:0.5")
        one = lambda xi: np.ones(len(np.atleast_2d(xi)))
        # rho_ln' / rho_alpha' is bounded, so the ln spaces sit between alpha spaces
        sw = radial_embedding(al, ln, one, 1, INF, 2)
        assert (sw.t, sw.t_tilde) == (0.0, 1.0)
        assert np.all(sw.lower_weight(np.array([[3.0, 4.0]])) > 0)
        with pytest.raises(HypothesisError):
            radial_embedding(ln, al, one, 2, 2, 1)


class TestIdentifications:
    def test_alpha_modulation_weight(self):
        desc = identify_alpha_modulation(0.5, 1.0, 2, 1, 2)
        assert desc.map_spec == "alpha:0.5"
        assert desc.params["kappa_exponent"] == pytest.approx(0.5)
        np.testing.assert_allclose(desc.kappa(np.array([[3.0, 4.0]])), [6.0**0.5])

    @pytest.mark.parametrize("alpha", [1.0, 2.0])
    def test_alpha_rejected(self, alpha):
        with pytest.raises(ValueError):
            identify_alpha_modulation(alpha, 0.0, 2, 2, 1)

    def test_mixed_weight_value(self):
        kappa = mixed_weight((1.0, 2.0), 1)
        np.testing.assert_allclose(kappa(np.array([[1.0, 3.0]])), [2**0.5 * 4**1.5])
        assert identify_mixed_smoothness((1.0, 2.0), 2, 1).map_spec == "tensor:ln,ln"

    def test_summability(self):
        ok = mixed_weight_summability(2, 2, 2)
        assert ok["verdict"] == "finite" and ok["tail_fraction"] < 0.01
        assert mixed_weight_summability(1, 2, 2)["verdict"] == "condition-violated"
        assert mixed_weight_summability(1, INF, 2)["verdict"] == "finite"

    def test_alpha_sandwich(self):
        res = besov_alpha_sandwich(0.5, 0.0, 1, INF, 2, 0.1)
        assert (res["T"], res["T_tilde"]) == (0.0, 1.0)
        assert res["T"] >= 0 and res["T_tilde"] >= 0
        assert besov_alpha_sandwich(0.5, 0.0, 2, 2, 2, 0.1)["alpha_collapses"]
