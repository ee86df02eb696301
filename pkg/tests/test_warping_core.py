"""Finite differences, weights and admissibility checks of the core map type."""

import numpy as np
import pytest

from warpcoorbit.radial_warping import catalog_map
from warpcoorbit.warping_core import (
    ControlWeight,
    SingularJacobianError,
    WarpingMap,
    check_control_weight,
    eval_weight,
    fd_jacobian,
    fd_stencil,
    identity_map,
    jacobian_consistency,
    phi_tau,
    standard_grid,
    verify_admissibility,
)


class TestStencils:
    @pytest.mark.parametrize("order", [1, 2, 3, 4])
    def test_exact_on_polynomials(self, order):
        offsets, weights = fd_stencil(order)
        h = 0.1
        x0 = 0.3
        # the stencil reproduces d^order/dx^order of x^order exactly
        vals = (x0 + offsets * h) ** order
        approx = np.dot(weights, vals) / h**order
        np.testing.assert_allclose(approx, np.prod(np.arange(1, order + 1)), rtol=1e-8)

    def test_jacobian_of_linear_map(self):
        M = np.array([[2.0, 1.0], [-0.5, 3.0]])
        x = np.random.default_rng(0).normal(size=(5, 2))
        J = fd_jacobian(lambda p: p @ M.T, x)
        np.testing.assert_allclose(J, np.broadcast_to(M, (5, 2, 2)), atol=1e-8)


class TestIdentity:
    def test_forward_inverse_weight(self):
        m = identity_map(3)
        x = np.random.default_rng(1).normal(size=(7, 3))
        np.testing.assert_array_equal(m.forward(x), x)
        np.testing.assert_array_equal(m.inverse(x), x)
        np.testing.assert_array_equal(m.weight(x), np.ones(7))

    def test_transition_matrix_is_identity(self):
        m = identity_map(2)
        P = phi_tau(m, [[1.0, 2.0]], [[0.5, -3.0]])
        np.testing.assert_allclose(P[0], np.eye(2))

    def test_admissibility(self):
        rep = verify_admissibility(identity_map(2))
        assert rep.passed
        assert rep.max_ratio <= 1.0 + 1e-12


class TestWeights:
    def test_singular_jacobian_detected(self):
        zero = lambda t: np.zeros((t.shape[0], 1, 1))
        m = WarpingMap(1, lambda x: x, lambda t: t, zero, name="degenerate")
        with pytest.raises(SingularJacobianError):
            eval_weight(m, [1.0])

    def test_control_weight_properties(self):
        v = ControlWeight(lambda t: (1.0 + np.linalg.norm(t, axis=-1)) ** 2, 1.0, "poly")
        rep = check_control_weight(v, 2, standard_grid(2, 5.0, 7))
        assert rep.passed

    def test_non_submultiplicative_weight_rejected(self):
        v = ControlWeight(lambda t: np.exp(np.linalg.norm(t, axis=-1) ** 2), 1.0, "gauss")
        rep = check_control_weight(v, 1, standard_grid(1, 5.0, 21))
        assert not rep.passed

    @pytest.mark.parametrize("spec,d", [("ln", 1), ("ln", 2), ("alpha:0.5", 2), ("tensor:ln,ln", 2)])
    def test_jacobian_consistency(self, spec, d):
        probes = np.random.default_rng(2).uniform(-15, 15, size=(40, d))
        rep = jacobian_consistency(catalog_map(spec, d), probes)
        assert rep.passed, rep.to_dict()

    def test_phi_tau_at_zero_offset(self):
        m = catalog_map("ln", 2)
        tau = np.random.default_rng(3).normal(size=(4, 2)) * 3
        P = phi_tau(m, tau, np.zeros_like(tau))
        np.testing.assert_allclose(P, np.broadcast_to(np.eye(2), P.shape), atol=1e-12)
