import json

import numpy as np
import pytest

from confnodal.conformal import (DiscreteConformalMetric, KernelBasis, TorusGrid, bandlimited_field, kernel_basis,
                                 tuned_kernel_example, yamabe_conjugated,
                                 yamabe_direct)
from confnodal.heisenberg import HeisenbergModel
from confnodal.prescription import (FORBIDDEN, NOT_DECIDED, NOT_OBSTRUCTED, OBSTRUCTED, constant_q_obstruction,
                                    constraint_functional, forbidden_function_test, matched_factor,
                                    membership_probe, nowhere_vanishing_kernel_check, prescription_pde_residual,
                                    probe_factors, q_curvature, q_curvature_heisenberg, q_from_scalar, strict_sign)


@pytest.fixture(scope="module")
def tuned():
    return tuned_kernel_example(16)


def kernel_of(vectors):
    v = np.atleast_2d(np.asarray(vectors, dtype=float).T).T
    return KernelBasis(v, np.zeros(v.shape[1]), 1e-8, (-1e-8, 1e-8))


class TestQCurvature:
    def test_direct_matches_scalar(self, tuned):
        g = tuned.metric.grid
        hat = tuned.metric.with_factor(bandlimited_field(g, 3, 0.5))
        np.testing.assert_allclose(q_curvature(hat), q_from_scalar(hat), atol=1e-9 * np.abs(q_from_scalar(hat)).max())

    def test_flat_zero(self):
        m = DiscreteConformalMetric(TorusGrid(3, 8), None)
        assert np.abs(q_curvature(m)).max() == 0
        assert np.abs(q_curvature(m, path="conjugated")).max() == 0

    def test_paths_agree_to_second_order(self, tuned):
        errs = []
        for N in (8, 16):
            g = TorusGrid(3, N)
            m = DiscreteConformalMetric(g, bandlimited_field(g, 2, 0.4))
            errs.append(np.abs(q_curvature(m) - q_curvature(m, path="conjugated")).max())
        assert errs[1] < errs[0] / 2.5

    def test_errors(self, tuned):
        with pytest.raises(ValueError):
            q_curvature(tuned.metric, k=2)
        with pytest.raises(ValueError):
            q_curvature(tuned.metric, path="other")

    def test_heisenberg_constant(self):
        m = HeisenbergModel(1, (1,), 2.0)
        # R = -(d/2) s^{2d+2}, n = 2d+1
        assert q_curvature_heisenberg(m) == pytest.approx(-0.5 * 2.0 ** 4 / 4)


class TestPairing:
    def test_matched_pairing_vanishes(self, tuned):
        g = tuned.metric.grid
        u = tuned.null_vector
        for seed in range(3):
            up = bandlimited_field(g, seed, 0.5)
            q = q_curvature(tuned.metric.with_factor(up), path="conjugated")
            val = constraint_functional(u, q, matched_factor(up, 3), tuned.metric.base_weights)
            scale = np.sum(np.abs(u * q) * np.exp(3 * matched_factor(up, 3).ravel()) * tuned.metric.base_weights)
            assert abs(val) < 1e-8 * scale

    def test_unmatched_pairing_does_not(self, tuned):
        g = tuned.metric.grid
        up = bandlimited_field(g, 0, 0.5)
        q = q_curvature(tuned.metric.with_factor(up), path="conjugated")
        val = constraint_functional(tuned.null_vector, q, np.zeros(g.shape), tuned.metric.base_weights)
        assert abs(val) > 1e-3

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            constraint_functional(np.ones(3), np.ones(3), 0.0, np.ones(4))

    def test_strict_sign(self):
        u = np.array([1.0, -2.0, 0.0, 3.0])
        assert strict_sign(u, u) == 1
        assert strict_sign(u, -u ** 3) == -1
        assert strict_sign(u, np.ones(4)) == 0


class TestForbidden:
    def test_u_and_power(self, tuned):
        g = tuned.metric.grid
        u = tuned.null_vector
        probes = probe_factors(g)
        f = bandlimited_field(g, 9, 0.3).ravel()
        for s in (u, np.exp(f) * u ** 3, -u):
            v = forbidden_function_test(u, s, probes, tuned.metric.base_weights)
            assert v.verdict == FORBIDDEN
            assert v.probes_used == 20
            assert v.margins["min_oriented_integral"] > 0
            assert all(v.witness["orientation"] * x > 0 for x in v.witness["probe_integrals"])
        json.loads(v.to_json())

    def test_sign_flip_not_decided(self, tuned):
        u = tuned.null_vector
        s = u * np.where(np.arange(u.size) % 2, 1.0, -1.0)
        v = forbidden_function_test(u, s, probe_factors(tuned.metric.grid, 3), tuned.metric.base_weights)
        assert v.verdict == NOT_DECIDED and v.probes_used == 0

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            forbidden_function_test(np.zeros(8), np.ones(8), [], np.ones(8))

    def test_membership_probe(self, tuned):
        g = tuned.metric.grid
        u = tuned.null_vector
        up = bandlimited_field(g, 0, 0.5)
        q = q_curvature(tuned.metric.with_factor(up), path="conjugated")
        probes = [np.zeros(g.shape), matched_factor(up, 3)] + probe_factors(g, 4)
        v = membership_probe(u, q, probes, tuned.metric.base_weights)
        assert v.verdict in ("not excluded by probes", "excluded by probes")
        assert membership_probe(u, u, probes, tuned.metric.base_weights).verdict.startswith("excluded (pointwise")


class TestConstantQ:
    def test_flat_kernel_obstructed(self):
        g = TorusGrid(3, 8)
        kb = kernel_basis(yamabe_direct(DiscreteConformalMetric(g, None)))
        v = constant_q_obstruction(kb)
        assert v.verdict == OBSTRUCTED and v.probes_used == 1

    def test_sign_changing_kernel_not_obstructed(self, tuned):
        assert constant_q_obstruction(kernel_of(tuned.null_vector)).verdict == NOT_OBSTRUCTED

    def test_empty_kernel(self):
        v = constant_q_obstruction(kernel_of(np.zeros((8, 0))))
        assert v.verdict == NOT_OBSTRUCTED and v.probes_used == 0

    def test_random_combinations_found(self):
        # neither basis vector is one-signed but their sum is
        a = np.array([1.0, 1.0, 2.0, -0.5])
        b = np.array([1.0, 1.0, -0.5, 2.0])
        v = constant_q_obstruction(kernel_of(np.column_stack([a, b])), samples=200)
        assert v.verdict == OBSTRUCTED and v.probes_used > 2


class TestNowhereVanishing:
    def test_rescale_to_zero_q(self):
        g = TorusGrid(3, 8)
        m = DiscreteConformalMetric(g, bandlimited_field(g, 1, 0.5))
        # the conjugated operator of a scalar-flat class has kernel e^{-(n-2)U/2}
        op = yamabe_conjugated(m.upsilon, g)
        kb = kernel_basis(op)
        rep = nowhere_vanishing_kernel_check(kb, m)
        assert kb.dimension == 1 and rep["found"]
        assert rep["q_conjugated_max"] < 1e-8 * op.norm1()
        assert rep["q_direct_max"] < 1e-6 * op.norm1()

    def test_none_found(self, tuned):
        rep = nowhere_vanishing_kernel_check(kernel_of(tuned.null_vector), tuned.metric)
        assert rep["found"] is False


class TestPdeResidual:
    def test_constant_solution(self):
        g = TorusGrid(3, 8)
        m = DiscreteConformalMetric(g, bandlimited_field(g, 4, 0.4))
        assert prescription_pde_residual(np.ones(g.size), m, q_curvature(m)) < 1e-12

    def test_errors(self):
        g = TorusGrid(3, 8)
        m = DiscreteConformalMetric(g, None)
        with pytest.raises(ValueError):
            prescription_pde_residual(-np.ones(g.size), m, np.zeros(g.size))
        with pytest.raises(ValueError):
            prescription_pde_residual(np.ones(g.size), m, np.zeros(g.size), k=2)
