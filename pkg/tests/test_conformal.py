import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from confnodal.conformal import (DiscreteConformalMetric, FamilySpec, KernelGapWarning, NoSignChange,
                                 TorusGrid, WarpedBase, bandlimited_field,
                                 covariance_residual, density_transform, kernel_basis, laplace_beltrami,
                                 lowest_modes, metric_lowest, negative_count, scalar_curvature_conformal,
                                 scaled_factor_family, separable_spectrum, tune_to_kernel, tuned_warp,
                                 warped_family, yamabe_conjugated, yamabe_constant, yamabe_direct)
from confnodal.linalg import SymmetricOperator, eigh_dense


def fourier_mode(grid, xi):
    xs = [grid.coordinate(a) for a in range(grid.n)]
    return np.cos(2 * math.pi * sum(k * x for k, x in zip(xi, xs))).ravel()


class TestGrid:
    def test_validation(self):
        with pytest.raises(ValueError):
            TorusGrid(2, 16)
        with pytest.raises(ValueError):
            TorusGrid(3, 4)

    def test_neighbors_periodic(self):
        g = TorusGrid(3, 8)
        j = g.neighbor_index(0)
        assert j[0] == 64 and j[7 * 64] == 0


class TestLaplaceBeltrami:
    @pytest.mark.parametrize("xi", [(1, 0, 0), (1, 1, 0), (2, 1, 1), (3, 0, 0), (0, 2, 2)])
    def test_flat_fourier_modes(self, xi):
        errs = []
        for N in (16, 32):
            g = TorusGrid(3, N)
            op = laplace_beltrami(DiscreteConformalMetric(g, None))
            v = fourier_mode(g, xi)
            discrete = sum(4 * N * N * math.sin(math.pi * k / N) ** 2 for k in xi)
            np.testing.assert_allclose(op.matvec(v), discrete * v, atol=1e-8 * discrete)
            errs.append(abs(discrete - 4 * math.pi ** 2 * sum(k * k for k in xi)))
        assert errs[1] < errs[0] / 3.5
        assert errs[0] <= (2 * math.pi * max(xi) / 16) ** 2 / 12 * 4 * math.pi ** 2 * sum(k * k for k in xi) * 1.01

    def test_constant_factor_scales(self):
        g = TorusGrid(3, 8)
        flat = laplace_beltrami(DiscreteConformalMetric(g, None)).to_dense()
        for c in (-0.7, 0.4):
            scaled = laplace_beltrami(DiscreteConformalMetric(g, c)).to_dense()
            np.testing.assert_allclose(scaled, math.exp(-2 * c) * flat, atol=1e-10)

    @given(st.integers(0, 1000))
    def test_constants_killed_and_self_adjoint(self, seed):
        g = TorusGrid(3, 8)
        base = tuned_warp(3, 1.3)
        m = DiscreteConformalMetric(g, bandlimited_field(g, seed, 0.6), base)
        op = laplace_beltrami(m)
        assert np.abs(op.matvec(np.ones(g.size))).max() < 1e-12 * op.norm1()
        s = op.symmetric_matrix()
        assert abs(s - s.T).max() < 1e-12 * op.norm1()

    def test_nonnegative(self):
        g = TorusGrid(3, 8)
        m = DiscreteConformalMetric(g, bandlimited_field(g, 3, 0.8), tuned_warp(3, 2.0))
        vals = eigh_dense(SymmetricOperator(laplace_beltrami(m).to_dense(), m.weights, check=False)).eigenvalues
        assert vals[0] > -1e-9 and vals[1] > 1e-6


class TestCurvature:
    def test_zero_and_constant(self):
        g = TorusGrid(3, 16)
        assert np.abs(scalar_curvature_conformal(None, g)).max() == 0
        assert np.abs(scalar_curvature_conformal(0.8, g)).max() < 1e-10

    def test_warped_base_closed_form(self):
        # phi_3 = -phi_2 - 2B gives R = -2 phi_2'^2
        base = tuned_warp(3, 1.7)
        x = np.linspace(0, 1, 33)
        phi2p = -2 * math.pi * 1.7 * np.sin(2 * math.pi * x)
        np.testing.assert_allclose(base.scalar_curvature(x), -2 * phi2p ** 2, atol=1e-10)

    def test_warped_curvature_sympy(self):
        import sympy
        # scalar curvature of dx^2 + e^{2a} dy^2 + e^{2b} dz^2, a, b functions of x
        x = sympy.symbols("x")
        a = sympy.Rational(3, 2) * sympy.cos(2 * sympy.pi * x) + sympy.Rational(1, 3)
        b = sympy.Rational(-1, 2) * sympy.cos(2 * sympy.pi * x) - 1
        r = -2 * (sympy.diff(a, x, 2) + sympy.diff(b, x, 2)) - 2 * (sympy.diff(a, x) ** 2 + sympy.diff(b, x) ** 2
                                                                      + sympy.diff(a, x) * sympy.diff(b, x))
        f = sympy.lambdify(x, r, "numpy")
        base = WarpedBase((1.5, -0.5), (1 / 3, -1.0))
        pts = np.linspace(0, 1, 17)
        np.testing.assert_allclose(base.scalar_curvature(pts), f(pts), atol=1e-9)

    def test_conformal_curvature_converges(self):
        # smooth factor depending on x_1 only: R_hat = e^{-2U}(2(n-1)(-U'') - (n-1)(n-2)U'^2) on the flat torus
        errs = []
        for N in (16, 32):
            g = TorusGrid(3, N)
            x = g.coordinate(0)
            up = 0.3 * np.sin(2 * math.pi * x) * np.ones(g.shape)
            d1 = 0.3 * 2 * math.pi * np.cos(2 * math.pi * x)
            d2 = -0.3 * (2 * math.pi) ** 2 * np.sin(2 * math.pi * x)
            exact = np.exp(-2 * up) * (4 * (-d2) - 2 * d1 ** 2)
            errs.append(np.abs(scalar_curvature_conformal(up, g) - exact).max())
        assert errs[1] < errs[0] / 3


class TestYamabe:
    def test_flat_equals_laplacian(self):
        g = TorusGrid(3, 8)
        m = DiscreteConformalMetric(g, None)
        lb = laplace_beltrami(m).to_dense()
        np.testing.assert_allclose(yamabe_direct(m).to_dense(), lb)
        np.testing.assert_allclose(yamabe_conjugated(None, g).to_dense(), lb)

    def test_conjugated_is_congruent(self):
        g = TorusGrid(3, 8)
        base = tuned_warp(3, 1.0)
        up = bandlimited_field(g, 4, 0.5).ravel()
        s0 = yamabe_direct(DiscreteConformalMetric(g, None, base)).symmetric_matrix().toarray()
        s1 = yamabe_conjugated(up, g, base).symmetric_matrix().toarray()
        e = np.exp(-up)
        np.testing.assert_allclose(s1, e[:, None] * s0 * e[None, :], atol=1e-9 * np.abs(s0).max())

    def test_covariance_trivial_cases(self):
        g = TorusGrid(3, 8)
        assert covariance_residual(None, g) < 1e-12
        assert covariance_residual(0.6, g) < 1e-10
        assert covariance_residual(-0.4, g, tuned_warp(3, 1.2)) < 1e-10

    def test_covariance_order(self):
        r = []
        for N in (8, 16):
            g = TorusGrid(3, N)
            r.append(covariance_residual(bandlimited_field(g, 11, 0.4), g))
        assert 2.5 <= r[0] / r[1] <= 6.0

    def test_density_transform(self):
        u = np.arange(8.0)
        up = np.linspace(-1, 1, 8)
        np.testing.assert_allclose(density_transform(u, np.zeros(8), 0.5), u)
        np.testing.assert_allclose(density_transform(u, up, 0.0), u)
        np.testing.assert_allclose(density_transform(u, up, 0.5), np.exp(-0.5 * up) * u)

    def test_yamabe_constant(self):
        assert yamabe_constant(3) == pytest.approx(1 / 8)
        assert yamabe_constant(4) == pytest.approx(1 / 6)


class TestSpectra:
    def test_separable_matches_dense(self):
        g = TorusGrid(3, 8)
        m = DiscreteConformalMetric(g, None, tuned_warp(3, 2.3))
        dense = eigh_dense(SymmetricOperator(yamabe_direct(m).to_dense(), m.weights, check=False))
        spec = separable_spectrum(m, 10)
        np.testing.assert_allclose(spec.eigenvalues, dense.eigenvalues[:10], atol=1e-8 * abs(dense.eigenvalues).max())
        op = yamabe_direct(m)
        v = spec.vectors()
        np.testing.assert_allclose(op.matvec(v), v * spec.eigenvalues, atol=1e-7 * abs(dense.eigenvalues).max())

    def test_lowest_modes_shift_invert_path(self):
        g = TorusGrid(3, 16)
        m = DiscreteConformalMetric(g, bandlimited_field(g, 2, 0.4), tuned_warp(3, 1.0))
        op = yamabe_direct(m)
        r = lowest_modes(op, 3)
        np.testing.assert_allclose(op.matvec(r.eigenvectors), r.eigenvectors * r.eigenvalues,
                                   atol=1e-6 * op.norm1())

    def test_negative_count_against_inertia(self):
        from confnodal.linalg import inertia_count
        g = TorusGrid(3, 8)
        m = DiscreteConformalMetric(g, None, tuned_warp(3, 3.0))
        assert negative_count(m, 0.0) == inertia_count(yamabe_direct(m), 0.0, zero_tol=0.0)[0]


class TestKernel:
    def test_flat_kernel_constants(self):
        g = TorusGrid(3, 8)
        kb = kernel_basis(yamabe_direct(DiscreteConformalMetric(g, None)))
        assert kb.dimension == 1
        v = kb.vectors[:, 0]
        np.testing.assert_allclose(v / v[0], 1.0, atol=1e-8)

    def test_positive_definite_has_none(self):
        g = TorusGrid(3, 8)
        op = yamabe_direct(DiscreteConformalMetric(g, None)).shifted(1.0)
        assert kernel_basis(op).dimension == 0

    def test_gap_warning(self):
        op = SymmetricOperator(np.diag([0.0, 3e-8, 1.0, 2.0]))
        with pytest.warns(KernelGapWarning):
            kb = kernel_basis(op, tau=1e-8)
        assert kb.warning is not None

    def test_tuning_finds_null_eigenvalue(self):
        g = TorusGrid(3, 8)
        res = tune_to_kernel(warped_family(g), 2)
        assert res.converged
        m = warped_family(g)(res.c)
        assert abs(metric_lowest(m, 2).eigenvalues[1]) < res.tolerance
        assert res.nu_below != res.nu_above

    def test_conformal_path_cannot_change_sign(self):
        # lambda_1 sign is a conformal invariant, so c -> c U_0 on the flat torus has no crossing
        g = TorusGrid(3, 8)
        fam = scaled_factor_family(g, bandlimited_field(g, 1, 1.0))
        with pytest.raises(NoSignChange):
            tune_to_kernel(fam, 2, c_range=(0.0, 2.0), samples=5)

    def test_family_spec_seeds(self):
        g = TorusGrid(3, 8)
        a = FamilySpec(seed=3, count=2).factors(g)
        np.testing.assert_array_equal(a[1].values, bandlimited_field(g, 4, 0.5))
