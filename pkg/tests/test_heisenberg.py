import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from confnodal.heisenberg import (CharacterLabel, HeisenbergModel, HermiteFamily, HermiteLabel, LatticeError,
                                  UnsupportedDimension, count_negative, dual_lattice_points,
                                  laplace_eigenvalue, paneitz_constants, paneitz_eigenvalue, scalar_curvature,
                                  spectrum_lines, yamabe_eigenvalue, yamabe_null_parameter)
from confnodal.heisenberg.eigenfunctions import (NotAtNullParameter, character_null_analysis,
                                                 eigenfunction_value,
                                                 nodal_set_hermite_ground, no_character_in_kernel)
from confnodal.heisenberg.grid import (GridDivisibilityError, twisted_grid_laplacian, twisted_grid_lowest,
                                       twisted_grid_yamabe_inertia)
from confnodal.linalg import lanczos_operator

PI = math.pi


def oracle_yamabe_count(d, r, s, n_max, level_max, radius):
    """Brute-force count from the eigenvalue formulas, written out independently."""
    shift = (2 * d - 1) / 16 * s ** (2 * d + 2)
    total = 0
    for n in range(1, n_max + 1):
        for a in range(level_max + 1):
            if 2 * PI * n * s * (d + 2 * a) + 4 * n * n * s ** (-2 * d) * PI ** 2 < shift:
                total += 2 * n ** d * math.prod(r) * math.comb(a + d - 1, d - 1)
    for xi in itertools.product(range(-radius, radius + 1), repeat=d):
        for nu in itertools.product(*[range(-radius * rj, radius * rj + 1) for rj in r]):
            lap = 4 * PI ** 2 * (sum(v * v for v in xi) + s * s * sum((v / rj) ** 2 for v, rj in zip(nu, r)))
            total += lap < shift
    return total


class TestModel:
    def test_divisibility_chain(self):
        HeisenbergModel(2, (2, 4), 1.0)
        with pytest.raises(LatticeError):
            HeisenbergModel(2, (2, 3), 1.0)
        with pytest.raises(LatticeError):
            HeisenbergModel(2, (1,), 1.0)
        with pytest.raises(ValueError):
            HeisenbergModel(1, (1,), 0.0)

    def test_volume_independent_of_s(self):
        assert HeisenbergModel(2, (2, 4), 0.5).volume == HeisenbergModel(2, (2, 4), 7.0).volume == 8


class TestLattice:
    def test_radius_one_and_a_half(self):
        pts = dual_lattice_points(HeisenbergModel(1, (1,), 1.0), 1.5)
        expected = {(x, y) for x in range(-2, 3) for y in range(-2, 3) if x * x + y * y <= 2.25}
        assert len(pts) == 9
        assert {(p.xi[0], p.nu[0]) for p in pts} == expected

    def test_half_integer_eta(self):
        m = HeisenbergModel(1, (2,), 1.0)
        etas = {p.eta(m) for p in dual_lattice_points(m, 0.6)}
        assert (0.5,) in etas and (-0.5,) in etas

    def test_radius_zero(self):
        pts = dual_lattice_points(HeisenbergModel(2, (1, 1), 1.0), 0)
        assert [(p.xi, p.nu) for p in pts] == [((0, 0), (0, 0))]


class TestEigenvalues:
    def test_examples(self):
        m = HeisenbergModel(1, (1,), 1.0)
        assert laplace_eigenvalue(m, CharacterLabel((1,), (0,))) == pytest.approx(4 * PI ** 2)
        assert laplace_eigenvalue(m, HermiteFamily(1, 0)) == pytest.approx(2 * PI + 4 * PI ** 2)
        assert laplace_eigenvalue(m, CharacterLabel((0,), (0,))) == 0
        assert yamabe_eigenvalue(m, CharacterLabel((1,), (0,))) == pytest.approx(4 * PI ** 2 - 1 / 16)
        assert yamabe_eigenvalue(m, HermiteFamily(1, 0)) == pytest.approx(2 * PI + 4 * PI ** 2 - 1 / 16)

    def test_scalar_curvature(self):
        assert scalar_curvature(HeisenbergModel(1, (1,), 1.0)) == pytest.approx(-0.5)
        assert scalar_curvature(HeisenbergModel(2, (1, 1), 1.0)) == pytest.approx(-1.0)
        vals = [scalar_curvature(HeisenbergModel(2, (1, 1), s)) for s in (1e-3, 0.1, 1.0, 2.0)]
        assert abs(vals[0]) < 1e-15 and all(b < a for a, b in zip(vals, vals[1:]))

    def test_multiplicity_formula(self):
        m = HeisenbergModel(2, (2, 4), 1.3)
        for line in spectrum_lines(m, "laplacian", 200.0):
            if isinstance(line.label, HermiteFamily):
                n, a = abs(line.label.n), line.label.level
                assert line.multiplicity == n ** 2 * 8 * math.comb(a + 1, 1)

    def test_s_changes_only_eigenvalues(self):
        a = HeisenbergModel(1, (2,), 1.0)
        b = a.with_s(1.7)
        for lab in [CharacterLabel((1,), (1,)), HermiteFamily(2, 3)]:
            assert laplace_eigenvalue(a, lab) != laplace_eigenvalue(b, lab)
        fam = HermiteFamily(3, 2)
        assert fam.multiplicity(a) == fam.multiplicity(b)

    @given(st.integers(1, 3), st.integers(-3, 3).filter(bool), st.integers(0, 2))
    def test_null_parameter_round_trip(self, d, n, level):
        s = yamabe_null_parameter(d, n, level)
        model = HeisenbergModel(d, (1,) * d, s)
        assert abs(yamabe_eigenvalue(model, HermiteFamily(n, level))) < 1e-10 * s ** (2 * d + 2)

    def test_null_parameter_examples(self):
        assert yamabe_null_parameter(1, 1, 0) == pytest.approx((8 * PI * (2 + math.sqrt(5))) ** (1 / 3))
        assert yamabe_null_parameter(1, 1, 0) == pytest.approx(4.7396, abs=1e-4)
        assert yamabe_null_parameter(1, 2, 0) == pytest.approx((16 * PI * (2 + math.sqrt(5))) ** (1 / 3))


class TestPaneitzConstants:
    def test_printed_formulas(self):
        # c0 = (2d-3) ((2d+1)(2d-1)^2 - 4(16d^2+18d+1)) / (256 (2d-1)^2), c1 = ((2d-1)^2 - 12) / (8(2d-1))
        d = sympy.symbols("d")
        c0 = (2 * d - 3) * ((2 * d + 1) * (2 * d - 1) ** 2 - 4 * (16 * d ** 2 + 18 * d + 1)) / (256 * (2 * d - 1) ** 2)
        c1 = ((2 * d - 1) ** 2 - 12) / (8 * (2 * d - 1))
        for k in range(1, 11):
            pc = paneitz_constants(k)
            assert pc.c0 == Fraction(str(sympy.nsimplify(c0.subs(d, k))))
            assert pc.c1 == Fraction(str(sympy.nsimplify(c1.subs(d, k))))

    def test_examples(self):
        pc = paneitz_constants(2)
        assert pc.c1 == Fraction(-1, 8) and pc.c0 == Fraction(-359, 2304)
        assert float(pc.delta0) == pytest.approx(0.6389, abs=1e-4)
        pc1 = paneitz_constants(1)
        assert pc1.c1 == Fraction(-11, 8) and pc1.c0 == Fraction(137, 256)
        assert pc1.delta0 < 0

    def test_discriminant_positive_and_closed_form_differs(self):
        for d in range(2, 11):
            pc = paneitz_constants(d)
            assert pc.delta0 > 0
            assert pc.delta0_closed_form != pc.delta0
            assert pc.report()["closed_form_discrepancy"] != 0

    def test_paneitz_eigenvalues(self):
        for d in (2, 3):
            m = HeisenbergModel(d, (1,) * d, 1.4)
            c0 = float(paneitz_constants(d).c0)
            assert paneitz_eigenvalue(m, CharacterLabel((0,) * d, (0,) * d)) == pytest.approx(c0 * 1.4 ** (4 * d + 4))
        m = HeisenbergModel(2, (1, 1), 1.0)
        mu = 4 * PI + 4 * PI ** 2
        expected = mu * mu + mu / 8 - 359 / 2304 - 4 * 3 / 3 * PI ** 2
        assert paneitz_eigenvalue(m, HermiteFamily(1, 0)) == pytest.approx(expected)


class TestCounting:
    @pytest.mark.parametrize("d,r,s", [(1, (1,), 5.0), (1, (2,), 7.5), (2, (1, 1), 3.0), (2, (1, 2), 3.6)])
    def test_yamabe_against_brute_force(self, d, r, s):
        got = count_negative(HeisenbergModel(d, r, s), "yamabe").total
        assert got == oracle_yamabe_count(d, r, s, 40, 40, 12)

    def test_below_first_threshold_no_hermite(self):
        c = count_negative(HeisenbergModel(1, (1,), 4.5), "yamabe")
        assert c.hermite_total == 0

    def test_paneitz_against_enumeration(self):
        for s in (2.0, 2.6):
            m = HeisenbergModel(2, (1, 1), s)
            got = count_negative(m, "paneitz").total
            lines = spectrum_lines(m, "paneitz", 0.0)
            assert got == sum(l.multiplicity for l in lines if l.eigenvalue < 0)

    @pytest.mark.parametrize("d", [2, 3, 10])
    def test_paneitz_small_s_only_constant_mode(self, d):
        # the constant character has eigenvalue c0 s^{4d+4}, negative whenever c0 < 0
        c = count_negative(HeisenbergModel(d, (1,) * d, 0.5), "paneitz")
        assert c.hermite_total == 0
        assert c.total == (1 if paneitz_constants(d).c0 < 0 else 0)

    def test_paneitz_d1_unsupported(self):
        with pytest.raises(UnsupportedDimension):
            count_negative(HeisenbergModel(1, (1,), 2.0), "paneitz")

    def test_certificate_sums(self):
        c = count_negative(HeisenbergModel(2, (1, 2), 4.0), "yamabe")
        herm = sum(mult for _, mult in c.hermite_labels())
        assert herm == c.hermite_total
        assert c.total == c.hermite_total + c.character_total


class TestEigenfunctions:
    def setup_method(self):
        self.s0 = yamabe_null_parameter(1, 1, 0)
        self.model = HeisenbergModel(1, (1,), self.s0)

    def test_constant_character(self):
        assert eigenfunction_value(self.model, CharacterLabel((0,), (0,)), np.array([0.3, 0.2, 0.9])) == 1

    def test_ground_family_zero(self):
        v = eigenfunction_value(self.model, HermiteLabel(1, (0,)), np.array([0.5, 0.5, 0.37]))
        assert abs(v) < 1e-10

    def test_theta_against_ksum(self):
        rng = np.random.default_rng(0)
        pts = rng.random((50, 3))
        lab = HermiteLabel(1, (0,))
        a = eigenfunction_value(self.model, lab, pts, method="theta")
        b = eigenfunction_value(self.model, lab, pts, method="ksum")
        np.testing.assert_allclose(a, b, atol=1e-10)

    def test_nodal_set_description(self):
        pieces = nodal_set_hermite_ground(self.model)
        assert len(pieces) == 1 and pieces[0].x_value == 0.5 and pieces[0].y_values == (0.5,)
        with pytest.raises(NotAtNullParameter):
            nodal_set_hermite_ground(self.model.with_s(self.s0 * 1.01))

    def test_character_null_parameter(self):
        rep = character_null_analysis(HeisenbergModel(1, (1,), 1.0), 0, 1)
        assert rep.s == pytest.approx(8 * PI)
        assert rep.residual < 1e-10
        assert rep.kernel_dimension >= 1
        rep0 = character_null_analysis(HeisenbergModel(1, (1,), 1.0), 0, 0)
        assert rep0.s is None and rep0.kernel_dimension == 0

    def test_no_character_at_hermite_null_parameter(self):
        assert no_character_in_kernel(self.model)


class TestTwistedGrid:
    def test_constants_in_kernel(self):
        m = HeisenbergModel(1, (1,), 1.0)
        op = twisted_grid_laplacian(m, 8)
        np.testing.assert_allclose(op.matvec(np.ones(op.dim)), 0, atol=1e-10)
        assert abs(lanczos_operator(op, 1, tol=1e-10).eigenvalues[0]) < 1e-8

    def test_grid_converges_to_closed_form(self):
        m = HeisenbergModel(1, (1,), 1.0)
        exact = np.array(sorted(v for l in spectrum_lines(m, "laplacian", 60.0)
                                for v in [l.eigenvalue] * l.multiplicity if v > 1e-12))[:6]
        errs = []
        for N in (16, 32):
            grid = twisted_grid_lowest(m, N, 7)[1:]
            errs.append(np.max(np.abs(grid - exact) / exact))
        assert errs[1] < errs[0] / 3

    def test_too_coarse_grid(self):
        with pytest.raises(GridDivisibilityError):
            twisted_grid_laplacian(HeisenbergModel(1, (1,), 1.0), 4)

    @pytest.mark.parametrize("s", [3.0, 4.0, 5.5])
    def test_yamabe_inertia_matches_closed_form(self, s):
        m = HeisenbergModel(1, (1,), s)
        neg, zero, _ = twisted_grid_yamabe_inertia(m, 32)
        assert neg == count_negative(m, "yamabe").total
