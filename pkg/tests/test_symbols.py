import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from traceshift import symbols
from traceshift.errors import SpectrumTooClustered
from traceshift.symbols import (
    LaurentPolynomial,
    class_norm,
    contour_pair,
    derivative,
    divided_difference,
    divided_difference_recursive,
    poisson_eval,
    split_plus_minus,
)

from conftest import laurent


def coeff_maps():
    return st.dictionaries(
        st.integers(min_value=-6, max_value=6),
        st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
        max_size=6,
    )


class TestLaurentPolynomial:
    def test_zero_coefficients_dropped(self):
        f = LaurentPolynomial({0: 0.0, 2: 1.0})
        assert f.coeffs == {2: 1.0}

    def test_evaluation(self):
        f = LaurentPolynomial({1: 1.0, -2: 2.0})
        z = 1j
        assert f(z) == pytest.approx(z + 2.0 * z ** (-2))

    def test_json_roundtrip(self, tmp_path):
        f = LaurentPolynomial({-3: 1 + 2j, 4: -0.5})
        p = tmp_path / "f.json"
        f.save(p)
        assert LaurentPolynomial.load(p) == f


class TestDerivative:
    def test_cube(self):
        assert derivative(LaurentPolynomial({3: 1.0}), 2) == LaurentPolynomial({1: 6.0})

    def test_constant(self):
        assert derivative(LaurentPolynomial({0: 5.0}), 1).coeffs == {}

    @given(coeff_maps(), st.integers(0, 3), st.integers(0, 3))
    @settings(max_examples=50, deadline=None)
    def test_composition_exact(self, coeffs, a, b):
        f = LaurentPolynomial(coeffs)
        assert derivative(derivative(f, a), b) == derivative(f, a + b)

    @given(coeff_maps(), st.integers(0, 3))
    @settings(max_examples=50, deadline=None)
    def test_integration_by_parts_identity(self, coeffs, k):
        # l * hat(f^(k))(l) = hat(f^(k+1))(l - 1)
        f = LaurentPolynomial(coeffs)
        dk = derivative(f, k)
        dk1 = derivative(f, k + 1)
        for l in range(-10, 11):
            lhs = l * dk.coeffs.get(l, 0.0)
            rhs = dk1.coeffs.get(l - 1, 0.0)
            assert lhs == pytest.approx(rhs)


class TestDividedDifference:
    def test_cube_at_two_points(self):
        # (1 - i^3) / (1 - i)
        val = divided_difference(LaurentPolynomial({3: 1.0}), [1.0, 1j])
        assert val == pytest.approx(1j)

    def test_confluent_square(self):
        val = divided_difference(LaurentPolynomial({2: 1.0}), [1j, 1j])
        assert val == pytest.approx(2j)

    def test_reciprocal(self):
        val = divided_difference(LaurentPolynomial({-1: 1.0}), [1j, -1j])
        assert val == pytest.approx(-1.0)

    def test_low_degree_vanishes(self):
        assert divided_difference(LaurentPolynomial({1: 1.0}), [1.0, 1j, -1.0]) == 0

    def test_off_circle_rejected(self):
        with pytest.raises(ValueError):
            divided_difference(LaurentPolynomial({1: 1.0}), [2.0, 1.0])

    @pytest.mark.parametrize("seed", range(6))
    @pytest.mark.parametrize("order", [1, 2, 3, 4])
    def test_matches_recursion_on_separated_points(self, seed, order):
        rng = np.random.default_rng(seed)
        f = laurent(seed, 6)
        pts = np.exp(1j * (rng.permutation(8)[: order + 1] * 0.7 + rng.uniform(0, 0.3)))
        closed = divided_difference(f, pts)
        rec = divided_difference_recursive(f, pts)
        assert closed == pytest.approx(rec, rel=1e-9, abs=1e-12)

    @pytest.mark.parametrize("seed", range(6))
    def test_symmetric_under_permutation(self, seed):
        rng = np.random.default_rng(seed + 100)
        f = laurent(seed + 100, 5)
        pts = np.exp(1j * rng.uniform(0, 2 * np.pi, size=4))
        base = divided_difference(f, pts)
        perm = rng.permutation(4)
        assert divided_difference(f, pts[perm]) == pytest.approx(base, rel=1e-12)

    def test_recursion_rejects_confluent(self):
        with pytest.raises(SpectrumTooClustered):
            divided_difference_recursive(lambda z: z, [1.0, 1.0], separation=1e-9)


class TestClassNorm:
    def test_cube(self):
        assert class_norm(LaurentPolynomial({3: 1.0}), 2) == pytest.approx(9.0)

    def test_constant_vanishes_for_positive_order(self):
        assert class_norm(LaurentPolynomial({0: 1.0}), 3) == 0.0

    def test_mixed(self):
        assert class_norm(LaurentPolynomial({1: 1.0, -2: 1.0}), 1) == pytest.approx(3.0)


class TestSplit:
    def test_simple(self):
        plus, minus = split_plus_minus(LaurentPolynomial({1: 1.0, -1: 1.0}))
        assert plus == LaurentPolynomial({1: 1.0})
        assert minus == LaurentPolynomial({-1: 1.0})

    def test_constant_goes_to_plus(self):
        plus, minus = split_plus_minus(LaurentPolynomial({0: 1.0}))
        assert plus == LaurentPolynomial({0: 1.0})
        assert minus.coeffs == {}

    @given(coeff_maps())
    @settings(max_examples=50, deadline=None)
    def test_recombination_exact(self, coeffs):
        f = LaurentPolynomial(coeffs)
        plus, minus = split_plus_minus(f)
        assert plus + minus == f


class TestContourPair:
    def test_residue(self):
        val = contour_pair(LaurentPolynomial({2: 1.0}), LaurentPolynomial({-3: 1.0}))
        assert val == pytest.approx(2j * np.pi)

    def test_no_residue(self):
        assert contour_pair(LaurentPolynomial({1: 1.0}), LaurentPolynomial({-1: 1.0})) == 0

    @pytest.mark.parametrize("m", range(-3, 4))
    @pytest.mark.parametrize("q", range(-3, 4))
    def test_monomial_pairing(self, m, q):
        val = contour_pair(LaurentPolynomial({m: 1.0}), LaurentPolynomial({q: 1.0}))
        expected = 2j * np.pi if m + q == -1 else 0.0
        assert val == pytest.approx(expected)

    @given(coeff_maps(), coeff_maps(), coeff_maps())
    @settings(max_examples=30, deadline=None)
    def test_bilinear(self, a, b, c):
        fa, fb, fc = (LaurentPolynomial(x) for x in (a, b, c))
        lhs = contour_pair(fa + fb, fc)
        rhs = contour_pair(fa, fc) + contour_pair(fb, fc)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


class TestPoisson:
    def test_analytic_part(self):
        value, dz, dzb = poisson_eval(LaurentPolynomial({2: 1.0}), 0.5)
        assert value == pytest.approx(0.25)
        assert dzb == 0

    def test_antianalytic_part(self):
        value, dz, dzb = poisson_eval(LaurentPolynomial({-1: 1.0}), 0.5)
        assert value == pytest.approx(0.5)
        assert dz == 0

    def test_outside_disk_rejected(self):
        with pytest.raises(ValueError):
            poisson_eval(LaurentPolynomial({1: 1.0}), 1.5)

    def test_boundary_matches_function(self):
        f = LaurentPolynomial({2: 1 + 1j, -3: 0.5})
        z = np.exp(0.7j)
        value, _, _ = poisson_eval(f, z)
        assert value == pytest.approx(f(z))

    def test_disk_point_validation(self):
        with pytest.raises(ValueError):
            symbols.DiskPoint(1.1)
