import math
import unittest

import hypothesis.strategies as st
import numpy as np
from hypothesis import assume, given, settings

from abel_equiv import jet
from abel_equiv.errors import (
    BasePointMismatch,
    DivisionByZeroConstantTerm,
    DomainError,
    NonFiniteCoefficient,
    NonInvertibleJet,
    OrderMismatch,
    OrderTooLow,
)
from abel_equiv.jet import Jet, compose, revert, rpow
from tests.sample_data import create_jet

ORDER = 5
coefficients = st.lists(
    st.floats(min_value=-1.0, max_value=1.0, allow_nan=False),
    min_size=ORDER + 1,
    max_size=ORDER + 1,
)


def _jet(values) -> Jet:
    return Jet(0.25, values)


class TestJetRing(unittest.TestCase):
    @settings(max_examples=50, deadline=None)
    @given(coefficients, coefficients, coefficients)
    def test_ring_laws(self, a, b, c):
        a, b, c = _jet(a), _jet(b), _jet(c)
        np.testing.assert_allclose(
            ((a + b) * c).coeffs, (a * c + b * c).coeffs, atol=1e-12
        )
        np.testing.assert_allclose(
            ((a * b) * c).coeffs, (a * (b * c)).coeffs, atol=1e-12
        )
        np.testing.assert_allclose((a * b).coeffs, (b * a).coeffs, atol=1e-12)
        np.testing.assert_allclose((a - a).coeffs, np.zeros(ORDER + 1))

    @settings(max_examples=50, deadline=None)
    @given(coefficients, coefficients)
    def test_division_inverts_multiplication(self, a, b):
        assume(abs(b[0]) > 0.5)
        a, b = _jet(a), _jet(b)
        np.testing.assert_allclose(((a * b) / b).coeffs, a.coeffs, atol=1e-9)

    def test_product_of_polynomials(self):
        # (1 + x)(1 - x) = 1 - x^2 around 0
        a = Jet(0.0, [1.0, 1.0, 0.0, 0.0])
        b = Jet(0.0, [1.0, -1.0, 0.0, 0.0])
        np.testing.assert_allclose((a * b).coeffs, [1.0, 0.0, -1.0, 0.0])

    def test_mixed_orders_truncate(self):
        a = Jet(0.0, [1.0, 2.0, 3.0])
        b = Jet(0.0, [1.0, 1.0])
        self.assertEqual((a + b).order, 1)
        with self.assertRaises(OrderMismatch):
            jet.arith("add", a, b)

    def test_base_point_mismatch(self):
        with self.assertRaises(BasePointMismatch):
            Jet(0.0, [1.0, 1.0]) + Jet(1.0, [1.0, 1.0])

    def test_division_by_zero_constant_term(self):
        with self.assertRaises(DivisionByZeroConstantTerm):
            Jet(0.0, [1.0, 1.0]) / Jet(0.0, [0.0, 1.0])

    def test_non_finite_coefficient(self):
        with self.assertRaises(NonFiniteCoefficient):
            Jet(0.0, [1.0, math.inf])

    def test_scalar_operands(self):
        a = Jet(2.0, [1.0, 1.0, 0.5])
        np.testing.assert_allclose((2 * a + 1).coeffs, [3.0, 2.0, 1.0])
        np.testing.assert_allclose((1 - a).coeffs, [0.0, -1.0, -0.5])


class TestJetCalculus(unittest.TestCase):
    def test_derivative_shifts_coefficients(self):
        a = Jet(0.0, [1.0, 2.0, 3.0, 4.0])
        np.testing.assert_allclose(a.derivative().coeffs, [2.0, 6.0, 12.0])
        np.testing.assert_allclose(a.derivatives(), [1.0, 2.0, 6.0, 24.0])

    def test_order_zero_has_no_derivative(self):
        with self.assertRaises(OrderTooLow):
            Jet(0.0, [1.0]).derivative()

    def test_truncate_cannot_raise_order(self):
        with self.assertRaises(OrderTooLow):
            Jet(0.0, [1.0, 2.0]).truncate(3)

    def test_evaluate(self):
        a = Jet(1.0, [1.0, 2.0, 3.0])
        self.assertAlmostEqual(a.evaluate(0.5), 1.0 + 1.0 + 0.75)

    def test_compose_with_exp(self):
        # exp(sin(x)) around 0 is 1 + x + x^2/2 + 0*x^3 - x^4/8
        inner = jet.sin_jet(0.0, 4)
        outer = jet.exp_jet(inner.value, 4)
        np.testing.assert_allclose(
            compose(outer, inner).coeffs, [1.0, 1.0, 0.5, 0.0, -0.125], atol=1e-15
        )

    def test_compose_checks_base_point(self):
        with self.assertRaises(BasePointMismatch):
            compose(Jet(1.0, [1.0, 1.0]), Jet(0.0, [0.0, 1.0]))

    def test_revert_inverts(self):
        for seed in range(5):
            j = create_jet(seed)
            if abs(j.coeffs[1]) < 0.2:
                continue
            roundtrip = compose(revert(j), j)
            np.testing.assert_allclose(
                roundtrip.coeffs, Jet.identity(j.base_point, j.order).coeffs, atol=1e-8
            )

    def test_revert_of_exp_is_log(self):
        exp = jet.exp_jet(0.0, 6)
        log = jet.log_jet(1.0, 6)
        np.testing.assert_allclose(revert(exp).coeffs, log.coeffs, atol=1e-12)

    def test_revert_needs_slope(self):
        with self.assertRaises(NonInvertibleJet):
            revert(Jet(0.0, [1.0, 0.0, 1.0]))

    def test_log_domain(self):
        with self.assertRaises(DomainError):
            jet.log_jet(-1.0, 3)


class TestRealPowers(unittest.TestCase):
    def test_cube_root_of_negative_value(self):
        a = Jet(0.0, [-8.0, 1.0, 0.0, 0.0])
        root = rpow(a, 1, 3)
        self.assertAlmostEqual(root.value, -2.0)
        np.testing.assert_allclose((root**3).coeffs, a.coeffs, atol=1e-12)

    def test_even_root_of_negative_value(self):
        with self.assertRaises(DomainError):
            rpow(Jet(0.0, [-4.0, 1.0]), 1, 2)

    def test_zero_constant_term(self):
        with self.assertRaises(DomainError):
            rpow(Jet(0.0, [0.0, 1.0]), 1, 3)

    def test_fraction_is_reduced(self):
        a = Jet(0.0, [-8.0, 1.0, 0.0])
        # 2/6 is an odd root once reduced
        np.testing.assert_allclose(rpow(a, 2, 6).coeffs, rpow(a, 1, 3).coeffs)

    def test_square_root_series(self):
        # sqrt(1 + x) = 1 + x/2 - x^2/8 + x^3/16
        a = Jet(0.0, [1.0, 1.0, 0.0, 0.0])
        np.testing.assert_allclose(
            rpow(a, 1, 2).coeffs, [1.0, 0.5, -0.125, 0.0625], atol=1e-15
        )

    def test_absolute(self):
        a = Jet(0.0, [-2.0, 1.0])
        np.testing.assert_allclose(jet.absolute(a).coeffs, [2.0, -1.0])
        with self.assertRaises(DomainError):
            jet.absolute(Jet(0.0, [0.0, 1.0]))


if __name__ == "__main__":
    unittest.main()
