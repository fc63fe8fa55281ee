import math
import unittest
from fractions import Fraction

import numpy as np

from abel_equiv import expr, generators, invariants, transform
from abel_equiv.errors import (
    InvariantError,
    OrderTooLow,
    TresseDenominatorVanishes,
    UnknownInvariant,
)
from abel_equiv.invariants import Kind
from abel_equiv.jet import rpow
from abel_equiv.model import AbelEquation, Family, expand_point
from tests import sample_data

# derivation coefficient of y' = y^3 + x at x = 1
CUBIC_A = 3.0 ** (-2.0 / 3.0)


def constant_quartic() -> AbelEquation:
    return AbelEquation.create(Family.K4, {"a": 1, "b": 0, "c": 1, "d": 1, "e": 1})


class TestCubicWorkedCase(unittest.TestCase):
    def setUp(self):
        self.eq = sample_data.create_cubic()
        self.point = self.eq.jet_point(1.0, 4)

    def test_relative_invariants(self):
        values = invariants.relative_invariants(Family.K3, self.point)
        self.assertEqual(set(values), {"s1", "s3", "s5", "s7", "s9"})
        self.assertAlmostEqual(values["s1"].value, 1.0)
        self.assertAlmostEqual(values["s3"].value, -3.0)
        self.assertAlmostEqual(values["s5"].value, -3.0)
        self.assertAlmostEqual(values["s7"].value, 0.0)

    def test_absolute_invariants(self):
        values = invariants.absolute_invariants(Family.K3, self.point)
        self.assertAlmostEqual(values["J1"].value, 1.0 / 9.0)
        self.assertAlmostEqual(values["J2"].value, 0.0)
        self.assertTrue(values["J1"].defined)

    def test_derivation_coefficient(self):
        a = invariants.derivation_coefficient(Family.K3, self.point)
        self.assertTrue(a.defined)
        self.assertAlmostEqual(a.value, CUBIC_A, places=12)

    def test_invariant_derivatives(self):
        first = invariants.nabla_power(self.eq, 1.0, "J1", 1)
        self.assertEqual(first.name, "nabla_J1")
        self.assertAlmostEqual(first.value, -(5.0 / 9.0) * CUBIC_A, places=12)

        # nabla J1 = -(5/9) 3^(-2/3) x^(-20/3), so one more step gives
        # (100/27) 3^(-4/3) at x = 1
        second = invariants.nabla_power(self.eq, 1.0, "J1", 2)
        self.assertEqual(second.name, "nabla2_J1")
        self.assertAlmostEqual(second.value, 100.0 / 27.0 * CUBIC_A**2, places=10)

    def test_chain(self):
        s3 = invariants.cubic_chain(self.point.jets, 1)
        self.assertAlmostEqual(s3.value, -3.0)
        self.assertAlmostEqual(invariants.cubic_chain(self.point, 2).value, -3.0)
        with self.assertRaises(ValueError):
            invariants.cubic_chain(self.point, 0)
        with self.assertRaises(OrderTooLow):
            invariants.cubic_chain(self.eq.jet_point(1.0, 1), 2)

    def test_signature_along_x(self):
        for x in (0.5, 1.5, 2.0):
            point = self.eq.jet_point(x, 2)
            value = invariants.invariant_jet(point, "J1").value
            self.assertAlmostEqual(value, 1.0 / (9.0 * x**5))


class TestCatalogValues(unittest.TestCase):
    def test_constant_quartic(self):
        point = constant_quartic().jet_point(0.0, 1)
        relative = invariants.relative_invariants(Family.K4, point)
        self.assertAlmostEqual(relative["I1"].value, 8.0)
        self.assertAlmostEqual(relative["I2"].value, 13.0)
        self.assertAlmostEqual(relative["I3"].value, 64.0)

        absolute = invariants.absolute_invariants(Family.K4, point)
        self.assertAlmostEqual(absolute["J1"].value, 13.0 / 64.0)
        self.assertAlmostEqual(absolute["J2"].value, 8.0**-0.5)

        a = invariants.derivation_coefficient(Family.K4, point)
        self.assertAlmostEqual(a.value, 8.0**-1.5)

    def test_constant_quintic(self):
        eq = AbelEquation.create(
            Family.K5, {"a": 1, "b": 0, "c": 0.6, "d": 0, "e": 0, "f": 1}
        )
        point = eq.jet_point(0.0, 1)
        self.assertAlmostEqual(invariants.invariant_jet(point, "K1").value, 3.0)
        a = invariants.derivation_coefficient(Family.K5, point)
        self.assertAlmostEqual(a.value, 1.0 / 9.0)
        absolute = invariants.absolute_invariants(Family.K5, point)
        self.assertAlmostEqual(absolute["J0"].value, 0.0)
        self.assertAlmostEqual(absolute["J1"].value, 250.0 / 3.0**2.5)

    def test_unit_quintic(self):
        eq = AbelEquation.create(
            Family.K5, {"a": 1, "b": 1, "c": 1, "d": 1, "e": 1, "f": 1}
        )
        relative = invariants.relative_invariants(Family.K5, eq.jet_point(0.0, 1))
        self.assertAlmostEqual(relative["K1"].value, 3.0)
        self.assertAlmostEqual(relative["K2"].value, 14.0)

    def test_constant_singular_quintic(self):
        eq = AbelEquation.create(Family.K5S2, {"p": 1, "q": 0, "s": 1, "t": 3})
        point = eq.jet_point(0.0, 2)
        relative = invariants.relative_invariants(Family.K5S2, point)
        self.assertAlmostEqual(relative["M2"].value, 3.0)
        self.assertAlmostEqual(relative["M4"].value, -15.0)
        value = invariants.invariant_jet(point, "J").value
        self.assertAlmostEqual(value, -15.0 / 3.0**1.8)
        self.assertAlmostEqual(value, -2.07618, places=5)

    def test_singular_quintic_k1_vanishes_and_k2_is_a_multiple_of_r(self):
        eq = sample_data.create_singular_quintic_first()
        for x in (-0.2, 0.3, 0.9):
            point = eq.jet_point(x, 1)
            expanded = expand_point(point)
            k1 = invariants.invariant_jet(expanded, "K1").value
            k2 = invariants.invariant_jet(expanded, "K2").value
            p, r = point["p"].value, point["r"].value
            self.assertAlmostEqual(k1, 0.0, places=10)
            self.assertAlmostEqual(k2, 25.0 * p**10 * r, places=9)

    def test_singular_quintic_k1_vanishes_for_any_r(self):
        eq = AbelEquation.create(
            Family.K5S1, {"p": "1+x", "q": "0", "r": "2+x^2", "s": "0", "t": "0"}
        )
        expanded = expand_point(eq.jet_point(0.3, 1))
        self.assertAlmostEqual(
            invariants.invariant_jet(expanded, "K1").value, 0.0, places=10
        )
        self.assertAlmostEqual(
            invariants.invariant_jet(expanded, "K2").value,
            25.0 * 1.3**10 * 2.09,
            places=8,
        )

    def test_vanishing_denominator(self):
        point = sample_data.create_cubic(d="0").jet_point(0.5, 2)
        values = invariants.absolute_invariants(Family.K3, point)
        self.assertFalse(values["J1"].defined)
        self.assertTrue(math.isnan(values["J1"].value))
        self.assertFalse(invariants.derivation_coefficient(Family.K3, point).defined)

    def test_relative_invariants_follow_the_jet_order(self):
        point = sample_data.create_cubic().jet_point(1.0, 2)
        self.assertEqual(
            set(invariants.relative_invariants(Family.K3, point)), {"s1", "s3", "s5"}
        )
        shallow = sample_data.create_singular_quartic().jet_point(0.3, 1)
        with self.assertRaises(OrderTooLow):
            invariants.relative_invariants(Family.K4S, shallow)

    def test_auxiliary_invariants_are_kept_apart(self):
        self.assertNotIn("J_printed", invariants.names(Family.K4S, Kind.ABSOLUTE))
        point = sample_data.create_singular_quartic().jet_point(0.3, 2)
        values = invariants.absolute_invariants(
            Family.K4S, point, kind=Kind.AUXILIARY
        )
        self.assertEqual(set(values), {"J_printed"})

    def test_unknown_invariant(self):
        with self.assertRaises(UnknownInvariant):
            invariants.spec_of(Family.K3, "I0")

    def test_component_names(self):
        self.assertEqual(invariants.component_name("J1", 0), "J1")
        self.assertEqual(invariants.component_name("J1", 1), "nabla_J1")
        self.assertEqual(invariants.component_name("J", 3), "nabla3_J")
        self.assertEqual(invariants.split_component("nabla_J2"), ("J2", 1))
        self.assertEqual(invariants.split_component("nabla3_J"), ("J", 3))
        self.assertEqual(invariants.split_component("J0"), ("J0", 0))

    def test_required_order(self):
        self.assertEqual(invariants.required_order(Family.K3, "J1"), 2)
        self.assertEqual(invariants.required_order(Family.K3, "J1", 1), 3)
        self.assertEqual(invariants.required_order(Family.K4, "J1", 1), 2)


class TestInvariance(unittest.TestCase):
    def test_absolute_invariants_survive_transformations(self):
        rng = np.random.default_rng(5)
        x0 = 0.3
        for family, eq in sample_data.create_equations().items():
            names = invariants.names(family, Kind.ABSOLUTE)
            order = max(invariants.spec_of(family, n).order for n in names)
            point = eq.jet_point(x0, order)
            before = invariants.absolute_invariants(family, point)
            for trial in range(8):
                t = generators.random_transformation(rng, x0)
                image = transform.apply(t, eq, x0, order)
                after = invariants.absolute_invariants(family, image)
                for name, value in before.items():
                    with self.subTest(family=family.tag, name=name, trial=trial):
                        self.assertTrue(value.defined)
                        np.testing.assert_allclose(
                            after[name].value, value.value, rtol=1e-7, atol=1e-9
                        )

    def test_invariant_derivative_survives_transformations(self):
        rng = np.random.default_rng(9)
        eq = sample_data.create_quartic()
        t = generators.random_transformation(rng, 0.3)
        image = transform.TransformedEquation(t, eq, anchor=0.3)
        x1 = expr.evaluate(t.f, 0.3)
        before = invariants.nabla_power(eq, 0.3, "J1", 1)
        after = invariants.nabla_power(image, x1, "J1", 1)
        self.assertAlmostEqual(after.value, before.value, places=7)

    def test_constant_coefficients_have_no_derivative(self):
        point = constant_quartic().jet_point(0.0, 3)
        for name in ("J1", "J2"):
            self.assertAlmostEqual(invariants.nabla_jet(point, name, 1).value, 0.0)


class TestTresseDerivative(unittest.TestCase):
    def test_derivative_of_an_invariant_by_itself(self):
        eq = sample_data.create_cubic()
        value = invariants.tresse_derivative(eq, 1.0, "J1", "J1")
        self.assertEqual(value.name, "DJ1/DJ1")
        self.assertAlmostEqual(value.value, 1.0)

    def test_chain_rule(self):
        # DF/DJ * nabla J = nabla F
        eq = sample_data.create_cubic()
        slope = invariants.tresse_derivative(eq, 1.0, "nabla_J1", "J1").value
        nabla_j = invariants.nabla_power(eq, 1.0, "J1", 1).value
        nabla_f = invariants.nabla_power(eq, 1.0, "J1", 2).value
        self.assertAlmostEqual(slope * nabla_j, nabla_f, places=9)

    def test_constant_invariant(self):
        with self.assertRaises(TresseDenominatorVanishes):
            invariants.tresse_derivative(constant_quartic(), 0.0, "J2", "J1")


class TestCanonicalCheck(unittest.TestCase):
    def test_examples(self):
        self.assertTrue(invariants.canonical_check(sample_data.create_cubic(), 0.4))
        not_canonical = AbelEquation.create(
            Family.K3, {"a": 1, "b": 1, "c": 0, "d": 0}
        )
        self.assertFalse(invariants.canonical_check(not_canonical, 0.4))
        quartic = AbelEquation.create(
            Family.K4, {"a": 1, "b": 0, "c": "x", "d": 0, "e": 1}
        )
        self.assertTrue(invariants.canonical_check(quartic, 0.4))

    def test_leading_coefficient_must_be_constant(self):
        eq = AbelEquation.create(Family.K3, {"a": "1+x", "b": 0, "c": 0, "d": 1})
        self.assertFalse(invariants.canonical_check(eq, 0.0))


class TestWeights(unittest.TestCase):
    def test_leading_coefficients(self):
        fit = invariants.weight_fit(Family.K3, "s1")
        self.assertEqual((fit.g_exponent, fit.f_exponent), (Fraction(-2), Fraction(-1)))
        fit = invariants.weight_fit(Family.K4, "I0")
        self.assertEqual((fit.g_exponent, fit.f_exponent), (Fraction(-3), Fraction(-1)))
        self.assertLess(fit.residual, 1e-6)

    def test_absolute_invariant_has_no_weight(self):
        with self.assertRaises(InvariantError):
            invariants.weight_fit(Family.K3, "J1")


class TestSyzygy(unittest.TestCase):
    def check(self, eq: AbelEquation, x0: float) -> None:
        point = eq.jet_point(x0, 4)
        j1 = invariants.invariant_jet(point, "J1")
        j2 = invariants.invariant_jet(point, "J2").value
        root = rpow(j1, 1, 3)
        nabla_root = invariants.nabla(invariants.derivation_jet(point), root).value
        self.assertAlmostEqual(j2, root.value * nabla_root + 5.0 / 3.0 * j1.value)

    def test_worked_case(self):
        self.check(sample_data.create_cubic(), 1.0)

    def test_general_cubic(self):
        eq = AbelEquation.create(
            Family.K3, {"a": "1+0.2*x", "b": "0.5", "c": "x", "d": "1+x^2"}
        )
        self.check(eq, 0.3)


class TestRestriction(unittest.TestCase):
    def test_ratio_is_constant(self):
        eq = sample_data.create_singular_quartic()
        for x in (0.1, 0.3, 0.6):
            ratio = invariants.restriction_ratio(eq.jet_point(x, 2))
            self.assertAlmostEqual(ratio, 12.0, places=8)

    def test_ratio_is_undefined_where_l1_vanishes(self):
        eq = AbelEquation.create(Family.K4S, {"p": 1, "q": "x", "r": 1, "s": "x-1"})
        self.assertIsNone(invariants.restriction_ratio(eq.jet_point(0.4, 2)))


if __name__ == "__main__":
    unittest.main()
