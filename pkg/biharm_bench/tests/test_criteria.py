import unittest

import numpy as np

from biharm_bench.criteria import (
    CRITERIA,
    RESIDUAL_FUNCTIONS,
    classification_identities,
    curvature_contraction_residual,
    humbilical_residual,
    kahler_residual,
    kahler_rewriting_residuals,
    reduced_residual,
    reduced_residual_of_field,
    spaceform_residual,
    split_residual,
)
from biharm_bench.criteria.residuals import humbilical_equations, reduced_equations
from biharm_bench.errors import NotLagrangianError, ReductionInapplicableError
from biharm_bench.family import (
    chen_immersion,
    clifford_torus_lift,
    flat_plane,
    generic_legendre_curve,
    holomorphic_control,
    humbilical_coefficients,
    lambda_from_mu,
    mu_roots,
    unit_circle,
    warped_product_immersion,
)
from biharm_bench.geometry import HUmbilicalField, LocalGeometry

CHEN_POINTS = {2: (0.7, 1.1), 3: (2.1, 1.2, 0.4)}


class TestBiharmonicFamily(unittest.TestCase):
    def test_every_criterion_vanishes(self):
        for m, point in CHEN_POINTS.items():
            for index in (0, 1, 3):
                geometry = LocalGeometry(chen_immersion(m, mu_roots(m)[index]), point)
                for name in CRITERIA:
                    residual = RESIDUAL_FUNCTIONS[name](geometry)
                    self.assertEqual(residual.name, name)
                    self.assertLess(residual.worst, 1e-6, msg=f"{name} m={m} root={index}")

    def test_non_biharmonic_member(self):
        # mu = 1.5 is not a root: every criterion sees the same nonzero bitension.
        for m, point in CHEN_POINTS.items():
            immersion = chen_immersion(m, 1.5)
            split = split_residual(immersion, point)
            kahler = kahler_residual(immersion, point)
            spaceform = spaceform_residual(immersion, point)
            self.assertGreater(split.worst, 1e-2)
            for other in (kahler, spaceform):
                self.assertAlmostEqual(other.tangential_norm, split.tangential_norm, delta=1e-6)
                self.assertAlmostEqual(other.normal_norm, split.normal_norm, delta=1e-6)
            reduced = reduced_residual(immersion, point)
            self.assertGreater(reduced.per_equation["normal_trace"], 1e-2)
            humbilical = humbilical_residual(immersion, point)
            self.assertAlmostEqual(humbilical.normal_norm, spaceform.normal_norm, delta=1e-6)
            self.assertAlmostEqual(humbilical.tangential_norm, spaceform.tangential_norm, delta=1e-6)

    def test_rigid_chart_shift(self):
        immersion = chen_immersion(2, 1.5)
        offsets = (0.3, 0.5)
        moved = immersion.shifted(offsets)
        point = CHEN_POINTS[2]
        moved_point = tuple(x - o for x, o in zip(point, offsets))
        for name in CRITERIA:
            before = RESIDUAL_FUNCTIONS[name](LocalGeometry(immersion, point))
            after = RESIDUAL_FUNCTIONS[name](LocalGeometry(moved, moved_point))
            self.assertAlmostEqual(before.tangential_norm, after.tangential_norm, delta=1e-9)
            self.assertAlmostEqual(before.normal_norm, after.normal_norm, delta=1e-9)

    def test_trace_equation_on_the_family(self):
        # a constant and k = 0 on this family: only a (lambda^2 + (m-1) mu^2 - m - 3) remains.
        m, mu = 2, 1.5
        lam, _, a = humbilical_coefficients(m, mu)
        residual = reduced_residual(chen_immersion(m, mu), CHEN_POINTS[m])
        expected = abs(a * (lam * lam + (m - 1) * mu * mu - (m + 3)))
        self.assertAlmostEqual(residual.per_equation["normal_trace"], expected, delta=1e-6)

    def test_rewritings_match_direct_contraction(self):
        for m, point in CHEN_POINTS.items():
            geometry = LocalGeometry(chen_immersion(m, 1.5), point)
            for name, value in kahler_rewriting_residuals(geometry).items():
                self.assertLess(value, 1e-6, msg=name)
            self.assertLess(curvature_contraction_residual(geometry), 1e-8)


class TestControls(unittest.TestCase):
    def test_flat_plane(self):
        geometry = LocalGeometry(flat_plane(2), (0.2, 0.5))
        for name in ("split", "kahler", "spaceform", "humbilical"):
            residual = RESIDUAL_FUNCTIONS[name](geometry)
            self.assertEqual(residual.scale, 0.0)
            self.assertLess(residual.worst, 1e-12, msg=name)
        with self.assertRaises(ReductionInapplicableError):
            RESIDUAL_FUNCTIONS["reduced"](geometry)

    def test_minimal_torus(self):
        for m in (2, 3):
            geometry = LocalGeometry(clifford_torus_lift(m), tuple(0.4 + 0.3 * k for k in range(m)))
            for name in ("split", "kahler", "spaceform"):
                residual = RESIDUAL_FUNCTIONS[name](geometry)
                self.assertLess(residual.tangential_norm, 1e-8, msg=name)
                self.assertLess(residual.normal_norm, 1e-8, msg=name)

    def test_unit_circle_is_not_biharmonic(self):
        # tau_2 = -gamma, a unit normal vector.
        for residual in (split_residual(unit_circle(), (0.4,)), spaceform_residual(unit_circle(), (0.4,))):
            self.assertAlmostEqual(residual.normal_norm, 1.0, delta=1e-10)
            self.assertLess(residual.tangential_norm, 1e-10)
            self.assertAlmostEqual(residual.worst, 1.0, delta=1e-10)

    def test_generic_warped_product_is_not_biharmonic(self):
        for m, point in ((2, (0.5, 1.0)), (3, (0.5, 1.0, 2.0))):
            immersion = warped_product_immersion(generic_legendre_curve(), m, name="warped-from-ode")
            residual = humbilical_residual(immersion, point)
            self.assertGreater(residual.worst, 1e-3, msg=f"m={m}")

    def test_complex_line_is_rejected(self):
        with self.assertRaises(NotLagrangianError):
            kahler_residual(holomorphic_control(), (0.1, 0.2))
        # The general criterion does not need the Lagrangian condition.
        self.assertLess(split_residual(holomorphic_control(), (0.1, 0.2)).worst, 1e-12)


class TestSyntheticFields(unittest.TestCase):
    def test_constant_biharmonic_data(self):
        m = 3
        lam, mu, _ = humbilical_coefficients(m, mu_roots(m)[0])
        field = HUmbilicalField.constant(m, lam, mu, epsilon=1.0)
        first, second, trace_term, transverse = humbilical_equations(field)
        self.assertEqual(first, 0.0)
        np.testing.assert_array_equal(second, 0.0)
        np.testing.assert_array_equal(transverse, 0.0)
        self.assertLess(abs(trace_term), 1e-10)

    def test_constant_data_off_the_family(self):
        field = HUmbilicalField.constant(3, lam=1.0, mu=0.5, epsilon=1.0)
        # a = 2/3 and lambda^2 + 2 mu^2 - 6 = -4.5.
        self.assertAlmostEqual(humbilical_equations(field)[2], -3.0)
        self.assertAlmostEqual(reduced_equations(field)[2], -3.0)
        residual = reduced_residual_of_field(field, scale=2.0)
        self.assertAlmostEqual(residual.normal_norm, 3.0)
        self.assertAlmostEqual(residual.worst, 1.5)

    def test_reduction_guards(self):
        with self.assertRaises(ReductionInapplicableError):
            reduced_equations(HUmbilicalField.constant(3, lam=1.0, mu=0.0, epsilon=1.0))
        omega = np.zeros((3, 3, 3))
        omega[1, 0, 1] = 0.1
        with self.assertRaises(ReductionInapplicableError):
            reduced_equations(HUmbilicalField.constant(3, lam=1.0, mu=0.5, epsilon=1.0, omega=omega))


class TestIdentities(unittest.TestCase):
    def test_family_satisfies_identities(self):
        for m in range(2, 11):
            for root in mu_roots(m).roots:
                lam, mu, _ = humbilical_coefficients(m, root)
                for name, value in classification_identities(m, lam, mu, 1.0).items():
                    self.assertLess(value, 1e-10, msg=f"{name} m={m} mu={mu}")

    def test_perturbed_mu_breaks_trace_relation(self):
        for m in (2, 5, 10):
            for index in (0, 3):
                mu = 1.05 * mu_roots(m)[index]
                residuals = classification_identities(m, lambda_from_mu(mu), mu, 1.0)
                self.assertGreater(residuals["trace_relation"], 1e-2)
                self.assertLess(residuals["mu_lambda_relation"], 1e-12)

    def test_flat_ambient(self):
        residuals = classification_identities(2, 0.0, 0.0, 0.0)
        self.assertEqual(residuals, {"mu_lambda_relation": 0.0, "trace_relation": 0.0})
        with self.assertRaises(ValueError):
            classification_identities(2, 1.0, 0.0, 1.0)


if __name__ == "__main__":
    unittest.main()
