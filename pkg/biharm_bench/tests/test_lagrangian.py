import dataclasses
import unittest

import numpy as np

from biharm_bench.criteria import RESIDUAL_FUNCTIONS

from biharm_bench.errors import MinimalPointError, NotLagrangianError
from biharm_bench.family import (
    chen_immersion,
    clifford_torus_lift,
    flat_plane,
    generic_legendre_curve,
    holomorphic_control,
    humbilical_coefficients,
    mu_roots,
    warped_product_immersion,
)
from biharm_bench.geometry import (
    AmbientModel,
    HUmbilicalField,
    HUmbilicalFit,
    ImmersionSpec,
    LocalGeometry,
    connection_forms,
    humbilical_fit,
    lagrangian_defect,
    lem2_residuals,
    lem2_residuals_of,
    pnmc_defect,
    pnmc_defect_of,
)
from biharm_bench.jets import Jet, cos, sin

WARPED_POINTS = {2: (0.5, 1.0), 3: (0.5, 1.0, 2.0)}


def generic_warped_product(m):
    return warped_product_immersion(generic_legendre_curve(), m, name="warped-from-ode")

CHEN_POINTS = {2: (0.7, 1.1), 3: (2.1, 1.2, 0.4)}


class TestLagrangianDefect(unittest.TestCase):
    def test_lagrangian_inputs(self):
        self.assertLess(lagrangian_defect(chen_immersion(2, mu_roots(2)[0]), CHEN_POINTS[2]), 1e-10)
        self.assertLess(lagrangian_defect(flat_plane(3), (0.1, 0.2, 0.3)), 1e-14)
        self.assertLess(lagrangian_defect(clifford_torus_lift(2), (0.3, 0.8)), 1e-12)

    def test_complex_line(self):
        # <J f_1, f_2> = 1 on a complex line.
        self.assertAlmostEqual(lagrangian_defect(holomorphic_control(), (0.1, 0.2)), 1.0)


class TestHUmbilicalFit(unittest.TestCase):
    def test_chen_family(self):
        for m, point in CHEN_POINTS.items():
            for index in range(4):
                mu_exact = mu_roots(m)[index]
                lam, mu, a = humbilical_coefficients(m, mu_exact)
                fit = humbilical_fit(chen_immersion(m, mu_exact), point)
                # The adapted frame makes a = |H| > 0, which flips (lambda, mu) when a < 0.
                sign = np.sign(a)
                self.assertLess(fit.fit_residual, 1e-8)
                self.assertAlmostEqual(fit.lam, sign * lam, delta=1e-8)
                self.assertAlmostEqual(fit.mu, sign * mu, delta=1e-8)
                self.assertAlmostEqual(fit.a, abs(a), delta=1e-8)
                self.assertLess(fit.k_spread, 1e-8)
                self.assertFalse(fit.minimal)

    def test_from_shape(self):
        fit = HUmbilicalFit.from_shape(3, 2.0, 0.5, 0.0, 0.1, 0.0)
        self.assertAlmostEqual(fit.a, 1.0)

    def test_minimal_points(self):
        fit = humbilical_fit(flat_plane(2), (0.3, 0.4))
        self.assertTrue(fit.minimal)
        self.assertEqual(fit.lam, 0.0)

    def test_rejects_non_lagrangian(self):
        # Cylinder over a helix: H != 0 but J(H) is not tangent.
        def mapping(u):
            x, y = u
            return [x, y, cos(x), sin(x)]

        bent = ImmersionSpec(
            name="bent",
            target=AmbientModel.flat(2),
            chart_dimension=2,
            mapping=mapping,
            domain=((-1.0, 1.0), (-1.0, 1.0)),
            periodic=(False, False),
        )
        geometry = LocalGeometry(bent, (0.2, 0.1))
        self.assertEqual(geometry.frame_kind, "coordinate")
        with self.assertRaises(NotLagrangianError):
            HUmbilicalField.from_geometry(geometry)


class TestPNMC(unittest.TestCase):
    def test_chen_has_parallel_normalized_mean_curvature(self):
        for m, point in CHEN_POINTS.items():
            self.assertLess(pnmc_defect(chen_immersion(m, mu_roots(m)[1]), point), 1e-8)

    def test_minimal_point(self):
        with self.assertRaises(MinimalPointError):
            pnmc_defect(flat_plane(2), (0.0, 0.0))

    def test_generic_warped_product_is_not_pnmc(self):
        for m, point in WARPED_POINTS.items():
            self.assertGreater(pnmc_defect(generic_warped_product(m), point), 1e-3, msg=f"m={m}")


class TestFirstVectorOrientation(unittest.TestCase):
    def assert_orientation_invariant(self, immersion, point):
        base = LocalGeometry(immersion, point)
        flipped = LocalGeometry(immersion, point, e1_sign=-1.0)
        np.testing.assert_allclose(flipped.frame.value[0], -base.frame.value[0], atol=1e-12)

        fit = HUmbilicalField.from_geometry(base).fit()
        flipped_fit = HUmbilicalField.from_geometry(flipped).fit()
        # Reversing e_1 negates lambda, mu and a.
        self.assertAlmostEqual(flipped_fit.lam, -fit.lam, delta=1e-10)
        self.assertAlmostEqual(flipped_fit.mu, -fit.mu, delta=1e-10)
        self.assertAlmostEqual(flipped_fit.a, -fit.a, delta=1e-10)
        self.assertAlmostEqual(flipped_fit.fit_residual, fit.fit_residual, delta=1e-10)

        self.assertAlmostEqual(flipped.mean_curvature_norm, base.mean_curvature_norm, delta=1e-12)
        self.assertAlmostEqual(pnmc_defect_of(flipped), pnmc_defect_of(base), delta=1e-10)
        for name in ("humbilical", "spaceform"):
            before = RESIDUAL_FUNCTIONS[name](base)
            after = RESIDUAL_FUNCTIONS[name](flipped)
            for value, expected in (
                (after.tangential_norm, before.tangential_norm),
                (after.normal_norm, before.normal_norm),
                (after.worst, before.worst),
            ):
                self.assertAlmostEqual(value, expected, delta=1e-8 * max(1.0, abs(expected)), msg=name)

    def test_chen_family(self):
        self.assert_orientation_invariant(chen_immersion(3, mu_roots(3)[0]), CHEN_POINTS[3])

    def test_generic_warped_product(self):
        self.assert_orientation_invariant(generic_warped_product(2), WARPED_POINTS[2])


class TestCodazziConsequences(unittest.TestCase):
    def assert_small(self, residuals, tolerance=1e-6):
        self.assertEqual(len(residuals), 7)
        for name, value in residuals.items():
            self.assertLess(value, tolerance, msg=name)

    def test_chen_family(self):
        for m, point in CHEN_POINTS.items():
            for index in (0, 2):
                geometry = LocalGeometry(chen_immersion(m, mu_roots(m)[index]), point)
                self.assert_small(lem2_residuals_of(HUmbilicalField.from_geometry(geometry)))
                self.assert_small(lem2_residuals(chen_immersion(m, mu_roots(m)[index]), point))

    def test_integrated_warped_product(self):
        immersion = warped_product_immersion(generic_legendre_curve(), 2, name="warped-from-ode")
        for point in ((0.5, 1.0), (0.8, 4.0)):
            geometry = LocalGeometry(immersion, point)
            field = HUmbilicalField.from_geometry(geometry)
            self.assertLess(field.fit_residual, 1e-8)
            self.assert_small(lem2_residuals_of(field))

    def test_connection_forms_antisymmetric(self):
        omega = connection_forms(chen_immersion(3, mu_roots(3)[0]), CHEN_POINTS[3])
        self.assertEqual(omega.shape, (3, 3, 3))
        np.testing.assert_allclose(omega, -np.swapaxes(omega, 1, 2), atol=1e-10)

    def test_perturbed_connection_form_is_detected(self):
        omega = np.zeros((3, 3, 3))
        omega[1, 0, 1], omega[1, 1, 0] = 0.1, -0.1
        field = HUmbilicalField.constant(3, lam=1.0, mu=0.3, epsilon=1.0, omega=omega)
        self.assertGreater(max(lem2_residuals_of(field).values()), 1e-3)

        m = 3
        geometry = LocalGeometry(chen_immersion(m, mu_roots(m)[0]), CHEN_POINTS[m])
        field = HUmbilicalField.from_geometry(geometry)
        bump = np.zeros((m, m, m))
        bump[1, 0, 1], bump[1, 1, 0] = 0.1, -0.1
        perturbed = dataclasses.replace(field, omega=field.omega + Jet.constant(field.omega.basis, bump))
        self.assertGreater(max(lem2_residuals_of(perturbed).values()), 1e-3)

    def test_synthetic_field(self):
        field = HUmbilicalField.constant(3, lam=1.0, mu=0.5, epsilon=1.0)
        self.assert_small(lem2_residuals_of(field), tolerance=1e-15)
        self.assertAlmostEqual(float(field.a.value), 2.0 / 3.0)


if __name__ == "__main__":
    unittest.main()
