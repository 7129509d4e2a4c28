import itertools
import unittest

import numpy as np
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from biharm_bench.errors import DomainError, OrderOverflowError, StepTooSmallError
from biharm_bench.family import chen_immersion, mu_roots
from biharm_bench.jets import Jet, cos, derivative, exp, fd_derivative, get_basis, sin, sqrt

POINT = (0.3, -0.7)


def multi_indices(dim, max_order=4):
    for alpha in itertools.product(range(max_order + 1), repeat=dim):
        if sum(alpha) <= max_order:
            yield alpha


def symbolic_partial(expression, symbols, alpha):
    for symbol, count in zip(symbols, alpha):
        for _ in range(count):
            expression = sp.diff(expression, symbol)
    return expression


def polynomial(u):
    x, y = u
    return x**4 - 3 * x * x * y + 2 * y**3 * x + 5 * y - 1.5


def smooth_map(u):
    x, y = u
    return sin(x * y + 0.2) * exp(0.5 * x) + cos(y) / (2.0 + x * x) + sqrt(1.0 + y * y)


def random_elementary_map(rng):
    """Sum of two products of sin, cos or exp of random affine forms in two variables."""
    functions = [sin, cos, exp]
    terms = []
    for _ in range(2):
        factors = []
        for _ in range(2):
            function = functions[rng.integers(len(functions))]
            slope = [float(x) for x in rng.uniform(-1.0, 1.0, size=2)]
            offset = float(rng.uniform(-1.0, 1.0))
            factors.append((function, slope, offset))
        terms.append((float(rng.uniform(-2.0, 2.0)), factors))

    def elementary_map(u):
        total = 0.0
        for weight, factors in terms:
            product = weight
            for function, slope, offset in factors:
                product = product * function(slope[0] * u[0] + slope[1] * u[1] + offset)
            total = total + product
        return total

    return elementary_map


def random_jet(coeffs):
    basis = get_basis(2)
    return Jet(basis, np.array(coeffs[: basis.size]))


jet_coefficients = st.lists(
    st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False),
    min_size=15,
    max_size=15,
)


class TestDerivative(unittest.TestCase):
    def test_polynomial_exact(self):
        # Every partial of a quartic is reproduced to rounding.
        x, y = sp.symbols("x y")
        expression = x**4 - 3 * x * x * y + 2 * y**3 * x + 5 * y - sp.Rational(3, 2)
        for alpha in multi_indices(2):
            exact = symbolic_partial(expression, (x, y), alpha)
            expected = float(exact.subs({x: POINT[0], y: POINT[1]}))
            self.assertAlmostEqual(derivative(polynomial, POINT, alpha), expected, delta=1e-12)

    def test_matches_symbolic(self):
        x, y = sp.symbols("x y")
        expression = (
            sp.sin(x * y + sp.Rational(1, 5)) * sp.exp(x / 2)
            + sp.cos(y) / (2 + x * x)
            + sp.sqrt(1 + y * y)
        )
        for alpha in multi_indices(2):
            exact = symbolic_partial(expression, (x, y), alpha)
            expected = float(exact.subs({x: POINT[0], y: POINT[1]}))
            self.assertAlmostEqual(
                derivative(smooth_map, POINT, alpha), expected, delta=1e-11 * max(1.0, abs(expected))
            )

    def test_matches_finite_differences(self):
        for alpha in multi_indices(2):
            exact = derivative(smooth_map, POINT, alpha)
            estimate = fd_derivative(smooth_map, POINT, alpha, step=0.05)
            self.assertLess(abs(exact - estimate), 1e-5 * max(1.0, abs(exact)), msg=str(alpha))

    def test_random_maps_match_finite_differences(self):
        rng = np.random.default_rng(2024)
        for trial in range(100):
            fn = random_elementary_map(rng)
            point = tuple(float(x) for x in rng.uniform(-1.0, 1.0, size=2))
            for alpha in multi_indices(2):
                with self.subTest(trial=trial, alpha=alpha):
                    exact = derivative(fn, point, alpha)
                    estimate = fd_derivative(fn, point, alpha, step=0.05)
                    self.assertLess(abs(exact - estimate), 1e-6 * max(1.0, abs(exact)))

    def test_order_overflow(self):
        with self.assertRaises(OrderOverflowError):
            derivative(smooth_map, POINT, (3, 2))
        with self.assertRaises(OrderOverflowError):
            fd_derivative(smooth_map, POINT, (5, 0), step=0.05)

        # Differentiating consumes one exact order.
        u = Jet.variables(POINT)
        first = (u[0] * u[0] * u[1]).diff(0)
        self.assertEqual(first.order, 3)
        self.assertAlmostEqual(float(first.partial((1, 1))), 2.0)
        with self.assertRaises(OrderOverflowError):
            first.partial((2, 2))

    def test_step_guard(self):
        with self.assertRaises(StepTooSmallError):
            fd_derivative(smooth_map, POINT, (2, 2), step=1e-5)
        with self.assertRaises(StepTooSmallError):
            fd_derivative(smooth_map, POINT, (1, 0), step=0.0)

    def test_domain(self):
        u = Jet.variables((-0.5,))
        with self.assertRaises(DomainError):
            sqrt(u[0])
        with self.assertRaises(DomainError):
            1.0 / (u[0] + 0.5)

    def test_mismatched_multi_index(self):
        with self.assertRaises(ValueError):
            derivative(smooth_map, POINT, (1,))


class TestReferenceValues(unittest.TestCase):
    def test_exact_values(self):
        self.assertAlmostEqual(derivative(lambda u: u[0] ** 2 * u[1] ** 2, (1.0, 1.0), (2, 2)), 4.0, places=12)
        self.assertAlmostEqual(derivative(lambda u: sin(u[0]), (0.0,), (3,)), -1.0, places=12)

    def test_finite_difference_values(self):
        self.assertAlmostEqual(fd_derivative(lambda u: u[0] ** 3, (1.0,), (2,), step=1e-2), 6.0, delta=1e-8)
        self.assertAlmostEqual(fd_derivative(lambda u: cos(u[0]), (0.0,), (4,), step=1e-2), 1.0, delta=1e-4)

    def test_chen_component(self):
        first_component = chen_immersion(2, mu_roots(2)[0]).component(0)
        exact = derivative(first_component, (0.3, 0.7), (2, 1))
        estimate = fd_derivative(first_component, (0.3, 0.7), (2, 1), step=1e-2)
        self.assertLess(abs(exact - estimate), 1e-6 * max(1.0, abs(exact)))


class TestJetAlgebra(unittest.TestCase):
    @given(jet_coefficients, jet_coefficients, jet_coefficients)
    @settings(max_examples=50, deadline=None)
    def test_ring_axioms(self, a, b, c):
        a, b, c = random_jet(a), random_jet(b), random_jet(c)
        np.testing.assert_allclose(
            (a * (b + c)).coeffs, (a * b + a * c).coeffs, atol=1e-12
        )
        np.testing.assert_allclose((a * b).coeffs, (b * a).coeffs, atol=1e-12)
        np.testing.assert_allclose(((a * b) * c).coeffs, (a * (b * c)).coeffs, atol=1e-11)

    @given(jet_coefficients)
    @settings(max_examples=50, deadline=None)
    def test_inverse_functions(self, coeffs):
        jet = random_jet(coeffs)
        jet.coeffs[0] = 1.5 + abs(jet.coeffs[0])
        one = jet * jet.reciprocal()
        np.testing.assert_allclose(one.coeffs, np.eye(1, jet.basis.size)[0], atol=1e-9)
        root = jet.sqrt()
        np.testing.assert_allclose((root * root).coeffs, jet.coeffs, atol=1e-9)

    def test_pythagoras(self):
        u = Jet.variables(POINT)
        angle = u[0] * u[1] + u[0]
        total = sin(angle) * sin(angle) + cos(angle) * cos(angle)
        np.testing.assert_allclose(total.coeffs, np.eye(1, total.basis.size)[0], atol=1e-12)

    def test_stacked_operations(self):
        u = Jet.variables(POINT)
        vector = Jet.stack([u[0], u[1], u[0] * u[1]])
        self.assertEqual(vector.shape, (3,))
        norm_squared = vector.inner(vector)
        expected = POINT[0] ** 2 + POINT[1] ** 2 + (POINT[0] * POINT[1]) ** 2
        self.assertAlmostEqual(float(norm_squared.value), expected)
        gradient = vector.gradient()
        self.assertEqual(gradient.shape, (2, 3))
        np.testing.assert_allclose(gradient.value[:, 2], [POINT[1], POINT[0]])

    def test_floats_pass_through(self):
        self.assertAlmostEqual(smooth_map([0.1, 0.2]), derivative(smooth_map, [0.1, 0.2], (0, 0)))


if __name__ == "__main__":
    unittest.main()
