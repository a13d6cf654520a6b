import numpy as np
from django.test import SimpleTestCase

from errormodel.errors import SingularMatrixError
from errormodel.linsolve import NormalEquations, relative_residual, solve

# the temperature system with the sum of T^3 in the first row written out in full
TEMPERATURE_MATRIX = [
    [15, 450, 41500, 2925000],
    [450, 41500, 2925000, 256870000],
    [41500, 2925000, 256870000, 21952500000],
    [2925000, 256870000, 21952500000, 1983295000000],
]
TEMPERATURE_RHS = [-1, 4610, 304500, 42713000]

# the differential system as printed; summing the tabulated readings gives
# entries within 2e-4 (matrix) and 2e-3 (rhs) of it
DIFFERENTIAL_MATRIX = [
    [15, 3.64249, 2.39534],
    [3.64249, 27.83084, -3.44106],
    [2.39534, -3.44106, 26.44747],
]
DIFFERENTIAL_RHS = [120.0214, 29.22612, 19.24404]


def spd_matrix(k, condition, seed):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((k, k)))
    eigenvalues = np.logspace(0, np.log10(condition), k)
    matrix = q @ np.diag(eigenvalues) @ q.T
    return (matrix + matrix.T) / 2


class SolveTests(SimpleTestCase):
    def test_identity(self):
        eq = NormalEquations(np.eye(3), [1.0, -2.0, 3.5])
        self.assertEqual(solve(eq).tolist(), [1.0, -2.0, 3.5])

    def test_temperature_system(self):
        x = solve(NormalEquations(TEMPERATURE_MATRIX, TEMPERATURE_RHS))
        for got, expected in zip(x, (9.983251, -0.013518, -0.018601, 0.000214)):
            self.assertAlmostEqual(got, expected, delta=1e-4)
        self.assertLess(relative_residual(NormalEquations(TEMPERATURE_MATRIX, TEMPERATURE_RHS), x), 1e-8)

    def test_differential_system(self):
        s0, a, b = solve(NormalEquations(DIFFERENTIAL_MATRIX, DIFFERENTIAL_RHS))
        self.assertAlmostEqual(s0, 8.0, delta=2e-5)
        self.assertAlmostEqual(a, 0.00353, delta=2e-5)
        self.assertAlmostEqual(b, 0.00353, delta=2e-5)

    def test_known_solution_recovered(self):
        for seed, condition in enumerate((1e2, 1e4, 1e6, 1e8)):
            matrix = spd_matrix(6, condition, seed)
            expected = np.random.default_rng(100 + seed).standard_normal(6)
            x = solve(NormalEquations(matrix, matrix @ expected))
            error = np.max(np.abs(x - expected)) / np.max(np.abs(expected))
            self.assertLess(error, 1e-8, f"condition {condition:g}")

    def test_residual_bound_on_ill_conditioned_systems(self):
        for seed, condition in enumerate((1e8, 1e10, 1e12)):
            eq = NormalEquations(*self.system(condition, seed))
            self.assertLessEqual(relative_residual(eq, solve(eq)), 1e-8, f"condition {condition:g}")

    def system(self, condition, seed):
        matrix = spd_matrix(5, condition, seed)
        return matrix, matrix @ np.random.default_rng(seed).standard_normal(5)

    def test_singular(self):
        with self.assertRaises(SingularMatrixError) as ctx:
            solve(NormalEquations([[1.0, 2.0], [2.0, 4.0]], [1.0, 2.0]), hint="spread the conditions")
        self.assertEqual(ctx.exception.pivot, 1)
        self.assertIn("spread the conditions", str(ctx.exception))

    def test_zero_row(self):
        with self.assertRaises(SingularMatrixError) as ctx:
            solve(NormalEquations([[1.0, 0.0], [0.0, 0.0]], [1.0, 0.0]))
        self.assertEqual(ctx.exception.pivot, 1)

    def test_near_singular_warns(self):
        eq = NormalEquations([[1.0, 1.0], [1.0, 1.0 + 1e-11]], [2.0, 2.0 + 1e-11])
        with self.assertLogs('errormodel.linsolve', 'WARNING'):
            solve(eq)


class NormalEquationsTests(SimpleTestCase):
    def test_assembled_matrix_is_symmetric(self):
        design = np.random.default_rng(1).standard_normal((20, 5))
        eq = NormalEquations.assemble(design, np.arange(20.0))
        self.assertTrue(np.array_equal(eq.matrix, eq.matrix.T))
        self.assertTrue(np.all(np.diag(eq.matrix) >= 0))

    def test_read_only(self):
        eq = NormalEquations(np.eye(2), [1.0, 1.0])
        with self.assertRaises(ValueError):
            eq.matrix[0, 0] = 2.0

    def test_order_limits(self):
        with self.assertRaises(ValueError):
            NormalEquations(np.eye(17), np.ones(17))
        with self.assertRaises(ValueError):
            NormalEquations(np.eye(2), np.ones(3))
