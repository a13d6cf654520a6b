import math

import numpy as np
from django.test import SimpleTestCase

from errormodel.dataset import (
    EXPLICIT_REFERENCE, MEAN_REFERENCE, DifferentialRow, ErrorSample, bundled_path, differences,
    load_differential, load_series, to_error_samples,
)
from errormodel.errors import InsufficientDataError, SingularMatrixError
from errormodel.regression import (
    PolynomialErrorModel, SinusoidalErrorModel, fit_cycle_differential, fit_cycle_direct, fit_polynomial,
    normalize_phase, predict_frequency, random_model,
)
from errormodel.simulate import CycleError, simulate_differential
from errormodel.tests_linsolve import DIFFERENTIAL_MATRIX, DIFFERENTIAL_RHS, TEMPERATURE_MATRIX, TEMPERATURE_RHS

PRINTED_CUBIC = (9.983251, -0.013518, -0.018601, 0.000214)


def table1_samples():
    return to_error_samples(load_series(bundled_path('table1.csv')), MEAN_REFERENCE, resolution=1)


def angle_between(a, b):
    d = abs(normalize_phase(a) - normalize_phase(b))
    return min(d, 2 * math.pi - d)


class RandomModelTests(SimpleTestCase):
    def test_table1_frequencies(self):
        estimate = random_model(load_series(bundled_path('table1.csv')).observed)
        self.assertEqual(round(estimate.mean, 6), 5.00005)
        self.assertAlmostEqual(estimate.relative_std_ppm, 15.8, delta=0.1)
        self.assertEqual(estimate.n, 15)
        self.assertEqual(estimate.dof, 14)

    def test_table3_differences(self):
        estimate = random_model(differences(load_differential(bundled_path('table3.csv'))))
        self.assertAlmostEqual(estimate.mean, 8.0014, delta=1e-4)

    def test_constant_values(self):
        estimate = random_model([5, 5, 5])
        self.assertEqual((estimate.mean, estimate.std), (5.0, 0.0))

    def test_needs_two_values(self):
        with self.assertRaises(InsufficientDataError):
            random_model([1.0])

    def test_translation_shifts_mean_only(self):
        values = [1.0, 2.0, 4.0, 8.0]
        base = random_model(values)
        shifted = random_model([v + 16.0 for v in values])
        self.assertEqual(shifted.mean, base.mean + 16.0)
        self.assertEqual(shifted.std, base.std)


class PolynomialTests(SimpleTestCase):
    def setUp(self):
        self.samples = table1_samples()
        self.model = fit_polynomial(self.samples, degree=3)

    def test_normal_equations_match_printed_system(self):
        self.assertEqual(self.model.normal_equations.matrix.tolist(), TEMPERATURE_MATRIX)
        self.assertEqual(self.model.normal_equations.rhs.tolist(), TEMPERATURE_RHS)

    def test_cubic_coefficients(self):
        for got, expected in zip(self.model.coeffs, PRINTED_CUBIC):
            self.assertAlmostEqual(got, expected, delta=1e-3)
        self.assertAlmostEqual(self.model.residual_std, 2.3, delta=0.2)
        self.assertEqual(self.model.dof, 11)
        self.assertEqual(self.model.domain, (-40.0, 100.0))

    def test_residuals_orthogonal_to_basis(self):
        t = np.array([s.condition for s in self.samples])
        r = np.array([s.error for s in self.samples])
        v = np.array(self.model.residuals)
        for k in range(4):
            bound = 1e-6 * np.sum(np.abs(r)) * np.max(np.abs(t)) ** k
            self.assertLessEqual(abs(np.sum(v * t ** k)), bound, f"power {k}")

    def test_exact_line(self):
        samples = [ErrorSample(t, 1 + 2 * t, 'ppm') for t in (0.0, 1.0, 2.0, 3.0, 5.0)]
        model = fit_polynomial(samples, degree=1)
        self.assertAlmostEqual(model.coeffs[0], 1.0, places=12)
        self.assertAlmostEqual(model.coeffs[1], 2.0, places=12)
        self.assertAlmostEqual(model.residual_std, 0.0, places=12)

    def test_centered_basis_same_curve(self):
        centered = fit_polynomial(self.samples, degree=3, center=30.0, scale=70.0)
        t = np.linspace(-40, 100, 15)
        np.testing.assert_allclose(centered.evaluate(t), self.model.evaluate(t), atol=1e-5)

    def test_equal_conditions_are_singular(self):
        samples = [ErrorSample(20.0, e, 'ppm') for e in (1.0, 2.0, 3.0, 4.0)]
        with self.assertRaises(SingularMatrixError):
            fit_polynomial(samples, degree=1)

    def test_too_few_samples(self):
        with self.assertRaises(InsufficientDataError):
            fit_polynomial(self.samples[:4], degree=3)

    def test_as_dict_shape(self):
        report = self.model.as_dict()
        for key in ('model', 'coefficients', 'residual_std', 'dof', 'normal_matrix', 'rhs'):
            self.assertIn(key, report)
        self.assertEqual(report['model'], 'poly3')


class PredictFrequencyTests(SimpleTestCase):
    def test_printed_coefficients_at_zero(self):
        model = PolynomialErrorModel(coeffs=PRINTED_CUBIC, domain=(-40.0, 100.0), residual_std=0.0, dof=11)
        prediction = predict_frequency(model, 5.000050, 0.0)
        self.assertAlmostEqual(prediction.value, 5.000050 * (1 + 9.983251e-6), places=12)
        self.assertFalse(prediction.out_of_domain)

    def test_zero_model_leaves_f0(self):
        model = PolynomialErrorModel(coeffs=(0.0, 0.0, 0.0, 0.0), domain=(0.0, 1.0), residual_std=0.0, dof=1)
        self.assertEqual(predict_frequency(model, 5.0, 0.5).value, 5.0)

    def test_refitted_cubic_at_first_row(self):
        model = fit_polynomial(table1_samples(), degree=3)
        prediction = predict_frequency(model, 5.000050, -40.0)
        relative = abs(prediction.value - 4.999900) / 4.999900
        self.assertLess(relative, 2 * model.residual_std * 1e-6)

    def test_out_of_domain_flagged(self):
        model = fit_polynomial(table1_samples(), degree=3)
        with self.assertLogs('errormodel.regression', 'WARNING'):
            prediction = predict_frequency(model, 5.000050, 120.0)
        self.assertTrue(prediction.out_of_domain)

    def test_f0_must_be_positive(self):
        model = PolynomialErrorModel(coeffs=(0.0,), domain=(0.0, 1.0), residual_std=0.0, dof=1)
        with self.assertRaises(ValueError):
            predict_frequency(model, 0.0, 0.5)


class CycleDirectTests(SimpleTestCase):
    @staticmethod
    def synthetic(amplitude, phase, distances, bias=0.0):
        return [
            ErrorSample(s, amplitude * math.sin(2 * math.pi * s / 20 + phase) + bias, 'mm') for s in distances
        ]

    def test_table2(self):
        series = load_series(bundled_path('table2.csv'))
        samples = to_error_samples(series, EXPLICIT_REFERENCE, abscissa='observed', resolution=0.1)
        model = fit_cycle_direct(samples, wavelength=20.0)
        self.assertAlmostEqual(model.amplitude, 5.7, delta=0.3)
        self.assertAlmostEqual(model.phase_degrees, 254.41, delta=3.0)
        self.assertEqual(model.dof, 19)

    def test_noiseless_recovery(self):
        model = fit_cycle_direct(self.synthetic(5.0, math.pi / 4, range(20)))
        self.assertAlmostEqual(model.amplitude, 5.0, delta=1e-10)
        self.assertAlmostEqual(model.phase, math.pi / 4, delta=1e-10)

    def test_recovery_over_amplitudes_and_phases(self):
        rng = np.random.default_rng(7)
        for amplitude, phase in zip(rng.uniform(0.1, 100, 10), rng.uniform(0.1, 2 * math.pi - 0.1, 10)):
            model = fit_cycle_direct(self.synthetic(amplitude, phase, [0.5, 3.0, 7.2, 11.0, 15.5, 18.1]))
            self.assertLess(abs(model.amplitude - amplitude) / amplitude, 1e-9)
            self.assertLess(angle_between(model.phase, phase), 1e-9)

    def test_null_signal(self):
        model = fit_cycle_direct([ErrorSample(s, 0.0, 'mm') for s in range(10)])
        self.assertEqual(model.amplitude, 0.0)

    def test_congruent_distances_are_singular(self):
        with self.assertRaises(SingularMatrixError):
            fit_cycle_direct(self.synthetic(5.0, 0.3, [0.0, 20.0, 40.0, 60.0]))

    def test_with_offset(self):
        model = fit_cycle_direct(self.synthetic(2.0, 1.0, range(12), bias=1.5), with_offset=True)
        self.assertAlmostEqual(model.bias, 1.5, delta=1e-10)
        self.assertAlmostEqual(model.amplitude, 2.0, delta=1e-10)
        self.assertEqual(model.dof, 9)

    def test_model_bounded_by_amplitude(self):
        model = SinusoidalErrorModel(amplitude=5.7, wavelength=20.0, phase=-1.0, residual_std=0.0, dof=1)
        self.assertGreaterEqual(model.phase, 0.0)
        self.assertLessEqual(np.max(np.abs(model.evaluate(np.linspace(0, 100, 1001)))), 5.7)

    def test_needs_three_samples(self):
        with self.assertRaises(InsufficientDataError):
            fit_cycle_direct(self.synthetic(1.0, 0.0, [1.0, 2.0]))


class CycleDifferentialTests(SimpleTestCase):
    def setUp(self):
        self.rows = load_differential(bundled_path('table3.csv'))
        self.cycle = CycleError(amplitude=5.0, wavelength=20.0, phase=math.pi / 4)
        self.pairs = [(row.s_ab, row.s_ac) for row in self.rows]

    def test_table3_normal_equations(self):
        # the printed system was summed from less rounded readings than the
        # table shows; sum S comes out 120.0215 against the printed 120.0214
        model = fit_cycle_differential(self.rows, wavelength=20.0)
        np.testing.assert_allclose(model.normal_equations.matrix, DIFFERENTIAL_MATRIX, atol=2e-4)
        np.testing.assert_allclose(model.normal_equations.rhs, DIFFERENTIAL_RHS, atol=2e-3)
        self.assertAlmostEqual(model.normal_equations.rhs[0], 120.0215, places=9)

    def test_table3_fit(self):
        model = fit_cycle_differential(self.rows, wavelength=20.0)
        self.assertAlmostEqual(model.offset_s0, 8.0, delta=2e-5)
        self.assertAlmostEqual(model.amplitude, 0.00499, delta=5e-5)
        self.assertAlmostEqual(model.phase, math.pi / 4, delta=0.01)
        self.assertEqual(model.dof, 12)

    def test_function_model_beats_random_model(self):
        model = fit_cycle_differential(self.rows)
        mean = random_model(differences(self.rows)).mean
        self.assertLess(abs(model.offset_s0 - 8.0), abs(mean - 8.0))

    def test_exact_recovery_on_nominal_basis(self):
        rows = simulate_differential(self.cycle, self.pairs)
        model = fit_cycle_differential(rows, basis='nominal')
        self.assertAlmostEqual(model.offset_s0, 8.0, delta=1e-10)
        self.assertAlmostEqual(model.amplitude, 0.005, delta=1e-10)
        self.assertAlmostEqual(model.phase, math.pi / 4, delta=1e-10)

    def test_rounded_regeneration_within_rounding(self):
        rows = simulate_differential(self.cycle, self.pairs, round_mm=0.1)
        model = fit_cycle_differential(rows)
        self.assertAlmostEqual(model.amplitude, 0.005, delta=2e-5)

    def test_null_signal(self):
        rows = [DifferentialRow(s1=ac, s2=ab) for ab, ac in self.pairs]
        model = fit_cycle_differential(rows)
        self.assertAlmostEqual(model.offset_s0, 8.0, delta=1e-12)
        self.assertAlmostEqual(model.amplitude, 0.0, delta=1e-12)

    def test_whole_wavelength_separation_is_singular(self):
        rows = [DifferentialRow(s1=s + 20.0, s2=s) for s in (3.0, 7.5, 12.0, 16.0)]
        with self.assertRaisesMessage(SingularMatrixError, "diverse phases"):
            fit_cycle_differential(rows)

    def test_nominal_basis_needs_nominal_columns(self):
        rows = [DifferentialRow(s1=row.s1, s2=row.s2) for row in self.rows]
        with self.assertRaises(ValueError):
            fit_cycle_differential(rows, basis='nominal')
