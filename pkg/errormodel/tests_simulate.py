import math

import numpy as np
from django.test import SimpleTestCase

from errormodel.dataset import bundled_path, load_differential
from errormodel.errors import ConfigurationError
from errormodel.simulate import (
    NON_EFFECT, RANDOM, SYSTEMATIC, AdditiveConstant, ConditionRule, ConditionSchedule, CycleError, GaussianNoise,
    TemperaturePolynomial, classify, classify_effects, differential_contributions, differential_observable,
    load_scenario, make_source, random_pairs, simulate_differential, simulate_repeated,
)

CUBIC = (9.983251, -0.013518, -0.018601, 0.000214)


def constant_distance(n, value=35.0):
    return ConditionSchedule(repeats=n, conditions={'distance': ConditionRule('constant', value=value)})


def uniform_distance(n, seed, low=0.0, high=20.0):
    return ConditionSchedule(
        repeats=n, conditions={'distance': ConditionRule('uniform', low=low, high=high)}, seed=seed,
    )


class SimulateRepeatedTests(SimpleTestCase):
    def setUp(self):
        self.cycle = CycleError(amplitude=5.0, wavelength=20.0, phase=math.pi / 4)

    def test_constant_distance_keeps_cycle_error(self):
        run = simulate_repeated([self.cycle], constant_distance(10), true_value=35.0)
        contribution = run.contributions['cycle']
        self.assertEqual(len(set(contribution.tolist())), 1)
        self.assertEqual(len(run.series), 10)

    def test_uniform_distances_spread_cycle_error(self):
        run = simulate_repeated([self.cycle], uniform_distance(100_000, seed=8), true_value=10.0)
        spread = np.std(run.contributions['cycle'])
        self.assertLess(abs(spread - 5 / math.sqrt(2)) / (5 / math.sqrt(2)), 0.02)

    def test_temperature_polynomial_at_constant_temperature(self):
        schedule = ConditionSchedule(repeats=5, conditions={'temperature': ConditionRule('constant', value=20.0)})
        run = simulate_repeated([TemperaturePolynomial(CUBIC)], schedule, true_value=5.0, value_unit='MHz')
        expected = sum(c * 20.0 ** k for k, c in enumerate(CUBIC))
        for value in run.contributions['temperature-polynomial']:
            self.assertAlmostEqual(value, expected, places=10)
        self.assertEqual(run.units['temperature-polynomial'], 'ppm')
        self.assertAlmostEqual(run.series.rows[0].observed, 5.0 * (1 + expected * 1e-6), places=12)
        self.assertEqual(run.series.condition_unit, 'degC')

    def test_observed_adds_contributions(self):
        run = simulate_repeated([AdditiveConstant(2.0)], constant_distance(3), true_value=100.0)
        self.assertAlmostEqual(run.series.rows[0].observed, 100.002, places=12)

    def test_missing_condition_names_source(self):
        schedule = ConditionSchedule(repeats=3, conditions={'temperature': ConditionRule('constant', value=20.0)})
        with self.assertRaisesMessage(ConfigurationError, "'cycle'"):
            simulate_repeated([self.cycle], schedule, true_value=10.0)

    def test_mm_source_on_frequency_series(self):
        schedule = ConditionSchedule(repeats=3, conditions={'temperature': ConditionRule('constant', value=20.0)})
        with self.assertRaises(ConfigurationError):
            simulate_repeated([AdditiveConstant(1.0)], schedule, true_value=5.0, value_unit='MHz')

    def test_duplicate_names(self):
        with self.assertRaises(ConfigurationError):
            simulate_repeated([AdditiveConstant(1.0), AdditiveConstant(2.0)], constant_distance(3), true_value=1.0)

    def test_reproducible_per_seed(self):
        sources = [self.cycle, GaussianNoise(0.5)]
        first = simulate_repeated(sources, uniform_distance(50, seed=4), true_value=10.0)
        again = simulate_repeated(sources, uniform_distance(50, seed=4), true_value=10.0)
        other = simulate_repeated(sources, uniform_distance(50, seed=5), true_value=10.0)
        self.assertTrue(np.array_equal(first.series.observed, again.series.observed))
        self.assertFalse(np.array_equal(first.series.observed, other.series.observed))

    def test_listed_schedule_length(self):
        schedule = ConditionSchedule(repeats=3, conditions={'distance': ConditionRule('listed', values=(1.0, 2.0))})
        with self.assertRaises(ConfigurationError):
            simulate_repeated([self.cycle], schedule, true_value=1.0)


class SimulateDifferentialTests(SimpleTestCase):
    def setUp(self):
        self.table = load_differential(bundled_path('table3.csv'))
        self.pairs = [(row.s_ab, row.s_ac) for row in self.table]
        self.cycle = CycleError(amplitude=5.0, wavelength=20.0, phase=math.pi / 4)

    def test_table3_regeneration(self):
        rows = simulate_differential(self.cycle, self.pairs, round_mm=0.1)
        matched = sum(
            (ours.s2 == theirs.s2) + (ours.s1 == theirs.s1) for ours, theirs in zip(rows, self.table)
        )
        self.assertEqual(matched, 30)
        self.assertEqual((rows[0].s2, rows[0].s1), (9.9965, 18.0008))

    def test_additive_constant_cancels(self):
        without = differential_observable(self.pairs, differential_contributions(self.cycle, self.pairs))
        for c in (0.7, 2.9, 3.0, 12.5, -4.3):
            with_constant = differential_contributions(self.cycle, self.pairs, [AdditiveConstant(c)])
            self.assertEqual(with_constant['additive-constant'].tolist(), [0.0] * 15)
            self.assertTrue(np.array_equal(without, differential_observable(self.pairs, with_constant)), c)

    def test_additive_constant_moves_both_legs(self):
        plain = simulate_differential(self.cycle, self.pairs)
        for c in (0.7, 2.9, 3.0, 12.5, -4.3):
            shifted = simulate_differential(self.cycle, self.pairs, [AdditiveConstant(c)])
            self.assertAlmostEqual(shifted[0].s2 - plain[0].s2, c * 1e-3, places=12)
            for a, b in zip(plain, shifted):
                # readings are floating sums; the exact difference lives on the observable path
                self.assertAlmostEqual(a.difference, b.difference, delta=1e-13)

    def test_zero_amplitude(self):
        rows = simulate_differential(CycleError(amplitude=0.0, wavelength=20.0), self.pairs)
        self.assertEqual([(row.s_ab, row.s_ac) for row in rows], [(row.s2, row.s1) for row in rows])

    def test_needs_ordered_pairs(self):
        with self.assertRaises(ConfigurationError):
            simulate_differential(self.cycle, [(18.0, 10.0)])

    def test_needs_cycle_source(self):
        with self.assertRaises(ConfigurationError):
            simulate_differential(AdditiveConstant(1.0), self.pairs)

    def test_temperature_source_rejected(self):
        with self.assertRaises(ConfigurationError):
            simulate_differential(self.cycle, self.pairs, [TemperaturePolynomial(CUBIC)])

    def test_random_pairs(self):
        pairs = random_pairs(15, separation=8.0, low=5.0, high=50.0, seed=1)
        self.assertEqual(len(pairs), 15)
        for s_ab, s_ac in pairs:
            self.assertEqual(s_ac - s_ab, 8.0)
            self.assertEqual(s_ab, math.floor(s_ab))
            self.assertGreaterEqual(s_ab, 5.0)
            self.assertLessEqual(s_ac, 50.0)
        self.assertEqual(pairs, random_pairs(15, seed=1))

    def test_random_pairs_fractional_low(self):
        for s_ab, s_ac in random_pairs(2000, separation=8.0, low=5.5, high=20.0, seed=2):
            self.assertGreaterEqual(s_ab, 6.0)
            self.assertLessEqual(s_ac, 20.0)
        with self.assertRaises(ConfigurationError):
            random_pairs(3, separation=8.0, low=5.5, high=13.7)


class ClassifyTests(SimpleTestCase):
    def test_rules(self):
        self.assertEqual(classify(0.0, 0.0, 1e-9, 1e-6), NON_EFFECT)
        self.assertEqual(classify(2.0, 0.0, 2.0, 1e-6), SYSTEMATIC)
        self.assertEqual(classify(0.0, 3.5, 5.0, 1e-6), RANDOM)

    def test_spread_under_threshold_without_offset(self):
        self.assertEqual(classify(0.0, 5e-7, 2e-6, 1e-6), RANDOM)

    def test_same_cycle_source_both_ways(self):
        cycle = CycleError(amplitude=5.0, wavelength=20.0, phase=math.pi / 4)
        fixed = simulate_repeated([cycle], constant_distance(100), true_value=35.0)
        spread = simulate_repeated([cycle], uniform_distance(100, seed=12), true_value=10.0)
        self.assertEqual(classify_effects(fixed.contributions, 1e-6)['cycle'].classification, SYSTEMATIC)
        self.assertEqual(classify_effects(spread.contributions, 1e-6)['cycle'].classification, RANDOM)

    def test_uniform_distances_at_scale(self):
        cycle = CycleError(amplitude=5.0, wavelength=20.0)
        run = simulate_repeated([cycle], uniform_distance(100_000, seed=21, high=1000.0), true_value=10.0)
        effect = classify_effects(run.contributions)['cycle']
        self.assertEqual(effect.classification, RANDOM)
        self.assertLess(abs(effect.std - 5 / math.sqrt(2)) / (5 / math.sqrt(2)), 0.02)

    def test_additive_constant_under_differential_observable(self):
        table = load_differential(bundled_path('table3.csv'))
        pairs = [(row.s_ab, row.s_ac) for row in table]
        contributions = differential_contributions(
            CycleError(amplitude=5.0, wavelength=20.0, phase=math.pi / 4), pairs, [AdditiveConstant(3.0)],
        )
        report = classify_effects(contributions)
        self.assertEqual(report['additive-constant'].classification, NON_EFFECT)
        self.assertEqual(report['cycle'].classification, RANDOM)

    def test_temperature_polynomial_at_constant_temperature(self):
        schedule = ConditionSchedule(repeats=20, conditions={'temperature': ConditionRule('constant', value=25.0)})
        run = simulate_repeated([TemperaturePolynomial(CUBIC)], schedule, true_value=5.0, value_unit='MHz')
        self.assertEqual(classify_effects(run.contributions)['temperature-polynomial'].classification, SYSTEMATIC)

    def test_report_is_rederivable(self):
        report = classify_effects({'noise': [0.1, -0.2, 0.3]}, 1e-6)
        effect = report['noise']
        self.assertEqual(classify(effect.mean, effect.std, effect.max_abs, report.eps_abs), effect.classification)
        self.assertEqual(report.as_dict()['sources'][0]['n'], 3)

    def test_threshold_must_be_positive(self):
        with self.assertRaises(ConfigurationError):
            classify_effects({'a': [1.0]}, 0.0)

    def test_empty_sequence(self):
        with self.assertRaises(ConfigurationError):
            classify_effects({'a': []})

    def test_unknown_name(self):
        with self.assertRaises(KeyError):
            classify_effects({'a': [1.0]})['b']


class ScenarioTests(SimpleTestCase):
    def test_table3_scenario(self):
        scenario = load_scenario(bundled_path('table3_scenario.json'))
        self.assertEqual(len(scenario.pairs), 15)
        self.assertEqual(scenario.round_mm, 0.1)
        self.assertAlmostEqual(scenario.cycle.phase, math.pi / 4, places=15)
        self.assertEqual(scenario.extra_sources, ())
        self.assertIsNone(scenario.schedule)

    def test_constant_temperature_scenario(self):
        scenario = load_scenario(bundled_path('constant_temperature.json'))
        self.assertEqual(scenario.value_unit, 'MHz')
        self.assertEqual(scenario.schedule.repeats, 20)
        self.assertIsNone(scenario.cycle)

    def test_make_source_unknown_kind(self):
        with self.assertRaises(ConfigurationError):
            make_source('thermal-drift', rate=1.0)

    def test_make_source(self):
        source = make_source('multiplicative', r=2.0)
        self.assertEqual(source.depends_on, 'distance')
        self.assertAlmostEqual(float(source.contribution(np.array([1000.0]), 1, None)[0]), 2.0, places=12)
