import json
import math
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from errormodel.budget import (
    BudgetComponent, ErrorBudget, load_budget, monte_carlo_std, edm_budget, total_std,
)
from errormodel.dataset import bundled_path
from errormodel.errors import ConfigurationError, UnitError


class TotalStdTests(SimpleTestCase):
    def setUp(self):
        # sigma C = 1 mm, R = 2 ppm at 1 km, P = 3 mm, delta = 1 mm
        self.budget = edm_budget(1000.0, 1.0, 2.0, 3.0, 1.0)

    def test_sqrt15_example(self):
        self.assertAlmostEqual(total_std(self.budget), math.sqrt(15), places=12)
        self.assertEqual(round(total_std(self.budget), 3), 3.873)

    def test_resolved_contributions(self):
        resolved = {name: contribution for name, _, contribution in self.budget.resolved()}
        self.assertAlmostEqual(resolved['R'], 2.0, places=12)
        self.assertEqual(resolved['P'], 3.0)

    def test_null_budget(self):
        self.assertEqual(total_std(ErrorBudget(components=[])), 0.0)
        self.assertEqual(total_std(edm_budget(1000.0, 0.0, 0.0, 0.0, 0.0)), 0.0)

    def test_single_component(self):
        budget = ErrorBudget(components=[BudgetComponent('C', 1.7)])
        self.assertAlmostEqual(total_std(budget), 1.7, places=15)

    def test_scale_equivariance(self):
        self.assertEqual(total_std(self.budget.scaled(2.0)), 2.0 * total_std(self.budget))
        self.assertAlmostEqual(total_std(self.budget.scaled(3.0)), 3.0 * total_std(self.budget), places=12)

    def test_monotone_in_each_component(self):
        base = total_std(self.budget)
        for i, component in enumerate(self.budget.components):
            components = list(self.budget.components)
            components[i] = BudgetComponent(component.name, component.std + 0.5, component.unit, component.sensitivity)
            grown = ErrorBudget(components=components, operating_point=self.budget.operating_point)
            self.assertGreater(total_std(grown), base, component.name)

    def test_custom_coefficient_and_units(self):
        component = BudgetComponent('tilt', 4.0, 'um', 0.5)
        self.assertAlmostEqual(component.coefficient(0.0), 0.5e-3, places=15)
        self.assertAlmostEqual(total_std(ErrorBudget(components=[component])), 2e-3, places=15)


class BudgetValidationTests(SimpleTestCase):
    def test_proportional_needs_relative_unit(self):
        budget = ErrorBudget(components=[BudgetComponent('R', 2.0, 'mm', 'proportional')], operating_point=100.0)
        with self.assertRaises(UnitError) as ctx:
            total_std(budget)
        self.assertEqual(ctx.exception.component, 'R')

    def test_unknown_unit(self):
        with self.assertRaisesMessage(UnitError, "'C'"):
            total_std(ErrorBudget(components=[BudgetComponent('C', 1.0, 'inch')]))

    def test_duplicate_names(self):
        with self.assertRaises(ConfigurationError):
            ErrorBudget(components=[BudgetComponent('C', 1.0), BudgetComponent('C', 2.0)])

    def test_proportional_needs_operating_point(self):
        with self.assertRaises(ConfigurationError):
            ErrorBudget(components=[BudgetComponent('R', 2.0, 'ppm', 'proportional')])

    def test_negative_std(self):
        with self.assertRaises(ConfigurationError):
            BudgetComponent('C', -1.0)


class MonteCarloTests(SimpleTestCase):
    def setUp(self):
        self.budget = edm_budget(1000.0, 1.0, 2.0, 3.0, 1.0)

    def test_matches_analytic_total(self):
        mc = monte_carlo_std(self.budget, 1_000_000, seed=42)
        self.assertLess(abs(mc - math.sqrt(15)) / math.sqrt(15), 0.005)

    def test_mixed_shapes(self):
        shapes = {'P': 'arcsine', 'delta': 'uniform'}
        mc = monte_carlo_std(self.budget, 1_000_000, seed=43, shapes=shapes)
        self.assertLess(abs(mc - math.sqrt(15)) / math.sqrt(15), 0.005)

    def test_single_arcsine_component(self):
        amplitude = 5.0
        budget = ErrorBudget(components=[BudgetComponent('P', amplitude / math.sqrt(2))])
        mc = monte_carlo_std(budget, 100_000, seed=1, shapes={'P': 'arcsine'})
        self.assertLess(abs(mc - amplitude / math.sqrt(2)) / (amplitude / math.sqrt(2)), 0.02)

    def test_converges(self):
        for n, tolerance in ((10_000, 0.05), (100_000, 0.02), (1_000_000, 0.005)):
            mc = monte_carlo_std(self.budget, n, seed=9, shapes={'P': 'arcsine'})
            self.assertLess(abs(mc - math.sqrt(15)) / math.sqrt(15), tolerance, n)

    def test_deterministic_per_seed(self):
        self.assertEqual(monte_carlo_std(self.budget, 10_000, seed=3), monte_carlo_std(self.budget, 10_000, seed=3))

    def test_appending_a_component_keeps_earlier_draws(self):
        # each component owns the child stream at its position
        alone = ErrorBudget(components=[BudgetComponent('C', 1.0)])
        padded = ErrorBudget(components=[BudgetComponent('C', 1.0), BudgetComponent('Z', 0.0)])
        self.assertEqual(monte_carlo_std(alone, 10_000, seed=3), monte_carlo_std(padded, 10_000, seed=3))

    def test_unknown_shape(self):
        with self.assertRaises(ConfigurationError):
            monte_carlo_std(self.budget, 10_000, seed=0, shapes={'P': 'cauchy'})

    def test_shape_for_unknown_component(self):
        with self.assertRaises(ConfigurationError):
            monte_carlo_std(self.budget, 10_000, seed=0, shapes={'Q': 'uniform'})

    def test_needs_enough_draws(self):
        with self.assertRaises(ValueError):
            monte_carlo_std(self.budget, 100, seed=0)


class LoadBudgetTests(SimpleTestCase):
    def test_example_budget(self):
        budget, shapes = load_budget(bundled_path('example_budget.json'))
        self.assertAlmostEqual(total_std(budget), math.sqrt(15), places=12)
        self.assertEqual(shapes, {'P': 'arcsine', 'delta': 'uniform'})

    def test_missing_file(self):
        with self.assertRaisesMessage(FileNotFoundError, "no such input"):
            load_budget('/nonexistent/budget.json')

    def test_invalid_json(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'budget.json'
            path.write_text("{not json", encoding='utf-8')
            with self.assertRaises(ConfigurationError):
                load_budget(path)

    def test_empty_component_list(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'budget.json'
            path.write_text(json.dumps({'components': []}), encoding='utf-8')
            budget, _ = load_budget(path)
        self.assertEqual(total_std(budget), 0.0)
