import json
import math
import shutil
import tempfile
from io import StringIO
from pathlib import Path

import pandas as pd
from django.conf import settings
from django.core.management import CommandError, call_command
from django.test import SimpleTestCase, override_settings

from errormodel.dataset import bundled_path, load_series
from errormodel.tests_linsolve import TEMPERATURE_MATRIX


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.tmp = Path(tmp.name)

    def run_command(self, name, *args, **options):
        out = StringIO()
        call_command(name, *args, stdout=out, **options)
        return out.getvalue()

    def run_json(self, name, *args, **options):
        return json.loads(self.run_command(name, *args, as_json=True, **options))

    def assertExitCode(self, code, name, *args, **options):
        with self.assertRaises(CommandError) as ctx:
            self.run_command(name, *args, **options)
        self.assertEqual(ctx.exception.returncode, code)
        return str(ctx.exception)

    def write(self, name, text):
        path = self.tmp / name
        path.write_text(text, encoding='utf-8')
        return str(path)


class RandomModelCommandTests(CommandTestCase):
    def test_table1(self):
        output = self.run_command('random_model', 'table1.csv')
        self.assertIn("5.000050 MHz", output)
        self.assertIn("15.8 ppm", output)

    def test_table1_json(self):
        report = self.run_json('random_model', 'table1.csv')
        self.assertEqual(report['command']['name'], 'random_model')
        self.assertTrue(report['input_digest'].startswith('sha256:'))
        self.assertEqual(round(report['results']['mean'], 6), 5.00005)
        self.assertEqual(report['results']['n'], 15)
        self.assertEqual(report['warnings'], [])

    def test_table3_differences(self):
        output = self.run_command('random_model', 'table3.csv', column='diff')
        self.assertIn("8.0014 m", output)

    def test_missing_file(self):
        message = self.assertExitCode(2, 'random_model', 'nope.csv')
        self.assertIn("no such input", message)

    def test_malformed_file(self):
        path = self.write('bad.csv', "# units: condition=degC observed=MHz\ncondition,observed\n0,5.0\n10,x\n")
        message = self.assertExitCode(2, 'random_model', path)
        self.assertIn("row 2", message)

    def test_digest_is_stable(self):
        first = self.run_json('random_model', 'table1.csv')['input_digest']
        second = self.run_json('random_model', 'table1.csv')['input_digest']
        self.assertEqual(first, second)

    def test_data_dir(self):
        shutil.copy(bundled_path('table1.csv'), self.tmp / 'frequencies.csv')
        report = self.run_json('random_model', 'frequencies.csv', data_dir=str(self.tmp))
        self.assertEqual(report['results']['n'], 15)

    def test_data_dir_from_settings(self):
        shutil.copy(bundled_path('table1.csv'), self.tmp / 'frequencies.csv')
        with override_settings(ERRORMODEL=dict(settings.ERRORMODEL, DATA_DIR=self.tmp)):
            report = self.run_json('random_model', 'frequencies.csv')
        self.assertEqual(report['results']['n'], 15)


class FitCommandTests(CommandTestCase):
    def test_poly3_with_matrix(self):
        report = self.run_json('fit', 'table1.csv', model='poly3', emit_matrix=True)
        results = report['results']
        self.assertEqual(results['normal_matrix'], TEMPERATURE_MATRIX)
        self.assertEqual(results['rhs'], [-1, 4610, 304500, 42713000])
        for got, expected in zip(results['coefficients'], (9.983251, -0.013518, -0.018601, 0.000214)):
            self.assertAlmostEqual(got, expected, delta=1e-3)
        self.assertEqual(results['reference_rule'], 'mean-reference')

    def test_matrix_only_on_request(self):
        results = self.run_json('fit', 'table1.csv')['results']
        self.assertNotIn('normal_matrix', results)
        self.assertEqual(results['model'], 'poly3')

    def test_poly3_text(self):
        output = self.run_command('fit', 'table1.csv', emit_matrix=True)
        self.assertIn("coefficients", output)
        self.assertIn("normal equations", output)

    def test_cycle(self):
        results = self.run_json('fit', 'table2.csv', model='cycle', wavelength=20.0)['results']
        self.assertAlmostEqual(results['coefficients']['amplitude'], 5.7, delta=0.3)
        self.assertAlmostEqual(results['coefficients']['phase_deg'], 254.41, delta=3.0)
        self.assertEqual(results['abscissa'], 'observed')
        self.assertEqual(results['unit'], 'mm')

    def test_cycle_differential(self):
        results = self.run_json('fit', 'table3.csv', model='cycle-diff', wavelength=20.0)['results']
        self.assertAlmostEqual(results['coefficients']['s0'], 8.0, delta=2e-5)
        self.assertAlmostEqual(results['coefficients']['amplitude'], 0.00499, delta=5e-5)
        self.assertEqual(results['model'], 'cycle-diff')

    def test_predict(self):
        report = self.run_json('fit', 'table1.csv', predict=[0.0, 120.0])
        inside, outside = report['results']['predictions']
        self.assertFalse(inside['out_of_domain'])
        self.assertTrue(outside['out_of_domain'])
        self.assertEqual(len(report['warnings']), 1)
        self.assertIn("outside fitted domain", report['warnings'][0])

    def test_singular_fit(self):
        path = self.write(
            'flat.csv',
            "# units: condition=degC observed=MHz\ncondition,observed\n"
            "20,5.0000\n20,5.0001\n20,5.0002\n20,5.0003\n20,5.0004\n",
        )
        message = self.assertExitCode(3, 'fit', path, model='poly3')
        self.assertIn("singular", message)

    def test_emit_series(self):
        self.run_command('fit', 'table2.csv', model='cycle', emit_series=str(self.tmp))
        for name in ('errors', 'fit', 'residuals', 'histogram', 'arcsine'):
            frame = pd.read_csv(self.tmp / f"{name}.csv")
            self.assertEqual(list(frame.columns), ['x', 'y'], name)
        self.assertEqual(len(pd.read_csv(self.tmp / 'errors.csv')), 21)

    def test_emit_series_differential(self):
        self.run_command('fit', 'table3.csv', model='cycle-diff', emit_series=str(self.tmp))
        self.assertEqual(len(pd.read_csv(self.tmp / 'residuals.csv')), 15)


class SimulateCommandTests(CommandTestCase):
    def effects(self, report, section):
        return {e['name']: e for e in report['results'][section]['effects']['sources']}

    def test_regenerate_table3(self):
        output = self.run_command('simulate', 'table3_scenario.json', regen_table3=True)
        self.assertIn("30/30 values match", output)

    def test_constant_temperature(self):
        output = self.run_command('simulate', 'constant_temperature.json', classify=True)
        self.assertIn("temperature-polynomial: systematic", output)

    def test_uniform_distance(self):
        report = self.run_json('simulate', 'uniform_distance.json', classify=True)
        effects = self.effects(report, 'repeated')
        self.assertEqual(effects['cycle']['classification'], 'random')
        self.assertLess(abs(effects['cycle']['std'] - 5 / math.sqrt(2)) / (5 / math.sqrt(2)), 0.05)
        self.assertEqual(effects['additive-constant']['classification'], 'systematic')
        self.assertEqual(effects['gaussian-noise']['classification'], 'random')

    def test_constant_distance(self):
        effects = self.effects(self.run_json('simulate', 'constant_distance.json', classify=True), 'repeated')
        self.assertEqual(effects['cycle']['classification'], 'systematic')
        self.assertEqual(effects['gaussian-noise']['classification'], 'random')

    def test_differential_constant(self):
        effects = self.effects(self.run_json('simulate', 'differential_constant.json', classify=True), 'differential')
        self.assertEqual(effects['constant']['classification'], 'non-effect')
        self.assertEqual(effects['cycle']['classification'], 'random')

    def test_seed_overrides_scenario(self):
        first = self.run_json('simulate', 'uniform_distance.json', seed=1)['results']['repeated']['random_model']
        again = self.run_json('simulate', 'uniform_distance.json', seed=1)['results']['repeated']['random_model']
        other = self.run_json('simulate', 'uniform_distance.json', seed=2)['results']['repeated']['random_model']
        self.assertEqual(first, again)
        self.assertNotEqual(first['mean'], other['mean'])

    def test_emit_series(self):
        self.run_command('simulate', 'constant_distance.json', emit_series=str(self.tmp))
        series = load_series(self.tmp / 'series.csv')
        self.assertEqual(len(series), 50)
        self.assertTrue((self.tmp / 'contribution_cycle.csv').exists())

    def test_schema_error_has_pointer(self):
        path = self.write('bad.json', json.dumps({
            'sources': [{'kind': 'cycle', 'amplitude': -5, 'wavelength': 20}],
            'differential': {'pairs': [[10, 18]]},
        }))
        message = self.assertExitCode(2, 'simulate', path)
        self.assertIn("/sources/0/amplitude", message)

    def test_regen_needs_differential(self):
        self.assertExitCode(2, 'simulate', 'constant_temperature.json', regen_table3=True)


class PropagateCommandTests(CommandTestCase):
    def test_example_budget(self):
        output = self.run_command('propagate', 'example_budget.json')
        self.assertIn("total std     3.873 mm", output)

    def test_monte_carlo(self):
        results = self.run_json('propagate', 'example_budget.json', monte_carlo=1_000_000, seed=7)['results']
        self.assertAlmostEqual(results['total_std_mm'], math.sqrt(15), places=12)
        self.assertLess(results['monte_carlo']['relative_discrepancy'], 0.005)
        self.assertEqual(results['monte_carlo']['shapes'], {'P': 'arcsine', 'delta': 'uniform'})

    def test_monte_carlo_default_draws(self):
        with override_settings(ERRORMODEL=dict(settings.ERRORMODEL, MC_DEFAULT_SAMPLES=20_000)):
            report = json.loads(self.run_command('propagate', 'example_budget.json', '--monte-carlo', '--json'))
        self.assertEqual(report['results']['monte_carlo']['n'], 20_000)

    def test_shape_override(self):
        results = self.run_json(
            'propagate', 'example_budget.json', monte_carlo=10_000, shape=['P=gaussian'],
        )['results']
        self.assertEqual(results['monte_carlo']['shapes']['P'], 'gaussian')

    def test_bad_shape_option(self):
        self.assertExitCode(2, 'propagate', 'example_budget.json', monte_carlo=10_000, shape=['P'])

    def test_empty_budget(self):
        path = self.write('empty.json', json.dumps({'components': []}))
        report = self.run_json('propagate', path)
        self.assertEqual(report['results']['total_std_mm'], 0.0)
        self.assertEqual(report['warnings'], ["empty budget"])

    def test_unit_error_names_component(self):
        path = self.write('bad.json', json.dumps({
            'components': [{'name': 'tilt', 'std': 1, 'unit': 'furlong'}],
        }))
        message = self.assertExitCode(2, 'propagate', path)
        self.assertIn("'tilt'", message)


class ArcsineCommandTests(CommandTestCase):
    def test_points(self):
        results = self.run_json('arcsine', amplitude=5.7, at=[0.0, 6.0, 5.7])['results']
        first, outside, edge = results['points']
        self.assertAlmostEqual(first['pdf'], 1 / (5.7 * math.pi), places=12)
        self.assertEqual(outside['pdf'], 0.0)
        self.assertEqual(edge['pdf'], 'inf')
        self.assertAlmostEqual(results['std'], 5.7 / math.sqrt(2), places=12)
        self.assertAlmostEqual(results['normalization'], 1.0, delta=1e-9)

    def test_samples(self):
        results = self.run_json('arcsine', amplitude=5.0, samples=100_000, seed=3)['results']
        self.assertLess(abs(results['sampled']['std'] - 5 / math.sqrt(2)) / (5 / math.sqrt(2)), 0.02)
        self.assertLess(results['sampled']['ks_distance'], 0.01)

    def test_emit_series(self):
        self.run_command('arcsine', amplitude=5.0, samples=10_000, emit_series=str(self.tmp))
        self.assertEqual(len(pd.read_csv(self.tmp / 'density.csv')), 201)
        self.assertEqual(len(pd.read_csv(self.tmp / 'histogram.csv')), 50)

    def test_negative_amplitude(self):
        self.assertExitCode(2, 'arcsine', amplitude=-1.0)
