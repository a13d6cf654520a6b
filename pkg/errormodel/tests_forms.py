from django.test import SimpleTestCase

from errormodel.budget import PROPORTIONAL
from errormodel.errors import ConfigurationError
from errormodel.forms import parse_budget, parse_scenario


def scenario(**overrides):
    data = {
        'true_value': 35.0,
        'sources': [
            {'kind': 'cycle', 'amplitude': 5.0, 'wavelength': 20.0, 'phase': 0.5},
            {'kind': 'additive-constant', 'value': 2.0},
        ],
        'schedule': {
            'repeats': 3,
            'conditions': {'distance': {'generator': 'listed', 'values': [10, 20, 30]}},
        },
    }
    data.update(overrides)
    return data


class ScenarioFormTests(SimpleTestCase):
    def assertPointer(self, data, pointer):
        with self.assertRaises(ConfigurationError) as ctx:
            parse_scenario(data)
        self.assertEqual(ctx.exception.pointer, pointer)
        self.assertTrue(str(ctx.exception).startswith(pointer))

    def test_valid(self):
        parsed = parse_scenario(scenario())
        self.assertEqual([s.kind for s in parsed.sources], ['cycle', 'additive-constant'])
        self.assertEqual(parsed.sources[0].phase, 0.5)
        self.assertEqual(parsed.schedule.conditions['distance'].values, (10.0, 20.0, 30.0))
        self.assertEqual(parsed.value_unit, 'm')

    def test_negative_amplitude(self):
        data = scenario()
        data['sources'][0]['amplitude'] = -1.0
        self.assertPointer(data, '/sources/0/amplitude')

    def test_missing_field_for_kind(self):
        data = scenario()
        del data['sources'][1]['value']
        self.assertPointer(data, '/sources/1/value')

    def test_unknown_kind(self):
        self.assertPointer(scenario(sources=[{'kind': 'thermal-drift'}]), '/sources/0/kind')

    def test_phase_given_twice(self):
        data = scenario()
        data['sources'][0]['phase_deg'] = 45.0
        self.assertPointer(data, '/sources/0/phase_deg')

    def test_coefficients_must_be_numbers(self):
        data = scenario(sources=[{'kind': 'temperature-polynomial', 'coefficients': [1, 'two']}])
        self.assertPointer(data, '/sources/0/coefficients')

    def test_sources_must_be_a_list(self):
        self.assertPointer(scenario(sources={'kind': 'cycle'}), '/sources')

    def test_listed_schedule_length(self):
        data = scenario()
        data['schedule']['conditions']['distance']['values'] = [10, 20]
        self.assertPointer(data, '/schedule/conditions/distance/values')

    def test_unknown_condition(self):
        data = scenario()
        data['schedule']['conditions'] = {'pressure': {'generator': 'constant', 'value': 1013.0}}
        self.assertPointer(data, '/schedule/conditions/pressure')

    def test_uniform_bounds(self):
        data = scenario()
        data['schedule']['conditions']['distance'] = {'generator': 'uniform', 'low': 10.0, 'high': 5.0}
        self.assertPointer(data, '/schedule/conditions/distance/high')

    def test_repeats_positive(self):
        data = scenario()
        data['schedule']['repeats'] = 0
        self.assertPointer(data, '/schedule/repeats')

    def test_needs_schedule_or_pairs(self):
        data = scenario()
        del data['schedule']
        self.assertPointer(data, '/')

    def test_pairs_must_be_ordered(self):
        data = scenario(differential={'pairs': [[18, 10]]})
        self.assertPointer(data, '/differential/pairs')

    def test_differential_needs_cycle(self):
        data = scenario(
            sources=[{'kind': 'additive-constant', 'value': 1.0}],
            differential={'pairs': [[10, 18]]},
        )
        self.assertPointer(data, '/sources')

    def test_not_an_object(self):
        self.assertPointer(scenario(schedule=[1, 2]), '/schedule')


class BudgetFormTests(SimpleTestCase):
    def test_valid(self):
        budget, shapes = parse_budget({
            'operating_point_m': 500,
            'components': [
                {'name': 'C', 'std': 1, 'unit': 'mm'},
                {'name': 'R', 'std': 2, 'unit': 'ppm', 'sensitivity': 'proportional', 'shape': 'uniform'},
                {'name': 'k', 'std': 1, 'unit': 'mm', 'sensitivity': 0.5},
            ],
        })
        self.assertEqual(budget.operating_point, 500.0)
        self.assertEqual(budget.components[1].sensitivity, PROPORTIONAL)
        self.assertEqual(budget.components[2].sensitivity, 0.5)
        self.assertEqual(shapes, {'R': 'uniform'})

    def test_negative_std(self):
        with self.assertRaises(ConfigurationError) as ctx:
            parse_budget({'components': [{'name': 'C', 'std': -1, 'unit': 'mm'}]})
        self.assertEqual(ctx.exception.pointer, '/components/0/std')

    def test_unknown_sensitivity(self):
        with self.assertRaises(ConfigurationError) as ctx:
            parse_budget({'components': [{'name': 'C', 'std': 1, 'unit': 'mm', 'sensitivity': 'linear'}]})
        self.assertEqual(ctx.exception.pointer, '/components/0/sensitivity')

    def test_unknown_shape(self):
        with self.assertRaises(ConfigurationError) as ctx:
            parse_budget({'components': [{'name': 'C', 'std': 1, 'unit': 'mm', 'shape': 'cauchy'}]})
        self.assertEqual(ctx.exception.pointer, '/components/0/shape')

    def test_document_must_be_an_object(self):
        with self.assertRaises(ConfigurationError) as ctx:
            parse_budget([])
        self.assertEqual(ctx.exception.pointer, '/')
