import io
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from errormodel.dataset import (
    EXPLICIT_REFERENCE, MEAN_REFERENCE, ColumnSchema, MeasurementRow, MeasurementSeries, bundled_path,
    differences, load_differential, load_series, quantize, to_error_samples, write_csv, write_differential,
)
from errormodel.errors import DatasetError, EmptyDatasetError, MissingReferenceError

# error columns as printed next to the measurements
TABLE1_PPM = [-30, -15, -2, 7, 13, 12, 4, -3, -8, -11, -11, -8, -1, 15, 37]
TABLE2_MM = [0.5, 1.1, 3.9, 5.9, 6.7, 7.5, 6.0, 4.5, 3.1, 0.5, -0.1,
             -1.5, -1.8, -3.9, -5.8, -5.2, -5.1, -3.6, -2.0, -0.6, 0.0]


class LoadSeriesTests(SimpleTestCase):
    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.tmp = Path(tmp.name)

    def write(self, name, text):
        path = self.tmp / name
        path.write_text(text, encoding='utf-8')
        return path

    def test_table1(self):
        series = load_series(bundled_path('table1.csv'))
        self.assertEqual(len(series), 15)
        self.assertEqual(series.condition_unit, 'degC')
        self.assertEqual(series.value_unit, 'MHz')
        self.assertEqual(list(series.conditions), list(range(-40, 101, 10)))
        self.assertEqual(series.rows[0].observed, 4.9999)
        self.assertEqual(series.rows[-1].observed, 5.000235)
        self.assertFalse(series.has_reference)

    def test_table2(self):
        series = load_series(bundled_path('table2.csv'))
        self.assertEqual(len(series), 21)
        self.assertTrue(series.has_reference)
        self.assertEqual(series.rows[0].reference, 6.0237)
        self.assertEqual(series.rows[-1].reference, 26.0272)

    def test_non_numeric_cell_names_row_and_column(self):
        path = self.write('bad.csv', "# units: condition=degC observed=MHz\ncondition,observed\n0,5.0\n10,five\n")
        with self.assertRaises(DatasetError) as ctx:
            load_series(path)
        self.assertEqual(ctx.exception.row, 2)
        self.assertEqual(ctx.exception.column, 'observed')
        self.assertIn("row 2", str(ctx.exception))

    def test_empty_file(self):
        path = self.write('empty.csv', "")
        with self.assertRaises(EmptyDatasetError):
            load_series(path)

    def test_header_only(self):
        path = self.write('header.csv', "# units: condition=degC observed=MHz\ncondition,observed\n")
        with self.assertRaises(EmptyDatasetError):
            load_series(path)

    def test_missing_file(self):
        with self.assertRaisesMessage(FileNotFoundError, "no such input"):
            load_series(self.tmp / 'nope.csv')

    def test_units_from_schema(self):
        path = self.write('plain.csv', "t,f\n0,5.0\n10,5.1\n")
        series = load_series(path, ColumnSchema(condition='t', observed='f', condition_unit='degC', value_unit='MHz'))
        self.assertEqual(series.observed.tolist(), [5.0, 5.1])

    def test_undeclared_units(self):
        path = self.write('plain.csv', "condition,observed\n0,5.0\n")
        with self.assertRaises(DatasetError):
            load_series(path)

    def test_reference_far_from_observed(self):
        path = self.write(
            'far.csv', "# units: condition=m observed=m\ncondition,observed,reference\n10,10.0,11.0\n",
        )
        with self.assertRaises(DatasetError) as ctx:
            load_series(path)
        self.assertEqual(ctx.exception.row, 1)

    def test_shipped_fixtures_round_trip(self):
        for name in ('table1.csv', 'table2.csv'):
            buffer = io.StringIO()
            write_csv(load_series(bundled_path(name)), buffer)
            self.assertEqual(buffer.getvalue(), bundled_path(name).read_text(encoding='utf-8'), name)


class DifferentialTests(SimpleTestCase):
    def test_table3(self):
        rows = load_differential(bundled_path('table3.csv'))
        self.assertEqual(len(rows), 15)
        self.assertEqual((rows[0].s_ab, rows[0].s_ac, rows[0].s2, rows[0].s1), (10, 18, 9.9965, 18.0008))
        self.assertAlmostEqual(sum(differences(rows)) / 15, 8.0014, places=4)

    def test_round_trip(self):
        buffer = io.StringIO()
        rows = load_differential(bundled_path('table3.csv'))
        write_differential(rows, buffer, label='Simulated differential distances with cycle error')
        self.assertEqual(buffer.getvalue(), bundled_path('table3.csv').read_text(encoding='utf-8'))

    def test_legs_must_be_ordered(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'bad.csv'
            path.write_text("s2,s1\n18.0,10.0\n", encoding='utf-8')
            with self.assertRaises(DatasetError) as ctx:
                load_differential(path)
        self.assertEqual(ctx.exception.row, 1)

    def test_nominal_columns_optional(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'readings.csv'
            path.write_text("s2,s1\n9.9965,18.0008\n", encoding='utf-8')
            rows = load_differential(path)
        self.assertIsNone(rows[0].s_ab)


class ErrorSampleTests(SimpleTestCase):
    def test_table2_errors_reproduce_printed_column(self):
        series = load_series(bundled_path('table2.csv'))
        samples = to_error_samples(series, EXPLICIT_REFERENCE, resolution=0.1)
        self.assertEqual([s.error for s in samples], TABLE2_MM)
        self.assertEqual(samples[0].unit, 'mm')
        # attached to the standard distance unless asked otherwise
        self.assertEqual(samples[0].condition, 6.0237)

    def test_table2_reading_abscissa(self):
        series = load_series(bundled_path('table2.csv'))
        samples = to_error_samples(series, EXPLICIT_REFERENCE, abscissa='observed')
        self.assertEqual(samples[0].condition, 6.0232)
        self.assertAlmostEqual(samples[0].error, 0.5, places=9)

    def test_table1_errors_reproduce_printed_column(self):
        series = load_series(bundled_path('table1.csv'))
        samples = to_error_samples(series, MEAN_REFERENCE, resolution=1)
        self.assertEqual([s.error for s in samples], TABLE1_PPM)
        self.assertEqual(samples[4].condition, 0)
        self.assertEqual(samples[4].error, 13)
        self.assertEqual(samples[0].unit, 'ppm')

    def test_identity_reference(self):
        series = MeasurementSeries(
            rows=[MeasurementRow(float(s), float(s), float(s)) for s in (5, 6, 7)],
            condition_unit='m', value_unit='m',
        )
        self.assertEqual([s.error for s in to_error_samples(series, EXPLICIT_REFERENCE)], [0.0, 0.0, 0.0])

    def test_explicit_reference_needs_reference(self):
        series = load_series(bundled_path('table1.csv'))
        with self.assertRaises(MissingReferenceError):
            to_error_samples(series, EXPLICIT_REFERENCE)

    def test_quantize_rounds_half_up(self):
        self.assertEqual(quantize([0.25, -0.25, 1.04], 0.1).tolist(), [0.3, -0.2, 1.0])
        self.assertEqual(quantize([12.5, -12.5], 1).tolist(), [13.0, -12.0])

    def test_quantize_step_without_integer_reciprocal(self):
        for step, values, expected in (
            (0.3, [0.3, 0.5, 0.62, -0.31], [0.3, 0.6, 0.6, -0.3]),
            (0.15, [0.14, 0.31, 0.5], [0.15, 0.3, 0.45]),
        ):
            for got, want in zip(quantize(values, step), expected):
                self.assertAlmostEqual(got, want, places=12, msg=f"step {step}")

    def test_quantize_needs_positive_step(self):
        with self.assertRaises(ValueError):
            quantize([1.0], 0.0)
