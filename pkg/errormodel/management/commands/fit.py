"""Function-model fits over a measurement file.

    manage.py fit table1.csv --model poly3 --emit-matrix
    manage.py fit table2.csv --model cycle --wavelength 20
    manage.py fit table3.csv --model cycle-diff
"""
import logging

import numpy as np

from errormodel.dataset import (
    EXPLICIT_REFERENCE, MEAN_REFERENCE, load_differential, load_series, to_error_samples,
)
from errormodel.distributions import ArcsineDistribution
from errormodel.regression import (
    fit_cycle_differential, fit_cycle_direct, fit_polynomial, predict_frequency,
)
from errormodel.reports import ErrorModelCommand, histogram_series, write_series

logger = logging.getLogger(__name__)

MODELS = ('poly3', 'poly', 'cycle', 'cycle-diff')
CURVE_POINTS = 201


def _error_unit(series, rule):
    return 'mm' if rule == EXPLICIT_REFERENCE and series.value_unit == 'm' else 'ppm'


class Command(ErrorModelCommand):
    help = "Fit a temperature polynomial or a cycle error model"

    def add_command_arguments(self, parser):
        parser.add_argument('input', help="series CSV, or a differential CSV for cycle-diff")
        parser.add_argument('--model', choices=MODELS, default='poly3')
        parser.add_argument('--degree', type=int, default=3, help="degree for --model poly")
        parser.add_argument('--wavelength', type=float, help="cycle wavelength in metres")
        parser.add_argument('--with-offset', action='store_true', help="constant term in the cycle fit")
        parser.add_argument('--basis', choices=['readings', 'nominal'], default='readings')
        parser.add_argument(
            '--abscissa', choices=['condition', 'observed'],
            help="what each error is plotted against; cycle fits default to the reading",
        )
        parser.add_argument('--resolution', type=float, help="grid the errors are rounded onto")
        parser.add_argument('--no-rounding', action='store_true')
        parser.add_argument('--emit-matrix', action='store_true', help="include the normal equations")
        parser.add_argument(
            '--predict', type=float, action='append', default=[], metavar='T',
            help="evaluate the fitted polynomial at T (repeatable)",
        )
        parser.add_argument('--f0', type=float, help="nominal value for --predict; default the series mean")
        parser.add_argument('--emit-series', metavar='DIR', help="write x,y CSV series into DIR")

    def run(self, input, model, **options):
        path = self.resolve(input)
        tol = self.config['SINGULAR_TOL']
        wavelength = options['wavelength'] or self.config['DEFAULT_WAVELENGTH_M']

        if model == 'cycle-diff':
            rows = load_differential(path)
            fitted = fit_cycle_differential(rows, wavelength=wavelength, basis=options['basis'], tol=tol)
            results = fitted.as_dict()
            if options['emit_series']:
                self.emit_differential(options['emit_series'], rows, fitted)
        else:
            series = load_series(path, sanity_bound=self.config['SANITY_BOUND'])
            rule = EXPLICIT_REFERENCE if series.has_reference else MEAN_REFERENCE
            abscissa = options['abscissa'] or ('observed' if model == 'cycle' else 'condition')
            resolution = None
            if not options['no_rounding']:
                resolution = options['resolution'] or self.config['ERROR_RESOLUTION'].get(_error_unit(series, rule))
            samples = to_error_samples(series, rule, abscissa=abscissa, resolution=resolution)
            if model == 'cycle':
                fitted = fit_cycle_direct(samples, wavelength=wavelength, with_offset=options['with_offset'], tol=tol)
            else:
                degree = 3 if model == 'poly3' else options['degree']
                fitted = fit_polynomial(samples, degree=degree, tol=tol)
            results = fitted.as_dict()
            results.update(reference_rule=rule, abscissa=abscissa, resolution=resolution)
            if options['predict']:
                results['predictions'] = self.predictions(series, fitted, options)
            if options['emit_series']:
                self.emit(options['emit_series'], samples, fitted)

        if not options['emit_matrix']:
            results.pop('normal_matrix')
            results.pop('rhs')
        return results, [path]

    def predictions(self, series, fitted, options):
        if not hasattr(fitted, 'degree'):
            raise ValueError("--predict applies to polynomial fits")
        f0 = options['f0'] or float(series.observed.mean())
        result = []
        for t in options['predict']:
            prediction = predict_frequency(fitted, f0, t)
            result.append({
                'condition': t,
                'error': float(fitted.evaluate(t)),
                'value': prediction.value,
                'out_of_domain': prediction.out_of_domain,
            })
        return result

    def emit(self, directory, samples, fitted):
        x = np.array([s.condition for s in samples])
        y = np.array([s.error for s in samples])
        curve = np.linspace(x.min(), x.max(), CURVE_POINTS)
        write_series(directory, 'errors', x, y)
        write_series(directory, 'fit', curve, fitted.evaluate(curve))
        write_series(directory, 'residuals', x, fitted.residuals)
        write_series(directory, 'histogram', *histogram_series(y))
        if not hasattr(fitted, 'degree'):
            write_series(directory, 'arcsine', *ArcsineDistribution(fitted.amplitude).density_series())
        logger.info(f"Series written to {directory}")

    def emit_differential(self, directory, rows, fitted):
        s2 = np.array([row.s2 for row in rows])
        diff = np.array([row.difference for row in rows])
        write_series(directory, 'differences', s2, diff)
        write_series(directory, 'fit', s2, diff - np.array(fitted.residuals))
        write_series(directory, 'residuals', s2, fitted.residuals)
        write_series(directory, 'histogram', *histogram_series(diff))
        write_series(directory, 'arcsine', *ArcsineDistribution(fitted.amplitude).density_series())
        logger.info(f"Series written to {directory}")

    def render(self, results):
        lines = [f"model         {results['model']} ({results['unit']})"]
        coefficients = results['coefficients']
        if isinstance(coefficients, dict):
            if 's0' in coefficients:
                lines.append(f"S0            {coefficients['s0']:.5f} m")
            lines.append(f"amplitude     {coefficients['amplitude']:.5g} {results['unit']}")
            lines.append(f"phase         {coefficients['phase_deg']:.2f} deg")
            lines.append(f"wavelength    {coefficients['wavelength']:g} m")
            if 'bias' in coefficients:
                lines.append(f"bias          {coefficients['bias']:.4g} {results['unit']}")
        else:
            lines.append("coefficients  " + ", ".join(f"{c:.6f}" for c in coefficients))
        lines.append(f"residual std  {results['residual_std']:.4g} {results['unit']}")
        lines.append(f"dof           {results['dof']}")
        if 'normal_matrix' in results:
            lines.append("normal equations")
            for row, b in zip(results['normal_matrix'], results['rhs']):
                lines.append("  " + "  ".join(f"{v:14.6f}" for v in row) + f"  | {b:14.6f}")
        for p in results.get('predictions', []):
            flag = "  (out of domain)" if p['out_of_domain'] else ""
            lines.append(f"at {p['condition']:g}: error {p['error']:.3f}, value {p['value']:.6f}{flag}")
        return lines
