from errormodel.distributions import ArcsineDistribution
from errormodel.reports import ErrorModelCommand, histogram_series, write_series


class Command(ErrorModelCommand):
    help = "Density, distribution and spread of a sinusoidal error read at random phase"

    def add_command_arguments(self, parser):
        parser.add_argument('--amplitude', type=float, required=True, help="A, in the unit of the error")
        parser.add_argument('--at', type=float, action='append', default=[], metavar='Y')
        parser.add_argument('--samples', type=int, help="draw N values and compare them with the law")
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--points', type=int, default=201, help="density curve resolution")
        parser.add_argument('--emit-series', metavar='DIR')

    def run(self, amplitude, at=(), samples=None, seed=0, points=201, **options):
        law = ArcsineDistribution(amplitude)
        results = {
            'amplitude': amplitude,
            'std': law.std(),
            'normalization': law.normalization(),
            'second_moment': law.second_moment(),
            'points': [{'y': y, 'pdf': float(law.pdf(y)), 'cdf': float(law.cdf(y))} for y in at],
        }
        drawn = None
        if samples:
            drawn = law.sample(samples, seed=seed)
            results['sampled'] = {
                'n': samples,
                'seed': seed,
                'std': float(drawn.std(ddof=1)) if samples > 1 else 0.0,
                'ks_distance': law.ks_distance(drawn),
            }
        if options['emit_series']:
            write_series(options['emit_series'], 'density', *law.density_series(points))
            if drawn is not None:
                write_series(options['emit_series'], 'histogram', *histogram_series(drawn, bins=50))
        return results, []

    def render(self, results):
        lines = [
            f"amplitude     {results['amplitude']:g}",
            f"std           {results['std']:.6g}",
            f"normalization {results['normalization']:.9f}",
        ]
        for p in results['points']:
            lines.append(f"y = {p['y']:g}: pdf {p['pdf']:.6g}, cdf {p['cdf']:.6f}")
        sampled = results.get('sampled')
        if sampled:
            lines.append(f"sampled std   {sampled['std']:.6g} over {sampled['n']} draws (KS {sampled['ks_distance']:.4f})")
        return lines
