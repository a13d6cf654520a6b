from errormodel.dataset import differences, load_differential, load_series
from errormodel.regression import random_model
from errormodel.reports import ErrorModelCommand


class Command(ErrorModelCommand):
    help = "Mean and standard deviation of a measurement column"

    def add_command_arguments(self, parser):
        parser.add_argument('input', help="series or differential CSV")
        parser.add_argument(
            '--column', choices=['observed', 'diff'], default='observed',
            help="observed values, or S1 - S2 of a differential file",
        )

    def run(self, input, column, **options):
        path = self.resolve(input)
        if column == 'diff':
            values = differences(load_differential(path))
            unit, places = 'm', 4
        else:
            series = load_series(path, sanity_bound=self.config['SANITY_BOUND'])
            values = series.observed
            unit, places = series.value_unit, series.decimals[1]
        estimate = random_model(values)
        results = dict(estimate.as_dict(), column=column, unit=unit, decimals=places)
        return results, [path]

    def render(self, results):
        places, unit = results['decimals'], results['unit']
        return [
            f"mean          {results['mean']:.{places}f} {unit}",
            f"std           {results['std']:.{places + 2}f} {unit}",
            f"relative std  {results['relative_std_ppm']:.1f} ppm",
            f"n             {results['n']}",
        ]
