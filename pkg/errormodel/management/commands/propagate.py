import logging

from errormodel.budget import SHAPES, load_budget, monte_carlo_std, total_std
from errormodel.reports import ErrorModelCommand

logger = logging.getLogger(__name__)


def _shape_option(value):
    name, sep, shape = value.partition('=')
    if not sep or not name:
        raise ValueError(f"--shape expects name=shape, got '{value}'")
    if shape not in SHAPES:
        raise ValueError(f"--shape {name}: unknown shape '{shape}', expected one of {', '.join(SHAPES)}")
    return name, shape


class Command(ErrorModelCommand):
    help = "Total standard deviation of an error budget"

    def add_command_arguments(self, parser):
        parser.add_argument('budget', help="budget JSON")
        parser.add_argument(
            '--monte-carlo', type=int, nargs='?', const=self.config['MC_DEFAULT_SAMPLES'], metavar='N',
            help=f"check the total with N draws (default {self.config['MC_DEFAULT_SAMPLES']})",
        )
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument(
            '--shape', action='append', default=[], metavar='NAME=SHAPE',
            help="sampling law of a component for --monte-carlo (repeatable)",
        )

    def run(self, budget, monte_carlo=None, seed=0, shape=(), **options):
        path = self.resolve(budget)
        budget, shapes = load_budget(path)
        shapes.update(_shape_option(value) for value in shape)

        if not budget.components:
            logger.warning("empty budget")
        total = total_std(budget)
        results = {
            'operating_point_m': budget.operating_point,
            'components': [
                {'name': name, 'coefficient': c, 'contribution_mm': contribution}
                for name, c, contribution in budget.resolved()
            ],
            'total_std_mm': total,
        }
        if monte_carlo is not None and budget.components:
            mc = monte_carlo_std(budget, monte_carlo, seed, shapes=shapes)
            results['monte_carlo'] = {
                'n': monte_carlo,
                'seed': seed,
                'shapes': shapes,
                'std_mm': mc,
                'relative_discrepancy': abs(mc - total) / total if total else 0.0,
            }
        return results, [path]

    def render(self, results):
        lines = [
            f"  {c['name']:<12} x {c['coefficient']:<10.4g} -> {c['contribution_mm']:.4f} mm"
            for c in results['components']
        ]
        lines.append(f"total std     {results['total_std_mm']:.3f} mm")
        mc = results.get('monte_carlo')
        if mc:
            lines.append(
                f"Monte-Carlo   {mc['std_mm']:.3f} mm over {mc['n']} draws "
                f"(discrepancy {mc['relative_discrepancy']:.2%})"
            )
        return lines
