"""Run a simulation scenario.

A scenario with a ``schedule`` section simulates repeated measurements; one
with a ``differential`` section simulates the two-leg campaign. Both may be
present.
"""
import logging
from pathlib import Path

import numpy as np

from errormodel.dataset import load_differential, write_csv, write_differential
from errormodel.errors import ConfigurationError
from errormodel.regression import random_model
from errormodel.reports import ErrorModelCommand, write_series
from errormodel.simulate import (
    classify_effects, differential_contributions, load_scenario, simulate_differential, simulate_repeated,
)

logger = logging.getLogger(__name__)

TABLE3 = 'table3.csv'
# readings are printed to 0.1 mm; anything closer counts as the same value
MATCH_TOL_M = 1e-9


class Command(ErrorModelCommand):
    help = "Simulate a scenario, optionally classifying each source's effect"

    def add_command_arguments(self, parser):
        parser.add_argument('scenario', help="scenario JSON")
        parser.add_argument('--seed', type=int, help="overrides the scenario seed")
        parser.add_argument('--classify', action='store_true', help="append the effect classification")
        parser.add_argument('--eps', type=float, help="classification threshold, source units")
        parser.add_argument(
            '--regen-table3', action='store_true',
            help=f"compare the simulated readings with the shipped {TABLE3}",
        )
        parser.add_argument('--emit-series', metavar='DIR', help="write the simulated data into DIR")

    def run(self, scenario, seed=None, **options):
        path = self.resolve(scenario)
        scenario = load_scenario(path)
        if seed is None:
            seed = scenario.schedule.seed if scenario.schedule and scenario.schedule.seed is not None else 0
        eps = options['eps'] or self.config['EFFECT_EPS_MM']
        inputs = [path]
        results = {'label': scenario.label, 'seed': seed}

        if scenario.schedule is not None:
            run = simulate_repeated(
                scenario.sources, scenario.schedule, scenario.true_value, scenario.value_unit, seed=seed,
            )
            estimate = random_model(run.series.observed) if len(run.series) > 1 else None
            results['repeated'] = {
                'n': len(run.series),
                'value_unit': scenario.value_unit,
                'random_model': estimate.as_dict() if estimate else None,
                'units': run.units,
            }
            if options['classify']:
                results['repeated']['effects'] = classify_effects(run.contributions, eps).as_dict()
            if options['emit_series']:
                self.emit_repeated(options['emit_series'], run)

        if scenario.pairs:
            rows = simulate_differential(
                scenario.cycle, scenario.pairs, scenario.extra_sources, round_mm=scenario.round_mm, seed=seed,
            )
            estimate = random_model([row.difference for row in rows]) if len(rows) > 1 else None
            results['differential'] = {
                'n': len(rows),
                'round_mm': scenario.round_mm,
                'random_model': estimate.as_dict() if estimate else None,
                'rows': [[row.s_ab, row.s_ac, row.s2, row.s1] for row in rows],
            }
            if options['classify']:
                contributions = differential_contributions(
                    scenario.cycle, scenario.pairs, scenario.extra_sources, seed=seed,
                )
                results['differential']['effects'] = classify_effects(contributions, eps).as_dict()
            if options['regen_table3']:
                table = self.resolve(TABLE3)
                results['differential']['regen'] = self.compare(rows, load_differential(table))
                inputs.append(table)
            if options['emit_series']:
                directory = Path(options['emit_series'])
                directory.mkdir(parents=True, exist_ok=True)
                write_differential(rows, directory / 'differential.csv', label=scenario.label, decimals=4)
        elif options['regen_table3']:
            raise ConfigurationError("--regen-table3 needs a differential section", pointer='/differential')

        return results, inputs

    def compare(self, simulated, printed):
        if len(simulated) != len(printed):
            raise ConfigurationError(f"scenario has {len(simulated)} pairs, {TABLE3} has {len(printed)} rows")
        mismatches = []
        for i, (ours, theirs) in enumerate(zip(simulated, printed), start=1):
            if (ours.s_ab, ours.s_ac) != (theirs.s_ab, theirs.s_ac):
                raise ConfigurationError(f"row {i}: scenario pair differs from {TABLE3}")
            for column in ('s2', 's1'):
                a, b = getattr(ours, column), getattr(theirs, column)
                if abs(a - b) > MATCH_TOL_M:
                    mismatches.append({'row': i, 'column': column, 'simulated': a, 'printed': b})
        total = 2 * len(simulated)
        for m in mismatches:
            logger.warning(f"row {m['row']} {m['column']}: simulated {m['simulated']:.4f}, printed {m['printed']:.4f}")
        return {'matched': total - len(mismatches), 'total': total, 'mismatches': mismatches}

    def emit_repeated(self, directory, run):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        write_csv(run.series, directory / 'series.csv')
        index = np.arange(1, len(run.series) + 1)
        for name, contribution in run.contributions.items():
            write_series(directory, f"contribution_{name}", index, contribution)
        logger.info(f"Series written to {directory}")

    def render(self, results):
        lines = []
        if results['label']:
            lines.append(results['label'])
        for section in ('repeated', 'differential'):
            part = results.get(section)
            if not part:
                continue
            lines.append(f"{section}: {part['n']} simulated")
            estimate = part['random_model']
            if estimate:
                lines.append(f"  mean {estimate['mean']:.6f}, std {estimate['std']:.3g}")
            for effect in part.get('effects', {}).get('sources', []):
                lines.append(
                    f"  {effect['name']}: {effect['classification']}, "
                    f"mean {effect['mean']:.4g}, std {effect['std']:.4g}"
                )
            regen = part.get('regen')
            if regen:
                lines.append(f"  {regen['matched']}/{regen['total']} values match")
        return lines
