"""Run reports and the base class of the management commands.

A command resolves its inputs, calls into the domain modules and returns a
RunReport. Warnings logged under ``errormodel`` during the run are copied
into the report, so a ``--json`` consumer sees them without reading stderr.

Exit codes: 0 success, 2 input or configuration error, 3 numerical failure.
"""
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from django.core.serializers.json import DjangoJSONEncoder

from errormodel.errors import (
    ConfigurationError, DatasetError, InsufficientDataError, SingularMatrixError,
)

logger = logging.getLogger(__name__)

INPUT_ERROR = 2
NUMERICAL_ERROR = 3

# options every Django command carries; not echoed into reports
_BASE_OPTIONS = {
    'verbosity', 'settings', 'pythonpath', 'traceback', 'no_color', 'force_color',
    'skip_checks', 'as_json', 'stdout', 'stderr',
}


class ReportEncoder(DjangoJSONEncoder):
    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, Path):
            return str(o)
        return super().default(o)


def _finite(value):
    """Non-finite floats become strings; strict JSON has no Infinity"""
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    if isinstance(value, (float, np.floating)) and not math.isfinite(value):
        return str(float(value))
    return value


def digest(paths):
    h = hashlib.sha256()
    for path in paths:
        h.update(Path(path).read_bytes())
    return f"sha256:{h.hexdigest()}"


@dataclass
class RunReport:
    command: dict
    input_digest: str
    results: dict
    warnings: list = field(default_factory=list)

    def as_dict(self):
        return {
            'command': self.command,
            'input_digest': self.input_digest,
            'results': self.results,
            'warnings': list(self.warnings),
        }

    def to_json(self):
        return json.dumps(_finite(self.as_dict()), cls=ReportEncoder, indent=2)


class _WarningCollector(logging.Handler):
    def __init__(self):
        super().__init__(level=logging.WARNING)
        self.messages = []

    def emit(self, record):
        self.messages.append(record.getMessage())


def write_series(directory, name, x, y):
    """One ``x,y`` CSV per curve; returns the written path"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{name}.csv"
    pd.DataFrame({'x': np.asarray(x, dtype=float), 'y': np.asarray(y, dtype=float)}).to_csv(
        path, index=False, lineterminator='\n'
    )
    return path


def histogram_series(values, bins=10):
    """(bin centres, counts)"""
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins)
    return (edges[:-1] + edges[1:]) / 2.0, counts


class ErrorModelCommand(BaseCommand):
    """Common flags, input resolution and error translation"""
    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument('--json', action='store_true', dest='as_json', help="print the report as JSON")
        parser.add_argument('--data-dir', help="directory bare input names resolve against")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def run(self, **options):
        """Return (results, input paths)"""
        raise NotImplementedError

    def render(self, results):
        """Human-readable lines"""
        raise NotImplementedError

    @property
    def config(self):
        return settings.ERRORMODEL

    def resolve(self, name):
        path = Path(name)
        if len(path.parts) == 1 and not path.exists():
            return self.data_dir / path
        return path

    def handle(self, *args, **options):
        self.data_dir = Path(options.get('data_dir') or self.config['DATA_DIR'])
        collector = _WarningCollector()
        package_logger = logging.getLogger('errormodel')
        package_logger.addHandler(collector)
        try:
            results, inputs = self.run(**options)
            input_digest = digest(inputs)
        except FileNotFoundError as e:
            message = str(e) if str(e).startswith('no such input') else f"no such input: {e.filename}"
            raise CommandError(message, returncode=INPUT_ERROR)
        except (SingularMatrixError, InsufficientDataError) as e:
            raise CommandError(str(e), returncode=NUMERICAL_ERROR)
        except (DatasetError, ConfigurationError, ValueError) as e:
            raise CommandError(str(e), returncode=INPUT_ERROR)
        finally:
            package_logger.removeHandler(collector)

        report = RunReport(
            command={
                'name': self.name,
                'options': {k: v for k, v in options.items() if k not in _BASE_OPTIONS},
            },
            input_digest=input_digest,
            results=results,
            warnings=collector.messages,
        )
        if options.get('as_json'):
            self.stdout.write(report.to_json())
        else:
            for line in self.render(results):
                self.stdout.write(line)
            for message in report.warnings:
                self.stdout.write(f"warning: {message}")
        return None

    @property
    def name(self):
        return self.__class__.__module__.rsplit('.', 1)[-1]
