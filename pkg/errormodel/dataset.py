"""Measurement series, error samples and the CSV layout they travel in.

A series file looks like::

    # label: Measured frequency values of a quartz crystal
    # units: condition=degC observed=MHz
    condition,observed[,reference]
    -40,4.999900
    ...

Differential files use the ``s_ab,s_ac,s2,s1`` layout instead.

Sign convention: with an explicit reference the error is
``reference - observed`` (a positive error means the instrument reads short).
With the mean reference the error is ``(observed - mean) / mean`` in ppm.
"""
import io
import logging
import math
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd

from errormodel.errors import DatasetError, EmptyDatasetError, MissingReferenceError

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent / 'data'

CONDITION_UNITS = ('degC', 'm')
VALUE_UNITS = ('MHz', 'm')

EXPLICIT_REFERENCE = 'explicit-reference'
MEAN_REFERENCE = 'mean-reference'
REFERENCE_RULES = (EXPLICIT_REFERENCE, MEAN_REFERENCE)

DIFFERENTIAL_COLUMNS = ('s_ab', 's_ac', 's2', 's1')


def bundled_path(name):
    """Absolute path of a fixture shipped with the app"""
    return DATA_DIR / name


def quantize(values, step):
    """Round half-up onto a grid of ``step``.

    When ``1 / step`` is an integer the step is applied as a division by
    that scale, so the result is the same double a CSV parser would produce
    for the printed decimal.
    """
    values = np.asarray(values, dtype=float)
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    scale = round(1 / step)
    if step >= 1 or not math.isclose(scale * step, 1.0, rel_tol=1e-12):
        return np.floor(values / step + 0.5) * step
    return np.floor(values * scale + 0.5) / scale


@dataclass(frozen=True)
class MeasurementRow:
    condition: float
    observed: float
    reference: Optional[float] = None

    def __post_init__(self):
        if not math.isfinite(self.condition):
            raise DatasetError(f"condition must be finite, got {self.condition}", column='condition')
        if not math.isfinite(self.observed):
            raise DatasetError(f"observed must be finite, got {self.observed}", column='observed')
        if self.reference is not None and not math.isfinite(self.reference):
            raise DatasetError(f"reference must be finite, got {self.reference}", column='reference')


@dataclass(frozen=True)
class ColumnSchema:
    """Maps series fields onto CSV header names"""
    condition: str = 'condition'
    observed: str = 'observed'
    reference: Optional[str] = 'reference'
    condition_unit: Optional[str] = None
    value_unit: Optional[str] = None


@dataclass(frozen=True)
class MeasurementSeries:
    rows: tuple
    condition_unit: str
    value_unit: str
    label: str = ''
    # decimals printed per column, kept so the file can be written back unchanged
    decimals: tuple = (0, 6, 6)

    def __post_init__(self):
        object.__setattr__(self, 'rows', tuple(self.rows))
        if self.condition_unit not in CONDITION_UNITS:
            raise DatasetError(f"unsupported condition unit '{self.condition_unit}'")
        if self.value_unit not in VALUE_UNITS:
            raise DatasetError(f"unsupported value unit '{self.value_unit}'")

    def __len__(self):
        return len(self.rows)

    @property
    def has_reference(self):
        return bool(self.rows) and all(row.reference is not None for row in self.rows)

    @property
    def conditions(self):
        return np.array([row.condition for row in self.rows], dtype=float)

    @property
    def observed(self):
        return np.array([row.observed for row in self.rows], dtype=float)

    def check_reference_bound(self, sanity_bound=0.01):
        for i, row in enumerate(self.rows, start=1):
            if row.reference is None:
                continue
            if abs(row.observed - row.reference) >= sanity_bound * abs(row.observed):
                raise DatasetError(
                    f"row {i}: observed {row.observed} differs from reference {row.reference} "
                    f"by more than {sanity_bound:.2%}",
                    row=i, column='reference',
                )


@dataclass(frozen=True)
class DifferentialRow:
    s1: float
    s2: float
    # nominal distances, available for simulated campaigns only
    s_ab: Optional[float] = None
    s_ac: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.s1) and math.isfinite(self.s2)):
            raise DatasetError("differential readings must be finite")
        if not self.s1 > self.s2:
            raise DatasetError(f"longer leg s1={self.s1} must exceed shorter leg s2={self.s2}")

    @property
    def difference(self):
        return self.s1 - self.s2


@dataclass(frozen=True)
class ErrorSample:
    condition: float
    error: float
    unit: str = 'mm'

    def __post_init__(self):
        if not math.isfinite(self.error):
            raise DatasetError(f"error must be finite, got {self.error}")


class _CsvDocument(NamedTuple):
    meta: dict
    frame: pd.DataFrame


def _read_document(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such input: {path}")
    text = path.read_text(encoding='utf-8')
    meta = {}
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped.startswith('#'):
            continue
        key, sep, value = stripped.lstrip('#').partition(':')
        if sep:
            meta[key.strip().lower()] = value.strip()
    try:
        frame = pd.read_csv(
            io.StringIO(text), comment='#', dtype=str,
            keep_default_na=False, skipinitialspace=True,
        )
    except pd.errors.EmptyDataError:
        raise EmptyDatasetError(f"{path}: file is empty")
    if frame.empty:
        raise EmptyDatasetError(f"{path}: no data rows")
    frame.columns = [str(c).strip() for c in frame.columns]
    return _CsvDocument(meta=meta, frame=frame)


def _parse_units(spec):
    units = {}
    for part in spec.replace(',', ' ').split():
        key, sep, value = part.partition('=')
        if sep:
            units[key.strip()] = value.strip()
    return units


def _cell(frame, index, column):
    text = str(frame.at[index, column]).strip()
    try:
        value = float(text)
    except ValueError:
        raise DatasetError(
            f"row {index + 1}, column '{column}': cannot parse '{text}' as a number",
            row=index + 1, column=column,
        )
    if not math.isfinite(value):
        raise DatasetError(
            f"row {index + 1}, column '{column}': value '{text}' is not finite",
            row=index + 1, column=column,
        )
    return value


def _decimals(frame, column):
    places = 0
    for text in frame[column]:
        try:
            exponent = Decimal(str(text).strip()).as_tuple().exponent
        except InvalidOperation:
            continue
        if isinstance(exponent, int):
            places = max(places, -exponent)
    return places


def _require_columns(frame, columns, path):
    for column in columns:
        if column not in frame.columns:
            raise DatasetError(f"{path}: missing column '{column}'", column=column)


def load_series(path, schema=None, sanity_bound=0.01):
    """Read a ``condition,observed[,reference]`` CSV into a MeasurementSeries.

    Units come from the ``# units:`` comment line unless the schema fixes them.
    """
    schema = schema or ColumnSchema()
    document = _read_document(path)
    frame = document.frame
    _require_columns(frame, (schema.condition, schema.observed), path)
    has_reference = schema.reference is not None and schema.reference in frame.columns

    units = _parse_units(document.meta.get('units', ''))
    condition_unit = schema.condition_unit or units.get('condition')
    value_unit = schema.value_unit or units.get('observed')
    if not condition_unit or not value_unit:
        raise DatasetError(f"{path}: units not declared (expected a '# units:' line)")

    rows = []
    for index in range(len(frame)):
        reference = _cell(frame, index, schema.reference) if has_reference else None
        rows.append(MeasurementRow(
            condition=_cell(frame, index, schema.condition),
            observed=_cell(frame, index, schema.observed),
            reference=reference,
        ))

    columns = [schema.condition, schema.observed] + ([schema.reference] if has_reference else [])
    series = MeasurementSeries(
        rows=rows,
        condition_unit=condition_unit,
        value_unit=value_unit,
        label=document.meta.get('label', ''),
        decimals=tuple(_decimals(frame, c) for c in columns),
    )
    series.check_reference_bound(sanity_bound)
    logger.info(f"Loaded {len(series)} rows from {path}")
    return series


def _write_text(text, target):
    if hasattr(target, 'write'):
        target.write(text)
    else:
        Path(target).write_text(text, encoding='utf-8')


def write_csv(series, target):
    """Write a series in the layout ``load_series`` reads"""
    columns = {
        'condition': [row.condition for row in series.rows],
        'observed': [row.observed for row in series.rows],
    }
    if series.has_reference:
        columns['reference'] = [row.reference for row in series.rows]
    decimals = list(series.decimals) + [6] * (len(columns) - len(series.decimals))
    frame = pd.DataFrame({
        name: [f"{value:.{places}f}" for value in values]
        for (name, values), places in zip(columns.items(), decimals)
    })
    header = ''
    if series.label:
        header += f"# label: {series.label}\n"
    header += f"# units: condition={series.condition_unit} observed={series.value_unit}\n"
    _write_text(header + frame.to_csv(index=False, lineterminator='\n'), target)


def load_differential(path):
    """Read the ``s_ab,s_ac,s2,s1`` differential layout.

    The nominal columns are optional; when present they are kept as metadata.
    """
    document = _read_document(path)
    frame = document.frame
    _require_columns(frame, DIFFERENTIAL_COLUMNS[2:], path)
    nominal = 's_ab' in frame.columns and 's_ac' in frame.columns
    rows = []
    for index in range(len(frame)):
        s1 = _cell(frame, index, 's1')
        s2 = _cell(frame, index, 's2')
        try:
            rows.append(DifferentialRow(
                s1=s1, s2=s2,
                s_ab=_cell(frame, index, 's_ab') if nominal else None,
                s_ac=_cell(frame, index, 's_ac') if nominal else None,
            ))
        except DatasetError as e:
            raise DatasetError(f"row {index + 1}: {e}", row=index + 1)
    logger.info(f"Loaded {len(rows)} differential rows from {path}")
    return rows


def write_differential(rows, target, label='', decimals=4):
    frame = pd.DataFrame({
        's_ab': [f"{row.s_ab:.0f}" if row.s_ab is not None else '' for row in rows],
        's_ac': [f"{row.s_ac:.0f}" if row.s_ac is not None else '' for row in rows],
        's2': [f"{row.s2:.{decimals}f}" for row in rows],
        's1': [f"{row.s1:.{decimals}f}" for row in rows],
    })
    header = f"# label: {label}\n" if label else ''
    header += "# units: distance=m\n"
    _write_text(header + frame.to_csv(index=False, lineterminator='\n'), target)


def differences(rows):
    """Observed differences S1 - S2"""
    return [row.difference for row in rows]


def to_error_samples(series, reference_rule=MEAN_REFERENCE, abscissa='condition', resolution=None):
    """Turn a series into error samples.

    explicit-reference: error = reference - observed, in mm for distance
    series and in ppm of the reference for frequency series.
    mean-reference: error = (observed - mean) / mean, in ppm.

    ``abscissa`` picks the condition each sample is attached to: the
    recorded condition or the instrument reading itself. ``resolution``
    quantizes errors onto the grid they are tabulated on.
    """
    if reference_rule not in REFERENCE_RULES:
        raise ValueError(f"unknown reference rule '{reference_rule}'")
    if abscissa not in ('condition', 'observed'):
        raise ValueError(f"unknown abscissa '{abscissa}'")
    if not series.rows:
        raise EmptyDatasetError("series has no rows")

    observed = series.observed
    if reference_rule == EXPLICIT_REFERENCE:
        for i, row in enumerate(series.rows, start=1):
            if row.reference is None:
                raise MissingReferenceError(
                    f"row {i} has no reference value, required by {EXPLICIT_REFERENCE}",
                    row=i, column='reference',
                )
        reference = np.array([row.reference for row in series.rows], dtype=float)
        if series.value_unit == 'm':
            errors, unit = (reference - observed) * 1000.0, 'mm'
        else:
            errors, unit = (reference - observed) / reference * 1e6, 'ppm'
    else:
        mean = observed.mean()
        errors, unit = (observed - mean) / mean * 1e6, 'ppm'

    if resolution:
        errors = quantize(errors, resolution)
    xs = series.conditions if abscissa == 'condition' else observed
    return [ErrorSample(condition=float(x), error=float(e), unit=unit) for x, e in zip(xs, errors)]
