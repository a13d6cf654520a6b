"""Repeated-measurement simulator.

An error source contributes according to the measurement condition it
depends on. The condition schedule, not the source, decides whether the
contribution stays constant over the repeats (systematic effect), varies
(random effect) or cancels out of the observable (no effect).

Contributions are kept in each source's native unit: mm for distance-type
sources, ppm for the temperature polynomial.
"""
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np
from numpy.polynomial import polynomial as P

from errormodel.dataset import DifferentialRow, MeasurementRow, MeasurementSeries, quantize
from errormodel.errors import ConfigurationError

logger = logging.getLogger(__name__)

TEMPERATURE = 'temperature'
DISTANCE = 'distance'
NONE = 'none'
CONDITIONS = (TEMPERATURE, DISTANCE)

SYSTEMATIC = 'systematic'
RANDOM = 'random'
NON_EFFECT = 'non-effect'

DEFAULT_EPS_MM = 1e-6


class ErrorSource:
    """Base class; subclasses implement ``contribution``"""
    kind = None
    unit = 'mm'
    default_depends_on = NONE

    def __init__(self, name=None, depends_on=None):
        self.name = name or self.kind
        self.depends_on = depends_on or self.default_depends_on

    def contribution(self, condition, n, rng):
        """Contribution per repeat; ``condition`` is None for condition-free sources"""
        raise NotImplementedError

    def __repr__(self):
        return f"{self.__class__.__name__}(name={self.name!r}, depends_on={self.depends_on!r})"


class AdditiveConstant(ErrorSource):
    kind = 'additive-constant'

    def __init__(self, c, **kwargs):
        super().__init__(**kwargs)
        self.c = float(c)

    def contribution(self, condition, n, rng):
        return np.full(n, self.c)


class Multiplicative(ErrorSource):
    kind = 'multiplicative'
    default_depends_on = DISTANCE

    def __init__(self, r, **kwargs):
        super().__init__(**kwargs)
        self.r = float(r)

    def contribution(self, condition, n, rng):
        # r ppm of S metres, in mm
        return self.r * 1e-3 * np.asarray(condition, dtype=float)


class CycleError(ErrorSource):
    kind = 'cycle'
    default_depends_on = DISTANCE

    def __init__(self, amplitude, wavelength, phase=0.0, **kwargs):
        super().__init__(**kwargs)
        if not wavelength > 0:
            raise ConfigurationError(f"source '{self.name}': wavelength must be positive")
        self.amplitude = float(amplitude)
        self.wavelength = float(wavelength)
        self.phase = float(phase)

    def at(self, distance):
        distance = np.asarray(distance, dtype=float)
        return self.amplitude * np.sin(2.0 * math.pi * distance / self.wavelength + self.phase)

    def contribution(self, condition, n, rng):
        return self.at(condition)


class TemperaturePolynomial(ErrorSource):
    kind = 'temperature-polynomial'
    unit = 'ppm'
    default_depends_on = TEMPERATURE

    def __init__(self, coeffs, **kwargs):
        super().__init__(**kwargs)
        self.coeffs = tuple(float(c) for c in coeffs)

    def contribution(self, condition, n, rng):
        return P.polyval(np.asarray(condition, dtype=float), self.coeffs)


class GaussianNoise(ErrorSource):
    kind = 'gaussian-noise'

    def __init__(self, sigma, **kwargs):
        super().__init__(**kwargs)
        if not sigma >= 0:
            raise ConfigurationError(f"source '{self.name}': sigma must be >= 0")
        self.sigma = float(sigma)

    def contribution(self, condition, n, rng):
        return self.sigma * rng.standard_normal(n)


SOURCE_KINDS = {
    cls.kind: cls
    for cls in (AdditiveConstant, Multiplicative, CycleError, TemperaturePolynomial, GaussianNoise)
}


def make_source(kind, **params):
    try:
        cls = SOURCE_KINDS[kind]
    except KeyError:
        raise ConfigurationError(f"unknown source kind '{kind}'")
    return cls(**params)


@dataclass(frozen=True)
class ConditionRule:
    generator: str
    value: Optional[float] = None
    values: tuple = ()
    low: Optional[float] = None
    high: Optional[float] = None

    def generate(self, n, rng):
        if self.generator == 'constant':
            return np.full(n, float(self.value))
        if self.generator == 'listed':
            if len(self.values) != n:
                raise ConfigurationError(f"listed schedule has {len(self.values)} values for {n} repeats")
            return np.array(self.values, dtype=float)
        if self.generator == 'uniform':
            return rng.uniform(self.low, self.high, n)
        raise ConfigurationError(f"unknown condition generator '{self.generator}'")


@dataclass(frozen=True)
class ConditionSchedule:
    repeats: int
    conditions: dict = field(default_factory=dict)
    seed: Optional[int] = None

    def __post_init__(self):
        if self.repeats < 1:
            raise ConfigurationError(f"repeats must be >= 1, got {self.repeats}")

    def values(self):
        """Condition vectors per name; random ones draw from per-name child streams"""
        stream, _ = np.random.SeedSequence(self.seed).spawn(2)
        names = sorted(self.conditions)
        children = stream.spawn(len(names))
        return {
            name: self.conditions[name].generate(self.repeats, np.random.default_rng(child))
            for name, child in zip(names, children)
        }

    def with_seed(self, seed):
        return ConditionSchedule(self.repeats, self.conditions, seed)


class SimulationRun(NamedTuple):
    series: MeasurementSeries
    # per source name, native unit
    contributions: dict
    units: dict
    conditions: dict


def _source_streams(seed, count):
    _, stream = np.random.SeedSequence(seed).spawn(2)
    return [np.random.default_rng(child) for child in stream.spawn(count)]


def _check_names(sources):
    names = [s.name for s in sources]
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        raise ConfigurationError(f"duplicate source names: {', '.join(duplicates)}")


def _to_value_unit(source, contribution, true_value, value_unit):
    if source.unit == 'ppm':
        return true_value * contribution * 1e-6
    if value_unit != 'm':
        raise ConfigurationError(
            f"source '{source.name}' contributes {source.unit} but the series is in {value_unit}"
        )
    return contribution * 1e-3


def simulate_repeated(sources, schedule, true_value, value_unit='m', seed=None):
    """observed_i = true_value + sum of source contributions at conditions_i"""
    _check_names(sources)
    seed = schedule.seed if seed is None else seed
    conditions = schedule.with_seed(seed).values()
    for source in sources:
        if source.depends_on != NONE and source.depends_on not in conditions:
            raise ConfigurationError(
                f"source '{source.name}' depends on '{source.depends_on}', which the schedule does not provide"
            )

    n = schedule.repeats
    observed = np.full(n, float(true_value))
    contributions = {}
    for source, rng in zip(sources, _source_streams(seed, len(sources))):
        condition = conditions.get(source.depends_on) if source.depends_on != NONE else None
        contribution = np.asarray(source.contribution(condition, n, rng), dtype=float)
        contributions[source.name] = contribution
        observed += _to_value_unit(source, contribution, true_value, value_unit)

    axis = TEMPERATURE if value_unit == 'MHz' else DISTANCE
    if axis not in conditions:
        axis = next((c for c in CONDITIONS if c in conditions), None)
    if axis is None:
        raise ConfigurationError("schedule needs a temperature or distance condition to index the series")
    condition_unit = 'degC' if axis == TEMPERATURE else 'm'

    series = MeasurementSeries(
        rows=[MeasurementRow(condition=float(c), observed=float(o)) for c, o in zip(conditions[axis], observed)],
        condition_unit=condition_unit,
        value_unit=value_unit,
        label=f"simulated, {n} repeats",
        decimals=(6, 9),
    )
    logger.info(f"Simulated {n} repeats with {len(sources)} source(s)")
    return SimulationRun(
        series=series,
        contributions=contributions,
        units={s.name: s.unit for s in sources},
        conditions=conditions,
    )


def _leg_contributions(sources, legs, rng_pairs):
    """Per-source contributions at each leg (mm); legs maps leg name -> distances"""
    result = {}
    for source, rng in zip(sources, rng_pairs):
        if source.unit != 'mm':
            raise ConfigurationError(f"source '{source.name}' cannot act on a distance difference")
        if source.depends_on not in (DISTANCE, NONE):
            raise ConfigurationError(
                f"source '{source.name}' depends on '{source.depends_on}', unavailable in a differential run"
            )
        result[source.name] = {
            leg: np.asarray(source.contribution(distances, len(distances), rng), dtype=float)
            for leg, distances in legs.items()
        }
    return result


def _differential_setup(cycle, pairs, extra_sources):
    if cycle.kind != CycleError.kind:
        raise ConfigurationError(f"differential simulation needs a cycle source, got '{cycle.kind}'")
    sources = [cycle] + list(extra_sources)
    _check_names(sources)
    pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)
    if np.any(pairs[:, 1] <= pairs[:, 0]):
        raise ConfigurationError("every pair needs s_ac > s_ab")
    return sources, pairs


def simulate_differential(cycle, pairs, extra_sources=(), round_mm=None, seed=None):
    """Readings S2 = S_AB + y(S_AB), S1 = S_AC + y(S_AC) plus any extra sources.

    The cycle phase is driven by the nominal distances. ``round_mm``
    rounds readings half-up onto that grid, as a printed table would.

    Readings are floating sums, so an additive constant cancels from
    S1 - S2 only to rounding. Use ``differential_contributions`` and
    ``differential_observable`` where the difference must be exact.
    """
    sources, pairs = _differential_setup(cycle, pairs, extra_sources)
    legs = {'ab': pairs[:, 0], 'ac': pairs[:, 1]}
    per_source = _leg_contributions(sources, legs, _source_streams(seed, len(sources)))

    s2 = legs['ab'].copy()
    s1 = legs['ac'].copy()
    for contribution in per_source.values():
        s2 += contribution['ab'] * 1e-3
        s1 += contribution['ac'] * 1e-3
    if round_mm:
        s2 = quantize(s2, round_mm * 1e-3)
        s1 = quantize(s1, round_mm * 1e-3)

    rows = [
        DifferentialRow(s1=float(a), s2=float(b), s_ab=float(ab), s_ac=float(ac))
        for a, b, ab, ac in zip(s1, s2, legs['ab'], legs['ac'])
    ]
    logger.info(f"Simulated {len(rows)} differential pairs")
    return rows


def differential_contributions(cycle, pairs, extra_sources=(), seed=None):
    """Per-source contribution (mm) to the observable S1 - S2"""
    sources, pairs = _differential_setup(cycle, pairs, extra_sources)
    legs = {'ab': pairs[:, 0], 'ac': pairs[:, 1]}
    per_source = _leg_contributions(sources, legs, _source_streams(seed, len(sources)))
    return {name: c['ac'] - c['ab'] for name, c in per_source.items()}


def differential_observable(pairs, contributions):
    """S_AC - S_AB plus every source's difference contribution, in metres"""
    pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)
    observable = pairs[:, 1] - pairs[:, 0]
    for contribution in contributions.values():
        observable = observable + contribution * 1e-3
    return observable


def random_pairs(n, separation=8.0, low=5.0, high=50.0, seed=None, whole_metres=True):
    """Random (s_ab, s_ac) pairs a fixed separation apart within [low, high]"""
    if high - low <= separation:
        raise ConfigurationError("range too short for the requested separation")
    rng = np.random.default_rng(seed)
    if whole_metres:
        low = math.ceil(low)
        if low + separation > high:
            raise ConfigurationError("no whole-metre pair fits the range")
        s_ab = np.floor(rng.uniform(low, high - separation, n))
    else:
        s_ab = rng.uniform(low, high - separation, n)
    return [(float(a), float(a + separation)) for a in s_ab]


@dataclass(frozen=True)
class SourceEffect:
    name: str
    contributions: tuple
    mean: float
    std: float
    max_abs: float
    classification: str


@dataclass(frozen=True)
class EffectReport:
    effects: tuple
    eps_abs: float

    def __getitem__(self, name):
        for effect in self.effects:
            if effect.name == name:
                return effect
        raise KeyError(name)

    def as_dict(self):
        return {
            'eps_abs': self.eps_abs,
            'sources': [
                {
                    'name': e.name,
                    'classification': e.classification,
                    'mean': e.mean,
                    'std': e.std,
                    'max_abs': e.max_abs,
                    'n': len(e.contributions),
                }
                for e in self.effects
            ],
        }


def classify(mean, std, max_abs, eps_abs):
    if max_abs <= eps_abs:
        return NON_EFFECT
    if std > eps_abs:
        return RANDOM
    if abs(mean) > eps_abs:
        return SYSTEMATIC
    # not constant, yet both mean and spread sit under the threshold
    return RANDOM


def classify_effects(contributions, eps_abs=DEFAULT_EPS_MM):
    """Classify each source's contribution sequence.

    non-effect: max |c| <= eps; random: std > eps; systematic: std <= eps
    and |mean| > eps. std is the population spread of the sequence.
    """
    if not eps_abs > 0:
        raise ConfigurationError(f"eps_abs must be positive, got {eps_abs}")
    effects = []
    for name, sequence in contributions.items():
        values = np.asarray(sequence, dtype=float).reshape(-1)
        if values.size == 0:
            raise ConfigurationError(f"source '{name}' has an empty contribution sequence")
        mean = float(np.mean(values))
        spread = float(np.std(values))
        max_abs = float(np.max(np.abs(values)))
        effects.append(SourceEffect(
            name=name,
            contributions=tuple(float(v) for v in values),
            mean=mean,
            std=spread,
            max_abs=max_abs,
            classification=classify(mean, spread, max_abs, eps_abs),
        ))
    return EffectReport(effects=tuple(effects), eps_abs=eps_abs)


@dataclass(frozen=True)
class Scenario:
    sources: tuple
    true_value: float = 0.0
    value_unit: str = 'm'
    schedule: Optional[ConditionSchedule] = None
    pairs: tuple = ()
    round_mm: Optional[float] = None
    label: str = ''

    @property
    def cycle(self):
        return next((s for s in self.sources if s.kind == CycleError.kind), None)

    @property
    def extra_sources(self):
        cycle = self.cycle
        return tuple(s for s in self.sources if s is not cycle)


def load_scenario(path):
    from errormodel.forms import parse_scenario

    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such input: {path}")
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"invalid JSON: {e}", pointer='')
    return parse_scenario(data)
