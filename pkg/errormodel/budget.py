"""Uncertainty synthesis for an error equation such as

    Delta = C + S * R + P + delta

Each component carries its own standard deviation and unit; the
sensitivity coefficient resolves the unit into millimetres of Delta.
Components are independent and zero-mean.
"""
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from errormodel.errors import ConfigurationError, UnitError

logger = logging.getLogger(__name__)

CONSTANT = 'constant'
PROPORTIONAL = 'proportional'

# millimetres per unit
LENGTH_UNITS = {
    'mm': 1.0,
    'um': 1e-3,
    'm': 1000.0,
}
# dimensionless per unit
RELATIVE_UNITS = {
    'ppm': 1e-6,
    'ppb': 1e-9,
}

GAUSSIAN = 'gaussian'
UNIFORM = 'uniform'
ARCSINE = 'arcsine'
SHAPES = (GAUSSIAN, UNIFORM, ARCSINE)

MIN_MC_SAMPLES = 10_000


@dataclass(frozen=True)
class BudgetComponent:
    name: str
    std: float
    unit: str = 'mm'
    # 'constant', 'proportional' or a custom coefficient
    sensitivity: Union[str, float] = CONSTANT

    def __post_init__(self):
        if not math.isfinite(self.std) or self.std < 0:
            raise ConfigurationError(f"component '{self.name}': std must be finite and >= 0, got {self.std}")
        if isinstance(self.sensitivity, str):
            if self.sensitivity not in (CONSTANT, PROPORTIONAL):
                raise ConfigurationError(f"component '{self.name}': unknown sensitivity '{self.sensitivity}'")
        elif not math.isfinite(self.sensitivity):
            raise ConfigurationError(f"component '{self.name}': sensitivity coefficient must be finite")

    def coefficient(self, operating_point):
        """Millimetres of Delta per unit of this component"""
        if self.sensitivity == PROPORTIONAL:
            if self.unit not in RELATIVE_UNITS:
                raise UnitError(f"proportional sensitivity needs a relative unit, got '{self.unit}'", self.name)
            return operating_point * RELATIVE_UNITS[self.unit] * LENGTH_UNITS['m']
        if self.unit not in LENGTH_UNITS:
            raise UnitError(f"unit '{self.unit}' cannot be resolved to a length", self.name)
        factor = LENGTH_UNITS[self.unit]
        return factor if self.sensitivity == CONSTANT else float(self.sensitivity) * factor


@dataclass(frozen=True)
class ErrorBudget:
    components: tuple
    # S in metres
    operating_point: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'components', tuple(self.components))
        names = [c.name for c in self.components]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ConfigurationError(f"duplicate component names: {', '.join(duplicates)}")
        if any(c.sensitivity == PROPORTIONAL for c in self.components) and not self.operating_point > 0:
            raise ConfigurationError("operating point must be positive when a proportional component is present")

    def resolved(self):
        """(name, coefficient, contribution in mm) per component"""
        rows = []
        for component in self.components:
            c = component.coefficient(self.operating_point)
            rows.append((component.name, c, abs(c) * component.std))
        return rows

    def scaled(self, k):
        return ErrorBudget(
            components=[
                BudgetComponent(c.name, c.std * k, c.unit, c.sensitivity) for c in self.components
            ],
            operating_point=self.operating_point,
        )


def total_std(budget):
    """sqrt(sum (c_i sigma_i)^2) in mm"""
    contributions = np.array([contribution for _, _, contribution in budget.resolved()], dtype=float)
    return float(np.sqrt(np.sum(contributions * contributions)))


def _draw(rng, shape, sigma, n):
    if shape == GAUSSIAN:
        return sigma * rng.standard_normal(n)
    if shape == UNIFORM:
        half_width = math.sqrt(3.0) * sigma
        return rng.uniform(-half_width, half_width, n)
    if shape == ARCSINE:
        return math.sqrt(2.0) * sigma * np.sin(rng.uniform(0.0, 2.0 * math.pi, n))
    raise ConfigurationError(f"unknown shape '{shape}', expected one of {', '.join(SHAPES)}")


def monte_carlo_std(budget, n, seed, shapes=None):
    """Sample standard deviation of Delta from independent draws.

    Every component owns a child stream of ``seed``, so the result does not
    depend on the order components are evaluated in.
    """
    if n < MIN_MC_SAMPLES:
        raise ValueError(f"Monte-Carlo needs at least {MIN_MC_SAMPLES} draws, got {n}")
    shapes = shapes or {}
    unknown = set(shapes) - {c.name for c in budget.components}
    if unknown:
        raise ConfigurationError(f"shape given for unknown component(s): {', '.join(sorted(unknown))}")

    streams = np.random.SeedSequence(seed).spawn(len(budget.components))
    delta = np.zeros(n)
    for component, stream in zip(budget.components, streams):
        shape = shapes.get(component.name, GAUSSIAN)
        rng = np.random.Generator(np.random.PCG64(stream))
        delta += component.coefficient(budget.operating_point) * _draw(rng, shape, component.std, n)
    result = float(np.std(delta, ddof=1))
    logger.info(f"Monte-Carlo over {n} draws: std {result:.6g} mm")
    return result


def edm_budget(operating_point, sigma_c, sigma_r, sigma_p, sigma_delta):
    """The additive / multiplicative / periodic / dividing error layout.

    sigma_r in ppm, the rest in mm.
    """
    return ErrorBudget(
        components=[
            BudgetComponent('C', sigma_c, 'mm', CONSTANT),
            BudgetComponent('R', sigma_r, 'ppm', PROPORTIONAL),
            BudgetComponent('P', sigma_p, 'mm', CONSTANT),
            BudgetComponent('delta', sigma_delta, 'mm', CONSTANT),
        ],
        operating_point=operating_point,
    )


def load_budget(path):
    """Read a budget JSON document; returns (ErrorBudget, shapes)"""
    from errormodel.forms import parse_budget

    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such input: {path}")
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"invalid JSON: {e}", pointer='')
    return parse_budget(data)
