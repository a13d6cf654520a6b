"""Random-model estimation and function-model least-squares fits.

The random model ignores conditions and summarises a sample by its mean
and standard deviation. The function models express the error as a
known function of a condition:

* temperature polynomial  R(T) = a + bT + cT^2 + dT^3   (ppm)
* cycle error             y(S) = A sin(2 pi S / lambda + phi)

The cycle error is linearised on the sin/cos basis,
y = a sin(theta) + b cos(theta), so A = hypot(a, b) and phi = atan2(b, a).
Wavelength is always known, never estimated.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from numpy.polynomial import polynomial as P

from errormodel.errors import InsufficientDataError, SingularMatrixError
from errormodel.linsolve import SINGULAR_TOL, NormalEquations, solve

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


def normalize_phase(phase):
    phase = math.fmod(phase, TWO_PI)
    if phase < 0.0:
        phase += TWO_PI
    # fmod of a tiny negative angle can land on 2 pi itself
    return 0.0 if phase >= TWO_PI else phase


@dataclass(frozen=True)
class RandomModelEstimate:
    mean: float
    std: float
    n: int

    @property
    def dof(self):
        return self.n - 1

    @property
    def relative_std_ppm(self):
        return self.std / abs(self.mean) * 1e6 if self.mean else math.inf

    def as_dict(self):
        return {
            'model': 'random',
            'mean': self.mean,
            'std': self.std,
            'relative_std_ppm': self.relative_std_ppm,
            'n': self.n,
            'dof': self.dof,
        }


def random_model(values):
    """Mean and standard deviation with n - 1 degrees of freedom"""
    values = np.asarray(values, dtype=float).reshape(-1)
    n = values.shape[0]
    if n < 2:
        raise InsufficientDataError(f"random model needs at least 2 values, got {n}")
    mean = float(np.mean(values))
    v = values - mean
    std = math.sqrt(float(np.sum(v * v)) / (n - 1))
    return RandomModelEstimate(mean=mean, std=std, n=n)


class Prediction(NamedTuple):
    value: float
    out_of_domain: bool


@dataclass(frozen=True)
class PolynomialErrorModel:
    coeffs: tuple
    domain: tuple
    residual_std: float
    dof: int
    unit: str = 'ppm'
    # basis is ((T - center) / scale)^k; (0, 1) keeps raw powers of T
    center: float = 0.0
    scale: float = 1.0
    normal_equations: Optional[NormalEquations] = field(default=None, compare=False, repr=False)
    residuals: tuple = field(default=(), compare=False, repr=False)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def in_domain(self, t):
        return self.domain[0] <= t <= self.domain[1]

    def evaluate(self, t):
        x = (np.asarray(t, dtype=float) - self.center) / self.scale
        return P.polyval(x, self.coeffs)

    def as_dict(self):
        matrix, rhs = self.normal_equations.as_lists() if self.normal_equations else (None, None)
        return {
            'model': f'poly{self.degree}',
            'coefficients': list(self.coeffs),
            'residual_std': self.residual_std,
            'dof': self.dof,
            'normal_matrix': matrix,
            'rhs': rhs,
            'domain': list(self.domain),
            'unit': self.unit,
            'center': self.center,
            'scale': self.scale,
        }


def fit_polynomial(samples, degree=3, center=None, scale=None, tol=SINGULAR_TOL):
    """Least-squares polynomial in the sample conditions.

    The normal equations are assembled on raw monomials unless ``center``
    or ``scale`` is given; those change the basis, never the fitted curve.
    """
    t = np.array([s.condition for s in samples], dtype=float)
    r = np.array([s.error for s in samples], dtype=float)
    n = t.shape[0]
    k = degree + 1
    if degree < 0:
        raise ValueError(f"degree must be non-negative, got {degree}")
    if n <= k:
        raise InsufficientDataError(f"degree {degree} fit needs more than {k} samples, got {n}")

    center = 0.0 if center is None else float(center)
    scale = 1.0 if scale is None else float(scale)
    design = P.polyvander((t - center) / scale, degree)
    eq = NormalEquations.assemble(design, r)
    coeffs = solve(eq, tol=tol, hint="conditions must take at least degree + 1 distinct values")

    v = r - design @ coeffs
    dof = n - k
    model = PolynomialErrorModel(
        coeffs=tuple(float(c) for c in coeffs),
        domain=(float(t.min()), float(t.max())),
        residual_std=math.sqrt(float(np.sum(v * v)) / dof),
        dof=dof,
        unit=samples[0].unit,
        center=center,
        scale=scale,
        normal_equations=eq,
        residuals=tuple(float(x) for x in v),
    )
    logger.info(f"Fitted degree {degree} polynomial on {n} samples, residual std {model.residual_std:.4g}")
    return model


def predict_frequency(model, f0, t):
    """f = f0 (1 + R(T) 10^-6); evaluation outside the fitted domain is flagged"""
    if f0 <= 0:
        raise ValueError(f"f0 must be positive, got {f0}")
    out_of_domain = not model.in_domain(t)
    if out_of_domain:
        logger.warning(f"T = {t} outside fitted domain {model.domain}")
    r = float(model.evaluate(t))
    return Prediction(value=f0 * (1.0 + r * 1e-6), out_of_domain=out_of_domain)


@dataclass(frozen=True)
class SinusoidalErrorModel:
    amplitude: float
    wavelength: float
    phase: float
    residual_std: float
    dof: int
    unit: str = 'mm'
    offset_s0: Optional[float] = None
    # constant term of the direct fit, when requested
    bias: Optional[float] = None
    normal_equations: Optional[NormalEquations] = field(default=None, compare=False, repr=False)
    residuals: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")
        object.__setattr__(self, 'phase', normalize_phase(self.phase))

    @property
    def phase_degrees(self):
        return math.degrees(self.phase)

    @property
    def sin_cos(self):
        """(a, b) with y = a sin(theta) + b cos(theta)"""
        return self.amplitude * math.cos(self.phase), self.amplitude * math.sin(self.phase)

    def evaluate(self, s):
        theta = TWO_PI * np.asarray(s, dtype=float) / self.wavelength
        y = self.amplitude * np.sin(theta + self.phase)
        return y + self.bias if self.bias is not None else y

    def as_dict(self):
        matrix, rhs = self.normal_equations.as_lists() if self.normal_equations else (None, None)
        a, b = self.sin_cos
        coefficients = {
            'amplitude': self.amplitude,
            'phase_rad': self.phase,
            'phase_deg': self.phase_degrees,
            'a': a,
            'b': b,
            'wavelength': self.wavelength,
        }
        if self.offset_s0 is not None:
            coefficients['s0'] = self.offset_s0
        if self.bias is not None:
            coefficients['bias'] = self.bias
        return {
            'model': 'cycle-diff' if self.offset_s0 is not None else 'cycle',
            'coefficients': coefficients,
            'residual_std': self.residual_std,
            'dof': self.dof,
            'normal_matrix': matrix,
            'rhs': rhs,
            'unit': self.unit,
        }


def _check_wavelength(wavelength):
    if not wavelength > 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")


def fit_cycle_direct(samples, wavelength=20.0, with_offset=False, tol=SINGULAR_TOL):
    """Fit y = a sin(2 pi S / lambda) + b cos(2 pi S / lambda) [+ c].

    Sample conditions are distances, errors are the cycle error values.
    """
    _check_wavelength(wavelength)
    s = np.array([x.condition for x in samples], dtype=float)
    y = np.array([x.error for x in samples], dtype=float)
    n = s.shape[0]
    if n < 3:
        raise InsufficientDataError(f"cycle fit needs at least 3 samples, got {n}")

    theta = TWO_PI * s / wavelength
    columns = [np.sin(theta), np.cos(theta)]
    if with_offset:
        columns.append(np.ones(n))
    design = np.column_stack(columns)
    eq = NormalEquations.assemble(design, y)
    solution = solve(eq, tol=tol, hint="distances must not all share one phase of the wavelength")

    a, b = solution[0], solution[1]
    v = y - design @ solution
    dof = n - design.shape[1]
    model = SinusoidalErrorModel(
        amplitude=math.hypot(a, b),
        wavelength=wavelength,
        phase=math.atan2(b, a),
        residual_std=math.sqrt(float(np.sum(v * v)) / dof) if dof > 0 else 0.0,
        dof=dof,
        unit=samples[0].unit,
        bias=float(solution[2]) if with_offset else None,
        normal_equations=eq,
        residuals=tuple(float(x) for x in v),
    )
    logger.info(f"Cycle fit: A = {model.amplitude:.4g} {model.unit}, phase = {model.phase_degrees:.2f} deg")
    return model


def fit_cycle_differential(rows, wavelength=20.0, basis='readings', tol=SINGULAR_TOL):
    """Fit S1 - S2 = S0 + a A_i + b B_i on differential observations.

    A_i = sin(theta_1) - sin(theta_2), B_i = cos(theta_1) - cos(theta_2),
    theta = 2 pi S / lambda. The basis is evaluated on the readings, or on
    the nominal distances of a simulated campaign with ``basis='nominal'``.
    S0 is the leg difference corrected for the cycle error.
    """
    _check_wavelength(wavelength)
    n = len(rows)
    if n < 3:
        raise InsufficientDataError(f"differential cycle fit needs at least 3 rows, got {n}")
    if basis not in ('readings', 'nominal'):
        raise ValueError(f"unknown basis '{basis}'")
    if basis == 'nominal' and any(row.s_ab is None or row.s_ac is None for row in rows):
        raise ValueError("nominal basis needs s_ab and s_ac on every row")

    s1 = np.array([row.s1 for row in rows], dtype=float)
    s2 = np.array([row.s2 for row in rows], dtype=float)
    if basis == 'nominal':
        theta1 = TWO_PI * np.array([row.s_ac for row in rows], dtype=float) / wavelength
        theta2 = TWO_PI * np.array([row.s_ab for row in rows], dtype=float) / wavelength
    else:
        theta1 = TWO_PI * s1 / wavelength
        theta2 = TWO_PI * s2 / wavelength
    basis_a = np.sin(theta1) - np.sin(theta2)
    basis_b = np.cos(theta1) - np.cos(theta2)
    hint = "distances must sample diverse phases of the wavelength"
    if not (np.any(basis_a) or np.any(basis_b)):
        raise SingularMatrixError("sin/cos difference basis vanishes on every row", pivot=1, hint=hint)

    diff = s1 - s2
    design = np.column_stack([np.ones(n), basis_a, basis_b])
    eq = NormalEquations.assemble(design, diff)
    s0, a, b = solve(eq, tol=tol, hint=hint)

    v = diff - design @ np.array([s0, a, b])
    dof = n - 3
    model = SinusoidalErrorModel(
        amplitude=math.hypot(a, b),
        wavelength=wavelength,
        phase=math.atan2(b, a),
        residual_std=math.sqrt(float(np.sum(v * v)) / dof) if dof > 0 else 0.0,
        dof=dof,
        unit='m',
        offset_s0=float(s0),
        normal_equations=eq,
        residuals=tuple(float(x) for x in v),
    )
    logger.info(f"Differential cycle fit: S0 = {model.offset_s0:.6f} m, A = {model.amplitude:.5f} m")
    return model
