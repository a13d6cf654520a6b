"""Arcsine law of a sinusoidal error read at an arbitrary phase.

If y = A sin(phi) and phi is uniform, y has density
1 / (pi sqrt(A^2 - y^2)) on (-A, A) and standard deviation A / sqrt(2).
"""
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, stats


def _scalar_or_array(values):
    return float(values) if np.ndim(values) == 0 else values


@dataclass(frozen=True)
class ArcsineDistribution:
    amplitude: float

    def __post_init__(self):
        if not self.amplitude >= 0 or not math.isfinite(self.amplitude):
            raise ValueError(f"amplitude must be finite and non-negative, got {self.amplitude}")

    @cached_property
    def _law(self):
        # scipy's arcsine lives on [loc, loc + scale]
        return stats.arcsine(loc=-self.amplitude, scale=2.0 * self.amplitude)

    def pdf(self, y):
        """Density; +inf exactly at y = +-A so plotting code can clip it"""
        y = np.asarray(y, dtype=float)
        a = self.amplitude
        if a == 0.0:
            return _scalar_or_array(np.where(y == 0.0, np.inf, 0.0))
        inside = np.abs(y) < a
        with np.errstate(divide='ignore', invalid='ignore'):
            density = np.where(inside, self._law.pdf(np.where(inside, y, 0.0)), 0.0)
        density = np.where(np.abs(y) == a, np.inf, density)
        return _scalar_or_array(density)

    def cdf(self, y):
        y = np.asarray(y, dtype=float)
        a = self.amplitude
        if a == 0.0:
            return _scalar_or_array(np.where(y >= 0.0, 1.0, 0.0))
        inside = np.clip(self._law.cdf(np.clip(y, -a, a)), 0.0, 1.0)
        return _scalar_or_array(np.where(y >= a, 1.0, np.where(y <= -a, 0.0, inside)))

    def std(self):
        return self.amplitude / math.sqrt(2.0)

    def _moment(self, power):
        """Integral of y^power * pdf over (-A, A) with y = A sin(u)"""
        a = self.amplitude
        if a == 0.0:
            return 1.0 if power == 0 else 0.0

        def integrand(u):
            y = a * math.sin(u)
            if abs(y) >= a:
                return 0.0
            return y ** power * float(self.pdf(y)) * a * math.cos(u)

        value, _ = integrate.quad(integrand, -math.pi / 2, math.pi / 2, epsabs=1e-13, epsrel=1e-12)
        return value

    def normalization(self):
        return self._moment(0)

    def second_moment(self):
        return self._moment(2)

    def sample(self, n, seed=None):
        """Draw y = A sin(U), U uniform on [0, 2 pi)"""
        rng = np.random.default_rng(seed)
        return self.amplitude * np.sin(rng.uniform(0.0, 2.0 * math.pi, size=n))

    def ks_distance(self, samples):
        """Kolmogorov-Smirnov statistic of samples against this law"""
        return float(stats.kstest(np.asarray(samples, dtype=float), self.cdf).statistic)

    def density_series(self, points=201, clip=0.999):
        """(y, pdf) over the open support, stopping short of the singular edges"""
        y = np.linspace(-clip * self.amplitude, clip * self.amplitude, points)
        return y, self.pdf(y)


def pdf(d, y):
    return d.pdf(y)


def cdf(d, y):
    return d.cdf(y)


def std(d):
    return d.std()
