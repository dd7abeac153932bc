"""Conversions between delay densities and instantaneous rates.

For a delay with density ``g`` and survival ``S(t) = 1 - int_0^t g``::

    hazard(t)  = g(t) / S(t)              (0 where S(t) == 0)
    density(t) = hazard(t) * exp(-int_0^t hazard)
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

from scipy.integrate import IntegrationWarning, quad

__all__ = [
    "DelayDistribution",
    "hazard_from_density",
    "density_from_hazard",
    "exponential_delay",
    "uniform_delay",
    "weibull_delay",
]

_EPSABS = 1e-15
_EPSREL = 1e-13


def _quad(f, a, b):
    if b <= a:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(f, a, b, epsabs=_EPSABS, epsrel=_EPSREL, limit=400)[0]


@dataclass(frozen=True)
class DelayDistribution:
    density: Callable[[float], float]
    hazard: Callable[[float], float]
    cumulative_hazard: Callable[[float], float]
    support: tuple[float, float] = (0.0, math.inf)

    def survival(self, t: float) -> float:
        return math.exp(-self.cumulative_hazard(t))

    def cdf(self, t: float) -> float:
        return -math.expm1(-self.cumulative_hazard(t))


def hazard_from_density(density, support=(0.0, math.inf), *, norm_tol=1e-6) -> DelayDistribution:
    """Wrap a delay density and derive its hazard numerically.

    The survival is integrated from whichever end of the support is
    closer in probability, which keeps ``hazard`` accurate deep in the
    tail. Raises ``ValueError`` if ``density`` does not integrate to 1.
    """
    lo, hi = support
    total = _quad(density, lo, hi)
    if abs(total - 1.0) > norm_tol:
        raise ValueError(f"density integrates to {total!r}, not 1")

    def survival(t):
        if t <= lo:
            return 1.0
        if t >= hi:
            return 0.0
        head = _quad(density, lo, t)
        if head <= 0.5:
            return 1.0 - head
        return max(_quad(density, t, hi), 0.0)

    def hazard(t):
        s = survival(t)
        return density(t) / s if s > 0 else 0.0

    def cumulative(t):
        s = survival(t)
        return -math.log(s) if s > 0 else math.inf

    return DelayDistribution(density, hazard, cumulative, (lo, hi))


def density_from_hazard(hazard, support=(0.0, math.inf), cumulative=None) -> DelayDistribution:
    """Delay distribution of a hazard; ``cumulative`` is integrated if omitted."""
    lo, hi = support

    if cumulative is None:
        def cumulative(t):
            if t >= hi:
                return math.inf
            return _quad(hazard, lo, t) if t > lo else 0.0

    def density(t):
        lam = hazard(t)
        if lam == 0.0:
            return 0.0
        return lam * math.exp(-cumulative(t))

    return DelayDistribution(density, hazard, cumulative, (lo, hi))


def exponential_delay(rate: float) -> DelayDistribution:
    return DelayDistribution(
        density=lambda t: rate * math.exp(-rate * t) if t >= 0 else 0.0,
        hazard=lambda t: rate if t >= 0 else 0.0,
        cumulative_hazard=lambda t: rate * max(t, 0.0),
    )


def uniform_delay(a: float, b: float) -> DelayDistribution:
    """Uniform on ``[a, b]``; the hazard diverges as ``t -> b``."""
    width = b - a

    def hazard(t):
        return 1.0 / (b - t) if a <= t < b else 0.0

    def cumulative(t):
        if t <= a:
            return 0.0
        if t >= b:
            return math.inf
        return math.log(width / (b - t))

    return DelayDistribution(
        density=lambda t: 1.0 / width if a <= t <= b else 0.0,
        hazard=hazard,
        cumulative_hazard=cumulative,
        support=(a, b),
    )


def weibull_delay(shape: float, scale_rate: float = 1.0) -> DelayDistribution:
    """Weibull with hazard ``shape * u * (t u)**(shape - 1)``, ``u = scale_rate``."""
    c, u = shape, scale_rate

    def hazard(t):
        return c * u * (t * u) ** (c - 1) if t >= 0 else 0.0

    def cumulative(t):
        return (max(t, 0.0) * u) ** c

    def density(t):
        return hazard(t) * math.exp(-cumulative(t)) if t >= 0 else 0.0

    return DelayDistribution(density, hazard, cumulative)
