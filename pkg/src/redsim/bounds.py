"""Rate over-approximations (upper bounds on an agent's instantaneous rate).

A bound is a function of the agent's *own residence time* only; it has to
hold for every neighborhood the agent could possibly see.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

__all__ = ["ConstantBound", "TimeVaryingBound", "RateBound"]


@dataclass(frozen=True)
class ConstantBound:
    """Bound that does not change with residence time."""

    rate: float

    def __post_init__(self):
        if not self.rate >= 0:
            raise ValueError(f"bound rate must be nonnegative, got {self.rate}")

    def hazard(self, t):
        return self.rate

    def cumulative(self, t):
        return self.rate * t

    def inverse(self, x):
        return x / self.rate if self.rate > 0 else math.inf


@dataclass(frozen=True)
class TimeVaryingBound:
    """Residence-dependent bound ``hazard(t)``.

    Parameters
    ----------
    hazard : callable
        Nonnegative bound hazard as a function of residence time.
    cumulative : callable, optional
        Closed-form integral of ``hazard`` from 0; numerical quadrature is
        used when absent.
    inverse : callable, optional
        Inverse of ``cumulative``. Only used together with ``cumulative``.
    support_start : float
        The hazard is zero below this residence; quadrature starts here so
        the jump at the support start never sits inside an integration
        panel.
    support_end : float
        Residence time at which the survival mass is exhausted (finite for
        e.g. uniform delays). Inversion clamps to it.
    sampler : callable, optional
        ``sampler(residence, rng) -> delay``. Marks a bound that *is* the
        agent's exact, neighborhood-independent rate: delays are drawn
        directly and the resulting events are never rejected.
    """

    hazard: Callable[[float], float]
    cumulative: Optional[Callable[[float], float]] = None
    inverse: Optional[Callable[[float], float]] = None
    support_start: float = 0.0
    support_end: float = math.inf
    sampler: Optional[Callable] = None

    @property
    def exact(self) -> bool:
        return self.sampler is not None

    @property
    def closed_form(self) -> bool:
        return self.cumulative is not None and self.inverse is not None


RateBound = Union[ConstantBound, TimeVaryingBound]
