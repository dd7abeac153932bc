"""
Random variates for delay sampling
==================================

* :class:`RngStream` -- seedable uniform/exponential stream. Every uniform
  comes from ``Generator.random()`` (one ``next_double`` of the underlying
  PCG64), which is exactly what the compiled kernels read, so both backends
  see the same numbers.
* inversion of a cumulative hazard (closed form or quadrature + Newton),
* thinning against a constant or residence-dependent bound.
"""

from __future__ import annotations

import math
import warnings
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .bounds import ConstantBound, TimeVaryingBound
from .errors import BoundViolationError

__all__ = [
    "RngStream",
    "DelaySample",
    "as_generator",
    "sample_exponential",
    "cumulative_hazard",
    "invert_cumulative_hazard",
    "sample_delay_inversion",
    "sample_delay_thinning",
    "sample_delays_thinning",
    "thin_against_bound",
]

#: relative slack when checking ``rate <= bound``; absorbs summation rounding
REL_SLACK = 1e-12
_INV_RTOL = 1e-11
_MAX_DOUBLINGS = 1100


class RngStream:
    """One replication's private random stream (PCG64 under a SeedSequence)."""

    def __init__(self, seed=None, *, seed_sequence=None):
        if seed_sequence is None:
            seed_sequence = np.random.SeedSequence(seed)
        self.seed_sequence = seed_sequence
        self.bit_generator = np.random.PCG64(seed_sequence)
        self.generator = np.random.Generator(self.bit_generator)

    @classmethod
    def for_replicate(cls, seed: int, index: int) -> "RngStream":
        """Independent child stream ``index`` of root ``seed``."""
        return cls(seed_sequence=np.random.SeedSequence(seed, spawn_key=(index,)))

    def spawn(self, n: int) -> list["RngStream"]:
        return [RngStream(seed_sequence=s) for s in self.seed_sequence.spawn(n)]

    def uniform(self) -> float:
        """Uniform on the open interval (0, 1)."""
        u = self.generator.random()
        while u == 0.0:
            u = self.generator.random()
        return u

    def standard_exponential(self) -> float:
        return -math.log(self.uniform())

    def exponential(self, rate: float) -> float:
        return -math.log(self.uniform()) / rate


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _as_stream(rng) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    if isinstance(rng, np.random.Generator):
        stream = RngStream.__new__(RngStream)
        stream.seed_sequence = None
        stream.bit_generator = rng.bit_generator
        stream.generator = rng
        return stream
    return RngStream(rng)


class DelaySample(NamedTuple):
    delay: float
    bound_rate: float


def sample_exponential(rate: float, rng) -> float:
    """``-ln(u) / rate`` with ``u`` uniform on (0, 1)."""
    if not rate > 0:
        raise ValueError(f"exponential rate must be positive, got {rate}")
    return _as_stream(rng).exponential(rate)


def _integral(hazard, a, b, epsabs=1e-14):
    if b <= a:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        value, _ = quad(hazard, a, b, epsabs=epsabs, epsrel=1e-13, limit=200)
    return value


def cumulative_hazard(bound, t: float, start: float = 0.0) -> float:
    """Integral of the bound hazard over ``[start, t]``."""
    if isinstance(bound, ConstantBound):
        return bound.rate * (t - start)
    if bound.cumulative is not None:
        return bound.cumulative(t) - bound.cumulative(start)
    return _integral(bound.hazard, max(start, bound.support_start), t)


def invert_cumulative_hazard(bound, x: float, start: float = 0.0, t_max: float = math.inf) -> float:
    """Residence time ``t >= start`` at which the bound accumulates mass ``x``.

    Solves ``cumulative(t) - cumulative(start) = x``; with ``start = 0`` this
    is plain inversion. Returns ``inf`` when the hazard cannot accumulate
    ``x`` before ``start + t_max``, and clamps to ``bound.support_end`` when
    mass runs out there.
    """
    if x <= 0:
        return start
    if isinstance(bound, ConstantBound):
        return start + x / bound.rate if bound.rate > 0 else math.inf
    end = min(bound.support_end, start + t_max)
    if bound.closed_form:
        t = bound.inverse(bound.cumulative(start) + x)
        if t > end:
            return bound.support_end if end == bound.support_end else math.inf
        return t
    lo = max(start, bound.support_start)
    return _invert_numeric(bound.hazard, x, lo, end, clamp=end == bound.support_end)


def _invert_numeric(hazard, x, start, end, clamp):
    epsabs = min(1e-14, 1e-3 * _INV_RTOL * x)
    lo, acc, h = start, 0.0, 1.0
    for _ in range(_MAX_DOUBLINGS):
        hi = min(lo + h, end)
        if clamp and hi == end:
            # the hazard may diverge at the support end: approach it by halving
            if end - lo <= 1e-13 * max(1.0, abs(end)):
                return end
            hi = lo + 0.5 * (end - lo)
        inc = _integral(hazard, lo, hi, epsabs)
        if acc + inc >= x:
            break
        acc += inc
        if hi >= end or not math.isfinite(hi + h):
            return end if clamp and math.isfinite(end) else math.inf
        lo, h = hi, 2.0 * h
    else:
        return math.inf

    target = x - acc
    tol = _INV_RTOL * x
    a, b = lo, hi
    mass_a = 0.0  # integral over [lo, a]
    lam = hazard(a)
    t = a + target / lam if lam > 0 else 0.5 * (a + b)
    if not a < t < b:
        t = 0.5 * (a + b)
    for _ in range(200):
        g = mass_a + _integral(hazard, a, t, epsabs) - target
        if abs(g) <= tol:
            return t
        if g < 0:
            a, mass_a = t, g + target
        else:
            b = t
        if b - a <= 4e-16 * max(1.0, abs(b)):
            return 0.5 * (a + b)
        lam = hazard(t)
        step = t - g / lam if lam > 0 else math.nan
        t = step if a < step < b else 0.5 * (a + b)
    return t


def sample_delay_inversion(bound, rng, start: float = 0.0, t_max: float = math.inf) -> DelaySample:
    """Draw ``x ~ Exp(1)`` and invert the bound's cumulative hazard.

    ``bound_rate`` is the bound hazard at the sampled residence.
    """
    stream = _as_stream(rng)
    x = stream.standard_exponential()
    t = invert_cumulative_hazard(bound, x, start, t_max)
    if not math.isfinite(t):
        return DelaySample(math.inf, 0.0)
    return DelaySample(t - start, bound.hazard(t))


def sample_delay_thinning(true_hazard: Callable[[float], float], c: float, rng, t_max: float = math.inf) -> float:
    """Delay with hazard ``true_hazard`` by thinning a rate-``c`` Poisson stream.

    Candidates ``t += Exp(c)`` are accepted with probability
    ``true_hazard(t) / c``. Returns ``inf`` once a candidate passes ``t_max``
    (or immediately for ``c == 0``). Raises :class:`BoundViolationError` if
    the hazard is ever seen above ``c``.
    """
    if c <= 0:
        return math.inf
    stream = _as_stream(rng)
    t = 0.0
    while True:
        t += stream.exponential(c)
        if t > t_max:
            return math.inf
        lam = true_hazard(t)
        if lam > c * (1.0 + REL_SLACK):
            raise BoundViolationError(None, None, lam, c, time=t)
        if stream.uniform() < lam / c:
            return t


def thin_against_bound(true_hazard, bound, rng, start: float = 0.0, t_max: float = math.inf) -> float:
    """Thinning with an arbitrary bound.

    ``true_hazard`` takes the delay measured from ``start``; the bound is
    indexed by absolute residence. Candidates come from the bound's own
    Poisson stream via conditional inversion.
    """
    if isinstance(bound, ConstantBound):
        return sample_delay_thinning(true_hazard, bound.rate, rng, t_max)
    stream = _as_stream(rng)
    res = start
    while True:
        res = invert_cumulative_hazard(bound, stream.standard_exponential(), res)
        if not math.isfinite(res) or res - start > t_max:
            return math.inf
        cap = bound.hazard(res)
        lam = true_hazard(res - start)
        if lam > cap * (1.0 + REL_SLACK):
            raise BoundViolationError(None, None, lam, cap, time=res - start)
        if stream.uniform() < lam / cap:
            return res - start


def sample_delays_thinning(hazard, c: float, size: int, rng, t_max: float = math.inf) -> np.ndarray:
    """Vectorized :func:`sample_delay_thinning` for array-valued hazards.

    All samples advance in lock-step, one candidate per round, so
    ``hazard`` must accept and return numpy arrays.
    """
    gen = as_generator(rng)
    out = np.full(size, np.inf)
    if c <= 0:
        return out
    t = np.zeros(size)
    active = np.arange(size)
    while active.size:
        t += gen.standard_exponential(active.size) / c
        lam = np.asarray(hazard(t), dtype=float)
        if np.any(lam > c * (1.0 + REL_SLACK)):
            raise BoundViolationError(None, None, float(lam.max()), c)
        hit = gen.random(active.size) < lam / c
        out[active[hit]] = t[hit]
        keep = ~hit & (t <= t_max)
        active, t = active[keep], t[keep]
    return out
