"""
Agent models
============

A model supplies, for every agent,

``rate(state, residence, neighbors)``
    the instantaneous firing rate,
``transition(state, residence, neighbors, rng)``
    one draw of the next local state,
``bound(state, degree)``
    a :class:`~redsim.bounds.ConstantBound` or
    :class:`~redsim.bounds.TimeVaryingBound` that dominates ``rate`` for
    *every* neighborhood the agent could see.

States are small integers indexing ``model.states``. Models hold no
per-run state, so one instance can be shared by any number of runs.

Built-ins: :class:`MarkovianSIS`, :class:`FadingSIS`, :class:`WeibullVoter`.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from typing import NamedTuple

import numpy as np

from .bounds import ConstantBound, TimeVaryingBound
from .sampling import as_generator, invert_cumulative_hazard

__all__ = [
    "StateLabel",
    "NeighborView",
    "AgentModel",
    "MarkovianSIS",
    "FadingSIS",
    "WeibullVoter",
    "sis_markovian",
    "sis_fading",
    "voter_weibull",
    "make_model",
    "MODEL_NAMES",
    "random_init",
]


class StateLabel(NamedTuple):
    index: int
    name: str

    def __index__(self):
        return self.index


class NeighborView:
    """Lazy view of ``(state, residence)`` for each neighbor of one agent.

    Residences are ``now - last_change[j]``; ``aged(dt)`` gives the view
    ``dt`` time units later assuming nobody changes state.
    """

    __slots__ = ("nodes", "states", "last_change", "now")

    def __init__(self, nodes, states, last_change, now):
        self.nodes = nodes
        self.states = states
        self.last_change = last_change
        self.now = now

    @classmethod
    def from_pairs(cls, pairs):
        """Standalone view from explicit ``(state, residence)`` pairs."""
        pairs = list(pairs)
        return cls(
            range(len(pairs)),
            [int(s) for s, _ in pairs],
            [-float(r) for _, r in pairs],
            0.0,
        )

    def __iter__(self):
        states, last, now = self.states, self.last_change, self.now
        for j in self.nodes:
            yield states[j], now - last[j]

    def __len__(self):
        return len(self.nodes)

    def count(self, state) -> int:
        states = self.states
        return sum(1 for j in self.nodes if states[j] == state)

    def aged(self, dt: float) -> "NeighborView":
        return NeighborView(self.nodes, self.states, self.last_change, self.now + dt)

    def __repr__(self):
        return f"NeighborView({list(self)!r})"


class AgentModel(ABC):
    """Behavior interface plugged into every engine."""

    states: tuple[str, ...] = ()

    def state_set(self) -> list[StateLabel]:
        return [StateLabel(i, s) for i, s in enumerate(self.states)]

    def state_index(self, name: str) -> int:
        return self.states.index(name)

    @abstractmethod
    def rate(self, state: int, residence: float, neighbors) -> float:
        ...

    @abstractmethod
    def transition(self, state: int, residence: float, neighbors, rng) -> int:
        ...

    @abstractmethod
    def bound(self, state: int, degree: int):
        ...

    def transition_probs(self, state: int, residence: float, neighbors) -> dict[int, float]:
        """Full next-state distribution. Only the CTMC oracle needs it."""
        raise NotImplementedError(f"{type(self).__name__} does not expose transition probabilities")

    def frozen_delay(self, state, residence, neighbors, rng, t_max=math.inf):
        """Sample the exact delay assuming no neighbor changes state.

        Returns ``(delay, rate_at_firing)``. The generic version inverts the
        aged-neighborhood rate by quadrature; built-ins override it with
        closed forms.
        """
        bound = self.bound(state, len(neighbors))
        if isinstance(bound, TimeVaryingBound) and bound.exact:
            return bound.sampler(residence, rng), math.inf

        def hazard(dt):
            return self.rate(state, residence + dt, neighbors.aged(dt))

        target = rng.standard_exponential()
        delay = invert_cumulative_hazard(TimeVaryingBound(hazard), target, 0.0, t_max)
        if not math.isfinite(delay):
            return math.inf, 0.0
        return delay, hazard(delay)

    def __repr__(self):
        params = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({params})"

    def params(self) -> dict:
        return {}


def _flip(state):
    return 1 - state


class MarkovianSIS(AgentModel):
    """Classic SIS: infection ``c_i`` per infected neighbor, recovery ``c_r``.

    ``bound_scale`` multiplies the susceptible bound ``degree * c_i``.
    Anything below 1 makes the bound invalid; it exists so the violation
    check can be exercised.
    """

    states = ("S", "I")
    S, I = 0, 1

    def __init__(self, c_i: float = 1.0, c_r: float = 1.0, bound_scale: float = 1.0):
        if c_i < 0 or c_r < 0:
            raise ValueError("rate constants must be nonnegative")
        self.c_i = float(c_i)
        self.c_r = float(c_r)
        self.bound_scale = float(bound_scale)
        self._recovery = ConstantBound(self.c_r)

    def params(self):
        return {"c_i": self.c_i, "c_r": self.c_r, "bound_scale": self.bound_scale}

    def rate(self, state, residence, neighbors):
        if state == 1:
            return self.c_r
        return self.c_i * neighbors.count(1)

    def transition(self, state, residence, neighbors, rng):
        return 1 - state

    def transition_probs(self, state, residence, neighbors):
        return {1 - state: 1.0}

    def bound(self, state, degree):
        if state == 1:
            return self._recovery
        return ConstantBound(degree * self.c_i * self.bound_scale)

    def frozen_delay(self, state, residence, neighbors, rng, t_max=math.inf):
        lam = self.rate(state, residence, neighbors)
        if lam <= 0:
            return math.inf, 0.0
        return rng.exponential(lam), lam


class FadingSIS(AgentModel):
    """SIS with decaying infectiousness and uniform recovery.

    An infected neighbor with residence ``r`` attacks at rate
    ``u * exp(-u * r)``; recovery time is uniform on ``[0, 1]`` and is drawn
    directly. The susceptible bound ``degree * u`` pretends every neighbor
    is infected and freshly so.
    """

    states = ("S", "I")
    S, I = 0, 1

    def __init__(self, u: float = 0.4):
        if not u > 0:
            raise ValueError("u must be positive")
        self.u = float(u)
        self._recovery = TimeVaryingBound(
            hazard=_uniform_recovery_hazard,
            cumulative=_uniform_recovery_cumulative,
            inverse=lambda x: -math.expm1(-x),
            support_end=1.0,
            sampler=_uniform_recovery_sample,
        )

    def params(self):
        return {"u": self.u}

    def rate(self, state, residence, neighbors):
        if state == 1:
            return _uniform_recovery_hazard(residence)
        u = self.u
        # summing terms <= 1 before scaling keeps rate <= degree * u exactly
        total = 0.0
        for s, r in neighbors:
            if s == 1:
                total += math.exp(-u * r)
        return u * total

    def transition(self, state, residence, neighbors, rng):
        return 1 - state

    def transition_probs(self, state, residence, neighbors):
        return {1 - state: 1.0}

    def bound(self, state, degree):
        if state == 1:
            return self._recovery
        return ConstantBound(degree * self.u)

    def frozen_delay(self, state, residence, neighbors, rng, t_max=math.inf):
        if state == 1:
            return _uniform_recovery_sample(residence, rng), math.inf
        u = self.u
        mass = 0.0
        for s, r in neighbors:
            if s == 1:
                mass += math.exp(-u * r)
        if mass <= 0.0:
            return math.inf, 0.0
        # cumulative hazard of the frozen neighborhood is mass * (1 - exp(-u t))
        x = rng.standard_exponential()
        if x >= mass:
            return math.inf, 0.0
        delay = -math.log1p(-x / mass) / u
        return delay, u * mass * math.exp(-u * delay)


def _uniform_recovery_hazard(r):
    return 1.0 / (1.0 - r) if 0.0 <= r < 1.0 else 0.0


def _uniform_recovery_cumulative(r):
    return -math.log1p(-r) if r < 1.0 else math.inf


def _uniform_recovery_sample(r, rng):
    return max(1.0 - r, 0.0) * rng.uniform()


class WeibullVoter(AgentModel):
    """Two-opinion voter model with Weibull switching times.

    An agent in A with residence ``t`` switches at rate
    ``c_a * u * (t u)**(c_a - 1)`` where ``u`` is the fraction of its
    neighbors in B (symmetrically for B). Setting ``u = 1`` gives the bound
    ``c t**(c-1)``, sampled by closed-form inversion.

    With ``numeric=True`` every delay (bound or frozen neighborhood) is
    sampled by numerically integrating the hazard instead. The dynamics are
    the same; only the sampling cost changes, which is what the benchmark
    uses to model an expensive sampler.
    """

    states = ("A", "B")
    A, B = 0, 1

    def __init__(self, c_a: float = 2.0, c_b: float = 2.05, numeric: bool = False):
        if c_a < 1 or c_b < 1:
            raise ValueError("Weibull shapes must be at least 1")
        self.c_a = float(c_a)
        self.c_b = float(c_b)
        self.numeric = bool(numeric)
        self.shapes = (self.c_a, self.c_b)
        self._bounds = tuple(_weibull_bound(c, self.numeric) for c in self.shapes)
        self._silent = ConstantBound(0.0)

    def params(self):
        params = {"c_a": self.c_a, "c_b": self.c_b}
        if self.numeric:
            params["numeric"] = True
        return params

    def rate(self, state, residence, neighbors):
        k = opp = 0
        for s, _ in neighbors:
            k += 1
            if s != state:
                opp += 1
        if opp == 0:
            return 0.0
        u = opp / k
        c = self.shapes[state]
        return c * u * (residence * u) ** (c - 1.0)

    def transition(self, state, residence, neighbors, rng):
        return 1 - state

    def transition_probs(self, state, residence, neighbors):
        return {1 - state: 1.0}

    def bound(self, state, degree):
        if degree == 0:
            return self._silent
        return self._bounds[state]

    def frozen_delay(self, state, residence, neighbors, rng, t_max=math.inf):
        k = opp = 0
        for s, _ in neighbors:
            k += 1
            if s != state:
                opp += 1
        if opp == 0:
            return math.inf, 0.0
        u = opp / k
        c = self.shapes[state]
        x = rng.standard_exponential()
        if self.numeric:
            frozen = TimeVaryingBound(lambda t: c * u * (t * u) ** (c - 1.0))
            reached = invert_cumulative_hazard(frozen, x, residence, t_max)
            if not math.isfinite(reached):
                return math.inf, 0.0
            return reached - residence, frozen.hazard(reached)
        # frozen cumulative hazard over residence: (t u)**c
        reached = ((residence * u) ** c + x) ** (1.0 / c) / u
        delay = reached - residence
        return delay, c * u * (reached * u) ** (c - 1.0)


def _weibull_bound(c, numeric=False):
    if numeric:
        return TimeVaryingBound(hazard=lambda t: c * t ** (c - 1.0))
    return TimeVaryingBound(
        hazard=lambda t: c * t ** (c - 1.0),
        cumulative=lambda t: t ** c,
        inverse=lambda x: x ** (1.0 / c),
    )


def sis_markovian(c_i: float, c_r: float) -> MarkovianSIS:
    return MarkovianSIS(c_i, c_r)


def sis_fading(u: float = 0.4) -> FadingSIS:
    return FadingSIS(u)


def voter_weibull(c_a: float = 2.0, c_b: float = 2.05, numeric: bool = False) -> WeibullVoter:
    return WeibullVoter(c_a, c_b, numeric)


_REGISTRY = {
    "sis": MarkovianSIS,
    "sis-fading": FadingSIS,
    "voter": WeibullVoter,
}
MODEL_NAMES = tuple(_REGISTRY)

#: (state index, fraction of agents) used when no initial condition is given
DEFAULT_INIT = {"sis": (1, 0.05), "sis-fading": (1, 0.05), "voter": (1, 0.5)}


def make_model(name: str, **params) -> AgentModel:
    """Instantiate a built-in model by name, e.g. ``make_model("voter", c_a=2)``."""
    try:
        cls = _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}") from None
    try:
        return cls(**{k: float(v) for k, v in params.items()})
    except TypeError as exc:
        raise ValueError(f"bad parameters for {name!r}: {exc}") from None


def random_init(node_count: int, fraction: float, rng, state: int = 1) -> np.ndarray:
    """All agents in state 0 except ``round(fraction * n)`` random ones in ``state``."""
    gen = as_generator(rng)
    init = np.zeros(node_count, dtype=np.int64)
    chosen = gen.permutation(node_count)[: int(round(fraction * node_count))]
    init[chosen] = state
    return init
