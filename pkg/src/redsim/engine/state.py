"""Shared engine data structures: events, queue, simulation state, trajectory."""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from ..network import ContactNetwork
from ..sampling import RngStream

INF = math.inf


class Event(NamedTuple):
    agent: int
    bound_rate: float
    fire_time: float


class StepOutcome(enum.Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"


class EventQueue:
    """Binary heap of events keyed on ``(fire_time, seq)``.

    ``seq`` is a global push counter, so ties pop in insertion order and the
    pop sequence is a pure function of the pushes. At most one event per
    agent is live; :meth:`remove` and re-pushing invalidate the old entry
    lazily.
    """

    __slots__ = ("_heap", "_live", "_seq", "_size")

    def __init__(self, node_count: int):
        self._heap: list = []
        self._live = [-1] * node_count
        self._seq = 0
        self._size = 0

    def push(self, agent: int, bound_rate: float, fire_time: float) -> None:
        if self._live[agent] < 0:
            self._size += 1
        seq = self._seq
        self._seq = seq + 1
        self._live[agent] = seq
        heapq.heappush(self._heap, (fire_time, seq, agent, bound_rate))

    def remove(self, agent: int) -> None:
        if self._live[agent] >= 0:
            self._live[agent] = -1
            self._size -= 1

    def _prune(self):
        heap, live = self._heap, self._live
        while heap and live[heap[0][2]] != heap[0][1]:
            heapq.heappop(heap)

    def peek_time(self) -> float:
        self._prune()
        return self._heap[0][0] if self._heap else INF

    def pop(self) -> Event:
        self._prune()
        fire_time, _, agent, bound_rate = heapq.heappop(self._heap)
        self._live[agent] = -1
        self._size -= 1
        return Event(agent, bound_rate, fire_time)

    def pending(self, agent: int) -> Optional[Event]:
        seq = self._live[agent]
        if seq < 0:
            return None
        for fire_time, s, a, bound_rate in self._heap:
            if s == seq:
                return Event(a, bound_rate, fire_time)
        return None

    def pending_agents(self) -> list[int]:
        return [a for a, s in enumerate(self._live) if s >= 0]

    @property
    def pushes(self) -> int:
        return self._seq

    def __len__(self):
        return self._size


@dataclass
class SimState:
    """Mutable per-run state. Residence of ``n`` is ``t_global - last_change[n]``."""

    network: ContactNetwork
    states: list
    last_change: list
    rng: RngStream
    horizon: float = INF
    t_global: float = 0.0
    queue: EventQueue = None
    accepted: int = 0
    rejected: int = 0
    counts: list = None
    log: Optional[list] = None

    def __post_init__(self):
        if self.queue is None:
            self.queue = EventQueue(self.network.node_count)

    @classmethod
    def initial(cls, network, init, n_states, rng, horizon=INF, record_log=False):
        states = [int(s) for s in init]
        if len(states) != network.node_count:
            raise ValueError(f"init has {len(states)} entries for {network.node_count} nodes")
        if states and (min(states) < 0 or max(states) >= n_states):
            raise ValueError("init contains an unknown state index")
        counts = [0] * n_states
        for s in states:
            counts[s] += 1
        return cls(
            network=network,
            states=states,
            last_change=[0.0] * network.node_count,
            rng=rng,
            horizon=horizon,
            counts=counts,
            log=[] if record_log else None,
        )

    def residence(self, agent: int) -> float:
        return self.t_global - self.last_change[agent]

    def set_state(self, agent: int, new: int) -> None:
        old = self.states[agent]
        self.states[agent] = new
        self.last_change[agent] = self.t_global
        self.counts[old] -= 1
        self.counts[new] += 1
        if self.log is not None:
            self.log.append((self.t_global, agent, old, new))


def make_grid(horizon: float, points: int) -> np.ndarray:
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if horizon == 0:
        return np.array([0.0])
    return np.linspace(0.0, horizon, max(int(points), 2))


class GridRecorder:
    """Writes per-state counts at grid times; a grid point ``g`` sees every event with time ``<= g``."""

    __slots__ = ("grid", "rows", "next")

    def __init__(self, grid: np.ndarray, n_states: int):
        self.grid = [float(g) for g in grid]
        self.rows = np.zeros((len(self.grid), n_states), dtype=np.int64)
        self.next = 0

    def advance(self, t: float, counts) -> None:
        grid, i = self.grid, self.next
        while i < len(grid) and grid[i] < t:
            self.rows[i] = counts
            i += 1
        self.next = i

    def finish(self, counts) -> np.ndarray:
        self.rows[self.next:] = counts
        self.next = len(self.grid)
        return self.rows


@dataclass
class Trajectory:
    times: np.ndarray
    counts: np.ndarray
    state_names: tuple
    accepted: int = 0
    rejected: int = 0
    wall_time: float = 0.0
    engine: str = ""
    backend: str = ""
    final_states: Optional[np.ndarray] = None
    t_final: float = 0.0
    log: Optional[list] = field(default=None, repr=False)

    @property
    def steps(self) -> int:
        return self.accepted + self.rejected

    @property
    def ns_per_successful_step(self) -> float:
        return 1e9 * self.wall_time / self.accepted if self.accepted else math.nan

    def final_count(self, state: int) -> int:
        return int(self.counts[-1, state])
