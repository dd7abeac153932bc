"""Naive race simulation, the semantics oracle.

Every step draws a fresh delay for *every* agent from its frozen-neighborhood
rate (by thinning against the model bound), fires the earliest, and
discards the rest. O(n) per step; only meant for small test graphs.
"""

from __future__ import annotations

import math
import time

from ..bounds import ConstantBound
from ..errors import BoundViolationError
from ..models import NeighborView
from ..sampling import sample_delay_thinning, thin_against_bound
from .state import GridRecorder, SimState, Trajectory


def _candidate_delay(model, state: SimState, agent: int, t_max: float) -> float:
    s = state.states[agent]
    adj = state.network.adjacency[agent]
    bound = model.bound(s, len(adj))
    r0 = state.t_global - state.last_change[agent]
    if isinstance(bound, ConstantBound):
        if bound.rate <= 0.0:
            return math.inf
    elif bound.sampler is not None:
        return bound.sampler(r0, state.rng)

    now = state.t_global
    states, last = state.states, state.last_change

    def hazard(dt):
        return model.rate(s, r0 + dt, NeighborView(adj, states, last, now + dt))

    try:
        if isinstance(bound, ConstantBound):
            return sample_delay_thinning(hazard, bound.rate, state.rng, t_max)
        return thin_against_bound(hazard, bound, state.rng, r0, t_max)
    except BoundViolationError as exc:
        raise BoundViolationError(agent, model.states[s], exc.rate, exc.bound, now, repr(model)) from None


def naive_step(state: SimState, model) -> bool:
    """One race among all agents. Returns ``False`` when nobody fires before the horizon."""
    t_max = state.horizon - state.t_global
    best, winner = math.inf, -1
    for agent in range(state.network.node_count):
        d = _candidate_delay(model, state, agent, t_max)
        if d < best:
            best, winner = d, agent
    if winner < 0 or not state.t_global + best < state.horizon:
        return False
    state.t_global += best
    s = state.states[winner]
    nbrs = NeighborView(state.network.adjacency[winner], state.states, state.last_change, state.t_global)
    new = model.transition(s, state.t_global - state.last_change[winner], nbrs, state.rng)
    if new != s:
        state.set_state(winner, new)
    state.accepted += 1
    return True


def naive_run(model, network, init, horizon, rng, grid, record_log=False) -> Trajectory:
    state = SimState.initial(network, init, len(model.states), rng, horizon, record_log)
    recorder = GridRecorder(grid, len(model.states))
    started = time.perf_counter()
    while True:
        before = list(state.counts)
        if not naive_step(state, model):
            break
        # the grid must see the configuration from before this firing
        recorder.advance(state.t_global, before)
    elapsed = time.perf_counter() - started
    rows = recorder.finish(state.counts)
    return Trajectory(
        times=grid,
        counts=rows,
        state_names=tuple(model.states),
        accepted=state.accepted,
        rejected=0,
        wall_time=elapsed,
        engine="naive",
        backend="python",
        final_states=list(state.states),
        t_final=state.t_global,
        log=state.log,
    )
