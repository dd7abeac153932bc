"""Pure-Python engines: RED-Sim and the rejection-free baseline.

These work with any :class:`~redsim.models.AgentModel` and double as the
fallback when the compiled core is unavailable. For the built-in models
they consume random numbers in exactly the same order as ``_core`` and so
produce bit-identical trajectories.
"""

from __future__ import annotations

import math
import time

from ..bounds import ConstantBound
from ..errors import BoundViolationError
from ..models import NeighborView
from ..sampling import REL_SLACK, invert_cumulative_hazard
from .state import INF, GridRecorder, SimState, StepOutcome, Trajectory

__all__ = [
    "schedule_event",
    "redsim_step",
    "baseline_schedule",
    "baseline_step",
    "run_python",
]


def _neighbors(state: SimState, agent: int) -> NeighborView:
    return NeighborView(state.network.adjacency[agent], state.states, state.last_change, state.t_global)


def schedule_event(state: SimState, model, agent: int) -> None:
    """Push the next candidate event of ``agent``, sampled from its bound.

    Time-varying bounds are integrated from the agent's current residence,
    so after a rejection the candidate stream simply continues.
    """
    s = state.states[agent]
    t_now = state.t_global
    bound = model.bound(s, len(state.network.adjacency[agent]))
    queue = state.queue
    if isinstance(bound, ConstantBound):
        c = bound.rate
        if c <= 0.0:
            queue.push(agent, 0.0, INF)
        else:
            queue.push(agent, c, t_now + state.rng.exponential(c))
        return
    r = t_now - state.last_change[agent]
    if bound.sampler is not None:
        queue.push(agent, INF, t_now + bound.sampler(r, state.rng))
        return
    reached = invert_cumulative_hazard(bound, state.rng.standard_exponential(), r)
    if not math.isfinite(reached):
        queue.push(agent, 0.0, INF)
        return
    fire_time = t_now + (reached - r)
    queue.push(agent, bound.hazard(fire_time - state.last_change[agent]), fire_time)


def redsim_step(state: SimState, model) -> StepOutcome:
    """Pop one event, thin it against the true rate, reschedule the agent.

    Neighbors' pending events are never touched.
    """
    agent, bound_rate, fire_time = state.queue.pop()
    state.t_global = fire_time
    s = state.states[agent]
    r = fire_time - state.last_change[agent]
    nbrs = None
    if bound_rate == INF:
        accept = True
    elif bound_rate > 0.0:
        nbrs = _neighbors(state, agent)
        mu = model.rate(s, r, nbrs)
        if mu > bound_rate * (1.0 + REL_SLACK):
            raise BoundViolationError(agent, model.states[s], mu, bound_rate, fire_time, repr(model))
        accept = state.rng.uniform() < mu / bound_rate
    else:
        accept = False
    if accept:
        if nbrs is None:
            nbrs = _neighbors(state, agent)
        new = model.transition(s, r, nbrs, state.rng)
        if new != s:
            state.set_state(agent, new)
        state.accepted += 1
        outcome = StepOutcome.ACCEPTED
    else:
        state.rejected += 1
        outcome = StepOutcome.REJECTED
    schedule_event(state, model, agent)
    return outcome


def baseline_schedule(state: SimState, model, agent: int) -> None:
    """Push an event drawn from the agent's exact frozen-neighborhood rate."""
    delay, mu = model.frozen_delay(
        state.states[agent],
        state.t_global - state.last_change[agent],
        _neighbors(state, agent),
        state.rng,
        state.horizon - state.t_global,
    )
    if math.isfinite(delay):
        state.queue.push(agent, mu, state.t_global + delay)
    else:
        state.queue.push(agent, 0.0, INF)


def baseline_step(state: SimState, model) -> StepOutcome:
    """Rejection-free step: fire, then regenerate the agent and (on a change) all its neighbors."""
    agent, _, fire_time = state.queue.pop()
    state.t_global = fire_time
    s = state.states[agent]
    new = model.transition(s, fire_time - state.last_change[agent], _neighbors(state, agent), state.rng)
    state.accepted += 1
    changed = new != s
    if changed:
        state.set_state(agent, new)
    baseline_schedule(state, model, agent)
    if changed:
        queue = state.queue
        for j in state.network.adjacency[agent]:
            queue.remove(j)
            baseline_schedule(state, model, j)
    return StepOutcome.ACCEPTED


_ENGINES = {
    "redsim": (schedule_event, redsim_step),
    "baseline": (baseline_schedule, baseline_step),
}


def run_python(engine, model, network, init, horizon, rng, grid, record_log=False) -> Trajectory:
    schedule, step = _ENGINES[engine]
    state = SimState.initial(network, init, len(model.states), rng, horizon, record_log)
    recorder = GridRecorder(grid, len(model.states))
    started = time.perf_counter()
    for agent in range(network.node_count):
        schedule(state, model, agent)
    queue = state.queue
    while True:
        t_next = queue.peek_time()
        if not t_next < horizon:
            break
        recorder.advance(t_next, state.counts)
        step(state, model)
    elapsed = time.perf_counter() - started
    rows = recorder.finish(state.counts)
    return Trajectory(
        times=grid,
        counts=rows,
        state_names=tuple(model.states),
        accepted=state.accepted,
        rejected=state.rejected,
        wall_time=elapsed,
        engine=engine,
        backend="python",
        final_states=list(state.states),
        t_final=state.t_global,
        log=state.log,
    )
