"""
Simulation engines
==================

``redsim``
    rejection-based event-driven simulation: events are scheduled from the
    model's rate bound and thinned at pop time; neighbors are never updated.
``baseline``
    the rejection-free variant: events come from each agent's exact
    frozen-neighborhood rate and every neighbor is regenerated after a
    state change.
``naive``
    the O(n)-per-step race; test oracle only.

The built-in models run on a compiled core (``_core``) when it is
importable; everything else, and all models when ``REDSIM_BACKEND=python``
is set, uses the pure-Python engines. Both backends produce identical
trajectories for the same seed.
"""

from __future__ import annotations

import math
import os
import time

import numpy as np

from ..errors import BoundViolationError
from ..models import FadingSIS, MarkovianSIS, WeibullVoter
from ..sampling import RngStream
from .naive import naive_run as _naive_run
from .naive import naive_step
from .python import baseline_schedule, baseline_step, redsim_step, run_python, schedule_event
from .state import Event, EventQueue, SimState, StepOutcome, Trajectory, make_grid

try:
    from . import _core
except ImportError:  # pragma: no cover - exercised when the extension is not built
    _core = None

__all__ = [
    "ENGINES",
    "COMPILED_AVAILABLE",
    "BoundViolationError",
    "Event",
    "EventQueue",
    "SimState",
    "StepOutcome",
    "Trajectory",
    "make_grid",
    "run",
    "redsim_run",
    "baseline_run",
    "naive_run",
    "run_replications",
    "schedule_event",
    "redsim_step",
    "baseline_schedule",
    "baseline_step",
    "naive_step",
    "default_backend",
]

ENGINES = ("redsim", "baseline", "naive")
COMPILED_AVAILABLE = _core is not None

_ENGINE_IDS = {"redsim": 0, "baseline": 1}


def _kernel_spec(model):
    # exact type match: subclasses may override rate/bound
    kind = type(model)
    if kind is MarkovianSIS:
        return 0, (model.c_i, model.c_r, model.bound_scale)
    if kind is FadingSIS:
        return 1, (model.u, 0.0, 0.0)
    if kind is WeibullVoter:
        return (3 if model.numeric else 2), (model.c_a, model.c_b, 0.0)
    return None


def default_backend() -> str:
    choice = os.environ.get("REDSIM_BACKEND", "auto").lower()
    if choice not in ("auto", "python", "compiled"):
        raise ValueError(f"REDSIM_BACKEND must be auto, python or compiled, not {choice!r}")
    return choice


def _resolve_backend(engine, model, backend):
    if backend is None:
        backend = default_backend()
    if engine == "naive" or backend == "python":
        return "python"
    spec = _kernel_spec(model)
    if backend == "compiled":
        if _core is None:
            raise RuntimeError("compiled core is not available; rebuild the package or use backend='python'")
        if spec is None:
            raise ValueError(f"no compiled kernel for {type(model).__name__}")
        return "compiled"
    return "compiled" if (_core is not None and spec is not None) else "python"


def _as_rng(rng):
    if isinstance(rng, RngStream):
        return rng
    if isinstance(rng, np.random.SeedSequence):
        return RngStream(seed_sequence=rng)
    return RngStream(rng)


def run(engine, model, network, init, horizon, rng, grid=101, *, backend=None, record_log=False) -> Trajectory:
    """Simulate one trajectory up to ``horizon``.

    Parameters
    ----------
    engine : {"redsim", "baseline", "naive"}
    model : AgentModel
    network : ContactNetwork
    init : sequence of int
        Initial state index of every node; all residence clocks start at 0.
    horizon : float
        Events at or after the horizon are not executed.
    rng : RngStream, SeedSequence, int or None
    grid : int or array
        Number of uniformly spaced recording times on ``[0, horizon]``, or
        the times themselves.
    backend : {"auto", "compiled", "python"}, optional
        Defaults to the ``REDSIM_BACKEND`` environment variable, else auto.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; choose from {', '.join(ENGINES)}")
    if not (horizon >= 0 and math.isfinite(horizon)):
        raise ValueError("horizon must be finite and nonnegative")
    times = make_grid(horizon, grid) if np.ndim(grid) == 0 else np.asarray(grid, dtype=float)
    init = np.asarray(init, dtype=np.int64)
    if init.shape != (network.node_count,):
        raise ValueError(f"init has shape {init.shape}, expected ({network.node_count},)")
    if init.size and (init.min() < 0 or init.max() >= len(model.states)):
        raise ValueError("init contains an unknown state index")
    rng = _as_rng(rng)
    chosen = _resolve_backend(engine, model, backend)
    if engine == "naive":
        return _naive_run(model, network, init, horizon, rng, times, record_log)
    if chosen == "python":
        return run_python(engine, model, network, init, horizon, rng, times, record_log)

    kind, params = _kernel_spec(model)
    indptr, indices = network.csr
    started = time.perf_counter()
    rows, accepted, rejected, final, t_final, log = _core.run(
        _ENGINE_IDS[engine], kind, params, indptr, indices, init, float(horizon),
        times, rng.bit_generator, record_log, tuple(model.states), repr(model),
    )
    elapsed = time.perf_counter() - started
    return Trajectory(
        times=times,
        counts=rows,
        state_names=tuple(model.states),
        accepted=int(accepted),
        rejected=int(rejected),
        wall_time=elapsed,
        engine=engine,
        backend="compiled",
        final_states=final,
        t_final=t_final,
        log=log,
    )


def redsim_run(model, network, init, horizon, rng, grid=101, **kwargs) -> Trajectory:
    return run("redsim", model, network, init, horizon, rng, grid, **kwargs)


def baseline_run(model, network, init, horizon, rng, grid=101, **kwargs) -> Trajectory:
    return run("baseline", model, network, init, horizon, rng, grid, **kwargs)


def naive_run(model, network, init, horizon, rng, grid=101, **kwargs) -> Trajectory:
    kwargs.pop("backend", None)
    return run("naive", model, network, init, horizon, rng, grid, **kwargs)


def run_replications(engine, model, network, init, horizon, seed, reps, grid=101, *, backend=None) -> np.ndarray:
    """Counts of ``reps`` independent replications, shape ``(reps, len(grid), n_states)``.

    Replicate ``i`` uses :meth:`RngStream.for_replicate(seed, i)`. ``init`` may
    be one initial condition or a callable ``init(i) -> sequence``.
    """
    out = None
    for i in range(reps):
        start = init(i) if callable(init) else init
        traj = run(engine, model, network, start, horizon, RngStream.for_replicate(seed, i), grid, backend=backend)
        if out is None:
            out = np.empty((reps,) + traj.counts.shape, dtype=np.int64)
        out[i] = traj.counts
    return out
