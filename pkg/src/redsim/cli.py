"""Command-line front end.

Subcommands
-----------
run
    simulate replications, write ``traj_XXXX.csv`` per replication and ``mean.csv``
bench
    time ns per successful step across engines and network sizes, write
    ``bench.json`` and a log-log ``bench.svg``
plot
    regenerate the SVG from a bench JSON file

Exit codes: 0 success, 1 runtime error (including bound violations),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import engine as _engine
from .errors import BoundViolationError, EdgeListError
from .models import DEFAULT_INIT, MODEL_NAMES, make_model, random_init
from .network import configuration_model, read_edge_list, sample_powerlaw_degrees
from .sampling import RngStream

log = logging.getLogger("redsim")

__all__ = ["main", "build_parser", "RunConfig", "BenchRecord", "write_trajectory_csv", "plot_bench"]


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    model: str
    params: dict
    engine: str
    horizon: float
    reps: int
    seed: int
    grid: int
    out: Path
    nodes: Optional[int] = None
    beta: Optional[float] = None
    kmin: int = 3
    edge_list: Optional[Path] = None
    init_fraction: Optional[float] = None
    jobs: int = 1
    backend: Optional[str] = None

    def __post_init__(self):
        if (self.nodes is None) == (self.edge_list is None):
            raise UsageError("give exactly one network source: --nodes/--beta or --edge-list")
        if self.nodes is not None and self.beta is None:
            raise UsageError("--nodes needs --beta")
        if self.reps < 1:
            raise UsageError("--reps must be at least 1")
        if self.grid < 2:
            raise UsageError("--grid must be at least 2")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise UsageError("--horizon must be positive and finite")
        if self.jobs < 1:
            raise UsageError("--jobs must be at least 1")


@dataclass
class BenchRecord:
    engine: str
    node_count: int
    beta: float
    model: str
    total_steps: int
    successful_steps: int
    rejected_steps: int
    ns_per_successful_step: float
    horizon: float = 0.0
    backend: str = ""


def _parse_params(items):
    params = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--param expects k=v, got {item!r}")
        try:
            params[key] = float(value)
        except ValueError:
            raise UsageError(f"--param {key}: {value!r} is not a number") from None
    return params


def _csv_list(text, cast, flag):
    try:
        values = [cast(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{flag}: cannot parse {text!r}") from None
    if not values:
        raise UsageError(f"{flag} is empty")
    return values


def _generated_network(nodes, beta, kmin, seed):
    # the network gets its own stream, separate from the replicate streams
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(2**32 - 1,))))
    return configuration_model(sample_powerlaw_degrees(nodes, beta, kmin, rng=gen), rng=gen), gen


def _initial_states(model_name, node_count, fraction, gen):
    state, default = DEFAULT_INIT[model_name]
    return random_init(node_count, default if fraction is None else fraction, gen, state)


def _make_model(name, params):
    try:
        return make_model(name, **params)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"model {name}: {exc}") from None


def write_trajectory_csv(path, times, counts, state_names, fmt="%d") -> None:
    """``time,<state0>,...`` with six-decimal times."""
    with open(path, "w", newline="\n") as fh:
        fh.write("time," + ",".join(state_names) + "\n")
        for t, row in zip(times, counts):
            fh.write(f"{t:.6f}," + ",".join(fmt % v for v in row) + "\n")


def _one_replicate(args):
    engine, (name, params), network, init, horizon, seed, index, grid, backend = args
    model = make_model(name, **params)  # models hold closures, so workers rebuild them
    traj = _engine.run(engine, model, network, init, horizon, RngStream.for_replicate(seed, index), grid, backend=backend)
    return traj.times, traj.counts


def cmd_run(cfg: RunConfig) -> int:
    model = _make_model(cfg.model, cfg.params)
    if cfg.edge_list is not None:
        network = read_edge_list(cfg.edge_list)
        gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed, spawn_key=(2**32 - 1,))))
    else:
        network, gen = _generated_network(cfg.nodes, cfg.beta, cfg.kmin, cfg.seed)
    init = _initial_states(cfg.model, network.node_count, cfg.init_fraction, gen)
    cfg.out.mkdir(parents=True, exist_ok=True)

    tasks = [
        (cfg.engine, (cfg.model, cfg.params), network, init, cfg.horizon, cfg.seed, i, cfg.grid, cfg.backend)
        for i in range(cfg.reps)
    ]
    if cfg.jobs > 1 and cfg.reps > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = pool.map(_one_replicate, tasks)
            total = _collect(results, cfg, model)
    else:
        total = _collect(map(_one_replicate, tasks), cfg, model)
    times, summed = total
    write_trajectory_csv(cfg.out / "mean.csv", times, summed / cfg.reps, model.states, fmt="%.6f")
    log.info("wrote %d trajectories to %s", cfg.reps, cfg.out)
    return 0


def _collect(results, cfg, model):
    # single writer, in replicate order
    summed = None
    width = max(4, len(str(cfg.reps - 1)))
    for i, (times, counts) in enumerate(results):
        write_trajectory_csv(cfg.out / f"traj_{i:0{width}d}.csv", times, counts, model.states)
        summed = counts.astype(float) if summed is None else summed + counts
    return times, summed


def _pilot_horizon(model, network, init, seed, target_steps, backend, max_horizon):
    """Horizon giving about ``target_steps`` successful steps, capped at ``max_horizon``."""
    horizon = min(1.0, max_horizon)
    while True:
        traj = _engine.run("redsim", model, network, init, horizon, RngStream.for_replicate(seed, 0), 2, backend=backend)
        if traj.accepted >= target_steps or horizon >= max_horizon:
            return horizon
        grow = 4.0 if traj.accepted == 0 else min(4.0, 1.2 * target_steps / traj.accepted)
        horizon = min(horizon * grow, max_horizon)


def _timed(name, model, network, init, horizon, seed, target_steps, backend, max_reps):
    """Replications to ``horizon`` until ``target_steps`` successful steps accumulate."""
    accepted = rejected = 0
    wall = 0.0
    kind = ""
    for i in range(max_reps):
        traj = _engine.run(name, model, network, init, horizon, RngStream.for_replicate(seed, 1 + i), 2, backend=backend)
        accepted += traj.accepted
        rejected += traj.rejected
        wall += traj.wall_time
        kind = traj.backend
        if accepted >= target_steps:
            break
    return accepted, rejected, wall, kind


def run_bench(engines, model_name, sizes, beta, seed, *, params=None, horizon=None, target_steps=100_000,
              kmin=3, backend=None, max_horizon=5.0, max_reps=1000) -> list[BenchRecord]:
    """Time every engine on the same networks, strictly serially.

    Each (engine, size) gets one discarded warm-up run, then replications
    to a common horizon until ``target_steps`` successful steps accumulate.
    Network generation and I/O are outside the timed region.
    """
    model = _make_model(model_name, params or {})
    records = []
    for n in sizes:
        network, gen = _generated_network(n, beta, kmin, seed)
        init = _initial_states(model_name, network.node_count, None, gen)
        t_end = horizon or _pilot_horizon(model, network, init, seed, target_steps, backend, max_horizon)
        for name in engines:
            _engine.run(name, model, network, init, t_end, RngStream.for_replicate(seed, 0), 2, backend=backend)
            accepted, rejected, wall, kind = _timed(name, model, network, init, t_end, seed, target_steps,
                                                    backend, max_reps)
            records.append(BenchRecord(
                engine=name,
                node_count=network.node_count,
                beta=float(beta),
                model=model_name,
                total_steps=accepted + rejected,
                successful_steps=accepted,
                rejected_steps=rejected,
                ns_per_successful_step=wall * 1e9 / accepted if accepted else math.inf,
                horizon=float(t_end),
                backend=kind,
            ))
            log.info("%s n=%d: %.1f ns/step (%d steps)", name, n, records[-1].ns_per_successful_step, accepted)
    return records


def plot_bench(records, path) -> None:
    """Log-log ns per successful step vs node count, one line per engine.

    The output depends only on ``records``.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series = {}
    for rec in records:
        key = f"{rec['engine']} ({rec['model']}, beta={rec['beta']:g})"
        series.setdefault(key, []).append((rec["node_count"], rec["ns_per_successful_step"]))
    with matplotlib.rc_context({"svg.hashsalt": "redsim", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for key in sorted(series):
            pts = sorted(series[key])
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=key)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("number of nodes")
        ax.set_ylabel("ns per successful step")
        ax.legend(fontsize="small")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
        plt.close(fig)


def cmd_bench(args) -> int:
    engines = _csv_list(args.engines, str, "--engines")
    for name in engines:
        if name not in _engine.ENGINES:
            raise UsageError(f"unknown engine {name!r}")
    sizes = _csv_list(args.sizes, lambda v: int(float(v)), "--sizes")
    if sizes != sorted(sizes) or min(sizes) < 2:
        raise UsageError("--sizes must be ascending and at least 2")
    records = run_bench(engines, args.model, sizes, args.beta, args.seed, params=_parse_params(args.param),
                        horizon=args.horizon, target_steps=args.target_steps, kmin=args.kmin, backend=args.backend,
                        max_horizon=args.max_horizon)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data = [asdict(r) for r in records]
    (out / "bench.json").write_text(json.dumps(data, indent=2) + "\n")
    plot_bench(data, out / "bench.svg")
    for r in records:
        print(f"{r.engine:9s} n={r.node_count:<7d} {r.ns_per_successful_step:12.1f} ns/step "
              f"({r.successful_steps} ok, {r.rejected_steps} rejected)")
    return 0


def cmd_plot(args) -> int:
    data = json.loads(Path(args.json).read_text())
    plot_bench(data, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="redsim", description="Rejection-based simulation of agents on networks.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    backend = dict(choices=("auto", "compiled", "python"), default=None,
                   help="kernel backend (default: $REDSIM_BACKEND or auto)")

    p = sub.add_parser("run", help="simulate and write trajectory CSVs")
    p.add_argument("--model", required=True, choices=MODEL_NAMES)
    p.add_argument("--param", action="append", metavar="K=V", help="model parameter, repeatable")
    p.add_argument("--nodes", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--kmin", type=int, default=3)
    p.add_argument("--edge-list", type=Path)
    p.add_argument("--engine", choices=_engine.ENGINES, default="redsim")
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--init-fraction", type=float, help="fraction of agents starting in the non-default state")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--backend", **backend)

    b = sub.add_parser("bench", help="time engines across network sizes")
    b.add_argument("--engines", default="redsim,baseline")
    b.add_argument("--model", required=True, choices=MODEL_NAMES)
    b.add_argument("--param", action="append", metavar="K=V")
    b.add_argument("--sizes", required=True)
    b.add_argument("--beta", type=float, default=2.0)
    b.add_argument("--kmin", type=int, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--horizon", type=float, help="fixed horizon (default: chosen for --target-steps)")
    b.add_argument("--target-steps", type=int, default=100_000)
    b.add_argument("--max-horizon", type=float, default=5.0, help="cap on the automatic horizon")
    b.add_argument("--out", required=True)
    b.add_argument("--backend", **backend)

    q = sub.add_parser("plot", help="regenerate bench.svg from bench.json")
    q.add_argument("json")
    q.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "run":
            cfg = RunConfig(
                model=args.model, params=_parse_params(args.param), engine=args.engine, horizon=args.horizon,
                reps=args.reps, seed=args.seed, grid=args.grid, out=args.out, nodes=args.nodes, beta=args.beta,
                kmin=args.kmin, edge_list=args.edge_list, init_fraction=args.init_fraction, jobs=args.jobs,
                backend=args.backend,
            )
            return cmd_run(cfg)
        if args.command == "bench":
            return cmd_bench(args)
        return cmd_plot(args)
    except UsageError as exc:
        parser.error(str(exc))
    except BoundViolationError as exc:
        print(f"redsim: bound violation: {exc}", file=sys.stderr)
        return 1
    except (EdgeListError, OSError, ValueError, RuntimeError) as exc:
        print(f"redsim: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
