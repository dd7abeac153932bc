"""Compiled core vs pure-Python fallback.

Runs every built-in model under both engines with the same network, initial
condition and seed on each backend, checks that the trajectories agree, and
prints wall time per successful step and the speedup.

    python3 benchmarks/bench_backends.py --nodes 2000 --horizon 3
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from redsim import COMPILED_AVAILABLE, RngStream, make_model, run
from redsim.models import DEFAULT_INIT, random_init
from redsim.network import configuration_model, sample_powerlaw_degrees

CASES = [
    ("sis", {"c_i": 0.5}),
    ("sis-fading", {}),
    ("voter", {}),
    ("voter", {"numeric": 1}),
]


def bench(nodes, beta, horizon, seed, repeats):
    gen = np.random.default_rng(seed)
    network = configuration_model(sample_powerlaw_degrees(nodes, beta, 3, rng=gen), rng=gen)
    rows = []
    for name, params in CASES:
        model = make_model(name, **params)
        state, fraction = DEFAULT_INIT[name]
        init = random_init(network.node_count, fraction, gen, state)
        for engine in ("redsim", "baseline"):
            result = {"model": repr(model), "engine": engine}
            trajs = {}
            for backend in ("compiled", "python"):
                best = None
                for _ in range(repeats):
                    traj = run(engine, model, network, init, horizon, RngStream(seed), 11, backend=backend)
                    best = traj if best is None or traj.wall_time < best.wall_time else best
                trajs[backend] = best
                result[f"{backend}_ns_per_step"] = best.ns_per_successful_step
            result["steps"] = trajs["compiled"].steps
            result["identical"] = bool(np.array_equal(trajs["compiled"].counts, trajs["python"].counts))
            result["speedup"] = result["python_ns_per_step"] / result["compiled_ns_per_step"]
            rows.append(result)
            print(f"{result['model']:48s} {engine:8s} steps={result['steps']:<8d} "
                  f"compiled={result['compiled_ns_per_step']:10.0f} ns  python={result['python_ns_per_step']:10.0f} ns  "
                  f"x{result['speedup']:6.1f}  identical={result['identical']}")
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=2000)
    parser.add_argument("--beta", type=float, default=2.0)
    parser.add_argument("--horizon", type=float, default=3.0)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--repeats", type=int, default=1)
    parser.add_argument("--json", help="also write the rows here")
    args = parser.parse_args(argv)
    if not COMPILED_AVAILABLE:
        print("compiled core not built; nothing to compare", file=sys.stderr)
        return 1
    rows = bench(args.nodes, args.beta, args.horizon, args.seed, args.repeats)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
