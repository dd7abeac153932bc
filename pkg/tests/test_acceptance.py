"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they
happen; they are also repeated in the terminal summary.
"""

import math

import numpy as np
import pytest

from redsim.bounds import TimeVaryingBound
from redsim.cli import _generated_network, main, run_bench
from redsim.engine import COMPILED_AVAILABLE, SimState, redsim_step, run, run_replications, schedule_event
from redsim.errors import BoundViolationError
from redsim.hazard import density_from_hazard, exponential_delay, hazard_from_density, uniform_delay, weibull_delay
from redsim.models import FadingSIS, MarkovianSIS, WeibullVoter, random_init
from redsim.network import build_network
from redsim.sampling import (
    RngStream,
    invert_cumulative_hazard,
    sample_delay_inversion,
    sample_delays_thinning,
    thin_against_bound,
)
from redsim.validation import ctmc_transient, ks_one_sample, ks_two_sample, mean_with_stderr

pytestmark = pytest.mark.slow

REPS = 100_000


def uniform12_hazard(t):
    return 1.0 / (2.0 - t) if 1.0 <= t < 2.0 else 0.0


# 1. inverting the uniform[1,2] cumulative hazard at ln 2


def test_criterion_1_uniform_inversion(verdict):
    bound = TimeVaryingBound(uniform12_hazard, support_start=1.0, support_end=2.0)
    t = invert_cumulative_hazard(bound, math.log(2.0))
    err = abs(t - 1.5)
    assert verdict(1, err < 1e-6, f"t = {t:.12f}, |t - 1.5| = {err:.2e} (tol 1e-6)")


# 2. hazard -> density -> hazard round trip


def test_criterion_2_round_trip(verdict):
    cases = {
        "exponential": (exponential_delay(1.0), (0.0, math.inf), np.linspace(0.0, 10.0, 1000)),
        "uniform[1,2]": (uniform_delay(1.0, 2.0), (1.0, 2.0), np.linspace(1.0, 2.0, 1001)[:-1]),
        "weibull(2,1)": (weibull_delay(2.0, 1.0), (0.0, math.inf), np.linspace(0.0, 3.5, 1000)),
    }
    errors = {}
    for name, (ref, support, grid) in cases.items():
        back = hazard_from_density(density_from_hazard(ref.hazard, support).density, support)
        errors[name] = max(abs(back.hazard(t) - ref.hazard(t)) for t in grid)
    worst = max(errors.values())
    detail = ", ".join(f"{k} {v:.1e}" for k, v in errors.items())
    assert verdict(2, worst < 1e-6, f"max grid error {detail} (tol 1e-6)")


# 3. inversion and thinning samplers against exact CDFs


def _inversion_draws(hazard, seed, **support):
    bound = TimeVaryingBound(hazard, **support)  # no closed form: quadrature path
    rng = RngStream(seed)
    return np.array([sample_delay_inversion(bound, rng).delay for _ in range(REPS)])


def _uniform_thinning_draws(seed):
    # no constant rate dominates 1/(2-t); thin against twice the hazard instead
    bound = TimeVaryingBound(
        lambda t: 2.0 * uniform12_hazard(t),
        cumulative=lambda t: -2.0 * math.log(2.0 - min(max(t, 1.0), 2.0)) if t < 2.0 else math.inf,
        inverse=lambda x: 2.0 - math.exp(-0.5 * x),
        support_start=1.0,
        support_end=2.0,
    )
    rng = RngStream(seed)
    return np.array([thin_against_bound(uniform12_hazard, bound, rng) for _ in range(REPS)])


def test_criterion_3_sampler_exactness(verdict):
    cdfs = {
        "Exp(1)": lambda x: -np.expm1(-x),
        "uniform[1,2]": lambda x: np.clip(x - 1.0, 0.0, 1.0),
        "Weibull(2,1)": lambda x: -np.expm1(-np.square(x)),
    }
    draws = {
        ("inversion", "Exp(1)"): _inversion_draws(lambda t: 1.0, 31),
        ("inversion", "uniform[1,2]"): _inversion_draws(uniform12_hazard, 32, support_start=1.0, support_end=2.0),
        ("inversion", "Weibull(2,1)"): _inversion_draws(lambda t: 2.0 * t, 33),
        ("thinning", "Exp(1)"): sample_delays_thinning(lambda t: np.ones_like(t), 2.0, REPS, RngStream(34)),
        ("thinning", "uniform[1,2]"): _uniform_thinning_draws(35),
        # P(T > 5) = exp(-25), so capping the hazard 2t at 10 changes nothing measurable
        ("thinning", "Weibull(2,1)"): sample_delays_thinning(lambda t: np.minimum(2.0 * t, 10.0), 10.0, REPS,
                                                            RngStream(36)),
    }
    stats = {key: ks_one_sample(x, cdfs[key[1]]).statistic for key, x in draws.items()}
    worst = max(stats.values())
    detail = ", ".join(f"{m} {d} D={v:.4f}" for (m, d), v in stats.items())
    assert verdict(3, worst < 0.006, f"{detail} (each < 0.006)")


# 4. agreement with the exact Markov chain


def test_criterion_4_markovian_oracle(verdict):
    model = MarkovianSIS(2.0, 1.0)
    net = build_network(3, [(0, 1), (1, 2)])
    init = [0, 1, 0]
    counts = run_replications("redsim", model, net, init, 1.0, 41, REPS, grid=[0.0, 0.5, 1.0])
    ok, parts = True, []
    for col, t in ((1, 0.5), (2, 1.0)):
        exact = ctmc_transient(model, net, init, t).expected_count(1)
        mean, se = mean_with_stderr(counts[:, col, 1])
        z = (mean - exact) / se
        ok &= abs(z) <= 3.0
        parts.append(f"t={t}: MC {mean:.5f} vs exact {exact:.5f} ({z:+.2f} SE)")
    assert verdict(4, ok, "; ".join(parts) + " (within 3 SE)")


# 5 and 6. naive, baseline and RED-Sim agree on a 5-node graph

FIVE = build_network(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)])
CASES_5 = {
    "sis-fading": (FadingSIS(), [1, 0, 0, 1, 0]),
    "voter": (WeibullVoter(), [0, 1, 0, 1, 0]),
}


def _final_state0(engine, model, init, seed):
    values = np.empty(REPS, dtype=np.int64)
    rejected = 0
    for i in range(REPS):
        traj = run(engine, model, FIVE, init, 2.0, RngStream.for_replicate(seed, i), grid=[2.0])
        values[i] = traj.counts[-1, 0]
        rejected += traj.rejected
    return values, rejected


def test_criterion_5_engine_equivalence(verdict):
    ok, parts = True, []
    for name, (model, init) in CASES_5.items():
        samples = {engine: _final_state0(engine, model, init, 51 + k)[0]
                   for k, engine in enumerate(("naive", "baseline", "redsim"))}
        for a, b in (("naive", "baseline"), ("naive", "redsim"), ("baseline", "redsim")):
            res = ks_two_sample(samples[a], samples[b])
            ok &= not res.reject
            parts.append(f"{name} {a}/{b} D={res.statistic:.4f}")
    crit = ks_two_sample(np.zeros(REPS), np.zeros(REPS)).critical
    assert verdict(5, ok, ", ".join(parts) + f" (critical {crit:.4f})")


def test_criterion_6_baseline_never_rejects(verdict):
    checked, rejected = 0, 0
    for name, (model, init) in CASES_5.items():
        _, r = _final_state0("baseline", model, init, 61)
        checked += REPS
        rejected += r
    net, gen = _generated_network(1000, 2.0, 3, 62)
    backends = ["python", "compiled"] if COMPILED_AVAILABLE else ["python"]
    for model in (MarkovianSIS(), FadingSIS(), WeibullVoter(), WeibullVoter(numeric=True)):
        frac = 0.5 if isinstance(model, WeibullVoter) else 0.05
        init = random_init(1000, frac, gen)
        for backend in backends:
            for i in range(3):
                traj = run("baseline", model, net, init, 2.0, RngStream.for_replicate(63, i), backend=backend)
                checked += 1
                rejected += traj.rejected
    assert verdict(6, rejected == 0, f"{rejected} rejections over {checked} baseline runs")


# 7. performance trend


@pytest.mark.skipif(not COMPILED_AVAILABLE, reason="timing is only meaningful on the compiled core")
def test_criterion_7_performance_trend(verdict):
    engines = ["redsim", "baseline"]
    sis = run_bench(engines, "sis-fading", [1000, 10_000], 2.0, 71)
    ns = {(r.engine, r.node_count): r.ns_per_successful_step for r in sis}
    gain_3 = ns["baseline", 1000] / ns["redsim", 1000]
    gain_4 = ns["baseline", 10_000] / ns["redsim", 10_000]
    voter = run_bench(engines, "voter", [1000], 2.5, 72, params={"numeric": 1})
    vns = {r.engine: r.ns_per_successful_step for r in voter}
    gain_v = vns["baseline"] / vns["redsim"]
    ok = ns["redsim", 10_000] < ns["baseline", 10_000] and gain_4 > gain_3 and gain_v > 1.0
    detail = (f"fading SIS beta=2.0 gain {gain_3:.2f} (1e3) -> {gain_4:.2f} (1e4) "
              f"[{ns['redsim', 10_000]:.0f} vs {ns['baseline', 10_000]:.0f} ns/step at 1e4]; "
              f"voter beta=2.5 gain {gain_v:.2f} at 1e3")
    assert verdict(7, ok, detail)


# 8. a halved infection bound is caught


def test_criterion_8_bound_violation(verdict):
    net, gen = _generated_network(100, 2.5, 3, 81)
    init = random_init(100, 0.5, gen)
    model = MarkovianSIS(bound_scale=0.5)
    state = SimState.initial(net, init, 2, RngStream(82))
    for agent in range(net.node_count):
        schedule_event(state, model, agent)
    steps, caught = 0, None
    try:
        while steps < 10_000:
            redsim_step(state, model)
            steps += 1
    except BoundViolationError as exc:
        caught = exc
    if COMPILED_AVAILABLE:
        with pytest.raises(BoundViolationError):
            run("redsim", model, net, init, 1e6, RngStream(82), backend="compiled")
    detail = f"raised after {steps} steps: {caught}" if caught else "no violation in 1e4 steps"
    assert verdict(8, caught is not None, detail)


# 9. determinism of CLI output


def test_criterion_9_determinism(verdict, tmp_path):
    configs = [
        ["--model", "sis-fading", "--nodes", "2000", "--beta", "2.0", "--horizon", "5", "--reps", "3"],
        ["--model", "voter", "--param", "numeric=1", "--nodes", "500", "--beta", "2.5", "--horizon", "3"],
    ]
    compared, differing = 0, []
    for k, cfg in enumerate(configs):
        for run_id in ("a", "b"):
            assert main(["run", *cfg, "--seed", "91", "--out", str(tmp_path / f"{k}{run_id}")]) == 0
        for path in sorted((tmp_path / f"{k}a").iterdir()):
            compared += 1
            if path.read_bytes() != (tmp_path / f"{k}b" / path.name).read_bytes():
                differing.append(path.name)
    assert verdict(9, compared > 0 and not differing, f"{compared} files compared, {len(differing)} differ")
