import math

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from redsim.models import FadingSIS, MarkovianSIS, WeibullVoter
from redsim.network import build_network
from redsim.validation import (
    build_generator,
    ctmc_transient,
    ks_one_sample,
    ks_two_sample,
    mean_with_stderr,
)

PATH3 = build_network(3, [(0, 1), (1, 2)])
EDGE = build_network(2, [(0, 1)])
RING5 = build_network(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)])


def test_single_node_recovery():
    res = ctmc_transient(MarkovianSIS(), build_network(1, []), [1], 1.0)
    assert res.expected_count(1) == pytest.approx(math.exp(-1.0), abs=1e-12)


def test_path_matches_ode_integration():
    model = MarkovianSIS(2.0, 1.0)
    res = ctmc_transient(model, PATH3, [0, 1, 0], 0.5)
    q, configs = build_generator(model, PATH3)
    p0 = np.zeros(len(q))
    p0[res.index_of([0, 1, 0])] = 1.0
    sol = solve_ivp(lambda t, p: p @ q, (0.0, 0.5), p0, method="DOP853", rtol=1e-12, atol=1e-14)
    ode = sol.y[:, -1] @ (configs == 1).sum(axis=1)
    assert res.expected_count(1) == pytest.approx(ode, abs=1e-8)
    assert res.expected_count(1) == pytest.approx(1.4963124053688726, abs=1e-10)


@pytest.mark.parametrize("model", [MarkovianSIS(2.0, 1.0), MarkovianSIS(0.3, 1.7)])
@pytest.mark.parametrize("t", [0.1, 1.0, 4.0])
def test_matches_matrix_exponential(model, t):
    res = ctmc_transient(model, RING5, [1, 0, 0, 1, 0], t)
    q, _ = build_generator(model, RING5)
    p = expm(q * t)[res.index_of([1, 0, 0, 1, 0])]
    assert np.max(np.abs(res.probabilities - p)) < 1e-10


def test_doubling_truncation_changes_nothing():
    model = MarkovianSIS(2.0, 1.0)
    res = ctmc_transient(model, RING5, [0, 1, 0, 0, 0], 2.0)
    doubled = ctmc_transient(model, RING5, [0, 1, 0, 0, 0], 2.0, depth=2 * res.truncation)
    assert np.max(np.abs(res.probabilities - doubled.probabilities)) < 1e-8


def test_probabilities_sum_to_one_and_generator_rows_to_zero():
    model = MarkovianSIS(1.3, 0.7)
    q, _ = build_generator(model, RING5)
    assert np.allclose(q.sum(axis=1), 0.0, atol=1e-12)
    assert np.all(q - np.diag(np.diag(q)) >= 0)
    res = ctmc_transient(model, RING5, [1, 1, 0, 0, 0], 3.0)
    assert abs(res.probabilities.sum() - 1.0) < 1e-10
    assert res.probabilities.min() >= -1e-15


def test_sis_dies_out_on_an_edge():
    res = ctmc_transient(MarkovianSIS(1.0, 1.0), EDGE, [1, 0], 60.0)
    assert res.probabilities[res.index_of([0, 0])] == pytest.approx(1.0, abs=1e-10)


def test_zero_time_is_initial_condition():
    res = ctmc_transient(MarkovianSIS(), PATH3, [1, 0, 1], 0.0)
    assert res.probabilities[res.index_of([1, 0, 1])] == 1.0


def test_count_distribution_marginal():
    res = ctmc_transient(MarkovianSIS(2.0, 1.0), PATH3, [0, 1, 0], 1.0)
    dist = res.count_distribution(1)
    assert dist.shape == (4,)
    assert dist.sum() == pytest.approx(1.0, abs=1e-12)
    assert dist @ np.arange(4) == pytest.approx(res.expected_count(1), abs=1e-12)


@pytest.mark.parametrize("model", [FadingSIS(), WeibullVoter()])
def test_residence_dependent_models_rejected(model):
    with pytest.raises(ValueError, match="residence-dependent"):
        ctmc_transient(model, PATH3, [0, 1, 0], 1.0)


def test_state_space_limit():
    with pytest.raises(ValueError):
        build_generator(MarkovianSIS(), build_network(13, []))


# KS


def test_identical_samples_have_zero_distance():
    x = np.random.default_rng(0).random(500)
    assert ks_two_sample(x, x).statistic == 0.0


def test_critical_value():
    res = ks_two_sample(np.arange(100), np.arange(400))
    assert res.critical == pytest.approx(1.628 * math.sqrt(500 / 40_000))
    assert ks_one_sample(np.arange(10_000) / 10_000, lambda x: x).critical == pytest.approx(0.01628)


def test_exponential_draws_fit_exact_cdf():
    x = np.random.default_rng(1).exponential(size=100_000)
    res = ks_one_sample(x, lambda t: -np.expm1(-t))
    assert res.statistic < 0.006
    assert res.statistic == pytest.approx(stats.kstest(x, "expon").statistic, abs=1e-12)


def test_different_rates_rejected():
    rng = np.random.default_rng(2)
    assert ks_two_sample(rng.exponential(1.0, 10_000), rng.exponential(0.5, 10_000)).reject


def test_two_sample_matches_scipy():
    rng = np.random.default_rng(3)
    a, b = rng.normal(size=700), rng.normal(0.1, size=300)
    assert ks_two_sample(a, b).statistic == pytest.approx(stats.ks_2samp(a, b).statistic, abs=1e-12)


def test_two_sample_handles_ties():
    # step CDFs differ by 1/2 at 1: {0,1} vs {1,1}
    assert ks_two_sample([0, 1], [1, 1]).statistic == 0.5
    rng = np.random.default_rng(4)
    a, b = rng.integers(0, 5, 1000), rng.integers(0, 5, 800)
    assert ks_two_sample(a, b).statistic == pytest.approx(stats.ks_2samp(a, b).statistic, abs=1e-12)


def test_permutation_invariance():
    rng = np.random.default_rng(5)
    a, b = rng.random(300), rng.random(200) ** 2
    base = ks_two_sample(a, b).statistic
    assert ks_two_sample(rng.permutation(a), rng.permutation(b)).statistic == base
    one = ks_one_sample(a, lambda x: x).statistic
    assert ks_one_sample(rng.permutation(a), lambda x: x).statistic == one


def test_empty_input_rejected():
    with pytest.raises(ValueError):
        ks_one_sample([], lambda x: x)
    with pytest.raises(ValueError):
        ks_two_sample([1.0], [])


def test_mean_with_stderr():
    mean, se = mean_with_stderr([1.0, 2.0, 3.0, 4.0])
    assert mean == 2.5
    assert se == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
