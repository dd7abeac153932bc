"""
Independent oracles for testing the engines
===========================================

* :func:`ctmc_transient` -- exact transient distribution of a Markovian
  model on a tiny graph, by uniformization over all configurations.
* :func:`ks_one_sample`, :func:`ks_two_sample` -- Kolmogorov-Smirnov
  distances with the asymptotic critical value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import poisson

from .models import NeighborView

__all__ = [
    "CtmcTransient",
    "KsResult",
    "build_generator",
    "ctmc_transient",
    "ks_one_sample",
    "ks_two_sample",
    "KS_C_ALPHA",
]

MAX_CONFIGURATIONS = 4096

#: asymptotic KS coefficients c(alpha)
KS_C_ALPHA = {0.10: 1.224, 0.05: 1.358, 0.01: 1.628, 0.001: 1.949}


@dataclass
class CtmcTransient:
    """Distribution over configurations; configuration ``c`` has node ``i`` in state ``configs[c, i]``."""

    configs: np.ndarray
    probabilities: np.ndarray
    time: float
    n_states: int
    truncation: int

    def expected_count(self, state: int) -> float:
        return float(self.probabilities @ (self.configs == state).sum(axis=1))

    def count_distribution(self, state: int) -> np.ndarray:
        counts = (self.configs == state).sum(axis=1)
        return np.bincount(counts, weights=self.probabilities, minlength=self.configs.shape[1] + 1)

    def index_of(self, config: Sequence[int]) -> int:
        return _config_index(config, self.n_states)


def _config_index(config, n_states):
    idx = 0
    for s in reversed(list(config)):
        idx = idx * n_states + int(s)
    return idx


def _enumerate(n_nodes, n_states):
    total = n_states ** n_nodes
    codes = np.arange(total)
    configs = np.empty((total, n_nodes), dtype=np.int64)
    for i in range(n_nodes):
        configs[:, i] = codes % n_states
        codes = codes // n_states
    return configs


def build_generator(model, network, probe_residence=1.7) -> tuple[np.ndarray, np.ndarray]:
    """Dense generator matrix ``Q`` of a Markovian model, and the configuration table.

    Every rate is probed at residence 0 and at ``probe_residence`` (for the
    agent and all neighbors); any difference means the model is not
    Markovian and ``ValueError`` is raised.
    """
    n_states = len(model.states)
    n = network.node_count
    if n_states ** n > MAX_CONFIGURATIONS:
        raise ValueError(f"{n_states}**{n} configurations exceed the oracle limit of {MAX_CONFIGURATIONS}")
    configs = _enumerate(n, n_states)
    size = len(configs)
    q = np.zeros((size, size))
    zeros = [0.0] * n
    aged = [-probe_residence] * n
    for c, config in enumerate(configs):
        states = config.tolist()
        for node in range(n):
            adj = network.adjacency[node]
            s = states[node]
            fresh = NeighborView(adj, states, zeros, 0.0)
            rate = model.rate(s, 0.0, fresh)
            later = model.rate(s, probe_residence, NeighborView(adj, states, aged, 0.0))
            if rate != later:
                raise ValueError(
                    f"{type(model).__name__} is residence-dependent "
                    f"(state {s}: rate {rate} at 0 vs {later} at {probe_residence}); "
                    "the CTMC oracle needs a Markovian model"
                )
            if rate == 0:
                continue
            for target, p in model.transition_probs(s, 0.0, fresh).items():
                if target == s or p == 0:
                    continue
                nxt = list(states)
                nxt[node] = target
                q[c, _config_index(nxt, n_states)] += rate * p
    np.fill_diagonal(q, -q.sum(axis=1))
    return q, configs


def ctmc_transient(model, network, init, t: float, tol: float = 1e-12, depth: Optional[int] = None) -> CtmcTransient:
    """Transient distribution at time ``t`` by uniformization.

    The Poisson series is cut where the neglected mass drops below ``tol``,
    unless an explicit truncation ``depth`` is given.
    """
    q, configs = build_generator(model, network)
    n_states = len(model.states)
    p0 = np.zeros(len(configs))
    p0[_config_index(init, n_states)] = 1.0
    rate = float(np.max(-np.diag(q)))
    if rate == 0.0 or t == 0.0:
        return CtmcTransient(configs, p0, t, n_states, 0)
    step = np.eye(len(q)) + q / rate
    lam = rate * t
    if depth is None:
        depth = int(poisson.isf(tol, lam)) + 1
    weights = poisson.pmf(np.arange(depth + 1), lam)
    result = np.zeros_like(p0)
    term = p0
    for k in range(depth + 1):
        result += weights[k] * term
        term = term @ step
    return CtmcTransient(configs, result, t, n_states, depth)


@dataclass(frozen=True)
class KsResult:
    statistic: float
    sizes: tuple
    alpha: float
    critical: float

    @property
    def reject(self) -> bool:
        return self.statistic > self.critical


def _critical(alpha, n, m=None):
    try:
        c = KS_C_ALPHA[alpha]
    except KeyError:
        c = math.sqrt(-0.5 * math.log(alpha / 2.0))
    if m is None:
        return c / math.sqrt(n)
    return c * math.sqrt((n + m) / (n * m))


def ks_one_sample(samples, exact_cdf: Callable, alpha: float = 0.01) -> KsResult:
    """Sup-distance between the empirical CDF of ``samples`` and ``exact_cdf``.

    ``exact_cdf`` must accept a numpy array.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    if n == 0:
        raise ValueError("ks_one_sample needs at least one sample")
    f = np.asarray(exact_cdf(x), dtype=float)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(n) / n
    d = float(max(upper.max(), lower.max(), 0.0))
    return KsResult(d, (n,), alpha, _critical(alpha, n))


def ks_two_sample(a, b, alpha: float = 0.01) -> KsResult:
    """Two-sample KS distance; ties (discrete data) are handled exactly."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raise ValueError("ks_two_sample needs two nonempty samples")
    points = np.concatenate([a, b])
    fa = np.searchsorted(a, points, side="right") / n
    fb = np.searchsorted(b, points, side="right") / m
    d = float(np.max(np.abs(fa - fb)))
    return KsResult(d, (n, m), alpha, _critical(alpha, n, m))


def mean_with_stderr(values) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(len(values)))
