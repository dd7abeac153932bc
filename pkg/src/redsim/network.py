"""
Contact networks
================

Immutable undirected graphs with dense integer node ids, a truncated
power-law degree sampler and the erased configuration model, plus a plain
edge-list text format.

Adjacency lists are sorted ascending, so iteration order (and therefore the
order in which engines consume random numbers) depends only on the edge set.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import EdgeListError
from .sampling import as_generator

logger = logging.getLogger(__name__)

__all__ = [
    "ContactNetwork",
    "DegreeSequence",
    "build_network",
    "sample_powerlaw_degrees",
    "configuration_model",
    "read_edge_list",
    "write_edge_list",
]


@dataclass(frozen=True, eq=False)
class ContactNetwork:
    """Undirected simple graph on nodes ``0..node_count-1``.

    Build instances with :func:`build_network`; the constructor trusts its
    input.
    """

    node_count: int
    adjacency: tuple[tuple[int, ...], ...]

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.fromiter((len(a) for a in self.adjacency), dtype=np.int64, count=self.node_count)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` as int32 arrays, for the compiled kernels."""
        indptr = np.zeros(self.node_count + 1, dtype=np.int32)
        np.cumsum(self.degrees, out=indptr[1:])
        indices = np.fromiter(
            (m for a in self.adjacency for m in a), dtype=np.int32, count=int(indptr[-1])
        )
        return indptr, indices

    @property
    def edge_count(self) -> int:
        return int(self.degrees.sum()) // 2

    def edges(self) -> list[tuple[int, int]]:
        """Canonical edge list: each edge once, smaller id first, sorted."""
        return [(n, m) for n, adj in enumerate(self.adjacency) for m in adj if n < m]

    def __eq__(self, other):
        if not isinstance(other, ContactNetwork):
            return NotImplemented
        return self.node_count == other.node_count and self.adjacency == other.adjacency

    def __hash__(self):
        return hash((self.node_count, self.adjacency))

    def __repr__(self):
        return f"ContactNetwork(node_count={self.node_count}, edge_count={self.edge_count})"


@dataclass(frozen=True)
class DegreeSequence:
    degrees: np.ndarray
    k_min: int
    k_max: int
    beta: float = field(default=float("nan"))

    def __len__(self):
        return len(self.degrees)

    @property
    def total(self) -> int:
        return int(np.sum(self.degrees))


def build_network(node_count: int, edges: Iterable[tuple[int, int]]) -> ContactNetwork:
    """Build a :class:`ContactNetwork` from an edge iterable.

    Duplicate undirected edges are collapsed. Self-loops and out-of-range ids
    raise ``ValueError``.
    """
    node_count = int(node_count)
    if node_count < 0:
        raise ValueError("node_count must be nonnegative")
    neighbors: list[set[int]] = [set() for _ in range(node_count)]
    for a, b in edges:
        a, b = int(a), int(b)
        if not (0 <= a < node_count and 0 <= b < node_count):
            raise ValueError(f"edge ({a}, {b}) has an id outside [0, {node_count})")
        if a == b:
            raise ValueError(f"self-loop at node {a}")
        neighbors[a].add(b)
        neighbors[b].add(a)
    return ContactNetwork(node_count, tuple(tuple(sorted(s)) for s in neighbors))


def _network_from_pairs(node_count: int, pairs: np.ndarray) -> ContactNetwork:
    """Fast path for validated, canonical (u < v), unique edge arrays."""
    if len(pairs) == 0:
        return ContactNetwork(node_count, tuple(() for _ in range(node_count)))
    both = np.concatenate([pairs, pairs[:, ::-1]])
    order = np.lexsort((both[:, 1], both[:, 0]))
    both = both[order]
    counts = np.bincount(both[:, 0], minlength=node_count)
    splits = np.cumsum(counts)[:-1]
    targets = both[:, 1].tolist()
    adjacency = []
    start = 0
    for stop in list(splits) + [len(targets)]:
        adjacency.append(tuple(targets[start:stop]))
        start = stop
    return ContactNetwork(node_count, tuple(adjacency))


def powerlaw_pmf(beta: float, k_min: int, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Support and normalized probabilities of ``P(k) ~ k**-beta`` on ``[k_min, k_max]``."""
    if k_min > k_max:
        raise ValueError(f"empty degree support: k_min={k_min} > k_max={k_max}")
    ks = np.arange(k_min, k_max + 1)
    # relative to k_min so large beta does not underflow to 0/0
    weights = np.exp(-beta * (np.log(ks) - np.log(k_min)))
    return ks, weights / weights.sum()


def sample_powerlaw_degrees(n, beta, k_min=3, k_max=None, rng=None) -> DegreeSequence:
    """Draw ``n`` i.i.d. degrees from a truncated power law.

    Parameters
    ----------
    n : int
        Number of nodes.
    beta : float
        Exponent, ``> 1``.
    k_min, k_max : int
        Inclusive support. ``k_max`` defaults to ``n - 1``.
    rng : Generator, RngStream, int or None

    Returns
    -------
    DegreeSequence
        With an even total: when the raw sum is odd, one uniformly chosen
        entry below ``k_max`` is incremented.
    """
    if k_max is None:
        k_max = n - 1
    if k_min < 1:
        raise ValueError("k_min must be at least 1")
    if beta <= 1:
        raise ValueError("beta must exceed 1")
    if k_max > n - 1:
        raise ValueError("k_max cannot exceed n - 1")
    gen = as_generator(rng)
    ks, probs = powerlaw_pmf(beta, k_min, k_max)
    degrees = gen.choice(ks, size=n, p=probs)
    if degrees.sum() % 2:
        room = np.flatnonzero(degrees < k_max)
        if len(room):
            degrees[gen.choice(room)] += 1
        else:
            # everything sits at k_max; step down instead
            degrees[gen.integers(n)] -= 1
    return DegreeSequence(degrees.astype(np.int64), k_min, k_max, beta)


def configuration_model(degrees, rng=None) -> ContactNetwork:
    """Erased configuration model.

    Stubs are matched uniformly at random, then self-loops and repeated
    edges are deleted, so realized degrees can fall below their targets.
    """
    target = np.asarray(getattr(degrees, "degrees", degrees), dtype=np.int64)
    if np.any(target < 0):
        raise ValueError("degrees must be nonnegative")
    if target.sum() % 2:
        raise ValueError("degree sum must be even")
    n = len(target)
    gen = as_generator(rng)
    stubs = np.repeat(np.arange(n, dtype=np.int64), target)
    gen.shuffle(stubs)
    pairs = stubs.reshape(-1, 2)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    pairs = np.unique(np.sort(pairs, axis=1), axis=0)
    net = _network_from_pairs(n, pairs)
    erased = int(target.sum()) - 2 * net.edge_count
    if erased:
        logger.debug(
            "configuration model erased %d of %d stubs (%.3f%%)",
            erased, int(target.sum()), 100.0 * erased / max(1, int(target.sum())),
        )
    return net


def read_edge_list(path, node_count=None) -> ContactNetwork:
    """Read a whitespace-separated, 0-indexed edge list.

    Lines starting with ``#`` are comments. A ``# nodes N`` comment (as
    written by :func:`write_edge_list`) fixes the node count so trailing
    isolated nodes survive a round trip.
    """
    edges = []
    declared = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                parts = text[1:].split()
                if len(parts) == 2 and parts[0] == "nodes" and parts[1].isdigit():
                    declared = int(parts[1])
                continue
            parts = text.split()
            if len(parts) != 2:
                raise EdgeListError(lineno, f"expected two ids, got {len(parts)} fields")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListError(lineno, f"non-integer id in {text!r}") from None
            if a < 0 or b < 0:
                raise EdgeListError(lineno, "negative node id")
            if a == b:
                raise EdgeListError(lineno, f"self-loop at node {a}")
            edges.append((a, b))
    highest = max((max(e) for e in edges), default=-1) + 1
    if node_count is None:
        node_count = declared if declared is not None else highest
    if highest > node_count:
        raise ValueError(f"edge list references node {highest - 1} but node_count is {node_count}")
    return build_network(node_count, edges)


def write_edge_list(network: ContactNetwork, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(f"# nodes {network.node_count}\n")
        for a, b in network.edges():
            fh.write(f"{a} {b}\n")


def degree_histogram(network: ContactNetwork) -> np.ndarray:
    return np.bincount(network.degrees)


def from_edges_array(node_count: int, edges: Sequence[tuple[int, int]] | np.ndarray) -> ContactNetwork:
    """Like :func:`build_network` but vectorized; for large generated graphs."""
    pairs = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(pairs):
        if pairs.min() < 0 or pairs.max() >= node_count:
            raise ValueError("edge id out of range")
        if np.any(pairs[:, 0] == pairs[:, 1]):
            raise ValueError("self-loop in edge array")
        pairs = np.unique(np.sort(pairs, axis=1), axis=0)
    return _network_from_pairs(node_count, pairs)
