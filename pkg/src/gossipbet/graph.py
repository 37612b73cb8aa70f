"""Undirected network topologies for the multi-agent experiments.

Agents are indexed 0..n-1. Edges are unordered pairs without self-loops.
All generators return connected graphs (or raise), since the mixing-matrix
construction requires connectivity.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Graph",
    "TopologyError",
    "DisconnectedGraphError",
    "make_cycle",
    "make_complete",
    "make_erdos_renyi",
    "is_connected",
]

# Resample budget for Erdos-Renyi draws that come out disconnected.
ER_MAX_RESAMPLES = 100


class TopologyError(ValueError):
    """Invalid topology parameters (too few agents, bad edge probability...)."""


class DisconnectedGraphError(TopologyError):
    """A generator could not produce a connected graph."""


@dataclass(frozen=True)
class Graph:
    """Undirected graph over agents 0..n_agents-1.

    Edges are canonicalized as sorted (i, j) pairs with i < j; neighbor
    lists are sorted so that any construction derived from the graph
    (e.g. Metropolis-Hastings weights) is deterministic.
    """

    n_agents: int
    edges: tuple[tuple[int, int], ...]
    neighbors: tuple[tuple[int, ...], ...] = field(repr=False)
    degrees: tuple[int, ...] = field(repr=False)

    @classmethod
    def from_edges(cls, n_agents: int, edges) -> "Graph":
        if n_agents < 1:
            raise TopologyError(f"need at least 1 agent, got {n_agents}")
        canon = set()
        for i, j in edges:
            if i == j:
                raise TopologyError(f"self-loop on agent {i}")
            if not (0 <= i < n_agents and 0 <= j < n_agents):
                raise TopologyError(f"edge ({i},{j}) out of range for n={n_agents}")
            canon.add((min(i, j), max(i, j)))
        edge_tuple = tuple(sorted(canon))
        adj = [[] for _ in range(n_agents)]
        for i, j in edge_tuple:
            adj[i].append(j)
            adj[j].append(i)
        neighbors = tuple(tuple(sorted(a)) for a in adj)
        degrees = tuple(len(a) for a in neighbors)
        return cls(n_agents, edge_tuple, neighbors, degrees)

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def make_cycle(n: int) -> Graph:
    """Cycle over n >= 3 agents: agent i linked to (i+1) mod n."""
    if n < 3:
        raise TopologyError(f"cycle needs n >= 3, got {n}")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def make_complete(n: int) -> Graph:
    """Complete graph over n >= 2 agents."""
    if n < 2:
        raise TopologyError(f"complete graph needs n >= 2, got {n}")
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def make_erdos_renyi(n: int, p: float, seed: int, max_resamples: int = ER_MAX_RESAMPLES) -> Graph:
    """Erdos-Renyi G(n, p), resampled until connected.

    Each unordered pair is included independently with probability p. A
    disconnected draw is discarded and redrawn with the advancing RNG
    (edge probability is never biased within one sample); after
    `max_resamples` failures a DisconnectedGraphError is raised instead
    of silently densifying. Deterministic given (n, p, seed).
    """
    if n < 2:
        raise TopologyError(f"Erdos-Renyi needs n >= 2, got {n}")
    if not 0.0 < p <= 1.0:
        raise TopologyError(f"edge probability must be in (0, 1], got {p}")
    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for _ in range(max_resamples):
        mask = rng.random(len(pairs)) < p
        g = Graph.from_edges(n, [pq for pq, m in zip(pairs, mask) if m])
        if is_connected(g):
            return g
    raise DisconnectedGraphError(
        f"no connected G({n}, {p}) sample within {max_resamples} draws (seed={seed})"
    )


def is_connected(g: Graph) -> bool:
    """True iff every agent is reachable from agent 0 (BFS)."""
    if g.n_agents == 1:
        return True
    seen = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in g.neighbors[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == g.n_agents
