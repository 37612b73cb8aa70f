"""Gossip averaging: mixing matrices, contraction factors and step schedules.

A mixing matrix W is doubly stochastic and symmetric, supported on the
network graph. Repeated application drives per-agent states to the network
average at a geometric rate governed by the contraction factor rho, the
spectral radius of W - (1/N) 11^T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph, is_connected

__all__ = [
    "GossipMatrix",
    "GossipSchedule",
    "metropolis_hastings",
    "identity_mixing",
    "contraction_factor",
    "apply_gossip",
    "sufficient_linear_coefficient",
]

STOCHASTIC_TOL = 1e-12


@dataclass(frozen=True)
class GossipMatrix:
    """Dense symmetric doubly stochastic mixing matrix with cached rho."""

    n: int
    w: np.ndarray
    rho: float

    @property
    def mixes(self) -> bool:
        """False for the degenerate no-communication matrix (rho >= 1)."""
        return self.rho < 1.0


def metropolis_hastings(g: Graph) -> GossipMatrix:
    """Metropolis-Hastings weights for a connected graph.

    W[m, n] = 1 / (max(deg_m, deg_n) + 1) for neighbors, 0 for non-edges,
    and the diagonal absorbs the remaining mass, so each agent only needs
    its own degree and its neighbors' degrees. The result is symmetric and
    doubly stochastic with positive diagonal, hence rho < 1.
    """
    if not is_connected(g):
        raise ValueError("Metropolis-Hastings weights require a connected graph")
    n = g.n_agents
    w = np.zeros((n, n))
    for i, j in g.edges:
        w[i, j] = w[j, i] = 1.0 / (max(g.degrees[i], g.degrees[j]) + 1)
    np.fill_diagonal(w, 1.0 - w.sum(axis=1))
    return GossipMatrix(n, w, contraction_factor(w))


def identity_mixing(n: int) -> GossipMatrix:
    """Degenerate no-communication matrix W = I (rho = 1, flagged)."""
    if n < 1:
        raise ValueError(f"need at least 1 agent, got {n}")
    return GossipMatrix(n, np.eye(n), 1.0 if n > 1 else 0.0)


def contraction_factor(w: np.ndarray) -> float:
    """Spectral radius of W - (1/N) 11^T for symmetric doubly stochastic W.

    Equivalently the largest |eigenvalue| of W after removing the principal
    eigenvalue 1. Full symmetric eigendecomposition; fine at desk scale
    (N <= 500).
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {w.shape}")
    n = w.shape[0]
    if not np.allclose(w, w.T, atol=STOCHASTIC_TOL, rtol=0.0):
        raise ValueError("mixing matrix must be symmetric")
    if np.max(np.abs(w.sum(axis=0) - 1.0)) > STOCHASTIC_TOL or np.max(
        np.abs(w.sum(axis=1) - 1.0)
    ) > STOCHASTIC_TOL:
        raise ValueError("mixing matrix must be doubly stochastic (row/col sums 1)")
    eigs = np.linalg.eigvalsh(w - np.full((n, n), 1.0 / n))
    return float(np.max(np.abs(eigs))) if n > 1 else 0.0


def apply_gossip(w: GossipMatrix, states: np.ndarray, k: int) -> np.ndarray:
    """Apply k gossip rounds to per-agent states (row n = agent n's vector).

    Implemented as k repeated matrix products, matching the message-passing
    semantics; the per-coordinate network average is preserved exactly up
    to floating rounding.
    """
    if k < 0:
        raise ValueError(f"round count must be >= 0, got {k}")
    states = np.asarray(states, dtype=float)
    if states.shape[0] != w.n:
        raise ValueError(
            f"states have {states.shape[0]} agent rows, matrix expects {w.n}"
        )
    out = states.copy()
    for _ in range(k):
        out = w.w @ out
    return out


@dataclass(frozen=True)
class GossipSchedule:
    """Number of gossip rounds q(t) to run at learning round t.

    kinds: "constant" (q = param, integer >= 1), "log" (q = ceil(ln(t+1))),
    "linear" (q = ceil(param * t)).
    """

    kind: str
    param: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "log", "linear"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "constant" and (self.param < 1 or self.param != int(self.param)):
            raise ValueError(f"constant schedule needs an integer count >= 1, got {self.param}")
        if self.kind == "linear" and self.param <= 0:
            raise ValueError(f"linear schedule needs a positive slope, got {self.param}")

    def steps(self, t: int) -> int:
        """q(t) for round t >= 1."""
        if t < 1:
            raise ValueError(f"round index must be >= 1, got {t}")
        if self.kind == "constant":
            return int(self.param)
        if self.kind == "log":
            return math.ceil(math.log(t + 1))
        return math.ceil(self.param * t)

    @classmethod
    def parse(cls, text: str) -> "GossipSchedule":
        """Parse "constant:K", "log" or "linear:C"."""
        kind, _, arg = text.strip().partition(":")
        if kind == "log":
            return cls("log")
        if kind in ("constant", "linear"):
            if not arg:
                raise ValueError(f"schedule {kind!r} needs a parameter, e.g. {kind}:1")
            return cls(kind, float(arg))
        raise ValueError(f"unknown schedule {text!r}")

    def describe(self) -> str:
        if self.kind == "log":
            return "log"
        if self.kind == "constant":
            return f"constant:{int(self.param)}"
        return f"linear:{self.param!r}"


def sufficient_linear_coefficient(potential_kind: str, rho: float) -> float:
    """Slope c such that q(t) = ceil(c*t) guarantees sublinear disagreement.

    -3 / (2 ln rho) for the exponential family, -2 ln 2 / ln rho for KT.
    Only defined for 0 < rho < 1.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError(f"no finite sufficient coefficient for rho={rho}")
    if potential_kind == "exp":
        return -3.0 / (2.0 * math.log(rho))
    if potential_kind == "kt":
        return -2.0 * math.log(2.0) / math.log(rho)
    raise ValueError(f"unknown potential kind {potential_kind!r}")
