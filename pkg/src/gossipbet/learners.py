"""Per-agent decision rules.

Two coin-betting variants plus baselines:

  * coin-wealth: bets a potential-derived fraction of tracked wealth;
    gossips both the accumulated-gradient vector and the wealth scalar.
  * coin-func: bets through the betting function h_t, needing only the
    accumulated-gradient vector (cheaper to gossip, no wealth state).
  * dogd: decentralized online gradient descent with step eta0/sqrt(t);
    gossips the decision vectors themselves.
  * oracle: a single coin bettor fed the network-average subgradient each
    round, the idealized centralized comparator.

Accumulated gradients follow the sign convention G_t = G_{t-1} - g_t, so
bets point along +G (descent direction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gossip import GossipMatrix, apply_gossip
from .potentials import CoinBettingPotential

__all__ = [
    "InvariantViolation",
    "AgentState",
    "bet_direction",
    "wealth_bet",
    "function_bet",
    "accumulate",
    "wealth_after",
    "dogd_step",
    "WealthBettingAgents",
    "FunctionBettingAgents",
    "DogdAgents",
    "OracleAgent",
    "make_learner",
    "LEARNER_KINDS",
]

LEARNER_KINDS = ("coin-wealth", "coin-func", "dogd", "oracle")

SUBGRADIENT_NORM_SLACK = 1e-9


class InvariantViolation(RuntimeError):
    """A runtime check the algorithm's analysis guarantees has failed."""


@dataclass
class AgentState:
    """One agent's post-gossip state: accumulated gradients and, for the
    wealth-tracking variant, its wealth."""

    g_acc: np.ndarray
    wealth: float | None = None


def bet_direction(g_acc: np.ndarray) -> np.ndarray:
    """Unit vector along g_acc, or zero when g_acc = 0."""
    n = float(np.linalg.norm(g_acc))
    if n == 0.0:
        return np.zeros_like(g_acc)
    return g_acc / n


def wealth_bet(potential: CoinBettingPotential, state: AgentState, t: int) -> np.ndarray:
    """Wealth-variant decision: beta_t(||G||) * Wealth * G/||G||."""
    if t < 1:
        raise ValueError(f"round must be >= 1, got {t}")
    n = float(np.linalg.norm(state.g_acc))
    if n == 0.0:
        return np.zeros_like(state.g_acc)
    return potential.fraction(t, n) * state.wealth * (state.g_acc / n)


def function_bet(potential: CoinBettingPotential, state: AgentState, t: int) -> np.ndarray:
    """Betting-function decision: h_t(||G||) * G/||G||."""
    if t < 1:
        raise ValueError(f"round must be >= 1, got {t}")
    n = float(np.linalg.norm(state.g_acc))
    if n == 0.0:
        return np.zeros_like(state.g_acc)
    return potential.bet(t, n) * (state.g_acc / n)


def _check_subgradient(g: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(g))
    if norm > 1.0 + SUBGRADIENT_NORM_SLACK:
        raise InvariantViolation(
            f"subgradient norm {norm} exceeds 1; coin outcomes must lie in the unit ball"
        )
    return g


def accumulate(g_acc: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Pre-gossip local update of the accumulated gradients: G - g."""
    return g_acc - _check_subgradient(g)


def wealth_after(wealth: float, x: np.ndarray, g: np.ndarray) -> float:
    """Pre-gossip local wealth update: Wealth - <g, x>."""
    return wealth - float(g @ x)


def dogd_step(x: np.ndarray, g: np.ndarray, eta0: float, t: int) -> np.ndarray:
    """Unprojected gradient step with decreasing rate eta0 / sqrt(t)."""
    if t < 1:
        raise ValueError(f"round must be >= 1, got {t}")
    return x - (eta0 / math.sqrt(t)) * g


class WealthBettingAgents:
    """N wealth-tracking coin bettors; gossips (G, Wealth) pairs."""

    tracks_wealth = True

    def __init__(self, potential: CoinBettingPotential, n_agents: int, dim: int):
        self.potential = potential
        self.states = [
            AgentState(np.zeros(dim), potential.epsilon) for _ in range(n_agents)
        ]

    def decide(self, t: int) -> np.ndarray:
        return np.stack([wealth_bet(self.potential, s, t) for s in self.states])

    def update(self, decisions: np.ndarray, grads: np.ndarray) -> None:
        for n, s in enumerate(self.states):
            s.g_acc = accumulate(s.g_acc, grads[n])
            s.wealth = wealth_after(s.wealth, decisions[n], grads[n])

    def mix(self, w: GossipMatrix, rounds: int) -> None:
        g = apply_gossip(w, np.stack([s.g_acc for s in self.states]), rounds)
        wl = apply_gossip(w, np.array([[s.wealth] for s in self.states]), rounds)
        for n, s in enumerate(self.states):
            s.g_acc = g[n]
            s.wealth = float(wl[n, 0])
            if s.wealth <= 0.0:
                raise InvariantViolation(
                    f"agent {n} wealth {s.wealth} is not positive; betting fractions "
                    "should keep wealth strictly positive"
                )

    def g_norms(self) -> np.ndarray:
        return np.array([float(np.linalg.norm(s.g_acc)) for s in self.states])

    def wealths(self) -> np.ndarray:
        return np.array([s.wealth for s in self.states])


class FunctionBettingAgents:
    """N betting-function bettors; only the G vectors are kept and gossiped."""

    tracks_wealth = False

    def __init__(self, potential: CoinBettingPotential, n_agents: int, dim: int):
        self.potential = potential
        self.states = [AgentState(np.zeros(dim)) for _ in range(n_agents)]

    def decide(self, t: int) -> np.ndarray:
        return np.stack([function_bet(self.potential, s, t) for s in self.states])

    def update(self, decisions: np.ndarray, grads: np.ndarray) -> None:
        for n, s in enumerate(self.states):
            s.g_acc = accumulate(s.g_acc, grads[n])

    def mix(self, w: GossipMatrix, rounds: int) -> None:
        g = apply_gossip(w, np.stack([s.g_acc for s in self.states]), rounds)
        for n, s in enumerate(self.states):
            s.g_acc = g[n]

    def g_norms(self) -> np.ndarray:
        return np.array([float(np.linalg.norm(s.g_acc)) for s in self.states])


class DogdAgents:
    """Decentralized online gradient descent; gossips the decisions."""

    tracks_wealth = False

    def __init__(self, eta0: float, n_agents: int, dim: int):
        if eta0 <= 0:
            raise ValueError(f"eta0 must be positive, got {eta0}")
        self.eta0 = eta0
        self.x = np.zeros((n_agents, dim))
        self._round = 1  # step size needs t; the engine announces it

    def set_round(self, t: int) -> None:
        self._round = t

    def decide(self, t: int) -> np.ndarray:
        return self.x.copy()

    def update(self, decisions: np.ndarray, grads: np.ndarray) -> None:
        for n in range(self.x.shape[0]):
            _check_subgradient(grads[n])
            self.x[n] = dogd_step(self.x[n], grads[n], self.eta0, self._round)

    def mix(self, w: GossipMatrix, rounds: int) -> None:
        self.x = apply_gossip(w, self.x, rounds)


class OracleAgent:
    """Single wealth bettor fed the average subgradient (no gossip)."""

    tracks_wealth = True

    def __init__(self, potential: CoinBettingPotential, dim: int):
        self.potential = potential
        self.state = AgentState(np.zeros(dim), potential.epsilon)

    def decide(self, t: int) -> np.ndarray:
        return wealth_bet(self.potential, self.state, t)

    def update(self, decision: np.ndarray, avg_grad: np.ndarray) -> None:
        self.state.g_acc = accumulate(self.state.g_acc, avg_grad)
        self.state.wealth = wealth_after(self.state.wealth, decision, avg_grad)
        if self.state.wealth <= 0.0:
            raise InvariantViolation(f"oracle wealth {self.state.wealth} is not positive")


def make_learner(kind: str, potential, n_agents: int, dim: int, eta0: float = 1.0):
    """Build the agent set for a learner kind."""
    if kind == "coin-wealth":
        return WealthBettingAgents(potential, n_agents, dim)
    if kind == "coin-func":
        return FunctionBettingAgents(potential, n_agents, dim)
    if kind == "dogd":
        return DogdAgents(eta0, n_agents, dim)
    if kind == "oracle":
        return OracleAgent(potential, dim)
    raise ValueError(f"unknown learner kind {kind!r}; expected one of {LEARNER_KINDS}")
