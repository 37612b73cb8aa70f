"""Round-synchronous simulation engine.

Drives N agents through T rounds of decide -> observe -> local update ->
gossip, recording the loss metrics the experiments report:

  * network loss: every agent's decision scored against the round's global
    loss (the average of all agents' losses),
  * average local loss: each agent scored on its own sample only,
  * disagreement: the gap between the two, the price of imperfect consensus.

Runs are pure functions of their config; the master seed is split into
independent sub-seeds for graph, data and shuffling so experiments can vary
the topology while holding the data fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from . import data as data_mod
from .gossip import (
    GossipMatrix,
    GossipSchedule,
    identity_mixing,
    metropolis_hastings,
    sufficient_linear_coefficient,
)
from .graph import Graph, make_complete, make_cycle, make_erdos_renyi
from .learners import LEARNER_KINDS, InvariantViolation, OracleAgent, make_learner
from .potentials import CoinBettingPotential, make_potential

__all__ = [
    "ConfigError",
    "SimConfig",
    "RunResult",
    "run",
    "comparator_loss",
    "network_regret",
    "local_regret",
    "measured_disagreement",
    "disagreement_bound",
]

TOPOLOGIES = ("cycle", "complete", "er", "isolated")
COMPARATORS = ("auto", "ustar", "zero", "none")

# Fixed master-seed splitting roles (recorded in run metadata).
_SEED_ROLES = {"graph": 0, "data": 1, "shuffle": 2}


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class SimConfig:
    """Complete description of one run; everything else derives from it."""

    learner: str = "coin-func"
    potential: str = "kt"
    epsilon: float = 1.0
    eta0: float = 1.0
    topology: str = "cycle"
    n_agents: int = 20
    er_p: float = 0.3
    schedule: str = "constant:1"
    horizon: int = 3000
    data: str = "synthetic"
    dim: int = 10
    label_noise: float = 0.1
    heterogeneity: float = 1.0
    comparator: str = "auto"
    seed: int = 0

    def __post_init__(self):
        if self.learner not in LEARNER_KINDS:
            raise ConfigError(f"unknown learner {self.learner!r}; expected one of {LEARNER_KINDS}")
        if self.potential not in ("exp", "kt"):
            raise ConfigError(f"unknown potential {self.potential!r}")
        if self.topology not in TOPOLOGIES:
            raise ConfigError(f"unknown topology {self.topology!r}; expected one of {TOPOLOGIES}")
        if self.comparator not in COMPARATORS:
            self.comparator_vector()  # comma-separated numbers are also accepted
        if self.horizon < 1 or self.n_agents < 1:
            raise ConfigError("horizon and n_agents must be >= 1")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if self.epsilon <= 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.learner == "dogd" and self.eta0 <= 0:
            raise ConfigError(f"eta0 must be positive, got {self.eta0}")
        try:
            GossipSchedule.parse(self.schedule)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if self.comparator == "ustar" and self.data != "synthetic":
            raise ConfigError("comparator 'ustar' is only available for synthetic data")

    def sub_seed(self, role: str) -> int:
        return int(np.random.SeedSequence([self.seed, _SEED_ROLES[role]]).generate_state(1)[0])

    def comparator_vector(self) -> np.ndarray:
        """Parse an explicit comma-separated comparator, e.g. "0.1,-2,0.5"."""
        try:
            return np.array([float(v) for v in self.comparator.split(",")])
        except ValueError:
            raise ConfigError(
                f"comparator must be one of {COMPARATORS} or a comma-separated vector, "
                f"got {self.comparator!r}"
            ) from None

    def resolved_comparator(self) -> str:
        if self.comparator != "auto":
            return self.comparator if self.comparator in COMPARATORS else "explicit"
        return "ustar" if self.data == "synthetic" else "none"

    def to_mapping(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_mapping(cls, mapping: dict) -> "SimConfig":
        """Build from a flat string mapping (e.g. a parsed config file)."""
        kwargs = {}
        casts = {f.name: f.type for f in fields(cls)}
        for key, raw in mapping.items():
            if key not in casts:
                raise ConfigError(f"unknown config key {key!r}")
            if casts[key] == "int":
                try:
                    kwargs[key] = int(raw)
                except ValueError:
                    raise ConfigError(f"config key {key!r}: expected integer, got {raw!r}") from None
            elif casts[key] == "float":
                try:
                    kwargs[key] = float(raw)
                except ValueError:
                    raise ConfigError(f"config key {key!r}: expected number, got {raw!r}") from None
            else:
                kwargs[key] = str(raw)
        return cls(**kwargs)

    def with_overrides(self, **kwargs) -> "SimConfig":
        return replace(self, **kwargs)


@dataclass
class RunResult:
    """All per-round metrics plus everything needed to recompute regrets."""

    config: SimConfig
    rho: float
    n_edges: int
    seeds: dict
    # per-round metric columns, index 0 is round 1
    t: np.ndarray
    network_loss: np.ndarray
    avg_local_loss: np.ndarray
    disagreement_inc: np.ndarray
    cum_network_loss: np.ndarray
    cum_local_loss: np.ndarray
    cum_disagreement: np.ndarray
    min_wealth: np.ndarray  # nan where the learner tracks no wealth
    max_pairwise_dist: np.ndarray
    # per-agent trajectories (None when not applicable)
    wealth: np.ndarray | None
    floor_log: np.ndarray | None  # ln F_t(||G_{n,t}||), post-gossip
    # stored streams for comparator-loss recomputation
    features: np.ndarray
    labels: np.ndarray
    u_star: np.ndarray | None
    bet_return_avg: float | None  # (1/N) sum_{t,n} <g_{n,t}, x_{n,t}>
    total_gossip_steps: int = 0
    sufficient_c: float | None = None

    @property
    def final_cum_network_loss(self) -> float:
        return float(self.cum_network_loss[-1])

    @property
    def final_cum_local_loss(self) -> float:
        return float(self.cum_local_loss[-1])

    @property
    def final_disagreement(self) -> float:
        return float(self.cum_disagreement[-1])

    def resolve_comparator(self) -> np.ndarray | None:
        kind = self.config.resolved_comparator()
        if kind == "none":
            return None
        if kind == "zero":
            return np.zeros(self.features.shape[2])
        if kind == "explicit":
            return self.config.comparator_vector()
        return self.u_star


def _build_mixing(cfg: SimConfig, seed: int) -> tuple[Graph | None, GossipMatrix]:
    if cfg.topology == "isolated":
        return None, identity_mixing(cfg.n_agents)
    if cfg.topology == "cycle":
        g = make_cycle(cfg.n_agents)
    elif cfg.topology == "complete":
        g = make_complete(cfg.n_agents)
    else:
        g = make_erdos_renyi(cfg.n_agents, cfg.er_p, seed)
    return g, metropolis_hastings(g)


def _build_streams(cfg: SimConfig, data_seed: int, shuffle_seed: int):
    if cfg.data == "synthetic":
        scfg = data_mod.SyntheticConfig(
            n_agents=cfg.n_agents,
            horizon=cfg.horizon,
            dim=cfg.dim,
            label_noise_sigma=cfg.label_noise,
            heterogeneity_sigma=cfg.heterogeneity,
            seed=data_seed,
        )
        return data_mod.generate_synthetic(scfg)
    samples = data_mod.parse_libsvm(cfg.data)
    return None, data_mod.distribute_rounds(samples, cfg.n_agents, cfg.horizon, shuffle_seed)


def run(cfg: SimConfig) -> RunResult:
    """Execute one deterministic run of the configured learner."""
    seeds = {role: cfg.sub_seed(role) for role in _SEED_ROLES}
    graph, w = _build_mixing(cfg, seeds["graph"])
    u_star, streams = _build_streams(cfg, seeds["data"], seeds["shuffle"])
    T, N, dim = cfg.horizon, cfg.n_agents, streams.dim
    schedule = GossipSchedule.parse(cfg.schedule)

    potential: CoinBettingPotential | None = None
    if cfg.learner in ("coin-wealth", "coin-func", "oracle"):
        potential = make_potential(cfg.potential, cfg.epsilon)
    learner = make_learner(cfg.learner, potential, N, dim, cfg.eta0)
    is_oracle = isinstance(learner, OracleAgent)

    network_loss = np.zeros(T)
    avg_local_loss = np.zeros(T)
    max_pairwise = np.zeros(T)
    min_wealth = np.full(T, np.nan)
    track_wealth = learner.tracks_wealth
    track_floor = potential is not None
    n_tracked = 1 if is_oracle else N
    wealth = np.zeros((T, n_tracked)) if track_wealth else None
    floor_log = np.zeros((T, n_tracked)) if track_floor else None
    bet_return = 0.0
    total_gossip = 0

    for t in range(1, T + 1):
        try:
            if hasattr(learner, "set_round"):
                learner.set_round(t)
            decided = learner.decide(t)
            decisions = np.tile(decided, (N, 1)) if is_oracle else decided
            feats, labels = streams.round(t)
            loss = data_mod.loss_matrix(decisions, feats, labels)
            network_loss[t - 1] = loss.mean()
            avg_local_loss[t - 1] = np.mean(np.diagonal(loss))
            diffs = decisions[:, None, :] - decisions[None, :, :]
            max_pairwise[t - 1] = math.sqrt(float(np.max(np.sum(diffs * diffs, axis=2))))

            residuals = np.einsum("nd,nd->n", decisions, feats) - labels
            grads = np.sign(residuals)[:, None] * feats
            if is_oracle:
                avg_grad = grads.mean(axis=0)
                bet_return += float(avg_grad @ decided)
                learner.update(decided, avg_grad)
            else:
                if track_wealth:
                    bet_return += float(np.einsum("nd,nd->", grads, decisions)) / N
                learner.update(decisions, grads)
                q = schedule.steps(t)
                learner.mix(w, q)
                total_gossip += q

            if track_floor:
                if is_oracle:
                    norms = np.array([float(np.linalg.norm(learner.state.g_acc))])
                else:
                    norms = learner.g_norms()
                floor_log[t - 1] = [potential.log_value(t, g) for g in norms]
            if track_wealth:
                wealth[t - 1] = (
                    [learner.state.wealth] if is_oracle else learner.wealths()
                )
                min_wealth[t - 1] = wealth[t - 1].min()
        except InvariantViolation as e:
            raise InvariantViolation(f"round {t}: {e}") from e

    cum_network = np.cumsum(network_loss)
    cum_local = np.cumsum(avg_local_loss)
    sufficient_c = None
    # rho below 1e-10 is numerically zero (complete graph): no finite
    # coefficient is needed, so none is reported
    if potential is not None and 1e-10 < w.rho < 1.0:
        sufficient_c = sufficient_linear_coefficient(cfg.potential, w.rho)

    return RunResult(
        config=cfg,
        rho=w.rho,
        n_edges=graph.n_edges if graph is not None else 0,
        seeds=seeds,
        t=np.arange(1, T + 1),
        network_loss=network_loss,
        avg_local_loss=avg_local_loss,
        disagreement_inc=network_loss - avg_local_loss,
        cum_network_loss=cum_network,
        cum_local_loss=cum_local,
        cum_disagreement=cum_network - cum_local,
        min_wealth=min_wealth,
        max_pairwise_dist=max_pairwise,
        wealth=wealth,
        floor_log=floor_log,
        features=streams.features,
        labels=streams.labels,
        u_star=u_star,
        bet_return_avg=bet_return if track_wealth else None,
        total_gossip_steps=total_gossip,
        sufficient_c=sufficient_c,
    )


def comparator_loss(result: RunResult, u: np.ndarray) -> float:
    """sum_t l_t(u), the comparator's cumulative global loss, recomputed
    from the stored samples."""
    u = np.asarray(u, dtype=float)
    if u.shape != (result.features.shape[2],):
        raise ValueError(f"comparator shape {u.shape} does not match dim {result.features.shape[2]}")
    return float(np.abs(result.features @ u - result.labels).mean(axis=1).sum())


def network_regret(result: RunResult, u: np.ndarray) -> float:
    """Cumulative network loss minus the comparator's cumulative global loss."""
    return result.final_cum_network_loss - comparator_loss(result, u)


def local_regret(result: RunResult, u: np.ndarray) -> float:
    """Average over agents of cumulative own-sample loss minus comparator loss."""
    return result.final_cum_local_loss - comparator_loss(result, u)


def measured_disagreement(result: RunResult) -> float:
    return result.final_disagreement


def disagreement_bound(
    schedule: GossipSchedule,
    potential: CoinBettingPotential,
    rho: float,
    horizon: int,
    n_agents: int,
) -> float:
    """Numeric evaluation of the disagreement upper bound
    2 sqrt(N) sum_t L_{h_t} sum_{s<t} rho^Q(s,t), with Q(s,t) the gossip
    rounds performed from round s through round t.

    Diagnostic only: for schedules too slow for the contraction the bound
    diverges (returns inf).
    """
    if rho < 0:
        raise ValueError(f"rho must be >= 0, got {rho}")
    if horizon < 1 or rho == 0.0:
        return 0.0
    q_prefix = np.zeros(horizon + 1)
    for t in range(1, horizon + 1):
        q_prefix[t] = q_prefix[t - 1] + schedule.steps(t)
    log_rho = math.log(rho) if rho < 1.0 else 0.0
    total = 0.0
    for t in range(2, horizon + 1):
        log_l = potential.log_lipschitz_bound(t)
        # Q(s,t) = q(s) + ... + q(t)
        q_st = q_prefix[t] - q_prefix[0 : t - 1]
        total += float(np.sum(np.exp(log_l + q_st * log_rho)))
    return 2.0 * math.sqrt(n_agents) * total
