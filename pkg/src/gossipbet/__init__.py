"""Decentralized parameter-free online learning.

Coin-betting agents on a network graph: each agent bets against its own
loss stream without any learning rate, and gossip averaging spreads the
accumulated information so the network converges on a shared model.
"""

__version__ = "0.1.0"

from .data import (
    AgentStreams,
    Sample,
    SyntheticConfig,
    absolute_loss,
    absolute_loss_subgradient,
    distribute_rounds,
    generate_synthetic,
    parse_libsvm,
)
from .gossip import (
    GossipMatrix,
    GossipSchedule,
    apply_gossip,
    contraction_factor,
    identity_mixing,
    metropolis_hastings,
    sufficient_linear_coefficient,
)
from .graph import Graph, is_connected, make_complete, make_cycle, make_erdos_renyi
from .learners import InvariantViolation, make_learner
from .potentials import (
    ExponentialPotential,
    KTPotential,
    log_beta,
    make_potential,
    regret_bound,
)
from .simulator import (
    ConfigError,
    RunResult,
    SimConfig,
    disagreement_bound,
    local_regret,
    measured_disagreement,
    network_regret,
    run,
)

__all__ = [
    "AgentStreams",
    "ConfigError",
    "ExponentialPotential",
    "GossipMatrix",
    "GossipSchedule",
    "Graph",
    "InvariantViolation",
    "KTPotential",
    "RunResult",
    "Sample",
    "SimConfig",
    "SyntheticConfig",
    "absolute_loss",
    "absolute_loss_subgradient",
    "apply_gossip",
    "contraction_factor",
    "disagreement_bound",
    "distribute_rounds",
    "generate_synthetic",
    "identity_mixing",
    "is_connected",
    "local_regret",
    "log_beta",
    "make_complete",
    "make_cycle",
    "make_erdos_renyi",
    "make_learner",
    "make_potential",
    "measured_disagreement",
    "metropolis_hastings",
    "network_regret",
    "parse_libsvm",
    "regret_bound",
    "run",
    "sufficient_linear_coefficient",
]
