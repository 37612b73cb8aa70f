"""Per-agent loss streams: synthetic regression data, LIBSVM parsing,
and the absolute loss with its subgradient.

Feature vectors are l2-normalized at the source so that absolute-loss
subgradients have norm <= 1, which is the coin-outcome domain the betting
learners require. Labels are never rescaled (label scale does not affect
subgradient norms under absolute loss).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "Sample",
    "SyntheticConfig",
    "AgentStreams",
    "LibsvmParseError",
    "generate_synthetic",
    "parse_libsvm",
    "format_libsvm",
    "distribute_rounds",
    "absolute_loss",
    "absolute_loss_subgradient",
    "loss_matrix",
]


class LibsvmParseError(ValueError):
    """Malformed LIBSVM input; the message names the offending line."""


class Sample(NamedTuple):
    features: np.ndarray
    label: float


@dataclass(frozen=True)
class SyntheticConfig:
    """Heterogeneous online linear-regression generator settings.

    Every agent shares a common per-round base feature vector but sees it
    shifted by its own fixed center, then normalized to unit norm; labels
    are noisy inner products with a hidden comparator u*.
    """

    n_agents: int
    horizon: int
    dim: int = 10
    label_noise_sigma: float = 0.1
    heterogeneity_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.n_agents < 1 or self.horizon < 1:
            raise ValueError("n_agents and horizon must be >= 1")
        if self.label_noise_sigma < 0 or self.heterogeneity_sigma < 0:
            raise ValueError("noise and heterogeneity sigmas must be >= 0")


@dataclass(frozen=True)
class AgentStreams:
    """T rounds of per-agent samples: features (T, N, dim), labels (T, N)."""

    features: np.ndarray
    labels: np.ndarray

    @property
    def horizon(self) -> int:
        return self.features.shape[0]

    @property
    def n_agents(self) -> int:
        return self.features.shape[1]

    @property
    def dim(self) -> int:
        return self.features.shape[2]

    def round(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        """Features (N, dim) and labels (N,) at round t in 1..T."""
        return self.features[t - 1], self.labels[t - 1]


def _normalize(v: np.ndarray) -> np.ndarray:
    """l2-normalize, leaving zero vectors (flagged by callers) and exact
    unit vectors untouched so that parse/serialize round-trips are exact."""
    n = float(np.linalg.norm(v))
    if n == 0.0 or abs(n - 1.0) <= 1e-12:
        return v
    return v / n


def generate_synthetic(cfg: SyntheticConfig) -> tuple[np.ndarray, AgentStreams]:
    """Draw (u*, streams) deterministically from cfg.seed.

    u* ~ N(0, I); agent centers mu_n ~ N(0, het^2 I); each round a common
    base z'_t ~ N(0, I) gives agent n the unit vector (z'_t + mu_n)/norm
    and label <u*, z_{n,t}> + noise.
    """
    rng = np.random.default_rng(cfg.seed)
    u_star = rng.standard_normal(cfg.dim)
    mu = cfg.heterogeneity_sigma * rng.standard_normal((cfg.n_agents, cfg.dim))
    base = rng.standard_normal((cfg.horizon, cfg.dim))
    feats = base[:, None, :] + mu[None, :, :]
    norms = np.linalg.norm(feats, axis=2)
    # degenerate z' + mu = 0 has probability zero; redraw those rounds anyway
    while np.any(norms == 0.0):
        bad = np.unique(np.nonzero(norms == 0.0)[0])
        base[bad] = rng.standard_normal((len(bad), cfg.dim))
        feats = base[:, None, :] + mu[None, :, :]
        norms = np.linalg.norm(feats, axis=2)
    feats = feats / norms[:, :, None]
    noise = cfg.label_noise_sigma * rng.standard_normal((cfg.horizon, cfg.n_agents))
    labels = feats @ u_star + noise
    return u_star, AgentStreams(feats, labels)


def parse_libsvm(path, dim_hint: int | None = None) -> list[Sample]:
    """Parse a LIBSVM regression file into normalized dense samples.

    Lines are "label idx:value idx:value ..." with 1-based strictly
    ascending indices. Vectors are dense of dimension max-seen-index (or
    dim_hint), l2-normalized; all-zero feature rows are left as zero and
    flagged with a warning.
    """
    rows = []
    max_idx = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            tokens = line.split()
            try:
                label = float(tokens[0])
            except ValueError:
                raise LibsvmParseError(f"line {lineno}: bad label {tokens[0]!r}") from None
            pairs = []
            prev = 0
            for tok in tokens[1:]:
                idx_s, _, val_s = tok.partition(":")
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise LibsvmParseError(f"line {lineno}: bad feature token {tok!r}") from None
                if idx <= prev:
                    raise LibsvmParseError(
                        f"line {lineno}: indices must be ascending and 1-based (saw {idx} after {prev})"
                    )
                prev = idx
                pairs.append((idx, val))
            max_idx = max(max_idx, prev)
            rows.append((lineno, label, pairs))
    if not rows:
        raise LibsvmParseError(f"{path}: no samples")
    dim = dim_hint if dim_hint is not None else max_idx
    if max_idx > dim:
        raise LibsvmParseError(f"feature index {max_idx} exceeds dim_hint={dim_hint}")
    samples = []
    n_zero = 0
    for lineno, label, pairs in rows:
        v = np.zeros(dim)
        for idx, val in pairs:
            v[idx - 1] = val
        if not pairs or not np.any(v):
            n_zero += 1
        samples.append(Sample(_normalize(v), label))
    if n_zero:
        warnings.warn(f"{path}: {n_zero} all-zero feature rows left unnormalized")
    return samples


def format_libsvm(samples) -> str:
    """Serialize samples back to LIBSVM text (full float precision)."""
    lines = []
    for s in samples:
        parts = [repr(float(s.label))]
        parts += [f"{i + 1}:{v!r}" for i, v in enumerate(map(float, s.features)) if v != 0.0]
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def distribute_rounds(samples, n_agents: int, horizon: int, seed: int) -> AgentStreams:
    """Shuffle samples by seed and deal them round-robin to agents.

    Round t gives agent n the shuffled sample (t*N + n) mod len(samples);
    the dataset is cycled when T*N exceeds its size.
    """
    if not samples:
        raise ValueError("cannot distribute an empty dataset")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(samples))
    dim = len(samples[0].features)
    feats = np.zeros((horizon, n_agents, dim))
    labels = np.zeros((horizon, n_agents))
    for t in range(horizon):
        for n in range(n_agents):
            s = samples[order[(t * n_agents + n) % len(samples)]]
            feats[t, n] = s.features
            labels[t, n] = s.label
    return AgentStreams(feats, labels)


def absolute_loss(x: np.ndarray, sample: Sample) -> float:
    """|<x, z> - y|."""
    if x.shape != sample.features.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {sample.features.shape}")
    return abs(float(x @ sample.features) - sample.label)


def absolute_loss_subgradient(x: np.ndarray, sample: Sample) -> np.ndarray:
    """sign(<x, z> - y) * z, with sign(0) = 0 (valid choice at the kink)."""
    if x.shape != sample.features.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {sample.features.shape}")
    return np.sign(float(x @ sample.features) - sample.label) * sample.features


def loss_matrix(decisions: np.ndarray, features: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """L[i, j] = |<x_i, z_j> - y_j|: decision i's absolute loss on sample j."""
    return np.abs(decisions @ features.T - labels[None, :])
