"""Coin-betting potentials: the exponential and Krichevsky-Trofimov families.

A potential F_t lower-bounds the wealth a bettor can guarantee after t
rounds of coin outcomes in [-1, 1]. Each family supplies

  * the potential value F_t(x) (and its logarithm, the stable route),
  * the betting fraction beta_t(x) in (-1, 1),
  * the betting function h_t(x) = beta_t(x) * F_{t-1}(x),
  * a Lipschitz bound for h_t on [-(t-1), t-1], used by the disagreement
    diagnostics.

The KT family is evaluated exclusively in the log domain (via log-beta)
so that large rounds never overflow intermediate Gamma values; `value`
exponentiates at the end and `log_value` is the overflow-proof surface.

F_0 is the constant function epsilon for both families, which makes
h_1 = beta_1 * epsilon well defined. Note a quirk of the exponential
family as parameterized here: the per-round betting inequality
(1 + c beta_t(x)) F_{t-1}(x) >= F_t(x + c) holds for every t >= 2 but
fails at the t=1 handoff from the constant F_0 (F_1(c) = eps*exp(c^2/2)
exceeds eps). The KT family satisfies it for all t >= 1. See
`inequality_start`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import betaln, digamma

__all__ = [
    "CoinBettingPotential",
    "ExponentialPotential",
    "KTPotential",
    "make_potential",
    "log_beta",
    "regret_bound",
]

# Slack for domain checks: accumulated coin outputs drift past the exact
# bound by a few ulps over long runs.
DOMAIN_SLACK = 1e-9

_DIGAMMA_HALF = float(digamma(0.5))


def log_beta(a: float, b: float) -> float:
    """ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a+b), for a, b > 0."""
    if not (a > 0 and b > 0):
        raise ValueError(f"log_beta needs positive arguments, got ({a}, {b})")
    return float(betaln(a, b))


def regret_bound(epsilon: float, horizon: int, u_norm: float) -> float:
    """Closed-form regret guarantee for either potential family.

    ||u|| * sqrt(T * ln(1 + 24 T^2 ||u||^2 / eps^2)) + eps.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if u_norm < 0:
        raise ValueError(f"comparator norm must be >= 0, got {u_norm}")
    t = float(horizon)
    return u_norm * math.sqrt(t * math.log1p(24.0 * t * t * u_norm * u_norm / epsilon**2)) + epsilon


@dataclass(frozen=True)
class CoinBettingPotential:
    """Base for the two shipped families; epsilon is the initial endowment."""

    epsilon: float = 1.0

    kind = ""
    # First round from which the betting inequality (and hence the wealth
    # floor induction) is valid for this family.
    inequality_start = 1

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError(f"endowment must be positive, got {self.epsilon}")

    def _check_value_domain(self, t: int, x: float) -> float:
        if t < 0:
            raise ValueError(f"round must be >= 0, got {t}")
        if not math.isfinite(x):
            raise ValueError(f"non-finite argument {x}")
        if t >= 1 and abs(x) > t + DOMAIN_SLACK * max(1.0, t):
            raise ValueError(f"|x|={abs(x)} outside potential domain [-{t}, {t}]")
        return x

    def _check_bet_domain(self, t: int, x: float) -> float:
        if t < 1:
            raise ValueError(f"round must be >= 1, got {t}")
        if not math.isfinite(x):
            raise ValueError(f"non-finite argument {x}")
        if abs(x) > t - 1 + DOMAIN_SLACK * max(1.0, t):
            raise ValueError(f"|x|={abs(x)} outside betting domain [-{t - 1}, {t - 1}]")
        return x

    def log_value(self, t: int, x: float) -> float:
        """ln F_t(x); overflow-proof for any desk-scale (t, x)."""
        raise NotImplementedError

    def value(self, t: int, x: float) -> float:
        """F_t(x) = exp(log_value); may overflow float64 for huge t."""
        return math.exp(self.log_value(t, x))

    def fraction(self, t: int, x: float) -> float:
        """Betting fraction beta_t(x) in (-1, 1), for |x| <= t-1."""
        raise NotImplementedError

    def bet(self, t: int, x: float) -> float:
        """Betting function h_t(x) = beta_t(x) * F_{t-1}(x); odd in x."""
        self._check_bet_domain(t, x)
        return self.fraction(t, x) * self.value(t - 1, x)

    def lipschitz_bound(self, t: int) -> float:
        """Upper bound on |h_t'| over [-(t-1), t-1] (log form to avoid overflow)."""
        return math.exp(self.log_lipschitz_bound(t))

    def log_lipschitz_bound(self, t: int) -> float:
        raise NotImplementedError

    def disagreement_constant(self) -> float:
        """C such that a sufficient linear gossip schedule caps the
        disagreement at 4 C sqrt(N) sqrt(T)."""
        raise NotImplementedError

    def regret_bound(self, horizon: int, u_norm: float) -> float:
        return regret_bound(self.epsilon, horizon, u_norm)


class ExponentialPotential(CoinBettingPotential):
    """F_t(x) = (eps / sqrt(t)) exp(x^2 / 2t), beta_t(x) = tanh(x / t)."""

    kind = "exp"
    inequality_start = 2  # t=1 handoff from F_0 = eps fails; see module docstring

    def log_value(self, t: int, x: float) -> float:
        x = self._check_value_domain(t, x)
        if t == 0:
            return math.log(self.epsilon)
        return math.log(self.epsilon) - 0.5 * math.log(t) + x * x / (2.0 * t)

    def fraction(self, t: int, x: float) -> float:
        x = self._check_bet_domain(t, x)
        return math.tanh(x / t)

    def log_lipschitz_bound(self, t: int) -> float:
        # F_t(t-1) * (1 - 2/(1+e^2)) = F_t(t-1) * tanh(1)
        if t < 1:
            raise ValueError(f"round must be >= 1, got {t}")
        return (
            math.log(self.epsilon)
            - 0.5 * math.log(t)
            + (t - 1) ** 2 / (2.0 * t)
            + math.log(1.0 - 2.0 / (1.0 + math.e**2))
        )

    def disagreement_constant(self) -> float:
        return self.epsilon * (1.0 - 2.0 / (1.0 + math.e**2))


class KTPotential(CoinBettingPotential):
    """Krichevsky-Trofimov: F_t(x) = eps 2^t G((t+1+x)/2) G((t+1-x)/2) / (pi t!).

    Evaluated as ln F_t(x) = ln(eps/pi) + t ln 2 + ln B((t+1+|x|)/2, (t+1-|x|)/2)
    so that neither the Gamma values nor the Beta value are ever formed
    directly. beta_t(x) = x / t.
    """

    kind = "kt"

    def log_value(self, t: int, x: float) -> float:
        x = self._check_value_domain(t, x)
        if t == 0:
            return math.log(self.epsilon)
        a = (t + 1 + abs(x)) / 2.0
        b = max((t + 1 - abs(x)) / 2.0, 0.5)  # clamp domain-slack overshoot
        return math.log(self.epsilon / math.pi) + t * math.log(2.0) + log_beta(a, b)

    def fraction(self, t: int, x: float) -> float:
        x = self._check_bet_domain(t, x)
        return x / t

    def log_lipschitz_bound(self, t: int) -> float:
        # eps * 2^(t-2) (ln t - psi(1/2)) / sqrt(pi t)
        if t < 1:
            raise ValueError(f"round must be >= 1, got {t}")
        return (
            math.log(self.epsilon)
            + (t - 2) * math.log(2.0)
            + math.log(math.log(t) - _DIGAMMA_HALF)
            - 0.5 * math.log(math.pi * t)
        )

    def disagreement_constant(self) -> float:
        return 4.0 * math.sqrt(math.pi) * self.epsilon


_FAMILIES = {"exp": ExponentialPotential, "kt": KTPotential}


def make_potential(kind: str, epsilon: float = 1.0) -> CoinBettingPotential:
    """Instantiate a potential family by name ("exp" or "kt")."""
    try:
        cls = _FAMILIES[kind]
    except KeyError:
        raise ValueError(f"unknown potential kind {kind!r}; expected one of {sorted(_FAMILIES)}")
    return cls(epsilon)
