"""Closed-form privacy budgets for the Laplace and Gaussian mechanisms.

Budgets are given under three frameworks: Wasserstein DP of order mu, Renyi
DP of order alpha, and classic (epsilon, delta)-DP. These are the textbook
single-shot formulas; nothing here samples noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "LAPLACE",
    "GAUSSIAN",
    "MechanismSpec",
    "WdpBudget",
    "RdpBudget",
    "DpBudget",
    "wdp_laplace",
    "wdp_gaussian",
    "rdp_laplace",
    "rdp_gaussian",
    "dp_laplace",
    "dp_gaussian",
    "attack_success_probability",
]

LAPLACE = "laplace"
GAUSSIAN = "gaussian"

# the alpha > 1 Renyi-Laplace closed form is numerically unstable near 1
_ALPHA_ONE_TOL = 1e-9


@dataclass(frozen=True)
class MechanismSpec:
    """A noise mechanism: kind, noise scale, and query sensitivity.

    ``scale`` is lambda for Laplace and sigma for Gaussian. ``sensitivity``
    is the caller-declared lp-sensitivity of the query; it is never inferred
    from data.
    """

    kind: str
    scale: float
    sensitivity: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in (LAPLACE, GAUSSIAN):
            raise ValueError(f"unknown mechanism kind {self.kind!r}")
        if not self.scale > 0:
            raise ValueError(f"scale must be > 0, got {self.scale}")
        if not self.sensitivity >= 0:
            raise ValueError(f"sensitivity must be >= 0, got {self.sensitivity}")


@dataclass(frozen=True)
class WdpBudget:
    """(mu, epsilon) guarantee: Wasserstein privacy loss of order mu <= epsilon."""

    mu: float
    epsilon: float

    def __post_init__(self) -> None:
        if not self.mu >= 1:
            raise ValueError(f"order mu must be >= 1, got {self.mu}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")


@dataclass(frozen=True)
class RdpBudget:
    """(alpha, epsilon) guarantee: Renyi divergence of order alpha <= epsilon."""

    alpha: float
    epsilon: float

    def __post_init__(self) -> None:
        if not self.alpha >= 1:
            raise ValueError(f"order alpha must be >= 1, got {self.alpha}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")


@dataclass(frozen=True)
class DpBudget:
    """(epsilon, delta) guarantee in the classic framework."""

    epsilon: float
    delta: float = 0.0

    def __post_init__(self) -> None:
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if not 0 <= self.delta < 1:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")


def _require_kind(spec: MechanismSpec, kind: str) -> None:
    if spec.kind != kind:
        raise ValueError(f"expected a {kind} mechanism, got {spec.kind}")


def wdp_laplace(spec: MechanismSpec, mu: float = 1.0) -> WdpBudget:
    """Wasserstein budget of the Laplace mechanism.

    epsilon = 1/2 * sensitivity * (sqrt(2*[1/lambda + exp(-1/lambda) - 1]))^(1/mu)
    """
    _require_kind(spec, LAPLACE)
    if not mu >= 1:
        raise ValueError(f"order mu must be >= 1, got {mu}")
    kl = 1.0 / spec.scale + math.exp(-1.0 / spec.scale) - 1.0
    eps = 0.5 * spec.sensitivity * math.sqrt(2.0 * kl) ** (1.0 / mu)
    return WdpBudget(mu=mu, epsilon=eps)


def wdp_gaussian(spec: MechanismSpec, mu: float = 1.0) -> WdpBudget:
    """Wasserstein budget of the Gaussian mechanism.

    epsilon = 1/2 * (sensitivity / sigma)^(1/mu). Note the sensitivity sits
    inside the mu-th root, so the budget scales as c^(1/mu) when the
    sensitivity scales by c (linearly only at mu = 1).
    """
    _require_kind(spec, GAUSSIAN)
    if not mu >= 1:
        raise ValueError(f"order mu must be >= 1, got {mu}")
    eps = 0.5 * (spec.sensitivity / spec.scale) ** (1.0 / mu)
    return WdpBudget(mu=mu, epsilon=eps)


def rdp_laplace(lam: float, alpha: float) -> RdpBudget:
    """Renyi budget of the unit-sensitivity Laplace mechanism.

    alpha = 1 is the KL divergence 1/lambda + exp(-1/lambda) - 1; for
    alpha > 1 the closed form is
    1/(alpha-1) * log[ alpha/(2*alpha-1) * exp((alpha-1)/lambda)
                       + (alpha-1)/(2*alpha-1) * exp(-alpha/lambda) ].
    """
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    if not alpha >= 1:
        raise ValueError(f"order alpha must be >= 1, got {alpha}")
    if abs(alpha - 1.0) < _ALPHA_ONE_TOL:
        eps = 1.0 / lam + math.exp(-1.0 / lam) - 1.0
    else:
        w = 2.0 * alpha - 1.0
        inner = (alpha / w) * math.exp((alpha - 1.0) / lam) + (
            (alpha - 1.0) / w
        ) * math.exp(-alpha / lam)
        eps = math.log(inner) / (alpha - 1.0)
    return RdpBudget(alpha=alpha, epsilon=eps)


def rdp_gaussian(sigma: float, alpha: float) -> RdpBudget:
    """Renyi budget alpha/(2*sigma^2) of the unit-sensitivity Gaussian mechanism."""
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if not alpha > 1:
        raise ValueError(f"order alpha must be > 1, got {alpha}")
    return RdpBudget(alpha=alpha, epsilon=alpha / (2.0 * sigma * sigma))


def dp_laplace(lam: float) -> DpBudget:
    """Pure-DP budget 1/lambda of the unit-sensitivity Laplace mechanism."""
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    return DpBudget(epsilon=1.0 / lam, delta=0.0)


def dp_gaussian() -> DpBudget:
    """The Gaussian mechanism has no finite pure-DP budget; reported explicitly."""
    return DpBudget(epsilon=math.inf, delta=0.0)


def attack_success_probability(epsilon: float) -> float:
    """Probability 1/(1 + exp(-epsilon)) that a worst-case adversary wins."""
    if not epsilon >= 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    return 1.0 / (1.0 + math.exp(-epsilon))
