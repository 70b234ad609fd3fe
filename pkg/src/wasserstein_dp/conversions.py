"""Budget conversions between the DP, RDP, Wasserstein, and zCDP frameworks.

Conversions into the Wasserstein framework need only the sensitivity;
conversions out of it additionally assume the mechanism's log-density is
L-Lipschitz, a constant the caller must supply (there is no estimation
procedure for it here). All conversions are upper bounds, not inverses:
DP -> WDP -> DP generally inflates, which `dp_round_trip` reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .mechanisms import DpBudget, RdpBudget, WdpBudget

__all__ = [
    "LipschitzAssumption",
    "RoundTripReport",
    "dp_to_wdp",
    "rdp_to_wdp",
    "wdp_to_rdp",
    "wdp_to_dp",
    "wdp_to_zcdp",
    "dp_round_trip",
]


@dataclass(frozen=True)
class LipschitzAssumption:
    """Declared Lipschitz constant of the mechanism's log-density."""

    L: float = 1.0

    def __post_init__(self) -> None:
        if not self.L > 0:
            raise ValueError(f"Lipschitz constant must be > 0, got {self.L}")


def dp_to_wdp(eps: float, sensitivity: float, mu: float = 1.0) -> WdpBudget:
    """epsilon-DP implies a Wasserstein budget
    1/2 * sensitivity * (2*eps*(e^eps - 1))^(1/(2*mu))."""
    if not eps >= 0:
        raise ValueError(f"epsilon must be >= 0, got {eps}")
    if not sensitivity >= 0:
        raise ValueError(f"sensitivity must be >= 0, got {sensitivity}")
    if not mu >= 1:
        raise ValueError(f"order mu must be >= 1, got {mu}")
    out = 0.5 * sensitivity * (2.0 * eps * math.expm1(eps)) ** (1.0 / (2.0 * mu))
    return WdpBudget(mu=mu, epsilon=out)


def rdp_to_wdp(rdp: RdpBudget, sensitivity: float, mu: float = 1.0) -> WdpBudget:
    """(alpha, eps)-RDP implies a Wasserstein budget
    1/2 * sensitivity * (2*eps)^(1/(2*mu)), independent of alpha."""
    if not sensitivity >= 0:
        raise ValueError(f"sensitivity must be >= 0, got {sensitivity}")
    if not mu >= 1:
        raise ValueError(f"order mu must be >= 1, got {mu}")
    out = 0.5 * sensitivity * (2.0 * rdp.epsilon) ** (1.0 / (2.0 * mu))
    return WdpBudget(mu=mu, epsilon=out)


def wdp_to_rdp(
    wdp: WdpBudget, lip: LipschitzAssumption, alpha: float
) -> RdpBudget:
    """(mu, eps) Wasserstein implies
    (alpha, alpha/(alpha-1) * L * eps^(mu/(mu+1)))-RDP."""
    if not alpha > 1:
        raise ValueError(f"order alpha must be > 1, got {alpha}")
    out = alpha / (alpha - 1.0) * lip.L * wdp.epsilon ** (wdp.mu / (wdp.mu + 1.0))
    return RdpBudget(alpha=alpha, epsilon=out)


def wdp_to_dp(wdp: WdpBudget, lip: LipschitzAssumption) -> DpBudget:
    """Alpha -> infinity limit: (mu, eps) Wasserstein implies
    pure L * eps^(mu/(mu+1))-DP."""
    out = lip.L * wdp.epsilon ** (wdp.mu / (wdp.mu + 1.0))
    return DpBudget(epsilon=out, delta=0.0)


def wdp_to_zcdp(wdp: WdpBudget, lip: LipschitzAssumption) -> float:
    """Zero-concentrated parameter rho = 1/2 * (L * eps^(mu/(mu+1)))^2."""
    return 0.5 * wdp_to_dp(wdp, lip).epsilon ** 2


@dataclass(frozen=True)
class RoundTripReport:
    """DP -> WDP -> DP diagnostic; `inflation` is epsilon_out / epsilon_in."""

    epsilon_in: float
    epsilon_wdp: float
    epsilon_out: float
    inflation: float


def dp_round_trip(
    eps: float,
    sensitivity: float,
    mu: float = 1.0,
    lip: LipschitzAssumption = LipschitzAssumption(),
) -> RoundTripReport:
    """Report how much a DP budget inflates through the Wasserstein detour."""
    wdp = dp_to_wdp(eps, sensitivity, mu)
    back = wdp_to_dp(wdp, lip)
    inflation = back.epsilon / eps if eps > 0 else math.nan
    return RoundTripReport(
        epsilon_in=eps,
        epsilon_wdp=wdp.epsilon,
        epsilon_out=back.epsilon,
        inflation=inflation,
    )
