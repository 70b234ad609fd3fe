"""Budget arithmetic: parallel, sequential, and group composition, plus the
advanced-composition tail bound.

Composing budgets of mixed orders is done at the smallest order in the
sequence: a guarantee at order mu also holds at every order below mu with the
same epsilon, so lifting downward is sound while lifting upward is not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .mechanisms import WdpBudget

__all__ = [
    "BudgetSequence",
    "GeneralizedWdpBudget",
    "compose_parallel",
    "compose_sequential",
    "group_privacy",
    "advanced_delta",
    "is_vacuous",
]


@dataclass(frozen=True)
class BudgetSequence:
    """An ordered collection of Wasserstein budgets sharing one order."""

    budgets: tuple[WdpBudget, ...]

    def __post_init__(self) -> None:
        if not self.budgets:
            raise ValueError("budget sequence must be non-empty")
        mu = self.budgets[0].mu
        if any(b.mu != mu for b in self.budgets):
            raise ValueError(
                "budgets have mixed orders; use BudgetSequence.harmonized"
            )

    @classmethod
    def harmonized(cls, budgets: Iterable[WdpBudget]) -> "BudgetSequence":
        """Lift mixed-order budgets to the smallest order in the collection."""
        budgets = tuple(budgets)
        if not budgets:
            raise ValueError("budget sequence must be non-empty")
        mu_min = min(b.mu for b in budgets)
        return cls(tuple(WdpBudget(mu=mu_min, epsilon=b.epsilon) for b in budgets))

    @property
    def mu(self) -> float:
        return self.budgets[0].mu

    @property
    def epsilons(self) -> tuple[float, ...]:
        return tuple(b.epsilon for b in self.budgets)


@dataclass(frozen=True)
class GeneralizedWdpBudget:
    """(mu, epsilon) guarantee that may fail with probability at most delta."""

    mu: float
    epsilon: float
    delta: float

    def __post_init__(self) -> None:
        if not self.mu >= 1:
            raise ValueError(f"order mu must be >= 1, got {self.mu}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")


def compose_parallel(seq: BudgetSequence) -> WdpBudget:
    """Mechanisms run on disjoint shards compose to the max budget."""
    return WdpBudget(mu=seq.mu, epsilon=max(seq.epsilons))


def compose_sequential(seq: BudgetSequence) -> WdpBudget:
    """Mechanisms run in sequence on one dataset compose to the summed budget."""
    return WdpBudget(mu=seq.mu, epsilon=math.fsum(seq.epsilons))


def group_privacy(base: WdpBudget, k: int) -> WdpBudget:
    """Budget k * epsilon for datasets differing in k entries."""
    if not (isinstance(k, int) and k >= 1):
        raise ValueError(f"group size k must be an integer >= 1, got {k}")
    return WdpBudget(mu=base.mu, epsilon=k * base.epsilon)


def advanced_delta(
    expected_losses: Sequence[float], epsilon: float, beta: float
) -> float:
    """Tail probability exp(beta * (sum of expected losses - epsilon)).

    A return value >= 1 means the guarantee is vacuous at this epsilon; use
    `is_vacuous` rather than clamping. ``beta`` trades tightness of epsilon
    against delta and is free for the caller to pick.
    """
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    losses = [float(x) for x in expected_losses]
    if any(x < 0 for x in losses):
        raise ValueError("expected losses must be >= 0")
    return math.exp(beta * (math.fsum(losses) - epsilon))


def is_vacuous(delta: float) -> bool:
    """True when a tail probability provides no protection (delta >= 1)."""
    return delta >= 1.0
