"""Wasserstein accountant for subsampled Gaussian-mechanism iterations.

Each step of a subsampled run contributes a privacy loss

    W_mu = (n * E|Z|^mu)^(1/mu),   Z ~ Normal(q * d, (2 - 2q + 2q^2) * sigma^2)

where q is the subsampling probability, d the l2 distance between a pair of
adjacent per-example gradients, and n the component count of Z. Every
component shares the same distribution, so the component sum collapses to a
closed-form product. Accumulated losses convert to (epsilon, delta) through
the tail bound: epsilon = sum(losses) - log(delta)/beta and its inverse.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Sequence, Union

import numpy as np

from .mechanisms import WdpBudget
from .special_functions import MomentParams, abs_moment

__all__ = [
    "AccountantConfig",
    "AccountantState",
    "PairDistanceEstimate",
    "mixture_variance",
    "step_loss",
    "estimate_pair_distance",
    "parse_policy",
    "accumulate",
    "epsilon_given_delta",
    "delta_given_epsilon",
    "nearest_rank_quantile",
    "dump_state",
    "load_state",
]

POLICIES = ("min", "quantile", "fixed")


@dataclass(frozen=True)
class AccountantConfig:
    """Knobs of the accountant.

    beta trades epsilon tightness against delta; 1.0 is the default with no
    canonical choice. grad_dim is the component count n of the per-step
    Gaussian; scalar-gradient runs use 1.
    """

    q: float
    sigma: float
    mu: float = 1.0
    beta: float = 1.0
    delta: float = 1e-10
    grad_dim: int = 1

    def __post_init__(self) -> None:
        if not 0 <= self.q <= 1:
            raise ValueError(f"subsampling probability q must lie in [0, 1], got {self.q}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not self.mu >= 1:
            raise ValueError(f"order mu must be >= 1, got {self.mu}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not (isinstance(self.grad_dim, int) and self.grad_dim >= 1):
            raise ValueError(f"grad_dim must be an integer >= 1, got {self.grad_dim}")


@dataclass(frozen=True)
class AccountantState:
    """Per-step losses recorded so far."""

    losses: tuple[float, ...] = ()

    @property
    def steps(self) -> int:
        return len(self.losses)

    @property
    def total_loss(self) -> float:
        return math.fsum(self.losses)


@dataclass(frozen=True)
class PairDistanceEstimate:
    """An estimated adjacent-gradient distance and how many pairs produced it."""

    d: float
    pairs_examined: int

    def __post_init__(self) -> None:
        if not self.d >= 0:
            raise ValueError(f"pair distance must be >= 0, got {self.d}")


def mixture_variance(q: float, sigma: float) -> float:
    """Variance (2 - 2q + 2q^2) * sigma^2 of the per-step coupling gap."""
    return (2.0 - 2.0 * q + 2.0 * q * q) * sigma * sigma


def step_loss(
    cfg: AccountantConfig, d: Union[float, PairDistanceEstimate]
) -> float:
    """Per-step privacy loss (n * E|Z|^mu)^(1/mu).

    At q = 0 the loss is independent of d (the mean q*d vanishes).
    """
    dist = d.d if isinstance(d, PairDistanceEstimate) else float(d)
    if not dist >= 0:
        raise ValueError(f"pair distance must be >= 0, got {dist}")
    params = MomentParams(
        mu=cfg.mu, mean=cfg.q * dist, variance=mixture_variance(cfg.q, cfg.sigma)
    )
    return (cfg.grad_dim * abs_moment(params)) ** (1.0 / cfg.mu)


def parse_policy(policy: str) -> tuple[str, float | None]:
    """Parse 'min', 'quantile:P', or 'fixed:D' into (kind, value)."""
    kind, _, raw = policy.partition(":")
    if kind == "min":
        if raw:
            raise ValueError("min policy takes no parameter")
        return "min", None
    if kind == "quantile":
        p = float(raw)
        if not 0 < p <= 1:
            raise ValueError(f"quantile must lie in (0, 1], got {p}")
        return "quantile", p
    if kind == "fixed":
        d = float(raw)
        if not d >= 0:
            raise ValueError(f"fixed distance must be >= 0, got {d}")
        return "fixed", d
    raise ValueError(f"unknown pair-distance policy {policy!r}")


def nearest_rank_quantile(values: np.ndarray, p: float) -> float:
    """p-quantile by the nearest-rank convention: the ceil(p*n)-th smallest."""
    if not 0 < p <= 1:
        raise ValueError(f"quantile must lie in (0, 1], got {p}")
    flat = np.sort(np.asarray(values, dtype=float).ravel())
    if flat.size == 0:
        raise ValueError("cannot take a quantile of no values")
    rank = max(1, math.ceil(p * flat.size))
    return float(flat[rank - 1])


def estimate_pair_distance(
    per_example_gradients,
    policy: str = "min",
    sample_pairs: int | None = None,
    rng: np.random.Generator | int | None = None,
) -> PairDistanceEstimate:
    """Estimate the adjacent-gradient l2 distance from a batch of gradients.

    'min' takes the minimum distance (the literal infimum estimate) and
    'quantile:P' the nearest-rank P-quantile over the examined pairs. When
    ``sample_pairs`` is None or at least the number of unordered pairs, all
    pairs are enumerated; otherwise that many pairs are drawn uniformly at
    random. 'fixed:D' ignores the data entirely.
    """
    kind, value = parse_policy(policy)
    if kind == "fixed":
        return PairDistanceEstimate(d=float(value), pairs_examined=0)

    grads = np.asarray(per_example_gradients, dtype=float)
    if grads.ndim == 1:
        grads = grads[:, None]
    n = grads.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 gradients for the {kind} policy, got {n}")

    total = n * (n - 1) // 2
    if sample_pairs is None or sample_pairs >= total:
        i, j = np.triu_indices(n, k=1)
    else:
        if sample_pairs < 1:
            raise ValueError(f"sample_pairs must be >= 1, got {sample_pairs}")
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        i = gen.integers(0, n, size=sample_pairs)
        j = gen.integers(0, n - 1, size=sample_pairs)
        j = j + (j >= i)  # uniform over ordered pairs with i != j

    dists = np.linalg.norm(grads[i] - grads[j], axis=1)
    if kind == "min":
        d = float(dists.min())
    else:
        d = nearest_rank_quantile(dists, value)
    return PairDistanceEstimate(d=d, pairs_examined=int(dists.size))


def accumulate(state: AccountantState, loss: float) -> AccountantState:
    """Append one per-step loss, returning the extended state."""
    if not loss >= 0:
        raise ValueError(f"per-step loss must be >= 0, got {loss}")
    return replace(state, losses=state.losses + (float(loss),))


def epsilon_given_delta(state: AccountantState, cfg: AccountantConfig) -> WdpBudget:
    """Budget epsilon = sum(losses) - log(delta)/beta at the configured delta.

    Always exceeds the raw loss sum since log(delta) < 0.
    """
    eps = state.total_loss - math.log(cfg.delta) / cfg.beta
    return WdpBudget(mu=cfg.mu, epsilon=eps)


def delta_given_epsilon(
    state: AccountantState, cfg: AccountantConfig, epsilon: float
) -> float:
    """Tail probability exp(beta * (sum(losses) - epsilon)) at a target budget.

    Values >= 1 mean the guarantee is vacuous; callers flag rather than clamp.
    """
    return math.exp(cfg.beta * (state.total_loss - epsilon))


def dump_state(state: AccountantState, cfg: AccountantConfig) -> dict:
    """Checkpoint document: {mu, beta, delta, losses, steps}."""
    return {
        "mu": cfg.mu,
        "beta": cfg.beta,
        "delta": cfg.delta,
        "losses": list(state.losses),
        "steps": state.steps,
    }


def load_state(doc: Union[str, dict]) -> tuple[AccountantState, dict]:
    """Restore a checkpoint; returns the state and the {mu, beta, delta} knobs."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    losses = tuple(float(x) for x in doc["losses"])
    if any(x < 0 for x in losses):
        raise ValueError("checkpoint contains a negative loss")
    if "steps" in doc and doc["steps"] != len(losses):
        raise ValueError(
            f"checkpoint step count {doc['steps']} does not match "
            f"{len(losses)} recorded losses"
        )
    knobs = {k: doc[k] for k in ("mu", "beta", "delta") if k in doc}
    return AccountantState(losses=losses), knobs
