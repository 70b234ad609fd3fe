"""Exact small-scale optimal transport on the real line.

This is the validation oracle for the framework: it computes mu-Wasserstein
distances between finite distributions exactly, so metric axioms, duality,
and the mechanism budget formulas can be checked empirically.

For distributions on the line the monotone (quantile) coupling is optimal for
every cost |x - y|^mu with mu >= 1, which gives an O(n log n) exact primal.
The transport linear program and the Kantorovich dual over 1-Lipschitz
potentials are kept as independent routes for cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy.optimize import linprog

from .mechanisms import GAUSSIAN, LAPLACE, MechanismSpec, wdp_gaussian, wdp_laplace

__all__ = [
    "MAX_ATOMS",
    "DiscreteDist",
    "SampleSet",
    "wasserstein_1d_samples",
    "wasserstein_discrete",
    "transport_cost_lp",
    "kantorovich_dual_1d",
    "PushforwardReport",
    "pushforward_check",
    "named_map",
    "MechanismAudit",
    "mechanism_audit",
]

MAX_ATOMS = 64
_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteDist:
    """A finite-support distribution on the real line."""

    atoms: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.atoms) != len(self.weights):
            raise ValueError("atoms and weights must have equal length")
        if not self.atoms:
            raise ValueError("distribution needs at least one atom")
        if not all(math.isfinite(a) for a in self.atoms):
            raise ValueError("atoms must be finite")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be >= 0")
        total = math.fsum(self.weights)
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"weights must sum to 1 within {_WEIGHT_TOL}, got {total}")

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "DiscreteDist":
        """Build from the wire format [[atom, weight], ...]."""
        atoms = tuple(float(a) for a, _ in pairs)
        weights = tuple(float(w) for _, w in pairs)
        return cls(atoms=atoms, weights=weights)

    def to_pairs(self) -> list[list[float]]:
        return [[a, w] for a, w in zip(self.atoms, self.weights)]

    @classmethod
    def point_mass(cls, x: float) -> "DiscreteDist":
        return cls(atoms=(float(x),), weights=(1.0,))


@dataclass(frozen=True)
class SampleSet:
    """Equal-size draws from a distribution, for empirical distances."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("sample set must be non-empty")


def _values(x) -> np.ndarray:
    if isinstance(x, SampleSet):
        return np.asarray(x.values, dtype=float)
    return np.asarray(x, dtype=float)


def wasserstein_1d_samples(x, y, mu: float = 1.0) -> float:
    """Empirical mu-Wasserstein distance of two equal-size sample sets.

    ((1/n) * sum_i |x_(i) - y_(i)|^mu)^(1/mu) over order statistics.
    """
    if not mu >= 1:
        raise ValueError(f"order mu must be >= 1, got {mu}")
    xs, ys = _values(x), _values(y)
    if xs.size != ys.size:
        raise ValueError(f"sample sets must match in size, got {xs.size} and {ys.size}")
    if xs.size == 0:
        raise ValueError("sample sets must be non-empty")
    gaps = np.abs(np.sort(xs) - np.sort(ys))
    return float(np.mean(gaps**mu) ** (1.0 / mu))


def _check_support(p: DiscreteDist, q: DiscreteDist) -> None:
    if len(p.atoms) > MAX_ATOMS or len(q.atoms) > MAX_ATOMS:
        raise ValueError(
            f"supports are limited to {MAX_ATOMS} atoms, "
            f"got {len(p.atoms)} and {len(q.atoms)}"
        )


def wasserstein_discrete(p: DiscreteDist, q: DiscreteDist, mu: float = 1.0) -> float:
    """Exact mu-Wasserstein distance between finite distributions.

    Computes the optimal transport cost by the monotone coupling (optimal on
    the line for any convex cost) and returns cost^(1/mu). Matches the
    transport LP optimum; `transport_cost_lp` is the cross-check route.
    """
    if not mu >= 1:
        raise ValueError(f"order mu must be >= 1, got {mu}")
    _check_support(p, q)

    ia = np.argsort(p.atoms, kind="stable")
    ib = np.argsort(q.atoms, kind="stable")
    xa = np.asarray(p.atoms, dtype=float)[ia]
    wa = np.asarray(p.weights, dtype=float)[ia]
    xb = np.asarray(q.atoms, dtype=float)[ib]
    wb = np.asarray(q.weights, dtype=float)[ib]

    cost = 0.0
    i = j = 0
    ra, rb = wa[0], wb[0]
    while True:
        m = min(ra, rb)
        cost += m * abs(xa[i] - xb[j]) ** mu
        ra -= m
        rb -= m
        if ra <= 0:
            i += 1
            if i == len(xa):
                break
            ra = wa[i]
        if rb <= 0:
            j += 1
            if j == len(xb):
                break
            rb = wb[j]
    return float(cost) ** (1.0 / mu)


def transport_cost_lp(p: DiscreteDist, q: DiscreteDist, mu: float = 1.0) -> float:
    """mu-Wasserstein distance via the transport linear program (HiGHS)."""
    if not mu >= 1:
        raise ValueError(f"order mu must be >= 1, got {mu}")
    _check_support(p, q)
    m, n = len(p.atoms), len(q.atoms)
    xa = np.asarray(p.atoms, dtype=float)
    xb = np.asarray(q.atoms, dtype=float)
    cost = (np.abs(xa[:, None] - xb[None, :]) ** mu).ravel()

    rows = []
    for i in range(m):
        r = np.zeros(m * n)
        r[i * n : (i + 1) * n] = 1.0
        rows.append(r)
    for j in range(n):
        r = np.zeros(m * n)
        r[j::n] = 1.0
        rows.append(r)
    a_eq = np.asarray(rows)
    b_eq = np.concatenate([p.weights, q.weights])

    res = linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise ArithmeticError(f"transport LP failed: {res.message}")
    return max(float(res.fun), 0.0) ** (1.0 / mu)


def _merged_support(p: DiscreteDist, q: DiscreteDist):
    xs = np.unique(np.concatenate([p.atoms, q.atoms]))
    pw = np.zeros(xs.size)
    qw = np.zeros(xs.size)
    for a, w in zip(p.atoms, p.weights):
        pw[np.searchsorted(xs, a)] += w
    for a, w in zip(q.atoms, q.weights):
        qw[np.searchsorted(xs, a)] += w
    return xs, pw, qw


def kantorovich_dual_1d(p: DiscreteDist, q: DiscreteDist) -> float:
    """1-Wasserstein distance by its dual: maximize sum phi_i (p_i - q_i)
    over potentials with |phi_i - phi_j| <= |x_i - x_j| on the merged support.

    Transcribes the 1-Lipschitz condition as pairwise constraints and solves
    the LP; equals the primal optimum by strong duality.
    """
    _check_support(p, q)
    xs, pw, qw = _merged_support(p, q)
    k = xs.size
    if k == 1:
        return 0.0

    a_ub = []
    b_ub = []
    for i in range(k):
        for j in range(i + 1, k):
            gap = abs(xs[i] - xs[j])
            row = np.zeros(k)
            row[i], row[j] = 1.0, -1.0
            a_ub.append(row)
            b_ub.append(gap)
            a_ub.append(-row)
            b_ub.append(gap)

    # objective is translation invariant; pin phi_0 = 0 to keep HiGHS happy
    bounds = [(0.0, 0.0)] + [(None, None)] * (k - 1)
    res = linprog(
        -(pw - qw),
        A_ub=np.asarray(a_ub),
        b_ub=np.asarray(b_ub),
        bounds=bounds,
        method="highs",
    )
    if res.status != 0:
        raise ArithmeticError(f"dual LP failed: {res.message}")
    return max(-float(res.fun), 0.0)


@dataclass(frozen=True)
class PushforwardReport:
    """Distances before/after a declared-1-Lipschitz map is applied."""

    before: float
    after: float
    non_expansive: bool


def pushforward_check(
    p: DiscreteDist,
    q: DiscreteDist,
    map_fn: Callable[[float], float],
    mu: float = 1.0,
) -> PushforwardReport:
    """Measure whether mapping both distributions grew their distance.

    The caller declares map_fn 1-Lipschitz; for such maps the distance cannot
    grow. Expansive maps are measured and reported, never rejected.
    """
    before = wasserstein_discrete(p, q, mu)
    pushed_p = DiscreteDist(
        atoms=tuple(float(map_fn(a)) for a in p.atoms), weights=p.weights
    )
    pushed_q = DiscreteDist(
        atoms=tuple(float(map_fn(a)) for a in q.atoms), weights=q.weights
    )
    after = wasserstein_discrete(pushed_p, pushed_q, mu)
    return PushforwardReport(
        before=before, after=after, non_expansive=bool(after <= before + 1e-9)
    )


def named_map(spec: str) -> Callable[[float], float]:
    """Map registry for the wire/CLI surface.

    'identity', 'abs', 'constant:c', 'shift:b', 'clip:c' are 1-Lipschitz;
    'scale:a' is 1-Lipschitz iff |a| <= 1 (larger a is allowed for
    measurement).
    """
    kind, _, raw = spec.partition(":")
    if kind == "identity":
        return lambda x: x
    if kind == "abs":
        return abs
    if kind == "constant":
        c = float(raw)
        return lambda x: c
    if kind == "scale":
        a = float(raw)
        return lambda x: a * x
    if kind == "shift":
        b = float(raw)
        return lambda x: x + b
    if kind == "clip":
        c = float(raw)
        if c < 0:
            raise ValueError(f"clip bound must be >= 0, got {c}")
        return lambda x: min(max(x, -c), c)
    raise ValueError(f"unknown map {spec!r}")


@dataclass(frozen=True)
class MechanismAudit:
    """Closed-form budget next to the measured distance it is meant to bound.

    For location families the exact distance between the two output
    distributions equals the sensitivity (translation coupling), which can
    exceed the closed-form budget; both numbers are reported side by side.
    """

    kind: str
    mu: float
    empirical_distance: float
    closed_form_budget: float
    sensitivity: float
    n_samples: int
    seed: int

    @property
    def budget_covers_empirical(self) -> bool:
        return self.closed_form_budget >= self.empirical_distance


def mechanism_audit(
    kind: str,
    scale: float,
    sensitivity: float = 1.0,
    mu: float = 1.0,
    n_samples: int = 100_000,
    seed: int = 0,
) -> MechanismAudit:
    """Sample both mechanism output distributions and measure their distance.

    Draws n_samples from noise(0) and noise(sensitivity) and compares the
    empirical mu-Wasserstein distance with the closed-form budget.
    """
    spec = MechanismSpec(kind=kind, scale=scale, sensitivity=sensitivity)
    rng = np.random.default_rng(seed)
    if kind == GAUSSIAN:
        base = rng.normal(0.0, scale, size=n_samples)
        shifted = rng.normal(sensitivity, scale, size=n_samples)
        budget = wdp_gaussian(spec, mu).epsilon
    elif kind == LAPLACE:
        base = rng.laplace(0.0, scale, size=n_samples)
        shifted = rng.laplace(sensitivity, scale, size=n_samples)
        budget = wdp_laplace(spec, mu).epsilon
    else:  # pragma: no cover - MechanismSpec already rejects unknown kinds
        raise ValueError(f"unknown mechanism kind {kind!r}")
    empirical = wasserstein_1d_samples(base, shifted, mu)
    return MechanismAudit(
        kind=kind,
        mu=mu,
        empirical_distance=empirical,
        closed_form_budget=budget,
        sensitivity=sensitivity,
        n_samples=n_samples,
        seed=seed,
    )
