"""Independent oracles used to pin expected values.

Everything here deliberately avoids the library's code paths: moments come
from Monte Carlo, hypergeometric sums from direct rising-factorial products,
and transport optima from enumerating the vertices of the plan polytope.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np


def mc_abs_moment(mu, mean, variance, base_normals) -> float:
    """Empirical E|Z|^mu from pre-drawn standard normals."""
    samples = mean + math.sqrt(variance) * base_normals
    return float(np.mean(np.abs(samples) ** mu))


def rising(x: float, n: int) -> float:
    out = 1.0
    for i in range(n):
        out *= x + i
    return out


def kummer_direct(a: float, b: float, z: float, terms: int) -> float:
    """Direct term-by-term evaluation of the 1F1 polynomial/partial sum."""
    return math.fsum(
        rising(a, n) / rising(b, n) * z**n / math.factorial(n) for n in range(terms)
    )


def transport_vertices(wa, wb) -> list[np.ndarray]:
    """All basic feasible solutions of {x >= 0, row sums wa, column sums wb}."""
    wa = np.asarray(wa, dtype=float)
    wb = np.asarray(wb, dtype=float)
    m, n = wa.size, wb.size
    rows = []
    for i in range(m):
        r = np.zeros(m * n)
        r[i * n : (i + 1) * n] = 1.0
        rows.append(r)
    for j in range(n):
        r = np.zeros(m * n)
        r[j::n] = 1.0
        rows.append(r)
    a_full = np.asarray(rows)[:-1]  # last constraint is redundant
    b_full = np.concatenate([wa, wb])[:-1]
    k = m + n - 1

    vertices = []
    for support in combinations(range(m * n), k):
        a_basis = a_full[:, support]
        try:
            xs = np.linalg.solve(a_basis, b_full)
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(xs)):
            continue
        if np.max(np.abs(a_basis @ xs - b_full)) > 1e-9 or xs.min() < -1e-10:
            continue
        x = np.zeros(m * n)
        x[list(support)] = xs
        vertices.append(x)
    return vertices


def min_vertex_distance(p_atoms, p_weights, q_atoms, q_weights, mu) -> float:
    """Exact transport distance by brute force over polytope vertices."""
    xa = np.asarray(p_atoms, dtype=float)
    xb = np.asarray(q_atoms, dtype=float)
    cost = (np.abs(xa[:, None] - xb[None, :]) ** mu).ravel()
    best = min(
        float(cost @ v) for v in transport_vertices(p_weights, q_weights)
    )
    return max(best, 0.0) ** (1.0 / mu)


def two_sample_coupling_min(x, y, mu) -> float:
    """Brute force over both couplings of two 2-point empirical measures."""
    (x1, x2), (y1, y2) = sorted(x), sorted(y)
    straight = (abs(x1 - y1) ** mu + abs(x2 - y2) ** mu) / 2.0
    crossed = (abs(x1 - y2) ** mu + abs(x2 - y1) ** mu) / 2.0
    return min(straight, crossed) ** (1.0 / mu)
