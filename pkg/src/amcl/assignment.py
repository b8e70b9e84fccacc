"""Euclidean set-matching harness: PIT vs per-target-min vs annealed matching.

PIT matches predictions to targets through the best bijection (O(m^3) via
the Hungarian algorithm, factorial if enumerated); the per-target minimum
drops the bijection constraint and is O(m*n). The annealed variant replaces
the per-target min with Boltzmann-weighted averaging.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np

from .errors import DomainError, ShapeError

EXHAUSTIVE_LIMIT = 6


def _cost_matrix(predictions, targets):
    preds = np.asarray(predictions, dtype=np.float64)
    tgts = np.asarray(targets, dtype=np.float64)
    if preds.ndim == 1:
        preds = preds[:, None]
    if tgts.ndim == 1:
        tgts = tgts[:, None]
    if preds.shape[1] != tgts.shape[1]:
        raise ShapeError(f"prediction dim {preds.shape[1]} vs target dim {tgts.shape[1]}")
    diff = tgts[:, None, :] - preds[None, :, :]
    return np.sum(diff * diff, axis=2)  # cost[s, k]


def pit_loss(predictions, targets, mode: str = "auto"):
    """Permutation-invariant loss: min over bijections of the mean pair cost.

    Returns (value, permutation) with permutation[s] = matched prediction
    index. Exhaustive enumeration for m <= 6 (or mode="exhaustive"),
    Hungarian otherwise; the two agree to rounding.
    """
    cost = _cost_matrix(predictions, targets)
    m, n = cost.shape
    if m != n:
        raise ShapeError(f"PIT needs n = m, got n={n} predictions, m={m} targets")
    if mode not in ("auto", "exhaustive", "hungarian"):
        raise DomainError(f"unknown mode {mode!r}")
    if mode == "exhaustive" or (mode == "auto" and m <= EXHAUSTIVE_LIMIT):
        best, best_perm = np.inf, None
        for perm in permutations(range(m)):
            total = sum(cost[s, perm[s]] for s in range(m))
            if total < best:
                best, best_perm = total, perm
        return best / m, tuple(best_perm)
    perm = hungarian(cost)
    value = sum(cost[s, perm[s]] for s in range(m)) / m
    return value, tuple(perm)


def hungarian(cost: np.ndarray):
    """Minimum-cost perfect matching on a square cost matrix, O(m^3).

    Shortest-augmenting-path form with row/column potentials (Jonker-
    Volgenant style). Returns match[s] = column assigned to row s.
    """
    cost = np.asarray(cost, dtype=np.float64)
    m = cost.shape[0]
    if cost.shape != (m, m):
        raise ShapeError("cost matrix must be square")
    INF = np.inf
    u = np.zeros(m + 1)
    v = np.zeros(m + 1)
    way = np.zeros(m + 1, dtype=int)
    match = np.zeros(m + 1, dtype=int)  # match[col] = row, 1-based with 0 sentinel
    for i in range(1, m + 1):
        match[0] = i
        j0 = 0
        minv = np.full(m + 1, INF)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0, delta, j1 = match[j0], INF, 0
            for j in range(1, m + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            match[j0] = match[way[j0]]
            j0 = way[j0]
    result = np.zeros(m, dtype=int)
    for j in range(1, m + 1):
        result[match[j] - 1] = j - 1
    return result


def mcl_match_loss(predictions, targets) -> float:
    """Per-target minimum over all predictions, averaged over targets: O(m*n)."""
    cost = _cost_matrix(predictions, targets)
    return float(np.mean(np.min(cost, axis=1)))


def awta_match_loss(predictions, targets, temperature: float) -> float:
    """Boltzmann-weighted matching: mean_s sum_k q_T(k|s) * cost[s, k]."""
    if temperature <= 0.0:
        raise DomainError(f"temperature must be > 0, got {temperature}")
    cost = _cost_matrix(predictions, targets)
    shifted = -(cost - np.min(cost, axis=1, keepdims=True)) / temperature
    w = np.exp(shifted)
    q = w / np.sum(w, axis=1, keepdims=True)
    return float(np.mean(np.sum(q * cost, axis=1)))
