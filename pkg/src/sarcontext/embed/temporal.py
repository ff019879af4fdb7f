"""Temporal weighting of history vectors: ten contiguous partitions, recent-heavy."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

N_PARTITIONS = 10

# Sums whose norm falls below this are treated as cancelled out.
ZERO_NORM_EPS = 1e-12


def temporal_weights(n: int) -> np.ndarray:
    """Weights for a chronological sequence of ``n`` history vectors.

    The sequence is cut into ten contiguous partitions and every position is
    weighted by its partition index (1-based), so the most recent tweet always
    carries the largest weight: w(i) = floor(10*(i-1)/n) + 1 for i = 1..n.
    For n < 10 the weights still climb toward 10 but skip values.
    """
    if n <= 0:
        raise ValueError(f"history length must be positive, got {n}")
    i = np.arange(n)
    return (N_PARTITIONS * i) // n + 1


def weighted_aggregate(
    vectors: Sequence[np.ndarray], weights: Sequence[float]
) -> tuple[np.ndarray, bool]:
    """Weighted sum normalized to unit length.

    Returns (unit vector, False) normally; if the weighted sum cancels to
    (numerically) zero, returns (zero vector, True) so callers can flag the
    embedding instead of dividing by nothing.
    """
    if len(vectors) != len(weights):
        raise ValueError(
            f"{len(vectors)} vectors but {len(weights)} weights"
        )
    if len(vectors) == 0:
        raise ValueError("cannot aggregate an empty vector sequence")
    stacked = np.asarray(vectors, dtype=np.float64)
    summed = np.asarray(weights, dtype=np.float64) @ stacked
    norm = np.linalg.norm(summed)
    if norm < ZERO_NORM_EPS:
        return np.zeros_like(summed), True
    return summed / norm, False
