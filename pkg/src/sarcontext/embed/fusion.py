"""Two-view canonical correlation fusion of document and personality vectors.

Fitting: center each view, whiten with (Sigma_ii + eps*I)^(-1/2), then SVD the
cross-covariance of the whitened views and keep the top-k singular directions,
each scaled by its canonical correlation. Fusing: project both views and
average them. With exactly two views this is the standard regularized CCA
special case of generalized CCA.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class FusionModel:
    mean_a: np.ndarray
    mean_b: np.ndarray
    proj_a: np.ndarray  # (dim_a, out_dim)
    proj_b: np.ndarray  # (dim_b, out_dim)
    correlations: np.ndarray  # (out_dim,), zero beyond the cross-covariance rank
    out_dim: int
    eps: float


def _inv_sqrt(cov: np.ndarray, eps: float) -> np.ndarray:
    """(cov + eps*I)^(-1/2) via symmetric eigendecomposition."""
    reg = cov + eps * np.eye(cov.shape[0])
    eigvals, eigvecs = np.linalg.eigh(reg)
    # eps > 0 keeps eigenvalues positive; clip guards against fp round-off.
    eigvals = np.clip(eigvals, 1e-300, None)
    return (eigvecs * (eigvals ** -0.5)) @ eigvecs.T


def fit_fusion(
    view_a: np.ndarray,
    view_b: np.ndarray,
    out_dim: int,
    eps: float = 1e-3,
) -> FusionModel:
    """Fit the two-view CCA fusion on paired samples (rows of both views).

    Requires at least 2 pairs and eps > 0 (the ridge keeps whitening sane
    when samples are scarce). If out_dim exceeds the cross-covariance rank
    (one view narrower, or few samples), the extra directions are zero, so
    fused vectors keep the requested length with trailing zeros.

    The sign of each direction is fixed by making the largest-magnitude entry
    of its view-a loading positive (the view-b loading flips with it so the
    pair stays aligned).
    """
    a = np.asarray(view_a, dtype=np.float64)
    b = np.asarray(view_b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("views must be 2-D sample matrices")
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"paired views differ in sample count: {a.shape[0]} vs {b.shape[0]}")
    n = a.shape[0]
    if out_dim < 1:
        raise ValueError(f"out_dim must be >= 1, got {out_dim}")
    if n < 2:
        raise ValueError(f"need at least 2 paired samples, got {n}")
    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps}")

    mean_a = a.mean(axis=0)
    mean_b = b.mean(axis=0)
    ac = a - mean_a
    bc = b - mean_b
    denom = n - 1

    white_a = _inv_sqrt(ac.T @ ac / denom, eps)
    white_b = _inv_sqrt(bc.T @ bc / denom, eps)
    cross = white_a @ (ac.T @ bc / denom) @ white_b

    u, s, vt = np.linalg.svd(cross, full_matrices=False)
    k = min(out_dim, s.shape[0])
    # ridge whitening can push sample correlations epsilon past 1; clamp
    u, s, v = u[:, :k], np.clip(s[:k], 0.0, 1.0), vt[:k].T

    for j in range(k):
        pivot = np.argmax(np.abs(u[:, j]))
        if u[pivot, j] < 0:
            u[:, j] = -u[:, j]
            v[:, j] = -v[:, j]

    proj_a = np.zeros((a.shape[1], out_dim))
    proj_b = np.zeros((b.shape[1], out_dim))
    # correlation-weighted projections: whitening gives every canonical
    # direction unit variance, so weight each by how strongly the views
    # agree on it; weakly correlated (noise) directions shrink toward zero
    proj_a[:, :k] = (white_a @ u) * s
    proj_b[:, :k] = (white_b @ v) * s
    correlations = np.zeros(out_dim)
    correlations[:k] = s

    return FusionModel(
        mean_a=mean_a,
        mean_b=mean_b,
        proj_a=proj_a,
        proj_b=proj_b,
        correlations=correlations,
        out_dim=out_dim,
        eps=eps,
    )


def fuse(model: FusionModel, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Average of the two projected (centered) views.

    Accepts single vectors or row-aligned batches; the output keeps the
    input's leading shape with ``out_dim`` as the last axis.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    dim_a = model.mean_a.shape[0]
    dim_b = model.mean_b.shape[0]
    if a.shape[-1:] != (dim_a,) or b.shape[-1:] != (dim_b,) or a.shape[:-1] != b.shape[:-1]:
        raise ValueError(
            f"view shapes {a.shape}/{b.shape} do not match the fitted model "
            f"(last axes must be {dim_a}/{dim_b} with equal leading shapes)"
        )
    pa = (a - model.mean_a) @ model.proj_a
    pb = (b - model.mean_b) @ model.proj_b
    return (pa + pb) / 2.0
