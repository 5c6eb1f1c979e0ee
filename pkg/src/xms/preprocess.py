"""Centering and PCA dimensionality reduction fitted on training data only."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset_io import FeatureMatrix
from .errors import ConfigError


@dataclass(frozen=True)
class PcaModel:
    """Orthonormal basis of the top-k sample-covariance eigenvectors.

    ``eigenvalues`` are non-increasing covariance eigenvalues (1/(n-1)
    normalization); ``basis`` is d x k with the largest-magnitude entry of
    each column made positive for deterministic output.
    """

    mean: np.ndarray
    basis: np.ndarray
    eigenvalues: np.ndarray

    @property
    def d(self) -> int:
        return self.basis.shape[0]

    @property
    def k(self) -> int:
        return self.basis.shape[1]


def fix_signs(basis: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    basis = np.array(basis)
    for j in range(basis.shape[1]):
        i = np.argmax(np.abs(basis[:, j]))
        if basis[i, j] < 0:
            basis[:, j] = -basis[:, j]
    return basis


def center_fit(x: FeatureMatrix) -> tuple[np.ndarray, FeatureMatrix]:
    """Column-mean removal; returns (mean vector, centered matrix)."""
    mean = x.values.mean(axis=1)
    return mean, FeatureMatrix(x.values - mean[:, None])


def pca_fit(x: FeatureMatrix, k: int | None = None, energy: float | None = None) -> PcaModel:
    """Fit PCA on x, retaining a fixed dimension k or an energy fraction.

    Exactly one of ``k`` and ``energy`` must be given.  ``energy`` in (0, 1]
    keeps the smallest k whose cumulative eigenvalue fraction reaches it.
    k is capped at min(d, n-1).
    """
    if (k is None) == (energy is None):
        raise ConfigError("pca_target", "specify exactly one of k and energy")
    if x.n < 2:
        raise ConfigError("pca_target", "PCA needs at least 2 samples")
    k_max = min(x.d, x.n - 1)

    mean, centered = center_fit(x)
    # eigenvalues of the sample covariance via thin SVD of the centered data
    u, s, _ = np.linalg.svd(centered.values, full_matrices=False)
    eigenvalues = s**2 / (x.n - 1)

    if energy is not None:
        if not 0 < energy <= 1:
            raise ConfigError("pca_target", f"energy must be in (0, 1], got {energy}")
        total = eigenvalues[:k_max].sum()
        if total <= 0:
            k = 1
        else:
            frac = np.cumsum(eigenvalues[:k_max]) / total
            k = int(np.searchsorted(frac, energy - 1e-12) + 1)
    if k > k_max:
        raise ConfigError("pca_target", f"k={k} exceeds min(d, n-1)={k_max}")
    if k < 1:
        raise ConfigError("pca_target", f"k must be >= 1, got {k}")

    return PcaModel(mean=mean, basis=fix_signs(u[:, :k]), eigenvalues=eigenvalues[:k].copy())


def pca_apply(model: PcaModel, x: FeatureMatrix) -> FeatureMatrix:
    """Project columns of x onto the PCA basis: basis' (x - mean)."""
    if x.d != model.d:
        raise ConfigError("dim_mismatch", f"PCA model expects d={model.d}, got {x.d}")
    return FeatureMatrix(model.basis.T @ (x.values - model.mean[:, None]))
