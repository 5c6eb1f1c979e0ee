"""Shared numerical kernels for the subspace fitters.

Covariance/scatter builders, a regularized symmetric generalized eigensolver,
k-NN and multimodal graph construction, and the proximal/reweighting
operators used by the sparse coupled-regression fitters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .dataset_io import FeatureMatrix, PairedMultimodalDataset
from .errors import ConfigError, NumericalError
from .preprocess import fix_signs

COND_LIMIT = 1e12


@dataclass(frozen=True)
class CovarianceSet:
    """Per-modality covariances and the cross-covariance (1/(n-1) scaling)."""

    saa: np.ndarray
    sbb: np.ndarray
    sab: np.ndarray


@dataclass(frozen=True)
class ScatterSet:
    """Within/between-class scatter and per-class means (within + between = total)."""

    within: np.ndarray
    between: np.ndarray
    class_means: np.ndarray
    classes: np.ndarray


@dataclass(frozen=True)
class GraphSpec:
    """Symmetric non-negative affinity with its combinatorial Laplacian."""

    affinity: np.ndarray
    laplacian: np.ndarray
    kind: str


def covariances(xa: FeatureMatrix, xb: FeatureMatrix) -> CovarianceSet:
    """Empirical (co)variances of centered inputs: saa = Xa Xa'/(n-1), etc."""
    if xa.n != xb.n:
        raise ConfigError("n_mismatch", f"sample counts differ: {xa.n} vs {xb.n}")
    if xa.n < 2:
        raise ConfigError("n_mismatch", "need at least 2 samples for covariances")
    f = 1.0 / (xa.n - 1)
    return CovarianceSet(
        saa=f * (xa.values @ xa.values.T),
        sbb=f * (xb.values @ xb.values.T),
        sab=f * (xa.values @ xb.values.T),
    )


def default_ridge(b: np.ndarray) -> float:
    """Ridge scale used by all GEV-based fitters: 1e-4 * trace(B)/size(B)."""
    return 1e-4 * np.trace(b) / b.shape[0]


def solve_gev(a: np.ndarray, b: np.ndarray, k: int, ridge: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Top-k eigenpairs of A v = lambda (B + ridge I) v for symmetric A, B.

    Eigenvalues come back non-increasing; eigenvectors satisfy
    v' (B + ridge I) v = 1 and are sign-fixed by their largest entry.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ConfigError("shape_mismatch", f"A and B must be square and equal-sized, got {a.shape} and {b.shape}")
    m = a.shape[0]
    if not 1 <= k <= m:
        raise ConfigError("bad_k", f"k must lie in 1..{m}, got {k}")

    breg = b + ridge * np.eye(m)
    bw = la.eigvalsh(breg)
    if bw[0] <= 0 or bw[-1] / bw[0] > COND_LIMIT:
        raise NumericalError(
            "singular_b",
            f"constraint matrix is numerically singular (cond ~ {bw[-1] / max(bw[0], 1e-300):.2e}); increase ridge",
        )
    w, v = la.eigh(a, breg)
    order = np.argsort(w, kind="stable")[::-1][:k]
    return w[order], fix_signs(v[:, order])


def scatter(x: FeatureMatrix, labels, n_classes: int | None = None) -> ScatterSet:
    """Within/between-class scatter with class-size weighting.

    within = sum_c sum_{i in c} (x_i - m_c)(x_i - m_c)'
    between = sum_c n_c (m_c - m)(m_c - m)'
    so within + between equals the total scatter about the global mean.
    """
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if labels.size != x.n:
        raise ConfigError("n_mismatch", "labels length must match sample count")
    classes = np.unique(labels)
    if n_classes is not None:
        wanted = np.arange(1, n_classes + 1)
        if not np.isin(wanted, classes).all():
            raise NumericalError("empty_class", "a requested class has zero samples")
        classes = wanted
    mean = x.values.mean(axis=1)
    within = np.zeros((x.d, x.d))
    between = np.zeros((x.d, x.d))
    class_means = np.zeros((x.d, classes.size))
    for j, cls in enumerate(classes):
        cols = x.values[:, labels == cls]
        m_c = cols.mean(axis=1)
        class_means[:, j] = m_c
        dev = cols - m_c[:, None]
        within += dev @ dev.T
        gap = (m_c - mean)[:, None]
        between += cols.shape[1] * (gap @ gap.T)
    return ScatterSet(within=within, between=between, class_means=class_means, classes=classes)


def _pairwise_sq_dists(x: np.ndarray, y: np.ndarray | None = None) -> np.ndarray:
    y = x if y is None else y
    sq_x = (x**2).sum(axis=0)
    sq_y = (y**2).sum(axis=0)
    d2 = sq_x[:, None] + sq_y[None, :] - 2.0 * (x.T @ y)
    return np.maximum(d2, 0.0)


def _laplacian(affinity: np.ndarray) -> np.ndarray:
    return np.diag(affinity.sum(axis=1)) - affinity


def knn_graph(x: FeatureMatrix, k: int, bandwidth="median") -> GraphSpec:
    """Symmetrized k-NN graph with Gaussian edge weights exp(-dist^2/sigma^2).

    ``bandwidth`` is sigma, or "median" for the median distance over the
    selected k-NN edges.  Symmetrization keeps max(w_ij, w_ji).
    """
    if k <= 0:
        raise ConfigError("bad_k", f"k must be positive, got {k}")
    n = x.n
    if k >= n:
        raise ConfigError("bad_k", f"k must be < n ({n})")
    d2 = _pairwise_sq_dists(x.values)
    np.fill_diagonal(d2, np.inf)
    # k nearest neighbours per node (ties broken by index via stable argsort)
    neighbors = np.argsort(d2, axis=1, kind="stable")[:, :k]
    mask = np.zeros((n, n), dtype=bool)
    rows = np.repeat(np.arange(n), k)
    mask[rows, neighbors.ravel()] = True

    edge_d2 = d2[mask]
    if bandwidth == "median":
        sigma = float(np.sqrt(np.median(edge_d2)))
    else:
        sigma = float(bandwidth)
        if sigma <= 0:
            raise ConfigError("bad_bandwidth", f"bandwidth must be positive, got {bandwidth}")
    sigma = max(sigma, 1e-300)

    weights = np.zeros((n, n))
    weights[mask] = np.exp(-d2[mask] / sigma**2)
    affinity = np.maximum(weights, weights.T)
    np.fill_diagonal(affinity, 0.0)
    return GraphSpec(affinity=affinity, laplacian=_laplacian(affinity), kind="intra_modality_knn")


def class_knn_graphs(x: FeatureMatrix, labels, k_intrinsic: int, k_penalty: int) -> tuple[GraphSpec, GraphSpec]:
    """Binary intrinsic (same-class k-NN) and penalty (different-class k-NN) graphs.

    The margin-Fisher construction: each sample is linked to its k_intrinsic
    nearest neighbours of the same class and, in the penalty graph, to its
    k_penalty nearest neighbours among other classes.  Both symmetrized.
    """
    if k_intrinsic <= 0 or k_penalty <= 0:
        raise ConfigError("bad_k", "graph neighbour counts must be positive")
    labels = np.asarray(labels, dtype=np.int64).ravel()
    n = x.n
    d2 = _pairwise_sq_dists(x.values)
    np.fill_diagonal(d2, np.inf)
    same = labels[:, None] == labels[None, :]

    intrinsic = np.zeros((n, n))
    penalty = np.zeros((n, n))
    for i in range(n):
        row = d2[i]
        same_idx = np.flatnonzero(same[i])
        diff_idx = np.flatnonzero(~same[i])
        if same_idx.size:
            take = same_idx[np.argsort(row[same_idx], kind="stable")[:k_intrinsic]]
            intrinsic[i, take] = 1.0
        if diff_idx.size:
            take = diff_idx[np.argsort(row[diff_idx], kind="stable")[:k_penalty]]
            penalty[i, take] = 1.0
    intrinsic = np.maximum(intrinsic, intrinsic.T)
    penalty = np.maximum(penalty, penalty.T)
    np.fill_diagonal(intrinsic, 0.0)
    np.fill_diagonal(penalty, 0.0)
    return (
        GraphSpec(affinity=intrinsic, laplacian=_laplacian(intrinsic), kind="same_class_intrinsic"),
        GraphSpec(affinity=penalty, laplacian=_laplacian(penalty), kind="diff_class_penalty"),
    )


def multimodal_graph(dataset: PairedMultimodalDataset, k: int) -> GraphSpec:
    """Joint 2n x 2n graph tying both modalities' samples together.

    Intra-modality blocks are Gaussian k-NN graphs on each modality.  The
    inter-modality block links true pairs (affinity 1) and, when the feature
    spaces are comparable (d_a == d_b), same-class cross-modal k-NN pairs.
    """
    if k <= 0:
        raise ConfigError("bad_k", f"k must be positive, got {k}")
    n = dataset.n
    intra_a = knn_graph(dataset.xa, min(k, n - 1)).affinity
    intra_b = knn_graph(dataset.xb, min(k, n - 1)).affinity

    inter = np.eye(n)  # rows index modality a, columns modality b
    if dataset.d_a == dataset.d_b and n > 1:
        d2 = _pairwise_sq_dists(dataset.xa.values, dataset.xb.values)
        same = dataset.labels[:, None] == dataset.labels[None, :]
        d2 = np.where(same, d2, np.inf)
        kk = min(k, n)
        for rowwise in (d2, d2.T):  # a->b and b->a neighbourhoods, unioned
            neighbors = np.argsort(rowwise, axis=1, kind="stable")[:, :kk]
            hits = np.zeros((n, n))
            for i in range(n):
                take = neighbors[i][np.isfinite(rowwise[i, neighbors[i]])]
                hits[i, take] = 1.0
            inter = np.maximum(inter, hits if rowwise is d2 else hits.T)
    affinity = np.block([[intra_a, inter], [inter.T, intra_b]])
    return GraphSpec(affinity=affinity, laplacian=_laplacian(affinity), kind="multimodal_block")


def l21_reweight(w: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Half-quadratic majorizer diagonal of the l21 norm: D_ii = 1/(2 max(||row_i||, eps))."""
    if eps <= 0:
        raise ConfigError("bad_eps", f"eps must be positive, got {eps}")
    row_norms = np.linalg.norm(np.atleast_2d(w), axis=1)
    return np.diag(1.0 / (2.0 * np.maximum(row_norms, eps)))


def singular_value_shrink(m: np.ndarray, tau: float) -> np.ndarray:
    """Proximal operator of the trace norm: soft-threshold the singular values by tau."""
    if tau < 0:
        raise ConfigError("bad_tau", f"tau must be >= 0, got {tau}")
    u, s, vt = np.linalg.svd(np.asarray(m, dtype=np.float64), full_matrices=False)
    return (u * np.maximum(s - tau, 0.0)) @ vt
