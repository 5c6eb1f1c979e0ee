"""Common discriminant feature extraction.

Minimizes (normalized same-class cross-modal pair distances)
- alpha * (normalized different-class pair distances)
+ beta * (within-modality k-NN Laplacian smoothness of the projections),
over the stacked projection [wa; wb] with orthonormal columns.  The whole
objective is one quadratic form, so the minimizer is the smallest-eigenvalue
eigenbasis of the assembled matrix.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..dataset_io import PairedMultimodalDataset
from ..errors import ConfigError, NumericalError
from ..numerics import knn_graph, solve_gev
from .cca import centered_views
from .model import Preprocessing, SubspaceModel


@dataclass(frozen=True)
class CdfeConfig:
    alpha: float = 0.5
    beta: float = 0.1
    knn_k: int = 5

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("bad_hyperparam", "alpha and beta must be non-negative")
        if self.knn_k < 1:
            raise ConfigError("bad_k", "knn_k must be positive")


def pair_weights(labels, alpha: float) -> np.ndarray:
    """Signed n x n cross-modal pair weights: same-class/N1 - alpha * diff-class/N2."""
    labels = np.asarray(labels, dtype=np.int64).ravel()
    same = labels[:, None] == labels[None, :]
    n1 = int(same.sum())
    n2 = same.size - n1
    weights = same / n1
    if alpha > 0 and n2 > 0:
        weights = weights - alpha * (~same) / n2
    return weights


def fit_cdfe(train: PairedMultimodalDataset, d: int | None = None, config: CdfeConfig | None = None) -> SubspaceModel:
    t0 = time.perf_counter()
    config = config or CdfeConfig()
    if config.alpha > 0 and train.c < 2:
        raise ConfigError("bad_hyperparam", "inter-class weight alpha > 0 needs at least 2 classes")
    xa, xb, mean_a, mean_b = centered_views(train)
    d_total = train.d_a + train.d_b
    d_max = min(train.d_a, train.d_b)
    d = max(min(train.c - 1, 30, d_max), 1) if d is None else d
    if not 1 <= d <= d_total:
        raise ConfigError("bad_dim", f"d must lie in 1..{d_total}, got {d}")

    s = pair_weights(train.labels, config.alpha)
    row = np.diag(s.sum(axis=1))
    col = np.diag(s.sum(axis=0))
    qaa = xa.values @ row @ xa.values.T
    qbb = xb.values @ col @ xb.values.T
    if config.beta > 0:
        # local consistency: per-edge-average Laplacian smoothness, so its
        # scale matches the pair-normalized separability terms
        k = min(config.knn_k, train.n - 1)
        for x, acc in ((xa, "a"), (xb, "b")):
            graph = knn_graph(x, k)
            lap = graph.laplacian / max(graph.affinity.sum(), 1e-300)
            term = config.beta * (x.values @ lap @ x.values.T)
            if acc == "a":
                qaa = qaa + term
            else:
                qbb = qbb + term
    qab = -(xa.values @ s @ xb.values.T)
    q = np.block([[qaa, qab], [qab.T, qbb]])

    scale = max(np.abs(q).max(), 1e-300)
    if np.abs(q - q.T).max() > 1e-8 * scale:
        raise NumericalError("asymmetric", "assembled CDFE matrix is not symmetric; internal bug")
    q = 0.5 * (q + q.T)

    # smallest eigenpairs of q under stacked orthonormality
    neg_vals, vecs = solve_gev(-q, np.eye(d_total), d, ridge=0.0)
    wa, wb = vecs[: train.d_a], vecs[train.d_a :]

    # objective at a deterministic feasible start vs. at the optimum
    w0 = np.eye(d_total)[:, :d]
    trace = [float(np.trace(w0.T @ q @ w0)), float(-neg_vals.sum())]

    return SubspaceModel(
        wa=np.ascontiguousarray(wa),
        wb=np.ascontiguousarray(wb),
        method="cdfe",
        d=d,
        preprocessing=Preprocessing(center_a=mean_a, center_b=mean_b),
        hyperparams={"alpha": config.alpha, "beta": config.beta, "knn_k": config.knn_k},
        metadata={"objective_trace": trace},
        fit_seconds=time.perf_counter() - t0,
    )
