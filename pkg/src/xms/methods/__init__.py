"""Method fitters and the PCA-aware fitting front end."""

from __future__ import annotations

from dataclasses import replace

from ..dataset_io import PairedMultimodalDataset
from ..errors import ConfigError
from ..preprocess import pca_apply, pca_fit
from .cca import fit_cca, fit_cca3v
from .cdfe import CdfeConfig, fit_cdfe
from .coupled import SparseCoupledConfig, fit_jfssl, fit_lcfs
from .gma import GmaConfig, fit_blm, fit_gma, fit_gmlda, fit_gmmfa
from .model import METHOD_NAMES, Preprocessing, SubspaceModel, load_model, project, save_model
from .pls import PlsDecomposition, fit_pls

__all__ = [
    "METHOD_NAMES",
    "CdfeConfig",
    "GmaConfig",
    "PlsDecomposition",
    "Preprocessing",
    "SparseCoupledConfig",
    "SubspaceModel",
    "fit_blm",
    "fit_cca",
    "fit_cca3v",
    "fit_cdfe",
    "fit_gma",
    "fit_gmlda",
    "fit_gmmfa",
    "fit_jfssl",
    "fit_lcfs",
    "fit_method",
    "fit_pls",
    "load_model",
    "project",
    "save_model",
]

_GEV_DIM_METHODS = {"cca", "pls", "blm", "gmlda", "gmmfa", "cdfe", "cca3v"}


def normalize_method_name(name: str) -> str:
    canonical = name.strip().lower().replace("-", "").replace("_", "")
    if canonical not in METHOD_NAMES:
        raise ConfigError("bad_method", f"unknown method {name!r}; choose from {', '.join(METHOD_NAMES)}")
    return canonical


def _apply_pca(train: PairedMultimodalDataset, pca: dict | None):
    """Fit per-modality PCA on the training views; returns (reduced dataset, models)."""
    if not pca:
        return train, None, None
    kind = pca.get("mode")
    if kind == "energy":
        kwargs = {"energy": float(pca["value"])}
    elif kind == "dim":
        kwargs = {"k": int(pca["value"])}
    else:
        raise ConfigError("bad_pca", f"pca mode must be 'energy' or 'dim', got {kind!r}")
    pca_a = pca_fit(train.xa, **kwargs)
    pca_b = pca_fit(train.xb, **kwargs)
    reduced = PairedMultimodalDataset(
        pca_apply(pca_a, train.xa),
        pca_apply(pca_b, train.xb),
        train.labels,
        train.c,
        sample_ids=train.sample_ids,
        strict=False,
    )
    return reduced, pca_a, pca_b


def fit_method(
    train: PairedMultimodalDataset,
    method: str,
    dim: int | None = None,
    pca: dict | None = None,
    hyperparams: dict | None = None,
) -> SubspaceModel:
    """Fit one named method, optionally behind per-modality PCA.

    ``pca`` is ``{"mode": "energy"|"dim", "value": ...}`` or None.  PCA is fit
    on the training views only and folded into the returned model so that
    ``project`` accepts raw-space features.  ``fit_seconds`` covers only the
    method fit, not the PCA.
    """
    method = normalize_method_name(method)
    hp = dict(hyperparams or {})
    if method in ("lcfs", "jfssl") and dim is not None:
        raise ConfigError("bad_dim", f"{method} projects into the label space; its dimension is fixed at c")

    def build(cls, **fixed):
        try:
            return cls(**fixed, **hp)
        except TypeError as exc:
            raise ConfigError("bad_hyperparam", f"{method}: {exc}") from exc

    reduced, pca_a, pca_b = _apply_pca(train, pca)

    if method == "cca":
        model = fit_cca(reduced, d=dim, ridge=hp.pop("ridge", None))
    elif method == "pls":
        model, _ = fit_pls(reduced, d=dim)
    elif method in ("blm", "gmlda", "gmmfa"):
        model = fit_gma(reduced, d=dim, config=build(GmaConfig, variant=method))
        hp = {}
    elif method == "cdfe":
        model = fit_cdfe(reduced, d=dim, config=build(CdfeConfig))
        hp = {}
    elif method == "cca3v":
        model = fit_cca3v(reduced, d=dim, ridge=hp.pop("ridge", None))
    else:
        fitter = fit_lcfs if method == "lcfs" else fit_jfssl
        model = fitter(reduced, config=build(SparseCoupledConfig))
        hp = {}
    if hp:
        raise ConfigError("bad_hyperparam", f"unused hyperparameters for {method}: {sorted(hp)}")

    if pca_a is not None:
        model = replace(
            model,
            preprocessing=Preprocessing(
                center_a=model.preprocessing.center_a,
                center_b=model.preprocessing.center_b,
                pca_a=pca_a,
                pca_b=pca_b,
            ),
        )
    return model
