import numpy as np
import pytest

from xms.dataset_io import FeatureMatrix
from xms.errors import ConfigError, DataError
from xms.methods import Preprocessing, SubspaceModel, fit_method, load_model, project, save_model
from tests.conftest import random_paired_dataset


def identity_model(d):
    return SubspaceModel(
        wa=np.eye(d),
        wb=np.eye(d),
        method="cca",
        d=d,
        preprocessing=Preprocessing(center_a=np.zeros(d), center_b=np.zeros(d)),
    )


def test_project_identity_no_preprocessing(rng):
    x = FeatureMatrix(rng.standard_normal((3, 7)))
    out = project(identity_model(3), x, "a")
    np.testing.assert_allclose(out.values, x.values)


def test_project_shape_and_modality_checks(rng):
    model = identity_model(3)
    with pytest.raises(ConfigError):
        project(model, FeatureMatrix(np.zeros((4, 2))), "a")
    with pytest.raises(ConfigError):
        project(model, FeatureMatrix(np.zeros((3, 2))), "c")


def test_round_trip_plain_model(tmp_path, rng):
    model = identity_model(4)
    model.hyperparams["ridge"] = 0.5
    model.metadata["note"] = [1.0, 2.0]
    save_model(model, tmp_path / "m.xms")
    back = load_model(tmp_path / "m.xms")
    assert back.method == "cca" and back.d == 4
    assert np.array_equal(back.wa, model.wa)
    assert back.hyperparams == {"ridge": 0.5}
    assert back.metadata == {"note": [1.0, 2.0]}


def test_round_trip_fitted_model_with_pca(tmp_path, rng):
    ds = random_paired_dataset(rng, n=40, d_a=8, d_b=7, c=3)
    model = fit_method(ds, "gmlda", pca={"mode": "energy", "value": 0.95}, hyperparams={"beta": 2.0})
    save_model(model, tmp_path / "m.xms")
    back = load_model(tmp_path / "m.xms")
    assert np.array_equal(back.wa, model.wa)
    assert np.array_equal(back.preprocessing.pca_a.basis, model.preprocessing.pca_a.basis)
    assert np.array_equal(back.preprocessing.pca_b.mean, model.preprocessing.pca_b.mean)
    assert back.hyperparams == model.hyperparams
    # projections through the loaded model agree bit-for-bit
    np.testing.assert_array_equal(
        project(back, ds.xa, "a").values, project(model, ds.xa, "a").values
    )


def test_load_rejects_garbage(tmp_path):
    path = tmp_path / "junk.xms"
    path.write_bytes(b"not a model at all")
    with pytest.raises(DataError) as err:
        load_model(path)
    assert err.value.code == "malformed_file"


def test_objective_trace_accessor(rng):
    ds = random_paired_dataset(rng, n=30, d_a=5, d_b=4, c=2)
    model = fit_method(ds, "lcfs", hyperparams={"lambda1": 0.1, "lambda2": 0.1})
    trace = model.objective_trace
    assert trace is not None and trace.ndim == 1
    assert identity_model(2).objective_trace is None
