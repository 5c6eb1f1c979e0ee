import copy
import json
import math

import numpy as np
import pytest
from scipy import integrate

from xms.bench import (
    BenchmarkConfig,
    MethodSpec,
    box_stats,
    compute_ttests,
    config_from_dict,
    config_to_dict,
    default_method_specs,
    lambda_sweep,
    measure_fit_time,
    run_benchmark,
    students_t_test,
    summary_stats,
)
from xms.errors import ConfigError
from xms.synthetic import make_synthetic_dataset


def t_cdf_oracle(t, dof):
    """Two-sided p-value by numerical integration of the t density."""
    def density(x):
        return (
            math.gamma((dof + 1) / 2)
            / (math.sqrt(dof * math.pi) * math.gamma(dof / 2))
            * (1 + x * x / dof) ** (-(dof + 1) / 2)
        )

    tail, _ = integrate.quad(density, abs(t), np.inf)
    return 2 * tail


def small_dataset(seed=3, n=60):
    return make_synthetic_dataset(n=n, c=3, d_a=10, d_b=9, seed=seed, class_dim=3, instance_dim=4)


def small_config(methods, reps=2, n_train=40, **kwargs):
    return BenchmarkConfig(
        dataset={"synthetic": {"n": 60, "c": 3, "d_a": 10, "d_b": 9, "seed": 3, "class_dim": 3, "instance_dim": 4}},
        n_train=n_train,
        methods=methods,
        repetitions=reps,
        **kwargs,
    )


# ---------------------------------------------------------------------------
# statistics


def test_students_t_identical_samples():
    r = students_t_test([0.5, 0.6, 0.7], [0.5, 0.6, 0.7])
    assert r.t_statistic == 0.0 and r.p_value == 1.0
    assert not r.significant_at_005


def test_students_t_degenerate_zero_variance():
    r = students_t_test([0.0, 0.0, 0.0, 0.0], [1.0, 1.0, 1.0, 1.0])
    assert r.p_value == 0.0 and r.significant_at_005


def test_students_t_matches_integration_oracle():
    rng = np.random.default_rng(11)
    for case in range(100):
        n_a = int(rng.integers(3, 51))
        n_b = int(rng.integers(3, 51))
        a = rng.normal(0.0, 1.0, size=n_a)
        b = rng.normal(0.5, 1.0, size=n_b)
        result = students_t_test(a, b)
        expected = t_cdf_oracle(result.t_statistic, n_a + n_b - 2)
        assert result.p_value == pytest.approx(expected, abs=1e-6)


def test_students_t_symmetry():
    rng = np.random.default_rng(5)
    a = rng.normal(size=20)
    b = rng.normal(0.3, 1.1, size=25)
    assert students_t_test(a, b).p_value == students_t_test(b, a).p_value


def test_students_t_pooled_formula(rng):
    # hand-computed pooled t on a tiny case
    a = np.array([1.0, 2.0, 3.0])
    b = np.array([2.0, 4.0])
    var_a, var_b = a.var(ddof=1), b.var(ddof=1)
    pooled = (2 * var_a + 1 * var_b) / 3
    expected_t = (a.mean() - b.mean()) / math.sqrt(pooled * (1 / 3 + 1 / 2))
    assert students_t_test(a, b).t_statistic == pytest.approx(expected_t)


def test_welch_variant_differs_under_unequal_variance():
    rng = np.random.default_rng(9)
    a = rng.normal(0, 0.1, size=10)
    b = rng.normal(0.5, 3.0, size=40)
    student = students_t_test(a, b)
    welch = students_t_test(a, b, welch=True)
    assert student.p_value != welch.p_value


def test_box_stats_linear_interpolation_oracle():
    stats = box_stats([1, 2, 3, 4, 5])
    assert (stats.median, stats.q25, stats.q75) == (3.0, 2.0, 4.0)
    assert stats.outliers.size == 0


def test_box_stats_constant_vector():
    stats = box_stats([2.5] * 6)
    assert stats.median == stats.q25 == stats.q75 == 2.5
    assert stats.whisker_low == stats.whisker_high == 2.5
    assert stats.outliers.size == 0


def test_box_stats_outlier_rule():
    stats = box_stats([1.0, 2.0, 3.0, 100.0])
    q25, q75 = np.percentile([1.0, 2.0, 3.0, 100.0], [25, 75])
    assert stats.q25 == q25 and stats.q75 == q75
    assert 100.0 > q75 + 1.5 * (q75 - q25)
    assert stats.outliers.tolist() == [100.0]
    assert stats.whisker_high == 3.0


def test_summary_stats_consistency(rng):
    values = rng.uniform(size=50)
    s = summary_stats(values)
    assert s["min"] <= s["mean"] <= s["max"]
    assert s["var"] == pytest.approx(s["std"] ** 2, abs=1e-12)
    assert s["var"] == pytest.approx(values.var(ddof=1))


# ---------------------------------------------------------------------------
# protocol runner


def test_single_repetition_single_method():
    specs = (MethodSpec("cca", "cca", dim=2),)
    report = run_benchmark(small_config(specs, reps=1, n_train=40))
    entry = report["methods"]["cca"]
    for direction in ("a2b", "b2a"):
        block = entry["directions"][direction]
        assert len(block["map_runs"]) == 1
        s = block["summary"]
        assert s["min"] == s["max"] == s["mean"] == block["map_runs"][0]
        assert len(block["cmc_mean"]) == 20  # gallery size = n - n_train
    assert entry["fit_seconds_mean"] > 0


def test_benchmark_deterministic_modulo_environment():
    specs = (MethodSpec("cca", "cca", dim=2), MethodSpec("lcfs", "lcfs"))
    r1 = run_benchmark(small_config(specs, reps=2))
    r2 = run_benchmark(small_config(specs, reps=2))
    for rep in (r1, r2):
        rep.pop("environment")
        for entry in rep["methods"].values():
            entry.pop("fit_seconds_mean")
            entry.pop("fit_seconds_var")
    assert json.dumps(r1, sort_keys=True) == json.dumps(r2, sort_keys=True)


def test_benchmark_records_failures_and_flags_incomplete():
    # dim far beyond the rank bound makes the fitter reject every repetition
    specs = (MethodSpec("cca", "cca-bad", dim=500), MethodSpec("pls", "pls", dim=2))
    report = run_benchmark(small_config(specs, reps=2))
    bad = report["methods"]["cca-bad"]
    assert not bad["complete"]
    assert len(bad["failures"]) == 2
    assert bad["failures"][0]["code"] == "bad_dim"
    assert bad["directions"]["a2b"]["summary"] is None
    good = report["methods"]["pls"]
    assert good["complete"] and len(good["directions"]["a2b"]["map_runs"]) == 2


def test_benchmark_summary_recompute(rng):
    specs = (MethodSpec("pls", "pls", dim=2),)
    report = run_benchmark(small_config(specs, reps=3))
    block = report["methods"]["pls"]["directions"]["b2a"]
    assert block["summary"] == summary_stats(block["map_runs"])


def test_metric_mode_acc_at_k():
    specs = (MethodSpec("cca", "cca", dim=3),)
    report = run_benchmark(small_config(specs, reps=2, metric_mode="acc_at_k", acc_k=5))
    block = report["methods"]["cca"]["directions"]["a2b"]
    assert block["metric"] == "acc@5"
    assert all(0.0 <= v <= 1.0 for v in block["map_runs"])
    # the per-repetition metric is acc@5, so its mean matches cmc_mean[4]
    assert np.mean(block["map_runs"]) == pytest.approx(block["cmc_mean"][4], abs=1e-12)


def test_ttests_from_report():
    specs = (MethodSpec("cca", "cca", dim=2), MethodSpec("lcfs", "lcfs"))
    report = run_benchmark(small_config(specs, reps=4))
    results = compute_ttests(report, "lcfs")
    directions = {(tuple(r["method_pair"]), r["direction"]) for r in results}
    assert (("lcfs", "cca"), "a2b") in directions
    assert (("lcfs", "cca"), "average") in directions
    for r in results:
        assert 0.0 <= r["p_value"] <= 1.0
        assert r["significant_at_005"] == (r["p_value"] < 0.05)


def test_ttests_unknown_baseline():
    specs = (MethodSpec("cca", "cca", dim=2),)
    report = run_benchmark(small_config(specs, reps=2))
    with pytest.raises(ConfigError):
        compute_ttests(report, "nope")


def test_lambda_sweep_degenerate_grid_equals_benchmark():
    spec = MethodSpec("lcfs", "lcfs", hyperparams={"lambda1": 0.0, "lambda2": 0.0})
    config = small_config((spec,), reps=2)
    surface = lambda_sweep(config, "lcfs", [0.0], [0.0])
    report = run_benchmark(config)
    expected = report["methods"]["lcfs"]["directions"]["a2b"]["summary"]["mean"]
    assert surface["directions"]["a2b"][0][0] == pytest.approx(expected, abs=1e-12)


def test_lambda_sweep_zero_cell_lcfs_equals_jfssl():
    config = small_config((MethodSpec("lcfs", "lcfs"),), reps=2)
    s_lcfs = lambda_sweep(config, "lcfs", [0.0], [0.0])
    s_jfssl = lambda_sweep(config, "jfssl", [0.0], [0.0])
    for d in ("a2b", "b2a"):
        assert s_lcfs["directions"][d][0][0] == pytest.approx(s_jfssl["directions"][d][0][0], abs=1e-6)


def test_measure_fit_time_positive():
    ds = small_dataset()
    seconds = measure_fit_time(MethodSpec("cca", "cca", dim=2), ds)
    assert 0 < seconds < 60
    with_pca = measure_fit_time(
        MethodSpec("cca", "cca", pca={"mode": "energy", "value": 0.9}, dim=2), ds, include_pca=True
    )
    assert with_pca > 0


def test_report_schema_keys():
    report = run_benchmark(small_config((MethodSpec("cca", "cca", dim=2),), reps=2))
    assert set(report) == {"config", "methods", "ttests", "box_stats", "environment"}
    entry = report["methods"]["cca"]
    assert {"directions", "fit_seconds_mean", "fit_seconds_var", "failures", "complete", "method"} <= set(entry)
    block = entry["directions"]["a2b"]
    assert {"map_runs", "summary", "cmc_mean", "metric"} <= set(block)
    assert {"min", "max", "mean", "var", "std"} == set(block["summary"])
    box = report["box_stats"]["cca"]["a2b"]
    assert {"median", "q25", "q75", "whisker_low", "whisker_high", "outliers"} == set(box)
    assert {"python", "numpy", "scipy", "platform", "timestamp", "xms_version"} == set(report["environment"])


def test_config_round_trip():
    raw = {
        "dataset": "somewhere",
        "n_train": 30,
        "repetitions": 4,
        "metric_mode": "map",
        "methods": [
            {"name": "cca", "pca": {"mode": "dim", "value": 5}, "dim": 3},
            {"name": "lcfs", "hyperparams": {"lambda1": 0.1, "lambda2": 0.2}},
        ],
    }
    config = config_from_dict(raw)
    assert config.methods[0].label == "pca+cca"
    assert config.methods[1].label == "lcfs"
    echoed = config_to_dict(config)
    assert echoed["n_train"] == 30
    assert config_from_dict(copy.deepcopy(echoed)) == config


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        config_from_dict({"dataset": "x", "n_train": 3, "bogus": 1})
    with pytest.raises(ConfigError):
        config_from_dict({"dataset": "x", "n_train": 3, "methods": [{"name": "cca", "bogus": 1}]})


def test_default_method_specs_cover_all_nine():
    names = [spec.name for spec in default_method_specs()]
    assert names == ["cca", "pls", "blm", "gmlda", "gmmfa", "cdfe", "cca3v", "lcfs", "jfssl"]
    labels = [spec.label for spec in default_method_specs()]
    assert labels[:7] == [f"pca+{n}" for n in names[:7]]


def test_stratified_flag_runs():
    specs = (MethodSpec("cca", "cca", dim=2),)
    report = run_benchmark(small_config(specs, reps=2, stratified=True))
    assert report["methods"]["cca"]["complete"]


def test_hyperparams_by_metric_blocks():
    spec = MethodSpec(
        "lcfs",
        "lcfs",
        hyperparams={"lambda1": 0.0, "lambda2": 0.0},
        hyperparams_by_metric={"acc_at_k": {"lambda1": 0.5}},
    )
    assert spec.resolved_hyperparams("map") == {"lambda1": 0.0, "lambda2": 0.0}
    assert spec.resolved_hyperparams("acc_at_k") == {"lambda1": 0.5, "lambda2": 0.0}
