"""The repeated-split benchmark: summaries, box stats, t-tests, reports.

Runs a reduced version of the full protocol (fewer repetitions, four
methods) and shows every statistical artifact the benchmark emits.
"""

import json
import tempfile
from pathlib import Path

from xms import BenchmarkConfig, MethodSpec, compute_ttests, run_benchmark
from xms.bench import write_report_csv, write_report_json

config = BenchmarkConfig(
    dataset={"synthetic": {"n": 200, "c": 3, "d_a": 48, "d_b": 48, "seed": 11}},
    n_train=150,
    methods=(
        MethodSpec("cca", "pca+cca", pca={"mode": "energy", "value": 0.98}),
        MethodSpec("gmlda", "pca+gmlda", pca={"mode": "energy", "value": 0.98}, hyperparams={"beta": 4.0}),
        MethodSpec("lcfs", "lcfs"),
        MethodSpec("jfssl", "jfssl"),
    ),
    repetitions=10,  # the full protocol uses 50
    base_seed=0,
)

report = run_benchmark(config)
report["ttests"] = compute_ttests(report, baseline="lcfs")

print(f"{'method':>10s} {'dir':>4s} {'min':>7s} {'max':>7s} {'mean':>7s} {'var':>9s} {'std':>7s}")
for label, entry in report["methods"].items():
    for direction in ("a2b", "b2a"):
        s = entry["directions"][direction]["summary"]
        print(
            f"{label:>10s} {direction:>4s} {s['min']:7.4f} {s['max']:7.4f} {s['mean']:7.4f} "
            f"{s['var']:9.6f} {s['std']:7.4f}"
        )

print("\nbox-plot statistics (a2b):")
for label, stats in report["box_stats"].items():
    b = stats["a2b"]
    print(
        f"{label:>10s} median={b['median']:.4f} iqr=[{b['q25']:.4f}, {b['q75']:.4f}] "
        f"whiskers=[{b['whisker_low']:.4f}, {b['whisker_high']:.4f}] outliers={len(b['outliers'])}"
    )

print("\nt-tests against LCFS (null: same mean, pooled variance):")
for t in report["ttests"]:
    pair = " vs ".join(t["method_pair"])
    print(f"{pair:>22s} [{t['direction']:>7s}] p={t['p_value']:.3g} significant={t['significant_at_005']}")

print("\nmean fit seconds:")
for label, entry in report["methods"].items():
    print(f"{label:>10s} {entry['fit_seconds_mean']:.3f}s (var {entry['fit_seconds_var']:.2g})")

with tempfile.TemporaryDirectory() as tmp:
    write_report_json(report, Path(tmp) / "report.json")
    write_report_csv(report, Path(tmp) / "report.csv")
    print("\nCSV mirror of the summary table:")
    print((Path(tmp) / "report.csv").read_text())
    top = json.loads((Path(tmp) / "report.json").read_text())
    print("report JSON top-level keys:", sorted(top))
