"""Hyperparameter surface: MAP over the (lambda1, lambda2) grid for JFSSL.

Every grid cell reruns the repeated protocol on identical splits, so cells
are directly comparable.  The emitted surface is plot-ready data (no
rendering here).
"""

from xms import BenchmarkConfig, MethodSpec, lambda_sweep, make_synthetic_dataset

grid = [0.0, 0.001, 0.1, 10.0]  # the full study uses {0, 1e-4, ..., 100}^2
spec = {"n": 160, "c": 3, "d_a": 32, "d_b": 32, "seed": 21}

config = BenchmarkConfig(
    dataset={"synthetic": spec},
    n_train=120,
    methods=(MethodSpec("jfssl", "jfssl"),),
    repetitions=3,
)
dataset = make_synthetic_dataset(**spec)
surface = lambda_sweep(config, "jfssl", grid, grid, dataset=dataset)

print("mean MAP, direction a2b (rows: lambda1, columns: lambda2)")
header = "            " + " ".join(f"{l2:>8g}" for l2 in grid)
print(header)
for l1, row in zip(grid, surface["directions"]["a2b"]):
    print(f"l1={l1:>8g} " + " ".join(f"{v:8.4f}" for v in row))

best = max(
    (v, l1, l2)
    for l1, row in zip(grid, surface["directions"]["a2b"])
    for l2, v in zip(grid, row)
)
print(f"\nbest cell: MAP={best[0]:.4f} at lambda1={best[1]:g}, lambda2={best[2]:g}")
print("failed cells:", surface["failed_cells"])
