"""Online linear regression with the polar reduction (direction by OGD, scale by betting).

Run: python3 demos/04_regression.py [path/to/data.csv]
Without a path the seeded synthetic dataset is used.
"""

import sys

from pde_olo.harness.data import check_invariants, load_dataset, synthetic_regression
from pde_olo.harness.experiments import ExperimentConfig, LearnerConfig, mean_final, run_regression

if len(sys.argv) > 1:
    data = load_dataset(sys.argv[1], max_rows=20000)
else:
    data = synthetic_regression(seed=0, T=5000, d=90)
print(f"{data.n} rows, d = {data.d}, preprocessing issues: {check_invariants(data) or 'none'}")

# %% TotalLoss = sum |<z_t, x_t> - gamma y_t|, one pass in file order.
algs = (LearnerConfig("erfi"), LearnerConfig("exp"), LearnerConfig("kt"))
for gamma in (0.1, 1.0, 10.0):
    recs = run_regression(ExperimentConfig("regression", data.n, gamma=gamma, algorithms=algs), data)
    print(f"gamma = {gamma:5g}: " + "  ".join(f"{k} {v:.1f}" for k, v in mean_final(recs).items()))
