"""One-dimensional absolute loss |x - u*|: regret against the comparator.

Run: python3 demos/03_abs_loss.py
"""

from pde_olo.harness.experiments import ExperimentConfig, LearnerConfig, run_abs1d
from pde_olo.olo import erfi_regret_bound, exp_regret_bound, kt_regret_bound

T = 500
algs = (LearnerConfig("erfi"), LearnerConfig("exp"), LearnerConfig("kt"))

# %% Final regret and the closed-form bounds for a range of comparators.
print("    u*     erfi      exp       kt | erfi bnd  exp bnd   kt bnd")
for u in (0.3, 1.0, 10.0, 100.0):
    recs = run_abs1d(ExperimentConfig("abs1d", T, u_star=u, algorithms=algs))
    r = [rec.final for rec in recs]
    b = [erfi_regret_bound(1.0, T, u), exp_regret_bound(1.0, T, u), kt_regret_bound(algs[2].kt_eps, T, u)]
    print(f"{u:6g} " + " ".join(f"{v:8.1f}" for v in r) + " | " + " ".join(f"{v:8.1f}" for v in b))

# %% After first overshooting a far comparator, erfi backs off less than KT.
recs = run_abs1d(ExperimentConfig("abs1d", T, u_star=100.0, algorithms=algs))
for rec in recs:
    k = int((rec.predictions >= 100.0).argmax())
    print(f"{rec.algorithm:>5}: crosses u*=100 at round {k + 1}, then dips to {rec.predictions[k:].min():.1f}")
