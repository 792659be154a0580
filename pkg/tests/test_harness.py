import math

import numpy as np
import pytest

from pde_olo.harness.data import (
    DATASET_ENV,
    DatasetError,
    check_invariants,
    load_dataset,
    synthetic_regression,
)
from pde_olo.harness.experiments import (
    ExperimentConfig,
    LearnerConfig,
    mean_final,
    regret_difference_sweep,
    run_abs1d,
    run_regression,
    run_stochastic1d,
    stochastic_gradients,
)
from pde_olo.harness.output import emit_results, read_csv, sweep_svg, write_csv
from pde_olo.olo import make_learner

ALGS = (LearnerConfig("erfi"), LearnerConfig("exp"), LearnerConfig("kt"))


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig("abs1d", 10)
        with pytest.raises(ValueError):
            ExperimentConfig("regression", 10)
        with pytest.raises(ValueError):
            ExperimentConfig("abs1d", 0, u_star=1)
        with pytest.raises(ValueError):
            ExperimentConfig("abs1d", 10, u_star=1, runs=0)
        with pytest.raises(ValueError):
            ExperimentConfig("walk", 10)
        with pytest.raises(ValueError):
            LearnerConfig("adam")

    def test_default_kt_wealth(self):
        assert LearnerConfig("kt", C=2.0).kt_eps == pytest.approx(2 * math.sqrt(math.e))
        cfg = ExperimentConfig("abs1d", 5, u_star=1.0, algorithms=("erfi", "kt"))
        assert [a.algorithm for a in cfg.algorithms] == ["erfi", "kt"]


class TestAbs1d:
    def test_origin_comparator(self):
        rec = run_abs1d(ExperimentConfig("abs1d", 1, u_star=0.0, algorithms=ALGS))
        for r in rec:
            assert r.predictions[0] == 0.0 and r.final == 0.0

    def test_records(self):
        rec = run_abs1d(ExperimentConfig("abs1d", 200, u_star=3.0, algorithms=ALGS))
        for r in rec:
            assert r.T == 200
            np.testing.assert_allclose(r.metric, np.cumsum(np.abs(r.predictions - 3.0)), rtol=1e-12)
        assert rec[0].bound is not None and rec[1].bound is None
        assert np.all(rec[0].metric <= rec[0].bound + 1e-6)

    def test_every_bound_dominates(self):
        for u in (0.3, 10.0, 100.0):
            for r, lc in zip(run_abs1d(ExperimentConfig("abs1d", 300, u_star=u, algorithms=ALGS)), ALGS):
                assert r.final <= lc.regret_bound(300, u) + 1e-6

    def test_growth_rates_match_early(self):
        e, x = make_learner("erfi"), make_learner("exp")
        xe, xx = [], []
        for _ in range(51):
            xe.append(e.predict())
            xx.append(x.predict())
            e.update(-1.0)
            x.update(-1.0)
        ratios = [(xe[t] - xe[t - 1]) / (xx[t] - xx[t - 1]) for t in range(10, 51)]
        assert abs(ratios[-1] - 1) <= 0.2
        assert abs(ratios[-1] - 1) < abs(ratios[0] - 1)

    def test_sweep(self):
        d = regret_difference_sweep(200, [1.0, 10.0], LearnerConfig("kt"), LearnerConfig("erfi"))
        assert d.shape == (2,) and d[1] > 0


class TestStochastic:
    def test_coin_mean(self):
        G = stochastic_gradients(0, 50, 500)
        assert abs((-G).mean() - 0.2) <= 0.02

    def test_deterministic(self):
        cfg = ExperimentConfig("stochastic1d", 100, runs=5, seed=3, algorithms=ALGS)
        a, b = run_stochastic1d(cfg), run_stochastic1d(cfg)
        for ra, rb in zip(a, b):
            np.testing.assert_array_equal(ra.metric, rb.metric)

    def test_zero_mean_variant_has_no_edge(self):
        cfg = ExperimentConfig("stochastic1d", 200, runs=40, seed=1, algorithms=ALGS, p_minus=0.5)
        for r in run_stochastic1d(cfg):
            assert r.final <= 4 * r.stderr[-1] + 1e-9


class TestData:
    def test_two_rows(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1990,0,5\n2000,10,5\n")
        d = load_dataset(p)
        np.testing.assert_array_equal(d.features, [[0.0, 0.0], [1.0, 0.0]])
        np.testing.assert_array_equal(d.targets, [1990, 2000])

    def test_single_row_is_zero(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1990,3,4\n")
        d = load_dataset(p)
        np.testing.assert_array_equal(d.features, [[0.0, 0.0]])
        assert check_invariants(d) == []

    def test_row_norms(self, tmp_path):
        rng = np.random.default_rng(0)
        raw = np.column_stack([rng.integers(1950, 2010, 300), rng.normal(size=(300, 12)) * 40])
        p = tmp_path / "d.csv"
        np.savetxt(p, raw, delimiter=",")
        d = load_dataset(p)
        assert check_invariants(d) == []
        assert d.features.min() >= 0 and d.features.max() <= 1
        assert np.max(np.abs(np.linalg.norm(d.features, axis=1) - 1)) <= 1e-9

    def test_env_override(self, tmp_path, monkeypatch):
        p = tmp_path / "d.csv"
        p.write_text("1,2,3\n4,5,6\n")
        monkeypatch.setenv(DATASET_ENV, str(p))
        assert load_dataset().n == 2
        monkeypatch.delenv(DATASET_ENV)
        with pytest.raises(FileNotFoundError):
            load_dataset()

    @pytest.mark.parametrize("text,where", [
        ("1,2,3\n4,x,6\n", "row 2, column 2"),
        ("1,2,3\n4,5\n", ":2:"),
        ("1,2,nan\n", "row 1, column 3"),
        ("7\n", ":1:"),
        ("\n\n", "no data rows"),
    ])
    def test_errors_locate_the_problem(self, tmp_path, text, where):
        p = tmp_path / "bad.csv"
        p.write_text(text)
        with pytest.raises(DatasetError, match=where):
            load_dataset(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_dataset(tmp_path / "nope.csv")

    def test_synthetic(self):
        a, b = synthetic_regression(3, 500, 20), synthetic_regression(3, 500, 20)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.targets, b.targets)
        assert check_invariants(a) == []
        assert np.all(a.targets > 0)


class TestRegression:
    def test_zero_targets(self):
        d = synthetic_regression(0, 50, 6)
        for r in run_regression(ExperimentConfig("regression", 50, gamma=0.0, algorithms=ALGS), d):
            assert r.losses[0] == 0.0
            assert r.grad_violations == 0

    def test_too_long(self):
        d = synthetic_regression(0, 50, 6)
        with pytest.raises(ValueError):
            run_regression(ExperimentConfig("regression", 51, gamma=1.0), d)

    def test_sublinear_total_loss(self):
        d = synthetic_regression(1, 4000, 10)
        rec = run_regression(ExperimentConfig("regression", 4000, gamma=1.0,
                                              algorithms=(LearnerConfig("erfi"),)), d)[0]
        L = rec.metric
        assert L[-1] - L[1999] < L[1999] - L[0]

    def test_shuffled_runs(self):
        d = synthetic_regression(2, 300, 5)
        cfg = ExperimentConfig("regression", 200, gamma=1.0, runs=3, shuffle=True, seed=4,
                               algorithms=(LearnerConfig("erfi"),))
        rec = run_regression(cfg, d)
        assert [r.run for r in rec] == [0, 1, 2]
        assert rec[0].final != rec[1].final
        assert len(mean_final(rec)) == 1
        # file order collapses to a single run
        assert len(run_regression(ExperimentConfig("regression", 200, gamma=1.0, runs=3,
                                                   algorithms=(LearnerConfig("erfi"),)), d)) == 1


class TestOutput:
    def test_csv_round_trip(self, tmp_path):
        rec = run_abs1d(ExperimentConfig("abs1d", 60, u_star=5.0, algorithms=ALGS))
        path = write_csv(rec, tmp_path / "r.csv")
        assert path.read_text().splitlines()[0] == \
            "round,algorithm,run,prediction,loss,regret_or_wealth,bound,stderr"
        back = read_csv(path)
        assert [r.algorithm for r in back] == ["erfi", "exp", "kt"]
        for a, b in zip(rec, back):
            np.testing.assert_array_equal(a.predictions, b.predictions)
            np.testing.assert_array_equal(a.metric, b.metric)
            assert (a.bound is None) == (b.bound is None)

    def test_deterministic_bytes(self, tmp_path):
        cfg = ExperimentConfig("stochastic1d", 50, runs=3, algorithms=ALGS)
        outs = []
        for k in range(2):
            paths = emit_results(run_stochastic1d(cfg), tmp_path / str(k), "csv")
            paths += emit_results(run_stochastic1d(cfg), tmp_path / str(k), "svg-plot")
            outs.append([p.read_bytes() for p in paths])
        assert outs[0] == outs[1]

    def test_svg_files(self, tmp_path):
        rec = run_abs1d(ExperimentConfig("abs1d", 100, u_star=100.0, algorithms=ALGS))
        paths = emit_results(rec, tmp_path, "svg-plot", stem="abs1d", u_star=100.0)
        assert [p.name for p in paths] == ["abs1d_metric.svg", "abs1d_predictions.svg"]
        for p in paths:
            text = p.read_text()
            assert text.startswith("<svg") and text.count("<polyline") >= 3
        s = sweep_svg([0.1, 1, 10], [1.0, 2.0, 3.0])
        assert "1e-1" in s and "1e1" in s

    def test_rejects_empty_and_bad_format(self, tmp_path):
        with pytest.raises(ValueError):
            emit_results([], tmp_path)
        rec = run_abs1d(ExperimentConfig("abs1d", 5, u_star=1.0, algorithms=ALGS))
        with pytest.raises(ValueError):
            emit_results(rec, tmp_path, "png")
