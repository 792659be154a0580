"""Experiment runners: 1-D absolute loss, stochastic coins, and linear regression."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..olo import (
    ALGORITHMS,
    RegretLedger,
    erfi_conjugate_regret_bound,
    erfi_regret_bound,
    exp_regret_bound,
    kt_regret_bound,
    make_learner,
)
from ..potentials import v_erfi
from .data import DatasetMatrix

TASKS = ("abs1d", "stochastic1d", "regression")


@dataclass(frozen=True)
class LearnerConfig:
    algorithm: str
    C: float = 1.0
    eps: float | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if not self.C > 0:
            raise ValueError("C must be positive")
        if self.eps is not None and not self.eps > 0:
            raise ValueError("eps must be positive")

    @property
    def kt_eps(self) -> float:
        return self.eps if self.eps is not None else math.sqrt(math.e) * self.C

    def build(self, dim: int = 1):
        return make_learner(self.algorithm, C=self.C, eps=self.kt_eps, dim=dim)

    def regret_bound(self, T: int, u: float) -> float | None:
        """Closed-form regret bound for this learner, if one is known."""
        if self.algorithm == "erfi":
            return erfi_regret_bound(self.C, T, u)
        if self.algorithm == "exp":
            return exp_regret_bound(self.C, T, u)
        if self.algorithm == "kt":
            return kt_regret_bound(self.kt_eps, T, u)
        return None


@dataclass
class ExperimentConfig:
    task: str
    T: int
    u_star: float | None = None
    gamma: float | None = None
    algorithms: tuple = (LearnerConfig("erfi"), LearnerConfig("exp"), LearnerConfig("kt"))
    runs: int = 1
    seed: int = 0
    output_dir: Path | None = None
    p_minus: float = 0.6  # stochastic task: P[g = -1]
    shuffle: bool = False  # regression task: permute rows per run

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {', '.join(TASKS)}")
        if int(self.T) < 1:
            raise ValueError("T must be at least 1")
        if int(self.runs) < 1:
            raise ValueError("runs must be at least 1")
        if self.task == "abs1d" and self.u_star is None:
            raise ValueError("abs1d needs u_star")
        if self.task == "regression" and self.gamma is None:
            raise ValueError("regression needs gamma")
        if not 0.0 <= self.p_minus <= 1.0:
            raise ValueError("p_minus must be a probability")
        self.T = int(self.T)
        self.runs = int(self.runs)
        self.algorithms = tuple(a if isinstance(a, LearnerConfig) else LearnerConfig(a)
                                for a in self.algorithms)
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")


@dataclass
class RunRecord:
    """Per-round trace of one learner.

    ``metric`` is the running regret(u*) for abs1d, the mean wealth -sum g x
    for stochastic1d and the running TotalLoss for regression.
    """

    algorithm: str
    predictions: np.ndarray
    losses: np.ndarray
    metric: np.ndarray
    metric_name: str
    run: int = 0
    bound: np.ndarray | None = None
    stderr: np.ndarray | None = None
    overflow: bool = False
    grad_violations: int = 0

    def __post_init__(self):
        T = len(self.predictions)
        for name in ("losses", "metric", "bound", "stderr"):
            a = getattr(self, name)
            if a is not None and len(a) != T:
                raise ValueError(f"{name} has length {len(a)}, expected {T}")

    @property
    def T(self) -> int:
        return len(self.predictions)

    @property
    def final(self) -> float:
        return float(self.metric[-1])


# ---------------------------------------------------------------------------
# abs1d
# ---------------------------------------------------------------------------


def _play_abs1d(lc: LearnerConfig, T: int, u_star: float):
    learner = lc.build()
    ledger = RegretLedger(1, keep_predictions=False)
    xs = np.empty(T)
    regret = np.empty(T)
    for t in range(T):
        x = learner.predict()
        g = 1.0 if x >= u_star else -1.0
        ledger.record(x, g)
        learner.update(g)
        xs[t] = x
        regret[t] = ledger.regret(u_star)
    return xs, regret, bool(getattr(learner, "overflow", False))


def conjugate_bound_curve(C: float, T: int, u: float) -> np.ndarray:
    """Tight erfi regret bound at every horizon 1..T."""
    pot = v_erfi(C)
    return np.array([erfi_conjugate_regret_bound(pot, t, u) for t in range(1, T + 1)])


def run_abs1d(config: ExperimentConfig) -> list[RunRecord]:
    """Loss |x - u*| with gradient +1 when x_t >= u*, else -1.  Deterministic."""
    if config.task != "abs1d":
        raise ValueError("config.task must be abs1d")
    u = float(config.u_star)
    records = []
    for lc in config.algorithms:
        xs, regret, overflow = _play_abs1d(lc, config.T, u)
        bound = conjugate_bound_curve(lc.C, config.T, abs(u)) if lc.algorithm == "erfi" else None
        records.append(RunRecord(lc.algorithm, xs, np.abs(xs - u), regret, "regret",
                                 bound=bound, overflow=overflow))
    return records


def regret_difference_sweep(T: int, u_grid, baseline: LearnerConfig, ours: LearnerConfig):
    """Final regret of ``baseline`` minus ``ours`` for each comparator in ``u_grid``."""
    out = []
    for u in u_grid:
        r_base = _play_abs1d(baseline, T, float(u))[1][-1]
        r_ours = _play_abs1d(ours, T, float(u))[1][-1]
        out.append(r_base - r_ours)
    return np.asarray(out)


# ---------------------------------------------------------------------------
# stochastic1d
# ---------------------------------------------------------------------------


def stochastic_gradients(seed: int, runs: int, T: int, p_minus: float = 0.6) -> np.ndarray:
    """Matrix of +-1 gradients, one seeded stream per run; P[g = -1] = p_minus."""
    streams = np.random.SeedSequence(seed).spawn(runs)
    return np.stack([np.where(np.random.default_rng(s).random(T) < p_minus, -1.0, 1.0)
                     for s in streams])


def run_stochastic1d(config: ExperimentConfig) -> list[RunRecord]:
    """Mean negative cumulative loss over seeded runs of iid +-1 gradients.

    With the defaults the coins c = -g have mean +0.2.
    """
    if config.task != "stochastic1d":
        raise ValueError("config.task must be stochastic1d")
    G = stochastic_gradients(config.seed, config.runs, config.T, config.p_minus)
    records = []
    for lc in config.algorithms:
        X = np.empty_like(G)
        overflow = False
        for r in range(config.runs):
            learner = lc.build()
            for t in range(config.T):
                X[r, t] = learner.predict()
                learner.update(G[r, t])
            overflow = overflow or bool(getattr(learner, "overflow", False))
        wealth = -np.cumsum(G * X, axis=1)
        se = (wealth.std(axis=0, ddof=1) / math.sqrt(config.runs) if config.runs > 1
              else np.zeros(config.T))
        records.append(RunRecord(lc.algorithm, X.mean(axis=0), (G * X).mean(axis=0),
                                 wealth.mean(axis=0), "wealth", stderr=se, overflow=overflow))
    return records


# ---------------------------------------------------------------------------
# regression
# ---------------------------------------------------------------------------


def _stream_order(n: int, T: int, seed: int, run: int, shuffle: bool) -> np.ndarray:
    if not shuffle:
        return np.arange(T)
    rng = np.random.default_rng(np.random.SeedSequence([seed, run]))
    return rng.permutation(n)[:T]


def run_regression(config: ExperimentConfig, data: DatasetMatrix) -> list[RunRecord]:
    """Online absolute-loss linear regression on unit-norm feature rows.

    g_t = z_t when <z_t, x_t> >= gamma y_t, else -z_t.  Without shuffling
    every run sees the same stream, so only one run is played.
    """
    if config.task != "regression":
        raise ValueError("config.task must be regression")
    n, d = data.features.shape
    if config.T > n:
        raise ValueError(f"T = {config.T} exceeds the {n} rows available")
    y_all = float(config.gamma) * data.targets
    runs = config.runs if config.shuffle else 1
    records = []
    for r in range(runs):
        order = _stream_order(n, config.T, config.seed, r, config.shuffle)
        Z = data.features[order]
        Y = y_all[order]
        for lc in config.algorithms:
            learner = lc.build(dim=d)
            preds = np.empty(config.T)
            violations = 0
            for t in range(config.T):
                z = Z[t]
                x = learner.predict()
                p = float(np.dot(z, x))
                preds[t] = p
                g = z if p >= Y[t] else -z
                if np.linalg.norm(g) > 1.0 + 1e-9:
                    violations += 1
                learner.update(g)
            losses = np.abs(preds - Y)
            records.append(RunRecord(lc.algorithm, preds, losses, np.cumsum(losses), "total_loss",
                                     run=r, overflow=learner.overflow, grad_violations=violations))
    return records


def mean_final(records: list[RunRecord]) -> dict[str, float]:
    """Average final metric per algorithm across runs."""
    out: dict[str, list[float]] = {}
    for rec in records:
        out.setdefault(rec.algorithm, []).append(rec.final)
    return {k: float(np.mean(v)) for k, v in out.items()}
