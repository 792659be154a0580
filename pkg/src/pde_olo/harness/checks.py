"""Invariant suites behind ``pde-olo verify``.

Each suite returns a list of ``Check`` results; a suite passes when all of
its checks do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import specfun
from ..betting import (
    PlayerPolicy,
    erfi_wealth_upper_bound,
    play_game,
    play_games_batch,
    rademacher_coins,
    scripted_adversary,
    tail_bound_check,
    three_phase_sequence,
    verify_value_function_ogd,
)
from ..olo import erfi_conjugate_regret_bound, erfi_regret_bound
from ..potentials import (
    hermite_residual,
    pde_residual,
    perturbation,
    v_erfi,
    v_exp,
    v_ogd,
)

SUITES = ("pde", "ito", "bounds", "tail")


@dataclass
class Check:
    name: str
    ok: bool
    detail: str


def _grid(t_max=100):
    ts, ss = [], []
    for t in range(1, t_max + 1):
        r = math.sqrt(10 * t)
        for S in np.linspace(-r, r, 9):
            ts.append(float(t))
            ss.append(float(S))
    return np.array(ts), np.array(ss)


HERMITE_SHAPES = {
    "ogd": (1.0, lambda z: 2 * z * z - 1),
    "exp": (-0.5, lambda z: np.exp(z * z)),
    "erfi": (0.5, specfun.erfi_shape),
}


def suite_pde() -> list[Check]:
    t, S = _grid()
    out = []
    for name, pot in (("ogd", v_ogd(1.0)), ("exp", v_exp(1.0)), ("erfi", v_erfi(1.0))):
        res = np.abs(pde_residual(pot, t, S)) / (1 + np.abs(pot(t, S)))
        worst = float(res.max())
        out.append(Check(f"heat equation residual, {name}", worst <= 1e-6,
                         f"max |residual| / (1 + |V|) = {worst:.2e}"))
    # self-similar variable z = S / sqrt(2t) over the same grid
    z = np.linspace(-math.sqrt(5), math.sqrt(5), 61)
    for name, (alpha, g) in HERMITE_SHAPES.items():
        res = np.abs(hermite_residual(alpha, g, z)) / (1 + np.abs(g(z)))
        worst = float(res.max())
        out.append(Check(f"Hermite residual, {name}", worst <= 1e-5, f"max relative = {worst:.2e}"))
    return out


def _ito_defect(pot, coins) -> float:
    traj = play_game(PlayerPolicy(pot), scripted_adversary(coins), len(coins))
    worst = 0.0
    S_prev = 0.0
    for t in range(1, traj.T + 1):
        S = traj.coin_sums[t - 1]
        lhs = pot(t, S) - pot(t - 1, S_prev)
        rhs = traj.coins[t - 1] * traj.bets[t - 1] + perturbation(pot, t, S_prev)
        worst = max(worst, abs(lhs - rhs) / (1 + abs(pot(t, S))))
        S_prev = S
    return worst


def suite_ito() -> list[Check]:
    out = []
    coins = rademacher_coins(7, 200)
    for name, pot in (("ogd", v_ogd(1.0)), ("exp", v_exp(1.0)), ("erfi", v_erfi(1.0))):
        worst = _ito_defect(pot, coins)
        out.append(Check(f"Ito identity, {name}", worst <= 1e-9, f"max defect = {worst:.2e}"))
    worst = max(abs(verify_value_function_ogd(t, S)) for t in range(0, 101) for S in range(-t, t + 1))
    out.append(Check("exact quadratic value function", worst <= 1e-9, f"max defect = {worst:.2e}"))
    ok = True
    for t in range(1, 201):
        S = np.arange(-(t - 1), t, dtype=float)
        d_erfi = perturbation(v_erfi(1.0), float(t), S)
        d_exp = perturbation(v_exp(1.0), float(t), S)
        if t == 1:
            ok &= bool(np.all((d_erfi <= 1e-12) & (d_erfi >= -1 - 1e-12)))
            ok &= bool(np.all(np.abs(d_exp - math.sqrt(math.e)) <= 1e-12))
            continue
        r = S * S / (t - 1)
        e = np.exp(r / 2)
        lo_erfi = -(1 / 8) * (t - 1) ** -1.5 * e * (r + 1)
        lo_exp = -(1 / 8) * (t - 1) ** -2.5 * e * (r * r + 6 * r + 3)
        tol_erfi = 1e-9 * (1 + np.abs(v_erfi(1.0)(float(t), S)))
        tol_exp = 1e-9 * (1 + np.abs(v_exp(1.0)(float(t), S)))
        ok &= bool(np.all((d_erfi <= tol_erfi) & (d_erfi >= lo_erfi - tol_erfi)))
        ok &= bool(np.all((d_exp <= tol_exp) & (d_exp >= lo_exp - tol_exp)))
    out.append(Check("perturbation bounds, t <= 200", ok, "erfi and exp two-sided bounds"))
    return out


def suite_bounds() -> list[Check]:
    out = []
    T = 500
    coins = np.stack([rademacher_coins(s, T) for s in range(100)])
    pot = v_erfi(1.0)
    tr = play_games_batch(PlayerPolicy(pot), coins)
    slack = float(np.min(tr.wealth[:, -1] - pot(float(T), tr.coin_sums[:, -1])))
    out.append(Check("erfi wealth lower bound", slack >= -1e-7, f"min wealth - V = {slack:.3e}"))
    ex = v_exp(1.0)
    tr = play_games_batch(PlayerPolicy(ex), coins)
    slack = float(np.min(tr.wealth[:, -1] - ex(float(T), tr.coin_sums[:, -1]) + math.sqrt(math.e)))
    out.append(Check("exp wealth lower bound", slack >= -1e-7, f"min slack = {slack:.3e}"))
    worst = math.inf
    for T in (10, 50):
        for S in range(-T, T + 1):
            traj = play_game(PlayerPolicy(pot), scripted_adversary(three_phase_sequence(T, S)), T)
            worst = min(worst, erfi_wealth_upper_bound(1.0, T, S) - traj.final_wealth)
    out.append(Check("three-phase wealth upper bound", worst >= -1e-7, f"min slack = {worst:.3e}"))
    gaps = [erfi_regret_bound(1.0, T, u) - erfi_conjugate_regret_bound(pot, T, u)
            for T in (10, 100, 1000) for u in (0.0, 0.5, 3.0, 30.0, 300.0)]
    out.append(Check("conjugate bound below closed form", min(gaps) >= -1e-9,
                     f"min gap = {min(gaps):.3e}"))
    return out


def suite_tail() -> list[Check]:
    out = []
    for T in (100, 400, 900):
        for m in (0.5, 1.0, 1.5, 2.0):
            exact, bound = tail_bound_check(T, m * math.sqrt(T))
            out.append(Check(f"tail T={T} k={m}sqrtT", exact >= bound,
                             f"exact {exact:.6f} >= bound {bound:.6f}"))
    return out


def run_suite(name: str) -> list[Check]:
    suites = {"pde": suite_pde, "ito": suite_ito, "bounds": suite_bounds, "tail": suite_tail}
    if name not in suites:
        raise ValueError(f"unknown suite {name!r}")
    return suites[name]()
