"""The coin-betting game: lower bounds on wealth and a matching adversary.

Run: python3 demos/02_coin_game.py
"""

import math

import numpy as np

from pde_olo.betting import (
    PlayerPolicy,
    erfi_wealth_upper_bound,
    pde_adversary,
    play_game,
    play_games_batch,
    rademacher_coins,
    scripted_adversary,
    three_phase_sequence,
)
from pde_olo.potentials import v_erfi, v_exp

T = 1000
erfi, ex = v_erfi(1.0), v_exp(1.0)

# %% Random coins: wealth never falls below V(T, S_T) for erfi, or V - C sqrt(e) for exp.
coins = np.stack([rademacher_coins(seed, T) for seed in range(200)])
for name, p, offset in (("erfi", erfi, 0.0), ("exp", ex, math.sqrt(math.e))):
    tr = play_games_batch(PlayerPolicy(p), coins)
    slack = tr.wealth[:, -1] - p(float(T), tr.coin_sums[:, -1]) + offset
    print(f"{name}: min slack over 200 games = {slack.min():.4f}")

# %% The adversary that plays the coin maximizing the player's next potential.
tr = play_game(PlayerPolicy(erfi), pde_adversary(erfi), 200)
# Against its own player both coins tie, so the +1 rule walks S up; wealth
# stays above V(T, S_T), the gap being the accumulated perturbation terms.
print(f"\nargmax adversary, T=200: S_T = {tr.coin_sums[-1]:+.0f}, "
      f"wealth = {tr.final_wealth:.6g}, V(T, S_T) = {erfi(200.0, tr.coin_sums[-1]):.6g}")

# %% A three-phase sequence reaching a chosen S_T holds erfi wealth near the lower bound.
print("\n  S_T   V(T,S_T)   wealth   upper bound")
for s in (0, 20, 60, 100):
    tr = play_game(PlayerPolicy(erfi), scripted_adversary(three_phase_sequence(200, s)), 200)
    print(f"{s:5d} {erfi(200.0, float(s)):10.5g} {tr.final_wealth:10.5g} {erfi_wealth_upper_bound(1.0, 200, s):11.5g}")
