"""Four potentials that solve the backward heat equation, and what they bet.

Run: python3 demos/01_potentials.py
"""

import math

import numpy as np

from pde_olo import specfun
from pde_olo.betting import player_bet
from pde_olo.potentials import pde_residual, v_erfi, v_exp, v_linear, v_ogd

# %% Every potential V(t, S) here satisfies V_t = -V_SS / 2.
pots = {"ogd": v_ogd(1.0), "exp": v_exp(1.0), "erfi": v_erfi(1.0), "linear": v_linear(1.0)}
t = np.array([1.0, 10.0, 100.0, 100.0])
S = np.array([0.0, 3.0, -20.0, 25.0])
for name, p in pots.items():
    res = np.abs(pde_residual(p, t, S)).max()
    print(f"{name:>7}: V = {np.array2string(p(t, S), precision=4)}  max |V_t + V_SS/2| = {res:.1e}")

# %% The erfi potential is the S-antiderivative of the exp potential.
# Its shape 2*D(z)*exp(z^2) (D = Dawson) grows like exp(z^2)/z, so the bet
# ramps up more gently than the exp potential's.
print("\n   z   erfi shape   exp(z^2)")
for z in (0.0, 0.5, 1.0, 2.0, 4.0):
    print(f"{z:4.1f} {specfun.erfi_shape(z):12.5g} {math.exp(z * z):10.5g}")

# %% Bets at t = 100 as the coin sum grows.
print("\n   S   erfi bet    exp bet")
for s in (0, 5, 10, 20, 40):
    print(f"{s:4d} {player_bet(pots['erfi'], 100, s):10.4g} {player_bet(pots['exp'], 100, s):10.4g}")
