"""Unconstrained one-dimensional coin betting driven by a potential.

Each round t the player bets x_t in R, the adversary reveals a coin c_t in
[-1, 1] and the player's wealth grows by c_t * x_t.  A potential V induces

* the player  x_t = (V(t, S + 1) - V(t, S - 1)) / 2  with S the past coin sum,
* the adversary  c_t = argmax_{c = +-1} V(t, S + c) - c x_t.

Bets for one-sided coin streams grow like exp(t / 2) and overflow float64
around t = 1400; they are then saturated to the largest finite float and
flagged (``CoinGameState.overflow``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import specfun
from .potentials import Potential, v_erfi

__all__ = [
    "FLOAT_MAX",
    "CoinGameState",
    "GameTrajectory",
    "PlayerPolicy",
    "AdversaryPolicy",
    "bet_and_flag",
    "player_bet",
    "adversary_coin",
    "pde_adversary",
    "scripted_adversary",
    "rademacher_adversary",
    "rademacher_coins",
    "play_game",
    "play_games_batch",
    "three_phase_sequence",
    "wealth_lower_bound",
    "erfi_wealth_upper_bound",
    "verify_value_function_ogd",
    "tail_bound_check",
    "wealth_optimality_bound",
    "optimality_gap_lower",
]

FLOAT_MAX = float(np.finfo(float).max)
_LOG2 = math.log(2.0)
# Coins are accepted up to this much outside [-1, 1] to absorb rounding.
COIN_TOL = 1e-12


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------


def _bet_from_logs(potential, t, S):
    s1, l1 = potential.log_value(t, S + 1.0)
    s2, l2 = potential.log_value(t, S - 1.0)
    s, l = specfun.signed_logaddexp(s1, l1, -s2, l2)
    l = l - _LOG2
    sat = l > specfun.LOG_FLOAT_MAX
    with np.errstate(over="ignore"):
        x = np.where(sat, s * FLOAT_MAX, s * np.exp(np.minimum(l, specfun.LOG_FLOAT_MAX)))
    return x, sat


def bet_and_flag(potential: Potential, t, S_prev):
    """Half central difference of the potential, plus a saturation flag.

    Returns ``(bet, saturated)``; arrays in, arrays out.
    """
    if np.ndim(t) == 0 and np.ndim(S_prev) == 0:
        t, S_prev = float(t), float(S_prev)
        try:
            x = 0.5 * (potential(t, S_prev + 1.0) - potential(t, S_prev - 1.0))
            if math.isfinite(x):
                return x, False
        except OverflowError:
            pass
        x, sat = _bet_from_logs(potential, t, S_prev)
        return float(x), bool(sat)
    t, S = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(S_prev, dtype=float))
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            x = 0.5 * (potential(t, S + 1.0) - potential(t, S - 1.0))
        if np.all(np.isfinite(x)):
            return x, np.zeros(S.shape, bool)
    except OverflowError:
        pass
    # evaluate the safe entries in plain arithmetic, the rest in log space
    _, lmax = potential.log_value(t, np.abs(S) + 1.0)
    # intermediate factors may exceed the value by up to sqrt(t)
    risky = lmax > specfun.LOG_FLOAT_MAX - 2.0 - 0.5 * np.log1p(t)
    x = np.empty(S.shape)
    sat = np.zeros(S.shape, bool)
    safe = ~risky
    if np.any(safe):
        x[safe] = 0.5 * (potential(t[safe], S[safe] + 1.0) - potential(t[safe], S[safe] - 1.0))
    x[risky], sat[risky] = _bet_from_logs(potential, t[risky], S[risky])
    return x, sat


def player_bet(potential: Potential, t, S_prev):
    """x_t = (V(t, S + 1) - V(t, S - 1)) / 2, saturated at the float64 limit."""
    return bet_and_flag(potential, t, S_prev)[0]


def adversary_coin(potential: Potential, t, S_prev: float, x_t: float) -> float:
    """Boundary coin maximizing V(t, S_prev + c) - c x_t; ties go to +1."""
    try:
        gap = potential(t, S_prev + 1.0) - potential(t, S_prev - 1.0) - 2.0 * x_t
        return 1.0 if gap >= 0 else -1.0
    except OverflowError:
        up = potential.value_scaled(t, S_prev + 1.0) - x_t
        down = potential.value_scaled(t, S_prev - 1.0) + x_t
        return 1.0 if up >= down else -1.0


@dataclass(frozen=True)
class PlayerPolicy:
    """Potential-based bettor; the bet depends on the history only through (t, S)."""

    potential: Potential

    def bet(self, t: int, S_prev: float) -> tuple[float, bool]:
        return bet_and_flag(self.potential, t, S_prev)


CoinFn = Callable[[int, float, float], float]


@dataclass(frozen=True)
class AdversaryPolicy:
    """``kind`` is one of ``"pde_argmax"``, ``"scripted"``, ``"rademacher"``."""

    kind: str
    potential: Potential | None = None
    script: tuple[float, ...] | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind == "pde_argmax" and self.potential is None:
            raise ValueError("pde_argmax adversary needs a potential")
        if self.kind == "scripted" and self.script is None:
            raise ValueError("scripted adversary needs a script")
        if self.kind == "rademacher" and self.seed is None:
            raise ValueError("rademacher adversary needs a seed")
        if self.kind not in ("pde_argmax", "scripted", "rademacher"):
            raise ValueError(f"unknown adversary kind {self.kind!r}")

    def start(self, T: int) -> CoinFn:
        """Fresh per-game coin function ``(t, S_prev, x_t) -> c_t``."""
        if self.kind == "pde_argmax":
            pot = self.potential
            return lambda t, S, x: adversary_coin(pot, t, S, x)
        if self.kind == "scripted":
            if len(self.script) < T:
                raise ValueError(f"script has {len(self.script)} coins, game needs {T}")
            script = self.script
            return lambda t, S, x: script[t - 1]
        coins = rademacher_coins(self.seed, T)
        return lambda t, S, x: float(coins[t - 1])


def pde_adversary(potential: Potential) -> AdversaryPolicy:
    return AdversaryPolicy("pde_argmax", potential=potential)


def scripted_adversary(coins: Sequence[float]) -> AdversaryPolicy:
    return AdversaryPolicy("scripted", script=tuple(float(c) for c in coins))


def rademacher_adversary(seed: int) -> AdversaryPolicy:
    """Fair +-1 coins from a seeded generator, ignoring the bets."""
    return AdversaryPolicy("rademacher", seed=int(seed))


def rademacher_coins(seed: int, n: int) -> np.ndarray:
    """First ``n`` coins of the stream; prefixes agree across ``n``."""
    u = np.random.default_rng(seed).random(n)
    return np.where(u < 0.5, -1.0, 1.0)


# ---------------------------------------------------------------------------
# Game engine
# ---------------------------------------------------------------------------


@dataclass
class CoinGameState:
    t: int = 0
    coin_sum: float = 0.0
    wealth: float = 0.0
    coins: list = field(default_factory=list)
    bets: list = field(default_factory=list)
    overflow: bool = False

    def record(self, bet: float, coin: float, saturated: bool = False) -> None:
        if not -1.0 - COIN_TOL <= coin <= 1.0 + COIN_TOL:
            raise ValueError(f"coin {coin} at round {self.t + 1} is outside [-1, 1]")
        self.t += 1
        self.coin_sum += coin
        self.wealth += coin * bet
        self.coins.append(coin)
        self.bets.append(bet)
        self.overflow = self.overflow or saturated

    def recomputed_wealth(self) -> float:
        return math.fsum(c * x for c, x in zip(self.coins, self.bets))


@dataclass
class GameTrajectory:
    bets: np.ndarray
    coins: np.ndarray
    coin_sums: np.ndarray
    wealth: np.ndarray
    overflow: bool = False

    @property
    def T(self) -> int:
        return len(self.bets)

    @property
    def final_wealth(self) -> float:
        return float(self.wealth[-1])

    def to_csv(self, path) -> Path:
        """One row per round: t, bet, coin, coin_sum, wealth (1-based rounds)."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "bet", "coin", "coin_sum", "wealth"])
            for i in range(self.T):
                w.writerow([i + 1] + [repr(float(a[i])) for a in
                                      (self.bets, self.coins, self.coin_sums, self.wealth)])
        return path

    @classmethod
    def from_csv(cls, path) -> "GameTrajectory":
        with Path(path).open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        cols = {k: np.array([float(r[k]) for r in rows]) for k in ("bet", "coin", "coin_sum", "wealth")}
        return cls(cols["bet"], cols["coin"], cols["coin_sum"], cols["wealth"])


def play_game(player: PlayerPolicy, adversary: AdversaryPolicy, T: int) -> GameTrajectory:
    """Run ``T`` rounds; deterministic given the policies (and seed)."""
    if T < 1:
        raise ValueError("T must be at least 1")
    state = CoinGameState()
    coin_fn = adversary.start(T)
    sums = np.empty(T)
    wealth = np.empty(T)
    for t in range(1, T + 1):
        x, sat = player.bet(t, state.coin_sum)
        c = coin_fn(t, state.coin_sum, x)
        state.record(x, c, sat)
        sums[t - 1] = state.coin_sum
        wealth[t - 1] = state.wealth
    return GameTrajectory(np.array(state.bets), np.array(state.coins), sums, wealth, state.overflow)


def play_games_batch(player: PlayerPolicy, coins) -> GameTrajectory:
    """Play many non-adaptive games at once; ``coins`` has shape (games, T).

    Returned arrays have the same shape.  Used for scripted and random coin
    streams where the coins do not depend on the bets.
    """
    coins = np.atleast_2d(np.asarray(coins, dtype=float))
    if np.any(np.abs(coins) > 1.0 + COIN_TOL):
        raise ValueError("coins must lie in [-1, 1]")
    n, T = coins.shape
    bets = np.empty_like(coins)
    sums = np.empty_like(coins)
    wealth = np.empty_like(coins)
    S = np.zeros(n)
    W = np.zeros(n)
    overflow = False
    for t in range(1, T + 1):
        x, sat = bet_and_flag(player.potential, float(t), S)
        overflow = overflow or bool(np.any(sat))
        c = coins[:, t - 1]
        with np.errstate(over="ignore", invalid="ignore"):
            W = W + c * x
        S = S + c
        bets[:, t - 1] = x
        sums[:, t - 1] = S
        wealth[:, t - 1] = W
    return GameTrajectory(bets, coins, sums, wealth, overflow)


# ---------------------------------------------------------------------------
# Matching upper-bound coin sequence
# ---------------------------------------------------------------------------


def _sign(x: float) -> float:
    return -1.0 if x < 0 else 1.0


def three_phase_sequence(T: int, S: float) -> np.ndarray:
    """Coins summing to ``S`` that keep the erfi player's wealth near V(T, S).

    1. c_1 = S - S~, with S~ the integer of parity T - 1 within distance 1 of S
       (ties toward sign(S), +1 when S = 0);
    2. alternating +-1 coins starting at -sign(c_1), so partial sums stay in [-1, 1];
    3. |S~| coins equal to sign(S~).
    """
    T = int(T)
    S = float(S)
    if T < 1:
        raise ValueError("T must be at least 1")
    if abs(S) > T:
        raise ValueError(f"|S| = {abs(S)} exceeds T = {T}")
    parity = (T - 1) % 2
    cands = [k for k in range(math.floor(S) - 1, math.ceil(S) + 2)
             if abs(k) <= T and abs(k) % 2 == parity and abs(S - k) <= 1.0]
    if not cands:  # pragma: no cover - existence is guaranteed for |S| <= T
        raise RuntimeError(f"no admissible integer near S = {S}")
    direction = _sign(S)
    S_int = max(cands, key=lambda k: (-abs(S - k), direction * k))
    c1 = S - S_int
    n_alt = T - abs(S_int)
    coins = np.empty(T)
    coins[0] = c1
    s1 = _sign(c1)
    for t in range(2, n_alt + 1):
        coins[t - 1] = s1 * (-1.0) ** (t - 1)
    coins[n_alt:] = _sign(S_int)
    return coins


# ---------------------------------------------------------------------------
# Wealth bounds
# ---------------------------------------------------------------------------


def wealth_lower_bound(potential: Potential, T, S):
    """Guaranteed wealth of the potential's player: V(T, S) for erfi, V(T, S) - C sqrt(e) for exp."""
    if potential.kind == "Erfi":
        return potential(T, S)
    if potential.kind == "Exp":
        return potential(T, S) - potential.C * math.sqrt(math.e)
    raise ValueError(f"no wealth lower bound for kind {potential.kind}")


def erfi_wealth_upper_bound(C: float, T, S):
    """Wealth reached by the erfi player against ``three_phase_sequence(T, S)`` is at most this."""
    T = np.asarray(T, dtype=float) if np.ndim(T) else float(T)
    if np.any(np.abs(S) > T):
        raise ValueError("|S| must not exceed T")
    r = np.square(S) / T
    exp_ = np.exp if np.ndim(r) else math.exp
    return v_erfi(C)(T, S) + 3.0 * C / 8.0 * exp_(r / 2.0) * (r + 1.0) + 2.0 * C


def verify_value_function_ogd(t, S, C: float = 1.0) -> float:
    """Bellman defect of V = C (S^2 - t) at the minimizing bet; exactly 0 in exact arithmetic.

    min_x max_{c = +-1} [V(t+1, S+c) - c x] - V(t, S), with x the discrete derivative.
    """
    def V(tt, ss):
        return C * (ss * ss - tt)

    x = 0.5 * (V(t + 1, S + 1) - V(t + 1, S - 1))
    worst = max(V(t + 1, S + c) - c * x for c in (-1, 1))
    return worst - V(t, S)


# ---------------------------------------------------------------------------
# Random-walk tail and optimality bounds
# ---------------------------------------------------------------------------


def tail_bound_check(T: int, k: float) -> tuple[float, float]:
    """Exact P(|z_1 + ... + z_T| >= k) for fair +-1 steps, and its Gaussian lower bound.

    The probability is summed exactly in integer arithmetic.
    """
    T = int(T)
    if T < 1 or not k > 0:
        raise ValueError("need T >= 1 and k > 0")
    # sum = 2 j - T for j heads
    hits = sum(math.comb(T, j) for j in range(T + 1) if abs(2 * j - T) >= k)
    exact = float(Fraction(hits, 2**T))
    bound = (math.sqrt(2 / math.pi) * k * math.sqrt(T) / (k * k + T)
             * math.exp(-k * k / (2 * T)) - 1 / math.sqrt(T))
    return exact, bound


LAMBDA_MIN = math.exp((math.sqrt(2) + 1) / 2)


def _check_optimality_domain(lam, T):
    if lam < LAMBDA_MIN:
        raise ValueError(f"lambda must be at least exp((sqrt2 + 1)/2) = {LAMBDA_MIN:.6f}")
    if T < 8 * math.pi * lam**2 * math.log(lam):
        raise ValueError("T must be at least 8 pi lambda^2 log(lambda)")


def wealth_optimality_bound(C: float, lam: float, T: float) -> float:
    """Wealth cap any player with Wel_T >= -C sqrt(T) faces once |S_T| >= sqrt(2 T log lambda)."""
    _check_optimality_domain(lam, T)
    return 2 * math.sqrt(2 * math.pi) * lam * math.sqrt(math.log(lam)) * C * math.sqrt(T)


def optimality_gap_lower(C: float, lam: float, T: float) -> float:
    """C sqrt(T) [lambda / (2 log lambda) - 3/2]: the erfi player's guaranteed wealth at the barrier."""
    _check_optimality_domain(lam, T)
    return C * math.sqrt(T) * (lam / (2 * math.log(lam)) - 1.5)
