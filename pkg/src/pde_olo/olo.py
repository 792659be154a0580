"""Unconstrained online linear optimization learners and regret bounds.

All learners share a two-call protocol: ``predict()`` returns x_t, then
``update(g)`` reveals the gradient g_t.  Gradients must satisfy ||g_t|| <= 1;
larger ones raise ``ValueError`` instead of being clipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .betting import CoinGameState, PlayerPolicy, bet_and_flag, three_phase_sequence
from .potentials import (
    Potential,
    conjugate_maximizer,
    fenchel_conjugate,
    v_erfi,
    v_exp,
    v_linear,
    v_ogd,
)

__all__ = [
    "GRAD_TOL",
    "OloState1d",
    "BettingOlo",
    "BallOGD",
    "FixedDirection",
    "OloReducedState",
    "KtState",
    "RegretLedger",
    "ogd_ball_step",
    "make_learner",
    "ALGORITHMS",
    "erfi_regret_bound",
    "exp_regret_bound",
    "kt_regret_bound",
    "erfi_conjugate_regret_bound",
    "erfi_regret_gap",
    "leading_ratio",
    "lower_bound_gradients",
]

# Rounding slack on the unit gradient-norm constraint.
GRAD_TOL = 1e-9


def _check_scalar_grad(g: float) -> float:
    g = float(g)
    if not abs(g) <= 1.0 + GRAD_TOL:
        raise ValueError(f"gradient {g} has magnitude above 1")
    return g


def _check_vector_grad(g, dim: int) -> np.ndarray:
    g = np.asarray(g, dtype=float).reshape(-1)
    if g.shape != (dim,):
        raise ValueError(f"gradient has shape {g.shape}, expected ({dim},)")
    n = float(np.linalg.norm(g))
    if not n <= 1.0 + GRAD_TOL:
        raise ValueError(f"gradient norm {n} exceeds 1")
    return g


# ---------------------------------------------------------------------------
# One-dimensional learners
# ---------------------------------------------------------------------------


@dataclass
class OloState1d:
    """Potential-based 1-D learner.  ``S`` is minus the sum of past gradients."""

    potential: Potential
    t: int = 1
    S: float = 0.0
    overflow: bool = False

    def predict(self) -> float:
        x, sat = bet_and_flag(self.potential, self.t, self.S)
        self.overflow = self.overflow or sat
        return x

    def update(self, g: float) -> None:
        self.S -= _check_scalar_grad(g)
        self.t += 1


class BettingOlo:
    """OLO learner obtained from a coin-betting player by sending c_t = -g_t."""

    def __init__(self, player: PlayerPolicy):
        self.player = player
        self.game = CoinGameState()
        self._pending: tuple[float, bool] | None = None

    @property
    def overflow(self) -> bool:
        return self.game.overflow

    def predict(self) -> float:
        self._pending = self.player.bet(self.game.t + 1, self.game.coin_sum)
        return self._pending[0]

    def update(self, g: float) -> None:
        g = _check_scalar_grad(g)
        if self._pending is None:
            self.predict()
        x, sat = self._pending
        self.game.record(x, -g, sat)
        self._pending = None


@dataclass
class KtState:
    """Krichevsky-Trofimov bettor: x_t = (-sum g / t) * (eps - sum g x)."""

    eps: float
    t: int = 1
    grad_sum: float = 0.0
    wealth_term: float = field(default=math.nan)
    _last: float = 0.0
    overflow = False  # KT bets stay bounded by the wealth term

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if math.isnan(self.wealth_term):
            self.wealth_term = float(self.eps)

    def predict(self) -> float:
        self._last = (-self.grad_sum / self.t) * self.wealth_term
        return self._last

    def update(self, g: float) -> None:
        g = _check_scalar_grad(g)
        self.wealth_term -= g * self._last
        self.grad_sum += g
        self.t += 1
        self._last = 0.0


# ---------------------------------------------------------------------------
# Direction learners and the polar reduction
# ---------------------------------------------------------------------------


def ogd_ball_step(z, g, t: int) -> np.ndarray:
    """Projected gradient step on the unit ball with step size 1/sqrt(t)."""
    z = np.asarray(z, dtype=float) - np.asarray(g, dtype=float) / math.sqrt(t)
    n = float(np.linalg.norm(z))
    return z / n if n > 1.0 else z


class BallOGD:
    """OGD on the unit ball started at the origin."""

    def __init__(self, dim: int):
        self.dim = int(dim)
        self.z = np.zeros(self.dim)
        self.t = 1

    def predict(self) -> np.ndarray:
        return self.z.copy()

    def update(self, g) -> None:
        self.z = ogd_ball_step(self.z, g, self.t)
        self.t += 1


class FixedDirection:
    """Direction learner that never moves; useful for checking the reduction."""

    def __init__(self, z):
        z = np.asarray(z, dtype=float).reshape(-1)
        if np.linalg.norm(z) > 1.0 + GRAD_TOL:
            raise ValueError("direction must lie in the unit ball")
        self.z = z
        self.dim = z.size

    def predict(self) -> np.ndarray:
        return self.z.copy()

    def update(self, g) -> None:
        pass


class OloReducedState:
    """d-dimensional learner x_t = y_t z_t from a 1-D magnitude learner and a ball learner.

    The magnitude learner sees the scalar gradient <g_t, z_t>.
    """

    def __init__(self, inner, dim: int | None = None, direction=None):
        if direction is None:
            if dim is None:
                raise ValueError("give a dimension or a direction learner")
            direction = BallOGD(dim)
        self.inner = inner
        self.direction = direction
        self.dim = direction.dim
        self.t = 1
        self._z: np.ndarray | None = None
        self._y = 0.0

    @property
    def z(self) -> np.ndarray:
        return self.direction.predict()

    @property
    def overflow(self) -> bool:
        return bool(getattr(self.inner, "overflow", False))

    def predict(self) -> np.ndarray:
        self._y = self.inner.predict()
        self._z = self.direction.predict()
        return self._y * self._z

    def update(self, g) -> None:
        g = _check_vector_grad(g, self.dim)
        if self._z is None:
            self.predict()
        self.inner.update(float(np.dot(g, self._z)))
        self.direction.update(g)
        self._z = None
        self.t += 1


# ---------------------------------------------------------------------------
# Regret accounting
# ---------------------------------------------------------------------------


class RegretLedger:
    """Stores sum <g_t, x_t> and sum g_t, which price the regret at every comparator."""

    def __init__(self, dim: int = 1, keep_predictions: bool = True):
        self.dim = int(dim)
        self.cumulative_loss = 0.0
        self.gradient_sum = np.zeros(self.dim)
        self.keep_predictions = keep_predictions
        self.predictions: list = []

    def record(self, x, g) -> float:
        x = np.asarray(x, dtype=float).reshape(-1)
        g = np.asarray(g, dtype=float).reshape(-1)
        if x.shape != (self.dim,) or g.shape != (self.dim,):
            raise ValueError(f"expected vectors of dimension {self.dim}")
        loss = float(np.dot(g, x))
        self.cumulative_loss += loss
        self.gradient_sum += g
        if self.keep_predictions:
            self.predictions.append(x[0] if self.dim == 1 else x.copy())
        return loss

    def regret(self, u) -> float:
        u = np.asarray(u, dtype=float).reshape(-1)
        if u.shape != (self.dim,):
            raise ValueError(f"comparator has dimension {u.size}, ledger has {self.dim}")
        return self.cumulative_loss - float(np.dot(self.gradient_sum, u))


# ---------------------------------------------------------------------------
# Factory
# ---------------------------------------------------------------------------

_POTENTIALS = {"erfi": v_erfi, "exp": v_exp, "ogd-potential": v_ogd, "linear": v_linear}
ALGORITHMS = tuple(_POTENTIALS) + ("kt",)


def make_learner(algorithm: str, C: float = 1.0, eps: float | None = None, dim: int = 1):
    """Build a learner from ``{algorithm, C or eps, dimension}``.

    KT defaults to eps = sqrt(e) C.  For ``dim > 1`` the 1-D learner is wrapped
    in the polar reduction with OGD on the unit ball.
    """
    if algorithm == "kt":
        inner = KtState(eps if eps is not None else math.sqrt(math.e) * C)
    elif algorithm in _POTENTIALS:
        inner = OloState1d(_POTENTIALS[algorithm](C))
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
    if dim < 1:
        raise ValueError("dimension must be at least 1")
    return inner if dim == 1 else OloReducedState(inner, dim)


# ---------------------------------------------------------------------------
# Regret bounds
# ---------------------------------------------------------------------------


def _check_bound_args(C, T, u):
    if not C > 0 or not T >= 1 or not u >= 0:
        raise ValueError("need C > 0, T >= 1, u >= 0")


def erfi_regret_bound(C: float, T: float, u: float) -> float:
    """C sqrt(T) + u sqrt(2T) [sqrt(log(1 + u / (sqrt2 C))) + 2]."""
    _check_bound_args(C, T, u)
    return C * math.sqrt(T) + u * math.sqrt(2 * T) * (
        math.sqrt(math.log1p(u / (math.sqrt(2) * C))) + 2)


def exp_regret_bound(C: float, T: float, u: float) -> float:
    """C sqrt(e) + u sqrt(2T) [sqrt(log(1 + u T / C)) + 1]."""
    _check_bound_args(C, T, u)
    return C * math.sqrt(math.e) + u * math.sqrt(2 * T) * (math.sqrt(math.log1p(u * T / C)) + 1)


def kt_regret_bound(eps: float, T: float, u: float) -> float:
    """eps + |u| sqrt(T log(1 + 24 u^2 T^2 / eps^2))."""
    if not eps > 0 or not T >= 1:
        raise ValueError("need eps > 0, T >= 1")
    u = abs(u)
    return eps + u * math.sqrt(T * math.log1p(24 * u * u * T * T / (eps * eps)))


def erfi_conjugate_regret_bound(potential: Potential, T: float, u: float) -> float:
    """Conjugate of the erfi wealth bound, the tightest regret bound for that learner."""
    if potential.kind != "Erfi":
        raise ValueError("conjugate bound is stated for the erfi potential")
    return fenchel_conjugate(potential, T, abs(u))


def _gap_anchor(C: float, T: float, u: float) -> float:
    return math.sqrt(2 * T) * (math.sqrt(math.log1p(u / (math.sqrt(2) * C))) + 1)


def erfi_regret_gap(C: float, T: float, u: float) -> float:
    """Additive gap between the erfi regret upper and lower bounds.

    (3C/8) e^{s^2/2T} (s^2/T + 1) + 2C  at  s = sqrt(2T) [sqrt(log(1 + u/(sqrt2 C))) + 1];
    valid for 0 <= u <= (3/8) C (T + 3) e^{T/2}.
    """
    _check_bound_args(C, T, u)
    if u > 0 and math.log(u) > math.log(0.375 * C * (T + 3)) + T / 2:
        raise ValueError("u is too large for the gap statement at this T")
    r = _gap_anchor(C, T, u) ** 2 / T
    return 0.375 * C * math.exp(r / 2) * (r + 1) + 2 * C


def leading_ratio(C: float, U: float, T: float = 1.0) -> float:
    """erfi_regret_bound(C, T, U) / (U sqrt(T log U)); T cancels analytically."""
    if not U > 1 or not T >= 1:
        raise ValueError("need U > 1, T >= 1")
    return erfi_regret_bound(C, T, U) / (U * math.sqrt(T * math.log(U)))


def lower_bound_gradients(potential: Potential, T: int, u: float) -> np.ndarray:
    """Gradient stream forcing regret(u) >= conjugate bound - gap on the erfi learner.

    Targets S_T = argmax_S [S u - V(T, S)] (clipped to [-T, T]) and feeds the
    negated three-phase coin sequence for that S.
    """
    S = conjugate_maximizer(potential, T, u)
    S = min(max(S, -float(T)), float(T))
    return -three_phase_sequence(T, S)
