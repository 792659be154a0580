"""Potentials solving the one-dimensional backward heat equation.

A potential V(t, S) satisfies  dV/dt = -1/2 d^2V/dS^2  and is convex in S.
Its half central difference in S is the bet of the induced coin-betting player.

Stock potentials:

* :func:`v_ogd`     C (S^2 - t)                         (online gradient descent)
* :func:`v_exp`     C t^{-1/2} exp(S^2 / 2t)             (classical parameter-free)
* :func:`v_erfi`    C sqrt(t) [2 dei(S / sqrt(2t)) - 1]   (``dei`` = double_exp_integral)
* :func:`v_linear`  C S

All evaluation methods broadcast over numpy arrays.  Scalars in, floats out.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import specfun
from .specfun import ScaledValue

__all__ = [
    "ConvergenceError",
    "PotentialParams",
    "Derivatives",
    "Potential",
    "OGDPotential",
    "ExpPotential",
    "ErfiPotential",
    "LinearPotential",
    "CombinationPotential",
    "v_ogd",
    "v_exp",
    "v_erfi",
    "v_linear",
    "shift",
    "combine",
    "discrete_derivatives",
    "perturbation",
    "pde_residual",
    "hermite_residual",
    "analytic_derivatives",
    "conjugate_maximizer",
    "fenchel_conjugate",
]

# Relative steps for the five-point stencils: h_S = FD_STEP_S * sqrt(t), h_t = FD_STEP_T * t.
FD_STEP_S = 2e-3
FD_STEP_T = 1e-3
HERMITE_STEP = 5e-3
MAX_BISECTION_STEPS = 200


class ConvergenceError(RuntimeError):
    """Raised when a root search fails to bracket or converge."""


@dataclass(frozen=True)
class PotentialParams:
    """Scale ``C`` and the shifts: V(t, S) = C0 + V_C(t + tau, S + S0)."""

    C: float = 1.0
    C0: float = 0.0
    tau: float = 0.0
    S0: float = 0.0

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError(f"C must be positive, got {self.C}")
        if not self.tau >= 0:
            raise ValueError(f"tau must be nonnegative, got {self.tau}")


@dataclass(frozen=True)
class Derivatives:
    d_t: float
    d_tt: float
    d_S: float
    d_SS: float
    d_SSS: float
    d_SSSS: float


def _scalar_in(*args) -> bool:
    return all(np.ndim(a) == 0 for a in args)


def _out(x, scalar):
    return float(x) if scalar else x


class Potential:
    """Base class.  Subclasses implement ``_raw``, ``_raw_grad`` and optionally ``_raw_log``
    in the shifted coordinates (t + tau, S + S0), without the C0 offset."""

    kind: str = "abstract"
    #: affine in S, so negative weights keep combinations convex
    is_affine: bool = False
    #: only the anchor (0, 0) is defined on the t = 0 slice
    anchored_at_zero: bool = False

    def __init__(self, params: PotentialParams | None = None):
        self.params = params if params is not None else PotentialParams()

    def __repr__(self):
        return f"{type(self).__name__}({self.params})"

    @property
    def C(self) -> float:
        return self.params.C

    @property
    def is_shifted(self) -> bool:
        p = self.params
        return (p.C0, p.tau, p.S0) != (0.0, 0.0, 0.0)

    def with_params(self, params: PotentialParams) -> "Potential":
        new = object.__new__(type(self))
        new.__dict__.update(self.__dict__)
        new.params = params
        return new

    # -- coordinate handling -------------------------------------------------

    def _coords(self, t, S):
        scalar = _scalar_in(t, S)
        if scalar:
            t, S = float(t), float(S)
            if t < 0:
                raise ValueError(f"time must be nonnegative, got {t}")
        else:
            t, S = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(S, dtype=float))
            if np.any(t < 0):
                raise ValueError("time must be nonnegative")
        te = t + self.params.tau
        Se = S + self.params.S0
        if self.anchored_at_zero:
            bad = (te == 0) & (Se != 0)
            if np.any(bad):
                raise ValueError("on the t = 0 slice only the anchor (0, 0) is defined")
        return scalar, te, Se

    # -- public evaluation ---------------------------------------------------

    def value(self, t, S):
        """V(t, S).  Raises OverflowError when the value leaves float64 range."""
        scalar, te, Se = self._coords(t, S)
        out = self._raw(te, Se, scalar)
        if self.params.C0:
            out = out + self.params.C0
        return _out(out, scalar)

    __call__ = value

    def log_value(self, t, S):
        """(sign, log|V|) arrays; finite for arguments where ``value`` overflows."""
        _, te, Se = self._coords(np.asarray(t, dtype=float), np.asarray(S, dtype=float))
        s, l = self._raw_log(te, Se)
        if self.params.C0:
            c0 = self.params.C0
            s, l = specfun.signed_logaddexp(s, l, math.copysign(1.0, c0), math.log(abs(c0)))
        return s, l

    def value_scaled(self, t: float, S: float) -> ScaledValue:
        s, l = self.log_value(float(t), float(S))
        return ScaledValue._from_parts(float(s), float(l))

    def grad_S(self, t, S):
        """Analytic derivative in S."""
        scalar, te, Se = self._coords(t, S)
        return _out(self._raw_grad(te, Se, scalar), scalar)

    # -- subclass hooks ------------------------------------------------------

    def _raw(self, t, S, scalar):
        raise NotImplementedError

    def _raw_grad(self, t, S, scalar):
        raise NotImplementedError

    def _raw_log(self, t, S):
        with np.errstate(divide="ignore"):
            v = np.asarray(self._raw(t, S, False), dtype=float)
            return np.sign(v), np.log(np.abs(v))


class OGDPotential(Potential):
    kind = "OGD"

    def _raw(self, t, S, scalar):
        return self.C * (S * S - t)

    def _raw_grad(self, t, S, scalar):
        return 2.0 * self.C * S


class LinearPotential(Potential):
    kind = "Linear"
    is_affine = True

    def _raw(self, t, S, scalar):
        return self.C * S + 0.0 * t

    def _raw_grad(self, t, S, scalar):
        return self.C + 0.0 * S


class ExpPotential(Potential):
    kind = "Exp"
    anchored_at_zero = True

    def _raw(self, t, S, scalar):
        C = self.C
        if scalar:
            if t == 0:
                return 0.0
            return C / math.sqrt(t) * math.exp(S * S / (2.0 * t))
        pos = t > 0
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            out = np.where(pos, C / np.sqrt(t) * np.exp(S * S / (2.0 * np.where(pos, t, 1.0))), 0.0)
        if not np.all(np.isfinite(out)):
            raise OverflowError("v_exp: value exceeds the float64 range")
        return out

    def _raw_log(self, t, S):
        pos = t > 0
        tt = np.where(pos, t, 1.0)
        l = math.log(self.C) - 0.5 * np.log(tt) + S * S / (2.0 * tt)
        return np.where(pos, 1.0, 0.0), np.where(pos, l, -np.inf)

    def _raw_grad(self, t, S, scalar):
        C = self.C
        if scalar:
            if t == 0:
                return 0.0
            return C * S * t ** -1.5 * math.exp(S * S / (2.0 * t))
        pos = t > 0
        tt = np.where(pos, t, 1.0)
        with np.errstate(over="ignore"):
            return np.where(pos, C * S * tt ** -1.5 * np.exp(S * S / (2.0 * tt)), 0.0)


class ErfiPotential(Potential):
    kind = "Erfi"
    anchored_at_zero = True

    def _raw(self, t, S, scalar):
        C = self.C
        if scalar:
            if t == 0:
                return 0.0
            return C * math.sqrt(t) * specfun.erfi_shape(S / math.sqrt(2.0 * t))
        pos = t > 0
        tt = np.where(pos, t, 1.0)
        return np.where(pos, C * np.sqrt(tt) * specfun.erfi_shape(S / np.sqrt(2.0 * tt)), 0.0)

    def _raw_log(self, t, S):
        pos = t > 0
        tt = np.where(pos, t, 1.0)
        s, l = specfun.log_erfi_shape(S / np.sqrt(2.0 * tt))
        l = l + math.log(self.C) + 0.5 * np.log(tt)
        return np.where(pos, s, 0.0), np.where(pos, l, -np.inf)

    def _raw_grad(self, t, S, scalar):
        C = self.C
        if scalar:
            if t == 0:
                return 0.0
            try:
                return math.sqrt(2.0) * C * specfun.exp_integral(S / math.sqrt(2.0 * t))
            except OverflowError:
                return math.copysign(math.inf, S)
        pos = t > 0
        tt = np.where(pos, t, 1.0)
        s, l = specfun.log_exp_integral(S / np.sqrt(2.0 * tt))
        with np.errstate(over="ignore"):
            return np.where(pos, math.sqrt(2.0) * C * s * np.exp(l), 0.0)


class CombinationPotential(Potential):
    """a * p1 + b * p2 (then shifted by the combination's own params)."""

    kind = "Combination"

    def __init__(self, a: float, p1: Potential, b: float, p2: Potential,
                 params: PotentialParams | None = None):
        super().__init__(params)
        self.weights = (float(a), float(b))
        self.parts = (p1, p2)

    @property
    def is_affine(self):
        return all(p.is_affine or w == 0 for w, p in zip(self.weights, self.parts))

    @property
    def anchored_at_zero(self):
        return any(p.anchored_at_zero for p in self.parts)

    def __repr__(self):
        (a, b), (p1, p2) = self.weights, self.parts
        return f"CombinationPotential({a} * {p1!r} + {b} * {p2!r}, {self.params})"

    def _raw(self, t, S, scalar):
        (a, b), (p1, p2) = self.weights, self.parts
        out = 0.0
        if a:
            out = out + a * p1.value(t, S)
        if b:
            out = out + b * p2.value(t, S)
        return out if scalar else np.broadcast_to(out, np.shape(t)).astype(float)

    def _raw_log(self, t, S):
        (a, b), (p1, p2) = self.weights, self.parts
        s1, l1 = p1.log_value(t, S)
        s2, l2 = p2.log_value(t, S)
        s1, l1 = s1 * np.sign(a), l1 + (math.log(abs(a)) if a else -np.inf)
        s2, l2 = s2 * np.sign(b), l2 + (math.log(abs(b)) if b else -np.inf)
        return specfun.signed_logaddexp(s1, l1, s2, l2)

    def _raw_grad(self, t, S, scalar):
        (a, b), (p1, p2) = self.weights, self.parts
        out = 0.0
        if a:
            out = out + a * p1.grad_S(t, S)
        if b:
            out = out + b * p2.grad_S(t, S)
        return out


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def v_ogd(C: float = 1.0) -> Potential:
    """C (S^2 - t); its player is online gradient descent with step 2C."""
    return OGDPotential(PotentialParams(C=C))


def v_exp(C: float = 1.0) -> Potential:
    """C t^{-1/2} exp(S^2 / 2t)."""
    return ExpPotential(PotentialParams(C=C))


def v_erfi(C: float = 1.0) -> Potential:
    """C sqrt(t) [2 dei(S / sqrt(2t)) - 1]; equals -C sqrt(t) at S = 0."""
    return ErfiPotential(PotentialParams(C=C))


def v_linear(C: float = 1.0) -> Potential:
    """C S, time independent."""
    return LinearPotential(PotentialParams(C=C))


def shift(p: Potential, C0: float = 0.0, tau: float = 0.0, S0: float = 0.0) -> Potential:
    """Return ``(t, S) -> C0 + p(t + tau, S + S0)``, again a heat-equation solution."""
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    q = p.params
    return p.with_params(dataclasses.replace(q, C0=q.C0 + C0, tau=q.tau + tau, S0=q.S0 + S0))


def combine(a: float, p1: Potential, b: float, p2: Potential) -> Potential:
    """a * p1 + b * p2.

    A negative weight on a non-affine part can break convexity in S, which the
    betting analysis needs; that case is rejected.
    """
    for w, p in ((a, p1), (b, p2)):
        if w < 0 and not p.is_affine:
            raise ValueError(
                f"negative weight {w} on non-affine {p!r} may break convexity in S")
    return CombinationPotential(a, p1, b, p2)


# ---------------------------------------------------------------------------
# Discrete and continuous checks
# ---------------------------------------------------------------------------


def discrete_derivatives(p: Potential, t, S):
    """(V(t,S) - V(t-1,S),  V(t,S+1) + V(t,S-1) - 2 V(t,S)) for t >= 1."""
    if np.any(np.asarray(t) < 1):
        raise ValueError("discrete derivatives need t >= 1")
    v = p(t, S)
    dbar_t = v - p(np.asarray(t) - 1 if np.ndim(t) else t - 1, S)
    dbar_ss = p(t, np.asarray(S) + 1) + p(t, np.asarray(S) - 1) - 2 * v
    return dbar_t, dbar_ss


def perturbation(p: Potential, t, S):
    """Discrete heat-equation defect  V(t,S+1)/2 + V(t,S-1)/2 - V(t-1,S).

    This is the per-round slack of the discrete Ito identity; it equals
    dbar_t + dbar_SS / 2 but is computed without the intermediate cancellation.
    """
    if np.any(np.asarray(t) < 1):
        raise ValueError("perturbation needs t >= 1")
    t_prev = np.asarray(t) - 1 if np.ndim(t) else t - 1
    S = np.asarray(S, dtype=float) if np.ndim(S) else S
    return 0.5 * p(t, S + 1) + 0.5 * p(t, S - 1) - p(t_prev, S)


def _d1(f, x, h):
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def _d2(f, x, h):
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)


def pde_residual(p: Potential, t, S):
    """dV/dt + 1/2 d^2V/dS^2 by fourth-order central differences.

    Zero up to ~1e-10 relative for exact solutions of the backward heat equation.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValueError("pde_residual needs t > 0")
    scalar = _scalar_in(t, S)
    if not scalar:
        t, S = np.broadcast_arrays(t_arr, np.asarray(S, dtype=float))
    ht = FD_STEP_T * t
    hs = FD_STEP_S * (math.sqrt(t) if scalar else np.sqrt(t))
    d_t = _d1(lambda x: p(x, S), t, ht)
    d_ss = _d2(lambda x: p(t, x), S, hs)
    return d_t + 0.5 * d_ss


def hermite_residual(alpha: float, g: Callable, z, h: float = HERMITE_STEP):
    """g'' - 2 z g' + 4 alpha g by fourth-order central differences."""
    return _d2(g, z, h) - 2 * z * _d1(g, z, h) + 4 * alpha * g(z)


def analytic_derivatives(p: Potential, t, S) -> Derivatives:
    """Closed-form t- and S-derivatives of an Exp or Erfi potential."""
    if p.kind not in ("Exp", "Erfi"):
        raise ValueError(f"analytic derivatives are tabulated for Exp and Erfi, not {p.kind}")
    scalar, t, S = p._coords(t, S)
    if np.any(t <= 0):
        raise ValueError("analytic derivatives need t > 0")
    C = p.C
    sqrt_ = math.sqrt if scalar else np.sqrt
    exp_ = math.exp if scalar else np.exp
    e = exp_(S * S / (2 * t))
    r = S * S / t
    if p.kind == "Erfi":
        d = Derivatives(
            d_t=-C / (2 * sqrt_(t)) * e,
            d_tt=C / (4 * t**1.5) * e * (r + 1),
            d_S=p._raw_grad(t, S, scalar),
            d_SS=C / sqrt_(t) * e,
            d_SSS=C * S / t**1.5 * e,
            d_SSSS=C / t**1.5 * e * (r + 1),
        )
    else:
        d = Derivatives(
            d_t=-C / (2 * t**1.5) * e * (r + 1),
            d_tt=C / (4 * t**2.5) * e * (r * r + 6 * r + 3),
            d_S=C * S / t**1.5 * e,
            d_SS=C / t**1.5 * e * (r + 1),
            d_SSS=C / t**1.5 * e * (S**3 / t**2 + 3 * S / t),
            d_SSSS=C / t**2.5 * e * (r * r + 6 * r + 3),
        )
    if scalar:
        d = Derivatives(*(float(v) for v in dataclasses.astuple(d)))
    return d


# ---------------------------------------------------------------------------
# Fenchel conjugate
# ---------------------------------------------------------------------------


def conjugate_maximizer(p: Potential, T: float, w: float) -> float:
    """The S attaining sup_S [S w - V(T, S)]: root of dV/dS (T, S) = w by bisection."""
    T, w = float(T), float(w)
    if T <= 0:
        raise ValueError("conjugate needs T > 0")
    if not math.isfinite(w):
        raise ValueError("w must be finite")

    def grad(s):
        try:
            return p.grad_S(T, s)
        except OverflowError:
            return math.copysign(math.inf, s)

    C = p.C
    Te = T + p.params.tau
    # stationary point of the erfi conjugate lies below this cap
    cap = math.sqrt(2 * Te) * (math.sqrt(math.log1p(abs(w) / (math.sqrt(2) * C))) + 1) + 1
    if p.kind == "Erfi":
        lo, hi = (0.0, cap) if w >= 0 else (-cap, 0.0)
        lo, hi = lo - p.params.S0, hi - p.params.S0
    else:
        lo, hi = -cap - p.params.S0, cap - p.params.S0

    step = hi - lo
    for _ in range(MAX_BISECTION_STEPS):
        if grad(hi) >= w:
            break
        lo, hi = hi, hi + step
        step *= 2
    else:
        raise ConvergenceError(f"no S with derivative >= {w}: conjugate is +inf")
    step = hi - lo
    for _ in range(MAX_BISECTION_STEPS):
        if grad(lo) <= w:
            break
        lo, hi = lo - step, lo
        step *= 2
    else:
        raise ConvergenceError(f"no S with derivative <= {w}: conjugate is +inf")

    for _ in range(MAX_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= 1e-15 * max(1.0, abs(mid)):
            break
        if grad(mid) < w:
            lo = mid
        else:
            hi = mid
    else:
        raise ConvergenceError("bisection did not converge in 200 steps")

    return 0.5 * (lo + hi)


def fenchel_conjugate(p: Potential, T: float, w: float) -> float:
    """sup_S [S w - V(T, S)], found by bisection on the monotone derivative in S."""
    s_star = conjugate_maximizer(p, T, w)
    return s_star * float(w) - p.value(T, s_star)
