"""Special functions behind the erfi potential.

``exp_integral(z)`` is the integral of exp(x**2) from 0 to z (a scaled erfi),
and ``double_exp_integral(z)`` is its antiderivative vanishing at 0.  Both grow
like exp(z**2), so every quantity also has a log-magnitude form
(:class:`ScaledValue` for scalars, ``log_*`` helpers for arrays).

All functions accept Python floats or numpy arrays and return the same kind.
Plain-valued functions raise :class:`OverflowError` instead of returning inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering

import numpy as np
from scipy import special

__all__ = [
    "ScaledValue",
    "dawson",
    "exp_integral",
    "exp_integral_scaled",
    "double_exp_integral",
    "double_exp_integral_scaled",
    "erfi_shape",
    "log_exp_integral",
    "log_erfi_shape",
    "signed_logaddexp",
]

# Below this |z| the Maclaurin series is used; above it the Dawson form.
SERIES_CUTOFF = 3.0
# Above this |z| the asymptotic series for 2zD(z) - 1 converges to full precision.
ASYMPTOTIC_CUTOFF = 10.0
LOG_FLOAT_MAX = math.log(np.finfo(float).max)

_MAX_TERMS = 120


def _is_scalar(z) -> bool:
    return np.ndim(z) == 0


def _check_finite(out, name):
    if not np.all(np.isfinite(out)):
        raise OverflowError(f"{name}: result exceeds the float64 range")
    return out


# ---------------------------------------------------------------------------
# Scalar kernels (math module, used on hot scalar paths)
# ---------------------------------------------------------------------------


def _series_f(a: float) -> float:
    # sum_k a^(2k+1) / (k! (2k+1))
    term = a
    total = a
    a2 = a * a
    for k in range(1, _MAX_TERMS):
        term *= a2 / k
        inc = term / (2 * k + 1)
        total += inc
        if inc <= 1e-17 * total:
            break
    return total


def _series_dei(a: float) -> float:
    # sum_k a^(2k+2) / (k! (2k+1) (2k+2))
    a2 = a * a
    term = a2
    total = a2 / 2.0
    for k in range(1, _MAX_TERMS):
        term *= a2 / k
        inc = term / ((2 * k + 1) * (2 * k + 2))
        total += inc
        if inc <= 1e-17 * total:
            break
    return total


def _h(a: float) -> float:
    """2 a D(a) - 1 for a > SERIES_CUTOFF, computed without cancellation."""
    if a < ASYMPTOTIC_CUTOFF:
        return 2.0 * a * float(special.dawsn(a)) - 1.0
    x = 1.0 / (2.0 * a * a)
    term = x
    total = x
    k = 1
    while True:
        nxt = term * (2 * k + 1) * x
        if nxt >= term or nxt <= 1e-17 * total:
            break
        term = nxt
        total += term
        k += 1
    return total


# ---------------------------------------------------------------------------
# Array kernels
# ---------------------------------------------------------------------------


def _series_f_arr(a):
    a2 = a * a
    term = a.copy()
    total = a.copy()
    for k in range(1, _MAX_TERMS):
        term = term * a2 / k
        inc = term / (2 * k + 1)
        total = total + inc
        if np.all(inc <= 1e-17 * total):
            break
    return total


def _series_dei_arr(a):
    a2 = a * a
    term = a2.copy()
    total = a2 / 2.0
    for k in range(1, _MAX_TERMS):
        term = term * a2 / k
        inc = term / ((2 * k + 1) * (2 * k + 2))
        total = total + inc
        if np.all(inc <= 1e-17 * total):
            break
    return total


def _h_arr(a):
    out = np.empty_like(a)
    mid = a < ASYMPTOTIC_CUTOFF
    out[mid] = 2.0 * a[mid] * special.dawsn(a[mid]) - 1.0
    big = ~mid
    if np.any(big):
        out[big] = [_h(float(v)) for v in a[big]]
    return out


# ---------------------------------------------------------------------------
# Public plain-valued functions
# ---------------------------------------------------------------------------


def dawson(z):
    """Dawson's integral exp(-z**2) * exp_integral(z)."""
    if _is_scalar(z):
        return float(special.dawsn(float(z)))
    return special.dawsn(np.asarray(z, dtype=float))


def exp_integral(z):
    """Integral of exp(x**2) over [0, z].  Odd in z."""
    if _is_scalar(z):
        z = float(z)
        a = abs(z)
        if a <= SERIES_CUTOFF:
            val = _series_f(a)
        elif a * a < 700.0:
            val = math.exp(a * a) * float(special.dawsn(a))
        else:
            # exp(a^2) alone overflows before the product does
            log_val = a * a + math.log(float(special.dawsn(a)))
            val = math.exp(log_val) if log_val < LOG_FLOAT_MAX else math.inf
        _check_finite(val, "exp_integral")
        return math.copysign(val, z)
    z = np.asarray(z, dtype=float)
    a = np.abs(z)
    out = np.empty_like(a)
    small = a <= SERIES_CUTOFF
    out[small] = _series_f_arr(a[small])
    big = ~small
    with np.errstate(over="ignore"):
        out[big] = np.exp(a[big] ** 2 + np.log(special.dawsn(a[big])))
    _check_finite(out, "exp_integral")
    return np.copysign(out, z)


def erfi_shape(z):
    """2*z*exp_integral(z) - exp(z**2), i.e. 2*double_exp_integral(z) - 1.  Even in z.

    This is the self-similar profile of the erfi potential.
    """
    if _is_scalar(z):
        a = abs(float(z))
        if a <= SERIES_CUTOFF:
            return 2.0 * _series_dei(a) - 1.0
        log_val = a * a + math.log(_h(a))
        if log_val >= LOG_FLOAT_MAX:
            raise OverflowError("erfi_shape: result exceeds the float64 range")
        return math.exp(log_val)
    a = np.abs(np.asarray(z, dtype=float))
    out = np.empty_like(a)
    small = a <= SERIES_CUTOFF
    out[small] = 2.0 * _series_dei_arr(a[small]) - 1.0
    big = ~small
    with np.errstate(over="ignore"):
        out[big] = np.exp(a[big] ** 2 + np.log(_h_arr(a[big])))
    return _check_finite(out, "erfi_shape")


def double_exp_integral(z):
    """Iterated integral of exp(x**2): int_0^z int_0^u exp(x^2) dx du.  Even in z.

    Equals (2 z F(z) - exp(z^2) + 1) / 2 with F = exp_integral.
    """
    if _is_scalar(z):
        a = abs(float(z))
        if a <= SERIES_CUTOFF:
            return _series_dei(a)
        return 0.5 * (erfi_shape(a) + 1.0)
    a = np.abs(np.asarray(z, dtype=float))
    out = np.empty_like(a)
    small = a <= SERIES_CUTOFF
    out[small] = _series_dei_arr(a[small])
    big = ~small
    out[big] = 0.5 * (erfi_shape(a[big]) + 1.0)
    return out


# ---------------------------------------------------------------------------
# Log-magnitude forms
# ---------------------------------------------------------------------------


def log_exp_integral(z):
    """Return (sign, log|exp_integral(z)|) as arrays; never overflows."""
    z = np.asarray(z, dtype=float)
    a = np.abs(z)
    logm = np.full_like(a, -np.inf)
    small = (a <= SERIES_CUTOFF) & (a > 0)
    logm[small] = np.log(_series_f_arr(a[small]))
    big = a > SERIES_CUTOFF
    logm[big] = a[big] ** 2 + np.log(special.dawsn(a[big]))
    return np.sign(z), logm


def log_erfi_shape(z):
    """Return (sign, log|erfi_shape(z)|) as arrays; never overflows."""
    a = np.abs(np.asarray(z, dtype=float))
    sign = np.ones_like(a)
    logm = np.empty_like(a)
    small = a <= SERIES_CUTOFF
    vals = 2.0 * _series_dei_arr(a[small]) - 1.0
    sign[small] = np.sign(vals)
    with np.errstate(divide="ignore"):
        logm[small] = np.log(np.abs(vals))
    big = ~small
    logm[big] = a[big] ** 2 + np.log(_h_arr(a[big]))
    return sign, logm


def signed_logaddexp(s1, l1, s2, l2):
    """Add two signed log-magnitude arrays: (s1 e^l1) + (s2 e^l2)."""
    s1, l1, s2, l2 = (np.asarray(v, dtype=float) for v in (s1, l1, s2, l2))
    s1, l1, s2, l2 = np.broadcast_arrays(s1, l1, s2, l2)
    l1 = np.where(s1 == 0, -np.inf, l1)
    l2 = np.where(s2 == 0, -np.inf, l2)
    swap = l2 > l1
    hi_s = np.where(swap, s2, s1)
    hi_l = np.where(swap, l2, l1)
    lo_s = np.where(swap, s1, s2)
    lo_l = np.where(swap, l1, l2)
    with np.errstate(invalid="ignore", divide="ignore"):
        d = np.where(np.isfinite(hi_l), lo_l - hi_l, -np.inf)
        same = hi_s * lo_s >= 0
        mag = np.where(same, np.log1p(np.exp(d)), np.log1p(-np.exp(d)))
    out_l = hi_l + mag
    out_s = np.where(np.isfinite(out_l), hi_s, 0.0)
    out_l = np.where(out_s == 0, -np.inf, out_l)
    return out_s, out_l


# ---------------------------------------------------------------------------
# ScaledValue
# ---------------------------------------------------------------------------


@total_ordering
@dataclass(frozen=True)
class ScaledValue:
    """A real number stored as sign * exp(log_magnitude).

    Supports multiply/divide/compare, and addition through a guarded
    log-sum-exp.  ``sign == 0`` encodes zero with ``log_magnitude == -inf``.
    """

    sign: int
    log_magnitude: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign}")
        if (self.sign == 0) != (self.log_magnitude == -math.inf):
            raise ValueError("sign is 0 exactly when log_magnitude is -inf")

    @classmethod
    def from_float(cls, x: float) -> "ScaledValue":
        x = float(x)
        if x == 0.0:
            return cls(0, -math.inf)
        if not math.isfinite(x):
            raise ValueError(f"cannot scale non-finite value {x}")
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def _from_parts(cls, sign, logm) -> "ScaledValue":
        sign = int(sign)
        if sign == 0 or logm == -math.inf:
            return cls(0, -math.inf)
        return cls(sign, float(logm))

    @property
    def overflows(self) -> bool:
        return self.log_magnitude > LOG_FLOAT_MAX

    def to_float(self, saturate: bool = False) -> float:
        if self.sign == 0:
            return 0.0
        if self.overflows:
            if saturate:
                return self.sign * float(np.finfo(float).max)
            raise OverflowError("ScaledValue exceeds the float64 range")
        return self.sign * math.exp(self.log_magnitude)

    def __float__(self):
        return self.to_float()

    def _coerce(self, other) -> "ScaledValue":
        return other if isinstance(other, ScaledValue) else ScaledValue.from_float(other)

    def __neg__(self):
        return ScaledValue(-self.sign, self.log_magnitude)

    def __mul__(self, other):
        other = self._coerce(other)
        if self.sign == 0 or other.sign == 0:
            return ScaledValue(0, -math.inf)
        return ScaledValue(self.sign * other.sign, self.log_magnitude + other.log_magnitude)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero ScaledValue")
        if self.sign == 0:
            return self
        return ScaledValue(self.sign * other.sign, self.log_magnitude - other.log_magnitude)

    def __add__(self, other):
        other = self._coerce(other)
        s, l = signed_logaddexp(self.sign, self.log_magnitude, other.sign, other.log_magnitude)
        return ScaledValue._from_parts(s, float(l))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __eq__(self, other):
        if not isinstance(other, (ScaledValue, int, float)):
            return NotImplemented
        other = self._coerce(other)
        return self.sign == other.sign and self.log_magnitude == other.log_magnitude

    def __lt__(self, other):
        other = self._coerce(other)
        if self.sign != other.sign:
            return self.sign < other.sign
        if self.sign == 0:
            return False
        if self.sign > 0:
            return self.log_magnitude < other.log_magnitude
        return self.log_magnitude > other.log_magnitude

    def __hash__(self):
        return hash((self.sign, self.log_magnitude))


def exp_integral_scaled(z: float) -> ScaledValue:
    """exp_integral(z) as a :class:`ScaledValue`; valid for any finite z."""
    s, l = log_exp_integral(float(z))
    return ScaledValue._from_parts(s, float(l))


def double_exp_integral_scaled(z: float) -> ScaledValue:
    """double_exp_integral(z) as a :class:`ScaledValue`."""
    a = abs(float(z))
    if a <= SERIES_CUTOFF:
        return ScaledValue.from_float(_series_dei(a))
    h = _h(a)
    # (e^{a^2} h + 1) / 2
    logm = a * a + math.log(h) + math.log1p(math.exp(-a * a) / h) - math.log(2.0)
    return ScaledValue(1, logm)
