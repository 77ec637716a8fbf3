"""Standard normal distribution, quantile and Mills ratio.

The scalar ``_``-prefixed functions are numba-compiled and are called from
the sampling and bootstrap kernels; the public wrappers add input checks.
Upper-tail quantities are evaluated in log space so ratios of tiny tails
stay finite well past the point where ``1 - Phi(x)`` underflows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
# above this the continued fraction for the Mills ratio converges in < 60 terms
_CF_SWITCH = 8.0


@njit(cache=True, nogil=True)
def _ppnd16(p):
    """Lower-tail normal quantile, Wichura's AS 241 (PPND16)."""
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2509.0809287301226727 * r + 33430.575583588128105) * r
                    + 67265.770927008700853) * r + 45921.953931549871457) * r
                  + 13731.693765509461125) * r + 1971.5909503065514427) * r
                + 133.14166789178437745) * r + 3.387132872796366608)
        den = (((((((5226.495278852854561 * r + 28729.085735721942674) * r
                    + 39307.89580009271061) * r + 21213.794301586595867) * r
                  + 5394.1960214247511077) * r + 687.1870074920579083) * r
                + 42.313330701600911252) * r + 1.0)
        return q * num / den
    r = p if q < 0.0 else 1.0 - p
    if r <= 0.0:
        return -np.inf if q < 0.0 else np.inf
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        num = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r
                    + 0.24178072517745061177) * r + 1.27045825245236838258) * r
                  + 3.64784832476320460504) * r + 5.7694972214606914055) * r
                + 4.6303378461565452959) * r + 1.42343711074968357734)
        den = (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r
                    + 0.0151986665636164571966) * r + 0.14810397642748007459) * r
                  + 0.68976733498510000455) * r + 1.6763848301838038494) * r
                + 2.05319162663775882187) * r + 1.0)
    else:
        r -= 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 0.0012426609473880784386) * r + 0.026532189526576123093) * r
                  + 0.29656057182850489123) * r + 1.7848265399172913358) * r
                + 5.4637849111641143699) * r + 6.6579046435011037772)
        den = (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r
                    + 1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r
                  + 0.0148753612908506148525) * r + 0.13692988092273580531) * r
                + 0.59983220655588793769) * r + 1.0)
    val = num / den
    return -val if q < 0.0 else val


@njit(cache=True, nogil=True)
def _pdf(x):
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


@njit(cache=True, nogil=True)
def _mills_cf(x):
    """(1 - Phi(x)) / phi(x) by backward evaluation of Laplace's continued fraction."""
    t = x
    for k in range(60, 0, -1):
        t = x + k / t
    return 1.0 / t


@njit(cache=True, nogil=True)
def _sf(x):
    return 0.5 * math.erfc(x / _SQRT2)


@njit(cache=True, nogil=True)
def _cdf(x):
    return 0.5 * math.erfc(-x / _SQRT2)


@njit(cache=True, nogil=True)
def _log_sf(x):
    if x > _CF_SWITCH:
        return -0.5 * x * x - _LOG_SQRT_2PI + math.log(_mills_cf(x))
    if x < -1.0:
        return math.log1p(-0.5 * math.erfc(-x / _SQRT2))
    return math.log(0.5 * math.erfc(x / _SQRT2))


@njit(cache=True, nogil=True)
def _mills_ratio_sf(x):
    """(1 - Phi(x)) / phi(x) for any real x."""
    if x > _CF_SWITCH:
        return _mills_cf(x)
    return _sf(x) / _pdf(x)


@njit(cache=True, nogil=True)
def _upper_quantile(alpha):
    """z with 1 - Phi(z) = alpha: AS 241 plus one Newton step on log(1 - Phi)."""
    z = -_ppnd16(alpha)
    return z + (_log_sf(z) - math.log(alpha)) * _mills_ratio_sf(z)


@njit(cache=True, nogil=True)
def _sf_array(x, out):
    for i in range(x.size):
        out[i] = _sf(x[i])


@dataclass(frozen=True)
class TailValue:
    """A probability together with its natural log."""

    value: float
    log_value: float


def _check_finite(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"expected a finite real, got {x}")
    return x


def std_normal_cdf(x: float) -> float:
    return _cdf(_check_finite(x))


def std_normal_sf(x: float) -> float:
    """Upper tail 1 - Phi(x)."""
    return _sf(_check_finite(x))


def log_std_normal_sf(x: float) -> float:
    return _log_sf(_check_finite(x))


def log_std_normal_cdf(x: float) -> float:
    return _log_sf(-_check_finite(x))


def std_normal_pdf(x: float) -> float:
    return _pdf(_check_finite(x))


def lower_tail(x: float) -> TailValue:
    """Phi(x) with a log that stays finite far into the left tail."""
    x = _check_finite(x)
    return TailValue(_cdf(x), _log_sf(-x))


def upper_tail(x: float) -> TailValue:
    x = _check_finite(x)
    return TailValue(_sf(x), _log_sf(x))


def std_normal_quantile(alpha: float) -> float:
    """Upper quantile z_alpha, the solution of 1 - Phi(z) = alpha."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if alpha == 0.5:
        return 0.0
    if alpha > 0.5:
        return -_upper_quantile(1.0 - alpha)
    return _upper_quantile(alpha)


def mills_ratio(z: float) -> float:
    """z (1 - Phi(z)) / phi(z) for z > 0; tends to 1 from below."""
    z = _check_finite(z)
    if z <= 0.0:
        raise ValueError(f"mills_ratio needs z > 0, got {z}")
    return z * _mills_ratio_sf(z)


def std_normal_sf_array(x) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty_like(x)
    _sf_array(x.reshape(-1), out.reshape(-1))
    return out
