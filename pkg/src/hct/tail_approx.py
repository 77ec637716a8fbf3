"""Skewness-corrected normal approximations to tail probabilities and quantiles.

All probabilities are assembled in log space from ``log(1 - Phi)`` so they
stay finite for thresholds up to ~37 and beyond.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .normal import _log_sf, std_normal_quantile


@dataclass(frozen=True)
class ApproxInput:
    x: float
    n: int
    gamma: float
    c: float = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if self.c < 0:
            raise ValueError(f"shift c must be non-negative, got {self.c}")

    @property
    def valid(self) -> bool:
        """Inside the moderate-deviation range where x**3 / sqrt(n) <= 1."""
        return abs(self.x) ** 3 / math.sqrt(self.n) <= 1.0


@dataclass(frozen=True)
class TailApprox:
    value: float
    log_value: float
    valid: bool


def _result(log_value: float, valid: bool) -> TailApprox:
    return TailApprox(math.exp(log_value), log_value, valid)


def studentized_tail_approx(inp: ApproxInput, mode: str = "exp") -> TailApprox:
    """P(T_0 > x) ~ (1 - Phi(x)) exp(-x**3 gamma / (3 sqrt n)).

    ``mode="poly"`` gives the first-order form (1 - Phi(x)) (1 - x**3 gamma / (3 sqrt n));
    it is flagged invalid when that factor is not positive.
    """
    corr = inp.x**3 * inp.gamma / (3.0 * math.sqrt(inp.n))
    if mode == "exp":
        return _result(_log_sf(inp.x) - corr, inp.valid)
    if mode == "poly":
        factor = 1.0 - corr
        if factor <= 0.0:
            return TailApprox(0.0, -math.inf, False)
        return _result(_log_sf(inp.x) + math.log(factor), inp.valid)
    raise ValueError(f"mode must be 'exp' or 'poly', got {mode!r}")


def standardized_tail_approx(inp: ApproxInput) -> TailApprox:
    """P(Z_0 > x) ~ (1 - Phi(x)) (1 + x**3 gamma / (6 sqrt n))."""
    factor = 1.0 + inp.x**3 * inp.gamma / (6.0 * math.sqrt(inp.n))
    if factor <= 0.0:
        return TailApprox(0.0, -math.inf, False)
    return _result(_log_sf(inp.x) + math.log(factor), inp.valid)


def noncentral_tail_approx(inp: ApproxInput, u: float = 0.9) -> TailApprox:
    """P(T_c > x) ~ (1 - Phi(x - c)) exp(-(2x**3 - 3c x**2 + c**3) gamma / (6 sqrt n)).

    Flagged valid when additionally c <= u * x for the given u < 1.
    """
    x, c = inp.x, inp.c
    corr = (2 * x**3 - 3 * c * x**2 + c**3) * inp.gamma / (6.0 * math.sqrt(inp.n))
    return _result(_log_sf(x - c) - corr, inp.valid and c <= u * x)


def skew_corrected_quantile(alpha: float, n: int, gamma: float) -> float:
    """t_alpha ~ z_alpha (1 - gamma z_alpha / (3 sqrt n))."""
    if not 0.0 < alpha <= 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2], got {alpha}")
    z = std_normal_quantile(alpha)
    return z * (1.0 - gamma * z / (3.0 * math.sqrt(n)))


def power_approx(alpha: float, c: float, n: int, gamma: float) -> float:
    """Rejection probability of the Studentised test at level alpha under shift c.

    alpha exp{c (3 t**2 - c**2) gamma / (6 sqrt n)} (1 - Phi(t - c)) / (1 - Phi(t)),
    with t the skewness-corrected quantile.
    """
    if not 0.0 < alpha <= 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2], got {alpha}")
    if c < 0:
        raise ValueError(f"shift c must be non-negative, got {c}")
    if c == 0:
        return alpha
    t = skew_corrected_quantile(alpha, n, gamma)
    log_p = (
        math.log(alpha)
        + c * (3 * t * t - c * c) * gamma / (6.0 * math.sqrt(n))
        + _log_sf(t - c)
        - _log_sf(t)
    )
    return math.exp(log_p)
