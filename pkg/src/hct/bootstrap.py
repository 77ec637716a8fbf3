"""Bootstrap-t resampling of the Studentised mean and its tail quantiles.

A resample statistic is ``T* = sqrt(n) (mean(X*) - mean(X)) / S*``.  The
sample is centred once up front, so ``mean(X*) - mean(X)`` is just the mean
of the resampled centred values.  Resamples whose values are all equal have
``S* = 0``; they are dropped and counted rather than mapped to infinity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DegenerateSample, InsufficientResamples
from .prng import BUFFER_WORDS, Stream, _HEAD, _S32, _refill
from .stats import check_sample

# resamples dropped for S* = 0 beyond this share flag the draws as unreliable
DEGENERATE_SHARE_LIMIT = 0.01


@njit(cache=True, nogil=True)
def _near_integer_floor(v):
    """floor(v), treating values within 1e-9 relative of an integer as that integer."""
    r = np.floor(v + 0.5)
    if abs(v - r) <= 1e-9 * max(1.0, abs(v)):
        return int(r)
    return int(math.floor(v))


def _near_integer_ceil(v: float) -> int:
    r = math.floor(v + 0.5)
    if abs(v - r) <= 1e-9 * max(1.0, abs(v)):
        return int(r)
    return int(math.ceil(v))


def min_resamples(alpha_min: float) -> int:
    """Smallest B obeying the B >= 100 / alpha rule for tails down to ``alpha_min``."""
    if not 0.0 < alpha_min <= 0.5:
        raise ValueError(f"alpha_min must lie in (0, 0.5], got {alpha_min}")
    return _near_integer_ceil(100.0 / alpha_min)


@njit(cache=True, nogil=True)
def upper_rank(alpha, b_eff):
    """1-based rank k = ceil((1 - alpha) B') of the order statistic used as t_hat."""
    return b_eff - _near_integer_floor(alpha * b_eff)


@njit(cache=True, nogil=True)
def _centre(x, out):
    """Write x - mean(x) into ``out``; returns False when x is constant."""
    n = x.size
    tot = 0.0
    vmin = x[0]
    vmax = x[0]
    for i in range(n):
        tot += x[i]
        vmin = min(vmin, x[i])
        vmax = max(vmax, x[i])
    mean = tot / n
    for i in range(n):
        out[i] = x[i] - mean
    return vmin < vmax


@njit(cache=True, nogil=True, _nrt=False)
def _resample_t(xc, st, pos):
    """One bootstrap T* from centred data.

    Reads stream words straight from the state buffer with a local cursor
    ``pos``; returns ``(t, degenerate, pos)``.  Callers store ``pos`` back
    into ``st[5]`` when done.
    """
    n = xc.size
    nn = np.uint64(n)
    s = 0.0
    ss = 0.0
    vmin = np.inf
    vmax = -np.inf
    for _ in range(n):
        if pos >= BUFFER_WORDS:
            _refill(st)
            pos = np.uint64(0)
        v = xc[(st[_HEAD + pos] * nn) >> _S32]
        pos += np.uint64(1)
        s += v
        ss += v * v
        vmin = min(vmin, v)
        vmax = max(vmax, v)
    if not vmin < vmax:
        return 0.0, True, pos
    mean = s / n
    var = ss / n - mean * mean
    if var <= 0.0:
        return 0.0, True, pos
    return math.sqrt(n) * mean / math.sqrt(var), False, pos


@njit(cache=True, nogil=True)
def _boot_draws(xc, nboot, st, out):
    """Fill ``out[:k]`` with valid T* draws; returns k."""
    k = 0
    pos = st[5]
    for _ in range(nboot):
        t, deg, pos = _resample_t(xc, st, pos)
        if not deg:
            out[k] = t
            k += 1
    st[5] = pos
    return k


@njit(cache=True, nogil=True)
def _boot_count_below(xc, t_obs, nboot, st):
    """(#valid draws strictly below t_obs, #valid draws) without storing draws.

    ``t_obs > sorted_t[k-1]`` exactly when at least k draws lie below it, so
    this count decides every grid exceedance without sorting.
    """
    below = 0
    valid = 0
    pos = st[5]
    for _ in range(nboot):
        t, deg, pos = _resample_t(xc, st, pos)
        if not deg:
            valid += 1
            if t < t_obs:
                below += 1
    st[5] = pos
    return below, valid


def centre(x) -> np.ndarray:
    x = check_sample(x)
    out = np.empty_like(x)
    if not _centre(x, out):
        raise DegenerateSample("cannot bootstrap a constant sample")
    return out


@dataclass(frozen=True)
class BootstrapDraws:
    """Sorted bootstrap-t draws for one sample: the empirical G_hat."""

    sorted_t: np.ndarray
    n_degenerate: int
    B_requested: int

    @property
    def b_eff(self) -> int:
        return int(self.sorted_t.size)

    @property
    def reliable(self) -> bool:
        return self.n_degenerate <= DEGENERATE_SHARE_LIMIT * self.B_requested

    def cdf(self, t: float) -> float:
        """G_hat(t) = P(T* <= t | X)."""
        return np.searchsorted(self.sorted_t, t, side="right") / self.b_eff

    def quantile(self, alpha: float) -> float:
        return bootstrap_quantile(self, alpha)


def bootstrap_t_draws(x, B: int, g: Stream) -> BootstrapDraws:
    """Draw ``B`` bootstrap-t statistics for sample ``x`` from stream ``g``."""
    x = check_sample(x)
    if B < 1:
        raise ValueError(f"B must be at least 1, got {B}")
    xc = centre(x)
    out = np.empty(B)
    k = _boot_draws(xc, B, g.state, out)
    draws = np.sort(out[:k])
    draws.setflags(write=False)
    return BootstrapDraws(draws, B - k, B)


def bootstrap_quantile(d: BootstrapDraws, alpha: float) -> float:
    """t_hat_alpha: the smallest draw with at most a fraction alpha of draws above it."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    b_eff = d.b_eff
    need = _near_integer_ceil(1.0 / alpha)
    if b_eff < need:
        raise InsufficientResamples(
            f"{b_eff} usable draws cannot resolve alpha={alpha}; need {need}"
        )
    return float(d.sorted_t[upper_rank(alpha, b_eff) - 1])
