"""Sample moments and the standardised / Studentised mean statistics.

Variances use divisor ``n`` throughout, so ``S**2`` is the plain mean of
squared deviations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DegenerateSample


def check_sample(x) -> np.ndarray:
    """Return ``x`` as a contiguous float array, rejecting bad samples."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"a sample must be one-dimensional, got shape {arr.shape}")
    if arr.size < 2:
        raise ValueError("a sample needs at least two observations")
    if not np.all(np.isfinite(arr)):
        raise ValueError("sample contains non-finite values")
    return arr


@dataclass(frozen=True)
class MomentSummary:
    n: int
    mean: float
    s2: float
    gamma3_hat: float | None
    gamma4_hat: float | None

    @property
    def s(self) -> float:
        return math.sqrt(self.s2)


def summarize(x) -> MomentSummary:
    """Mean, biased variance and standardised third/fourth sample moments.

    ``gamma3_hat`` and ``gamma4_hat`` are ``None`` for a constant sample.
    """
    x = check_sample(x)
    n = x.size
    mean = math.fsum(x) / n
    d = x - mean
    s2 = math.fsum(d * d) / n
    if s2 <= 0.0:
        return MomentSummary(n, mean, 0.0, None, None)
    s = math.sqrt(s2)
    g3 = math.fsum(d**3) / (n * s**3)
    g4 = math.fsum(d**4) / (n * s2 * s2)
    return MomentSummary(n, mean, s2, g3, g4)


def _sd_or_raise(m: MomentSummary) -> float:
    if m.s2 <= 0.0:
        raise DegenerateSample("sample has zero variance; the t ratio is undefined")
    return m.s


def t_statistic(x) -> float:
    """Studentised mean sqrt(n) * mean / S."""
    m = summarize(x)
    return math.sqrt(m.n) * m.mean / _sd_or_raise(m)


def z_statistic(x, sigma: float = 1.0) -> float:
    """Standardised mean sqrt(n) * mean / sigma with known sigma."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    x = check_sample(x)
    return math.sqrt(x.size) * (math.fsum(x) / x.size) / sigma


def shifted_t_statistic(x, c: float) -> float:
    """T_c = sqrt(n) * (mean + c / sqrt(n)) / S, i.e. T_0 + c / S."""
    if c < 0:
        raise ValueError(f"shift c must be non-negative, got {c}")
    m = summarize(x)
    s = _sd_or_raise(m)
    return math.sqrt(m.n) * m.mean / s + c / s


@njit(cache=True, nogil=True)
def _t_and_z(x):
    """(T_0, Z_0, degenerate) for one sample, two-pass moments."""
    n = x.size
    tot = 0.0
    for i in range(n):
        tot += x[i]
    mean = tot / n
    ss = 0.0
    vmin = x[0]
    vmax = x[0]
    for i in range(n):
        d = x[i] - mean
        ss += d * d
        if x[i] < vmin:
            vmin = x[i]
        if x[i] > vmax:
            vmax = x[i]
    z = math.sqrt(n) * mean
    if vmin == vmax or ss <= 0.0:
        return 0.0, z, True
    return z / math.sqrt(ss / n), z, False


@njit(cache=True, nogil=True)
def _column_t(m, out):
    """T_0 of every column of ``m``; returns the number of constant columns."""
    n, p = m.shape
    col = np.empty(n)
    bad = 0
    for j in range(p):
        for i in range(n):
            col[i] = m[i, j]
        t, _, deg = _t_and_z(col)
        out[j] = t
        if deg:
            bad += 1
            out[j] = np.nan
    return bad


def column_t_statistics(m) -> np.ndarray:
    """T_0 for each column of an n-by-p matrix."""
    m = np.ascontiguousarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 2:
        raise ValueError("feature matrix must be 2-D with at least two rows")
    out = np.empty(m.shape[1])
    if _column_t(m, out):
        bad = np.flatnonzero(np.isnan(out))
        raise DegenerateSample(f"constant feature columns: {bad[:10].tolist()}")
    return out
