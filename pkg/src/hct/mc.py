"""Monte Carlo engine: replicate kernels, exceedance estimates, oracle quantiles.

Replicate ``r`` of an experiment always reads child stream ``r`` of the
experiment's parent stream, and results land in slot ``r`` of preallocated
arrays.  Work is cut into fixed-size replicate blocks handed to a thread
pool; since neither the streams nor the output slots depend on which thread
runs a block, results are bit-identical at any thread count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numba import njit

from .bootstrap import _boot_count_below, _centre, upper_rank
from .distributions import DistSpec, MaStreamSpec, draw, kernel_law
from .errors import ConfigError, NumericValidityError
from .normal import std_normal_quantile
from .prng import STATE_SIZE, Stream, seed_child_state
from .stats import _t_and_z

BLOCK = 4096


def parallel_map(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """``[fn(x) for x in items]``, run on ``threads`` workers, order preserved."""
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as ex:
        return list(ex.map(fn, items))


def run_blocks(kernel: Callable, m: int, threads: int = 1, block: int = BLOCK) -> None:
    """Call ``kernel(lo, hi)`` over [0, m) in fixed blocks."""
    spans = [(lo, min(m, lo + block)) for lo in range(0, m, block)]
    parallel_map(lambda s: kernel(*s), spans, threads)


@dataclass(frozen=True)
class McEstimate:
    """A Monte Carlo probability estimate with its binomial standard error."""

    estimate: float
    se: float
    m: int

    @classmethod
    def from_count(cls, k: int, m: int) -> "McEstimate":
        p = k / m
        return cls(p, math.sqrt(p * (1.0 - p) / m), int(m))


# ---------------------------------------------------------------- kernels


@njit(cache=True, nogil=True)
def _tz_kernel(code, a, b, shift, scale, n, parent, lo, hi, t_out, z_out, s_out):
    """T_0, Z_0 and S for replicates lo..hi-1; returns #degenerate samples."""
    st = np.empty(STATE_SIZE, dtype=np.uint64)
    x = np.empty(n)
    bad = 0
    for r in range(lo, hi):
        seed_child_state(st, parent, r)
        for i in range(n):
            x[i] = draw(code, a, b, shift, scale, st)
        t, z, deg = _t_and_z(x)
        if deg:
            bad += 1
            t_out[r] = np.nan
            s_out[r] = 0.0
        else:
            t_out[r] = t
            s_out[r] = z / t if t != 0.0 else _sd(x)
        z_out[r] = z
    return bad


@njit(cache=True, nogil=True)
def _sd(x):
    n = x.size
    m = 0.0
    for i in range(n):
        m += x[i]
    m /= n
    ss = 0.0
    for i in range(n):
        ss += (x[i] - m) ** 2
    return math.sqrt(ss / n)


@njit(cache=True, nogil=True)
def _calib_kernel(
    code, a, b, shift, scale, n, nboot, independent,
    p_data, p_boot, p_stat, lo, hi, below, valid, t_out,
):
    """Bootstrap counts for replicate samples against T from a second or the same sample."""
    st = np.empty(STATE_SIZE, dtype=np.uint64)
    x = np.empty(n)
    y = np.empty(n)
    xc = np.empty(n)
    for r in range(lo, hi):
        seed_child_state(st, p_data, r)
        for i in range(n):
            x[i] = draw(code, a, b, shift, scale, st)
        if independent:
            seed_child_state(st, p_stat, r)
            for i in range(n):
                y[i] = draw(code, a, b, shift, scale, st)
            t, _, deg_t = _t_and_z(y)
        else:
            t, _, deg_t = _t_and_z(x)
        ok = _centre(x, xc)
        if deg_t or not ok:
            t_out[r] = np.nan
            below[r] = 0
            valid[r] = 0
            continue
        t_out[r] = t
        seed_child_state(st, p_boot, r)
        below[r], valid[r] = _boot_count_below(xc, t, nboot, st)


@njit(cache=True, nogil=True)
def _exceed_counts(alphas, below, valid, t, zs, boot_out, norm_out):
    for i in range(alphas.size):
        kb = 0
        kn = 0
        for r in range(below.size):
            if valid[r] > 0 and below[r] >= upper_rank(alphas[i], valid[r]):
                kb += 1
            if t[r] > zs[i]:
                kn += 1
        boot_out[i] = kb
        norm_out[i] = kn


@njit(cache=True, nogil=True)
def _ma_max_kernel(code, a, b, shift, scale, theta, lag, n, p, parent, lo, hi, independent, out, cols):
    """max_j T_0 of column j for MA(lag) matrices, or all column T_0 when ``cols``.

    With ``independent`` each column gets its own innovation window, giving
    columns with the MA marginal law but no cross-column dependence.
    """
    st = np.empty(STATE_SIZE, dtype=np.uint64)
    w = np.empty(lag + 1)
    tot = 0.0
    for j in range(lag + 1):
        w[j] = theta**j
        tot += w[j] * w[j]
    norm = math.sqrt(tot)
    m = np.empty((p, n))
    eps = np.empty(p + lag)
    col = np.empty(n)
    for r in range(lo, hi):
        seed_child_state(st, parent, r)
        for i in range(n):
            if independent:
                for k in range(p):
                    u = 0.0
                    for j in range(lag + 1):
                        u += w[j] * draw(code, a, b, shift, scale, st)
                    m[k, i] = u / norm
            else:
                for k in range(p + lag):
                    eps[k] = draw(code, a, b, shift, scale, st)
                for k in range(p):
                    u = 0.0
                    for j in range(lag + 1):
                        u += w[j] * eps[j + k]
                    m[k, i] = u / norm
        best = -np.inf
        for k in range(p):
            for i in range(n):
                col[i] = m[k, i]
            t, _, deg = _t_and_z(col)
            if deg:
                t = np.nan
            if cols:
                out[r * p + k] = t
            elif t > best or np.isnan(t):
                best = t
        if not cols:
            out[r] = best


# ---------------------------------------------------------------- drivers


@dataclass(frozen=True)
class TzDraws:
    """Per-replicate T_0, Z_0 and S from one simulation run."""

    t: np.ndarray
    z: np.ndarray
    s: np.ndarray

    def tc(self, c: float) -> np.ndarray:
        """T_c = T_0 + c / S from the same samples."""
        return self.t + c / self.s


def simulate_tz(spec: DistSpec, n: int, m: int, g: Stream, threads: int = 1) -> TzDraws:
    """T_0, Z_0 and S for ``m`` independent samples of size ``n``."""
    if m < 1 or n < 2:
        raise ConfigError("need m >= 1 replicates of size n >= 2")
    law = kernel_law(spec).as_tuple()
    t = np.empty(m)
    z = np.empty(m)
    s = np.empty(m)
    bad = [0]

    def kernel(lo, hi):
        bad.append(_tz_kernel(*law, int(n), g.ident, lo, hi, t, z, s))

    run_blocks(kernel, m, threads)
    if sum(bad):
        raise NumericValidityError(f"{sum(bad)} constant samples out of {m}")
    return TzDraws(t, z, s)


@dataclass(frozen=True)
class CalibrationRun:
    """Per-replicate bootstrap counts and observed T for calibration studies."""

    below: np.ndarray
    valid: np.ndarray
    t: np.ndarray
    B: int
    independent: bool

    def exceedances(self, alphas) -> tuple[np.ndarray, np.ndarray]:
        """(#{T > t_hat_alpha}, #{T > z_alpha}) per alpha."""
        alphas = np.asarray(alphas, dtype=np.float64)
        zs = np.array([std_normal_quantile(a) for a in alphas])
        kb = np.empty(alphas.size, dtype=np.int64)
        kn = np.empty(alphas.size, dtype=np.int64)
        _exceed_counts(alphas, self.below, self.valid, self.t, zs, kb, kn)
        return kb, kn


def simulate_calibration(
    spec: DistSpec, n: int, B: int, m: int, g: Stream, *, independent: bool = True,
    threads: int = 1,
) -> CalibrationRun:
    """Replicates of (sample for t_hat, statistic T) with bootstrap counts.

    ``independent`` draws T from a second sample, the setting in which
    bootstrap calibration is analysed; otherwise T and t_hat share one sample.
    """
    law = kernel_law(spec).as_tuple()
    below = np.zeros(m, dtype=np.int64)
    valid = np.zeros(m, dtype=np.int64)
    t = np.empty(m)
    pd, pb, ps = g.spawn(0).ident, g.spawn(1).ident, g.spawn(2).ident

    def kernel(lo, hi):
        _calib_kernel(*law, int(n), int(B), bool(independent), pd, pb, ps, lo, hi, below, valid, t)

    run_blocks(kernel, m, threads, block=256)
    if np.any(valid == 0):
        raise NumericValidityError(f"{int(np.sum(valid == 0))} replicates had no usable resamples")
    return CalibrationRun(below, valid, t, int(B), bool(independent))


def estimate_exceedance(
    stat: str, spec: DistSpec, n: int, x_or_alpha: float, m: int, g: Stream, *,
    c: float = 0.0, B: int | None = None, independent: bool = True, threads: int = 1,
) -> McEstimate:
    """Monte Carlo P(stat > threshold).

    ``stat`` is one of ``"T0"``, ``"Z0"``, ``"Tc"`` (threshold x, shift c),
    ``"T0_vs_boot_quantile"`` (level alpha, B resamples) or
    ``"T0_vs_normal_quantile"`` (level alpha).
    """
    if m < 100:
        raise ConfigError(f"need at least 100 replicates, got {m}")
    if stat in ("T0", "Z0", "Tc"):
        d = simulate_tz(spec, n, m, g, threads)
        v = {"T0": d.t, "Z0": d.z, "Tc": d.tc(c) if stat == "Tc" else None}[stat]
        return McEstimate.from_count(int(np.sum(v > x_or_alpha)), m)
    if stat == "T0_vs_normal_quantile":
        d = simulate_tz(spec, n, m, g, threads)
        return McEstimate.from_count(int(np.sum(d.t > std_normal_quantile(x_or_alpha))), m)
    if stat == "T0_vs_boot_quantile":
        if B is None:
            raise ConfigError("T0_vs_boot_quantile needs B")
        run = simulate_calibration(spec, n, B, m, g, independent=independent, threads=threads)
        kb, _ = run.exceedances([x_or_alpha])
        return McEstimate.from_count(int(kb[0]), m)
    raise ConfigError(f"unknown statistic {stat!r}")


def upper_quantiles(sorted_draws: np.ndarray, alphas) -> np.ndarray:
    """Upper alpha quantiles of an ascending sample, same rule as t_hat_alpha."""
    m = sorted_draws.size
    return np.array([sorted_draws[upper_rank(float(a), m) - 1] for a in alphas])


def mc_t_quantiles(spec: DistSpec, n: int, alphas, m: int, g: Stream, threads: int = 1) -> np.ndarray:
    """Oracle upper quantiles of T_0 from ``m`` simulated samples of the true law."""
    d = simulate_tz(spec, n, m, g, threads)
    return upper_quantiles(np.sort(d.t), alphas)


def simulate_ma_max(
    spec: MaStreamSpec, n: int, p: int, m: int, g: Stream, *, independent: bool = False,
    columns: bool = False, threads: int = 1,
) -> np.ndarray:
    """Per-replicate max_j T_0^(j) under the MA model (or every column T_0 with ``columns``)."""
    law = kernel_law(spec.innovation).as_tuple()
    out = np.empty(m * p if columns else m)

    def kernel(lo, hi):
        _ma_max_kernel(
            *law, float(spec.theta), int(spec.lag), int(n), int(p), g.ident, lo, hi,
            bool(independent), out, bool(columns),
        )

    run_blocks(kernel, m, threads, block=64)
    if np.any(np.isnan(out)):
        raise NumericValidityError("constant feature column in a dependence replicate")
    return out
