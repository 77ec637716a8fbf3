"""Higher criticism over a grid of tail levels.

For each level ``alpha_i = i / p`` on the grid, count the features whose
statistic exceeds its critical value ``t_alpha`` and standardise the excess
over the expected ``p * alpha``:

    HC(alpha) = sqrt(p) (count / p - alpha) / sqrt(alpha (1 - alpha))

The three variants differ only in ``t_alpha``: per-feature bootstrap-t
quantiles, the normal quantile ``z_alpha``, or an externally supplied
(oracle) table.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .bootstrap import (
    DEGENERATE_SHARE_LIMIT,
    _boot_count_below,
    _centre,
    _near_integer_ceil,
    _near_integer_floor,
    upper_rank,
)
from .errors import (
    ConfigError,
    DegenerateSample,
    EmptyGrid,
    InsufficientResamples,
    MissingQuantile,
    NumericValidityError,
)
from .normal import std_normal_quantile
from .prng import STATE_SIZE, Stream, seed_child_state
from .stats import column_t_statistics

VARIANTS = ("bootstrap", "normal", "oracle")


def default_alpha0(n: int, p: int) -> float:
    """alpha0 = n log(p) / p, the largest level the grid reaches by default."""
    a = n * math.log(p) / p
    if not 0.0 < a < 1.0:
        raise ConfigError(f"default alpha0 = n log p / p = {a:.4g} is not in (0, 1); set alpha0")
    return a


@dataclass(frozen=True)
class AlphaGrid:
    """Levels alpha_i = i / p for i_min <= i <= floor(alpha0 p)."""

    p: int
    alpha0: float
    i_min: int
    alphas: np.ndarray

    @property
    def size(self) -> int:
        return int(self.alphas.size)

    @property
    def indices(self) -> np.ndarray:
        """The integers i with alpha_i = i / p."""
        return np.arange(self.i_min, self.i_min + self.size, dtype=np.int64)


def alpha_grid(p: int, alpha0: float, i_min: int = 1) -> AlphaGrid:
    if p < 1:
        raise ConfigError(f"p must be positive, got {p}")
    if not 0.0 < alpha0 < 1.0:
        raise ConfigError(f"alpha0 must lie in (0, 1), got {alpha0}")
    if i_min < 1:
        raise ConfigError(f"i_min must be at least 1, got {i_min}")
    i_max = _near_integer_floor(alpha0 * p)
    if i_max < i_min:
        raise EmptyGrid(f"no grid points: floor(alpha0 p) = {i_max} < i_min = {i_min}")
    alphas = np.arange(i_min, i_max + 1, dtype=np.float64) / p
    alphas.setflags(write=False)
    return AlphaGrid(int(p), float(alpha0), int(i_min), alphas)


@dataclass(frozen=True)
class HcResult:
    """The maximised statistic, where it was attained, and the whole curve."""

    value: float
    argmax_alpha: float
    trajectory: np.ndarray
    counts: np.ndarray
    variant: str


def hc_from_counts(counts, grid: AlphaGrid, variant: str = "bootstrap") -> HcResult:
    """HC from per-level exceedance counts; ties go to the smallest alpha."""
    counts = np.asarray(counts, dtype=np.int64)
    if counts.shape != grid.alphas.shape:
        raise ValueError(f"need one count per grid level ({grid.size}), got shape {counts.shape}")
    # (c - p a) / sqrt(p a (1 - a)) with p a = i exact, so equal terms tie exactly
    p, a, i = grid.p, grid.alphas, grid.indices
    traj = (counts - i) / np.sqrt(i * (p - i) / p)
    i = int(np.argmax(traj))
    traj.setflags(write=False)
    return HcResult(float(traj[i]), float(a[i]), traj, counts, variant)


def hc_from_indicators(indicators, grid: AlphaGrid, variant: str = "bootstrap") -> HcResult:
    """HC from a p-by-|grid| matrix of exceedance indicators I(T_j > t_alpha_i)."""
    ind = np.asarray(indicators)
    if ind.shape != (grid.p, grid.size):
        raise ValueError(f"indicators must have shape {(grid.p, grid.size)}, got {ind.shape}")
    return hc_from_counts(ind.astype(bool).sum(axis=0), grid, variant)


def _counts_above(t, thresholds) -> np.ndarray:
    """#{j : t_j > c} for each shared threshold c."""
    s = np.sort(t)
    return s.size - np.searchsorted(s, thresholds, side="right")


@dataclass(frozen=True)
class BootstrapCounts:
    """Per-feature bootstrap summaries that decide every grid exceedance.

    ``below[j]`` counts valid T* draws strictly under the observed T_j and
    ``valid[j]`` the draws left after dropping degenerate resamples.
    """

    t_obs: np.ndarray
    below: np.ndarray
    valid: np.ndarray
    B: int

    def indicators(self, grid: AlphaGrid) -> np.ndarray:
        """I(T_j > t_hat_alpha) as a p-by-|grid| boolean matrix."""
        ranks = upper_rank_table(grid.alphas, self.valid)
        return self.below[:, None] >= ranks

    @property
    def n_degenerate(self) -> np.ndarray:
        return self.B - self.valid


@njit(cache=True, nogil=True)
def _rank_table(alphas, valid, out):
    for j in range(valid.size):
        for i in range(alphas.size):
            out[j, i] = upper_rank(alphas[i], valid[j])


def upper_rank_table(alphas, valid) -> np.ndarray:
    out = np.empty((valid.size, alphas.size), dtype=np.int64)
    _rank_table(np.asarray(alphas, dtype=np.float64), np.asarray(valid, dtype=np.int64), out)
    return out


@njit(cache=True, nogil=True)
def _bootstrap_columns(mb, t_obs, nboot, parent, lo, hi, below, valid):
    """Count-below bootstrap for columns lo..hi-1; column j uses child stream j."""
    n = mb.shape[0]
    st = np.empty(STATE_SIZE, dtype=np.uint64)
    col = np.empty(n)
    xc = np.empty(n)
    for j in range(lo, hi):
        for i in range(n):
            col[i] = mb[i, j]
        if not _centre(col, xc):
            below[j] = 0
            valid[j] = 0
            continue
        seed_child_state(st, parent, j)
        below[j], valid[j] = _boot_count_below(xc, t_obs[j], nboot, st)


def _column_blocks(p: int, threads: int):
    step = max(1, -(-p // max(1, threads)))
    return [(lo, min(p, lo + step)) for lo in range(0, p, step)]


def bootstrap_counts(
    m, B: int, g: Stream, *, split: bool = False, threads: int = 1
) -> BootstrapCounts:
    """Observed T_j and bootstrap counts for every column of ``m``.

    Column ``j`` resamples with child stream ``j`` of ``g``, so the result
    does not depend on ``threads``.  With ``split`` the first half of the
    rows feeds the bootstrap and the second half the observed statistic.
    """
    m = _check_matrix(m)
    if B < 1:
        raise ConfigError(f"B must be at least 1, got {B}")
    n, p = m.shape
    if split:
        h = n // 2
        if h < 2 or n - h < 2:
            raise ConfigError("sample splitting needs at least 4 rows")
        mb, ms = np.ascontiguousarray(m[:h]), m[h:]
    else:
        mb, ms = m, m
    t_obs = column_t_statistics(ms)
    if split:
        const = np.flatnonzero(mb.min(axis=0) == mb.max(axis=0))
        if const.size:
            raise DegenerateSample(f"column {int(const[0])} is constant in the bootstrap half")
    below = np.zeros(p, dtype=np.int64)
    valid = np.zeros(p, dtype=np.int64)
    parent = g.ident
    blocks = _column_blocks(p, threads)
    if threads <= 1 or len(blocks) == 1:
        _bootstrap_columns(mb, t_obs, int(B), parent, 0, p, below, valid)
    else:
        with ThreadPoolExecutor(threads) as ex:
            futs = [
                ex.submit(_bootstrap_columns, mb, t_obs, int(B), parent, lo, hi, below, valid)
                for lo, hi in blocks
            ]
            for f in futs:
                f.result()
    if np.any(valid == 0):
        j = int(np.flatnonzero(valid == 0)[0])
        raise NumericValidityError(f"column {j}: no usable bootstrap resamples")
    return BootstrapCounts(t_obs, below, valid, int(B))


def _check_matrix(m) -> np.ndarray:
    m = np.ascontiguousarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected an n-by-p matrix, got shape {m.shape}")
    if m.shape[0] < 2 or m.shape[1] < 1:
        raise ValueError(f"need at least 2 rows and 1 column, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite values")
    return m


def required_resamples(grid: AlphaGrid) -> int:
    """ceil(100 / alpha) at the smallest grid level."""
    return _near_integer_ceil(100.0 / float(grid.alphas[0]))


def _check_resolution(grid: AlphaGrid, valid: np.ndarray) -> None:
    # after dropping degenerate resamples the smallest level must still be resolvable
    need = _near_integer_ceil(1.0 / float(grid.alphas[0]))
    v = int(valid.min())
    if v < need:
        raise InsufficientResamples(f"{v} usable resamples cannot resolve alpha = {grid.alphas[0]:.4g}")


def hc_bootstrap(
    m, grid: AlphaGrid, B: int, g: Stream, *, split: bool = False, threads: int = 1,
    strict: bool = False,
) -> HcResult:
    """Bootstrap-t higher criticism of an n-by-p matrix.

    With ``strict`` a column whose degenerate-resample share exceeds the
    reliability limit raises :class:`NumericValidityError`.
    """
    m = _check_matrix(m)
    if m.shape[1] != grid.p:
        raise ValueError(f"grid built for p={grid.p} but matrix has {m.shape[1]} columns")
    need = required_resamples(grid)
    if B < need:
        raise InsufficientResamples(
            f"B = {B} is below 100 / alpha_min = {need} for the smallest grid level"
        )
    bc = bootstrap_counts(m, B, g, split=split, threads=threads)
    _check_resolution(grid, bc.valid)
    if strict and np.any(bc.n_degenerate > DEGENERATE_SHARE_LIMIT * B):
        raise NumericValidityError("degenerate bootstrap share above the reliability limit")
    return hc_from_counts(_bootstrap_grid_counts(bc, grid), grid, "bootstrap")


def _bootstrap_grid_counts(bc: BootstrapCounts, grid: AlphaGrid) -> np.ndarray:
    if np.all(bc.valid == bc.valid[0]):
        # shared rank per level: count columns with below >= rank
        ranks = upper_rank_table(grid.alphas, bc.valid[:1])[0]
        s = np.sort(bc.below)
        return s.size - np.searchsorted(s, ranks, side="left")
    return bc.indicators(grid).sum(axis=0)


def hc_normal(m, grid: AlphaGrid) -> HcResult:
    """HC with the normal critical values z_alpha shared by all features."""
    m = _check_matrix(m)
    if m.shape[1] != grid.p:
        raise ValueError(f"grid built for p={grid.p} but matrix has {m.shape[1]} columns")
    t = column_t_statistics(m)
    z = np.array([std_normal_quantile(a) for a in grid.alphas])
    return hc_from_counts(_counts_above(t, z), grid, "normal")


def hc_oracle(m, grid: AlphaGrid, quantiles) -> HcResult:
    """HC with exact null quantiles of T_j.

    ``quantiles`` is either one row of length |grid| shared by all features
    or a p-by-|grid| table.
    """
    m = _check_matrix(m)
    if m.shape[1] != grid.p:
        raise ValueError(f"grid built for p={grid.p} but matrix has {m.shape[1]} columns")
    q = np.asarray(quantiles, dtype=np.float64)
    if q.shape not in ((grid.size,), (grid.p, grid.size)):
        raise MissingQuantile(
            f"oracle table must have shape {(grid.size,)} or {(grid.p, grid.size)}, got {q.shape}"
        )
    if np.any(np.isnan(q)):
        # +inf is a valid threshold (never exceeded); NaN marks a missing entry
        raise MissingQuantile("oracle table has missing (NaN) entries")
    t = column_t_statistics(m)
    if q.ndim == 1:
        counts = _counts_above(t, q)
    else:
        counts = (t[:, None] > q).sum(axis=0)
    return hc_from_counts(counts, grid, "oracle")

