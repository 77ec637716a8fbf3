import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hct.bootstrap import bootstrap_quantile, bootstrap_t_draws
from hct.errors import ConfigError, DegenerateSample, EmptyGrid, InsufficientResamples, MissingQuantile
from hct.hc import (
    alpha_grid,
    bootstrap_counts,
    default_alpha0,
    hc_bootstrap,
    hc_from_counts,
    hc_from_indicators,
    hc_normal,
    hc_oracle,
    required_resamples,
)
from hct.normal import std_normal_quantile
from hct.prng import StreamKey, derive_stream
from hct.stats import t_statistic


def brute_force_hc(ind, alphas):
    """Direct evaluation in exact rationals; returns (value, argmax) with first-index ties."""
    p = ind.shape[0]
    best, key, arg = None, None, None
    for i, a in enumerate(alphas):
        fa = Fraction(round(a * p), p)
        s = sum(Fraction(int(ind[j, i])) - fa for j in range(p))
        # compare signed squares: s / sqrt(p a (1 - a))
        k = (1 if s >= 0 else -1) * s * s / (p * fa * (1 - fa))
        if key is None or k > key:
            key, arg = k, a
            best = float(s) / math.sqrt(float(p * fa * (1 - fa)))
    return best, arg


def test_default_alpha0_and_grid_size():
    a0 = default_alpha0(100, 10**4)
    assert a0 == pytest.approx(100 * math.log(10**4) / 10**4)
    assert alpha_grid(10**4, a0).size == 921
    with pytest.raises(ConfigError):
        default_alpha0(100, 200)


def test_small_grid():
    g = alpha_grid(4, 0.5)
    assert g.alphas.tolist() == [0.25, 0.5]
    with pytest.raises(EmptyGrid):
        alpha_grid(10, 0.5, i_min=10)
    g = alpha_grid(900, 0.1, i_min=10)
    assert g.alphas[0] == pytest.approx(10 / 900) and g.size == 81
    assert np.all(np.diff(g.alphas) > 0) and g.alphas[-1] <= 0.1


def test_hc_examples():
    g = alpha_grid(4, 0.5)
    r = hc_from_counts([4, 4], g)
    assert r.value == pytest.approx(3 / math.sqrt(0.75), rel=1e-14)
    assert r.value == pytest.approx(3.4641016, abs=1e-7)
    assert r.trajectory[1] == pytest.approx(2.0)
    assert r.argmax_alpha == 0.25
    g1 = alpha_grid(4, 0.25)
    assert hc_from_counts([1], g1).value == 0.0
    assert hc_from_counts([0], g1).value == pytest.approx(-1.1547005, abs=1e-7)


def test_argmax_first_on_ties():
    g = alpha_grid(4, 0.5)
    # count 1 at 1/4 and 2 at 1/2 both give zero
    r = hc_from_counts([1, 2], g)
    assert r.value == 0.0 and r.argmax_alpha == 0.25


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 8), st.integers(1, 4), st.data())
def test_indicators_match_brute_force(p, levels, data):
    levels = min(levels, p - 1)
    g = alpha_grid(p, levels / p)
    # monotone rows: once a feature exceeds at alpha_i it exceeds at all larger alpha
    first = data.draw(st.lists(st.integers(0, g.size), min_size=p, max_size=p))
    ind = np.array([[i >= f for i in range(g.size)] for f in first], dtype=bool)
    r = hc_from_indicators(ind, g)
    v, a = brute_force_hc(ind, g.alphas)
    assert r.value == pytest.approx(v, rel=1e-12, abs=1e-12)
    assert r.argmax_alpha == a


def null_matrix(n, p, key):
    return derive_stream(StreamKey(key)).standard_normal((n, p))


def test_bootstrap_dual_route():
    # the rank/count fast path against explicit sorted draws and order-statistic quantiles
    m = null_matrix(15, 12, 1)
    m[:, 3] += 0.8
    grid = alpha_grid(12, 0.5)
    B = required_resamples(grid)
    g = derive_stream(StreamKey(2))
    r = hc_bootstrap(m, grid, B, g)
    ind = np.zeros((12, grid.size), dtype=bool)
    for j in range(12):
        d = bootstrap_t_draws(m[:, j], B, g.spawn(j))
        t = t_statistic(m[:, j])
        ind[j] = [t > bootstrap_quantile(d, a) for a in grid.alphas]
    ref = hc_from_indicators(ind, grid)
    assert np.array_equal(r.counts, ref.counts)
    assert r.value == ref.value


def test_bootstrap_indicator_rows_are_monotone():
    m = null_matrix(20, 40, 3)
    grid = alpha_grid(40, 0.5)
    bc = bootstrap_counts(m, 4000, derive_stream(StreamKey(4)))
    ind = bc.indicators(grid)
    assert np.all(np.diff(ind.astype(int), axis=1) >= 0)


def test_huge_shift_always_exceeds():
    m = null_matrix(30, 10, 5)
    m[:, 0] += 10.0
    grid = alpha_grid(10, 0.5)
    bc = bootstrap_counts(m, 2000, derive_stream(StreamKey(6)))
    assert bc.indicators(grid)[0].all()


def test_permutation_invariance():
    m = null_matrix(20, 30, 7)
    m[:, :3] += 0.7
    grid = alpha_grid(30, 0.5)
    perm = np.random.default_rng(0).permutation(30)
    q = np.array([std_normal_quantile(a) + 0.1 for a in grid.alphas])
    assert hc_normal(m, grid).value == hc_normal(m[:, perm], grid).value
    assert hc_oracle(m, grid, q).value == hc_oracle(m[:, perm], grid, q).value
    # each column keeps its own stream, so permute the stream labels with it
    bc = bootstrap_counts(m, 3000, derive_stream(StreamKey(8)))
    counts = bc.indicators(grid).sum(axis=0)
    pc = bc.indicators(grid)[perm].sum(axis=0)
    assert np.array_equal(counts, pc)
    # a fresh bootstrap of the permuted matrix agrees in distribution, not draw by draw
    r = hc_bootstrap(m[:, perm], grid, 3000, derive_stream(StreamKey(8)))
    assert abs(r.value - hc_from_counts(counts, grid).value) < 3.0


def test_normal_oracle_equals_hc_normal():
    m = null_matrix(25, 50, 9)
    grid = alpha_grid(50, 0.3)
    z = np.array([std_normal_quantile(a) for a in grid.alphas])
    a, b = hc_normal(m, grid), hc_oracle(m, grid, z)
    assert a.value == b.value and np.array_equal(a.counts, b.counts)
    full = hc_oracle(m, grid, np.tile(z, (50, 1)))
    assert full.value == a.value


def test_infinite_oracle_means_no_exceedances():
    m = null_matrix(10, 8, 10)
    grid = alpha_grid(8, 0.5)
    r = hc_oracle(m, grid, np.full(grid.size, np.inf))
    a = grid.alphas
    assert np.array_equal(r.counts, np.zeros(grid.size))
    assert np.allclose(r.trajectory, -np.sqrt(8 * a / (1 - a)), rtol=1e-14)


def test_missing_quantiles():
    m = null_matrix(10, 8, 11)
    grid = alpha_grid(8, 0.5)
    with pytest.raises(MissingQuantile):
        hc_oracle(m, grid, np.zeros(grid.size - 1))
    q = np.zeros(grid.size)
    q[1] = np.nan
    with pytest.raises(MissingQuantile):
        hc_oracle(m, grid, q)


def test_resolution_and_degenerate_errors():
    m = null_matrix(10, 20, 12)
    grid = alpha_grid(20, 0.5)
    assert required_resamples(grid) == 2000
    with pytest.raises(InsufficientResamples):
        hc_bootstrap(m, grid, 1999, derive_stream(StreamKey(13)))
    m[:, 4] = 1.0
    with pytest.raises(DegenerateSample):
        hc_bootstrap(m, grid, 2000, derive_stream(StreamKey(13)))
    with pytest.raises(DegenerateSample):
        hc_normal(m, grid)


def test_split_mode():
    m = null_matrix(20, 10, 14)
    grid = alpha_grid(10, 0.5)
    r = hc_bootstrap(m, grid, 2000, derive_stream(StreamKey(15)), split=True)
    bc = bootstrap_counts(m, 2000, derive_stream(StreamKey(15)), split=True)
    assert np.allclose(bc.t_obs, [t_statistic(m[10:, j]) for j in range(10)])
    assert r.value == hc_from_counts(bc.indicators(grid).sum(axis=0), grid).value


def test_threads_do_not_change_result():
    m = null_matrix(15, 37, 16)
    grid = alpha_grid(37, 0.4)
    a = bootstrap_counts(m, 3000, derive_stream(StreamKey(17)), threads=1)
    b = bootstrap_counts(m, 3000, derive_stream(StreamKey(17)), threads=8)
    assert np.array_equal(a.below, b.below) and np.array_equal(a.valid, b.valid)


def test_null_mean_trajectory_near_zero():
    # symmetric null, large n: the normal-calibrated terms average near zero
    grid = alpha_grid(200, 0.25)
    reps = 200
    trajs = np.array([hc_normal(null_matrix(400, 200, 100 + r), grid).trajectory for r in range(reps)])
    mean, spread = trajs.mean(axis=0), trajs.std(axis=0)
    assert np.all(np.abs(mean) <= 3 * spread / math.sqrt(reps) + 0.05)


def test_null_below_alternative():
    grid = alpha_grid(100, 0.3)
    B = required_resamples(grid)
    h0, h1 = [], []
    for r in range(40):
        m = null_matrix(30, 100, 200 + r)
        h0.append(hc_bootstrap(m, grid, B, derive_stream(StreamKey(300 + r))).value)
        m[:, :8] += 0.8
        h1.append(hc_bootstrap(m, grid, B, derive_stream(StreamKey(300 + r))).value)
    assert np.median(h1) > np.percentile(h0, 90)
