import math

import numpy as np
import pytest
from scipy import stats

from hct.bootstrap import bootstrap_quantile, bootstrap_t_draws
from hct.distributions import ChiSquared, FisherF, MaStreamSpec, NormalAbsPow, Pareto, StdNormal, sample_iid, sample_ma_matrix
from hct.errors import ConfigError
from hct.mc import (
    McEstimate,
    estimate_exceedance,
    mc_t_quantiles,
    parallel_map,
    simulate_calibration,
    simulate_ma_max,
    simulate_tz,
    upper_quantiles,
)
from hct.prng import StreamKey, derive_stream
from hct.stats import t_statistic, z_statistic


def test_mc_estimate_se():
    e = McEstimate.from_count(250, 1000)
    assert e.estimate == 0.25 and e.m == 1000
    assert e.se == pytest.approx(math.sqrt(0.25 * 0.75 / 1000))


def test_parallel_map_preserves_order():
    assert parallel_map(lambda v: v * v, list(range(50)), threads=8) == [v * v for v in range(50)]


def test_tz_replays_public_sampler():
    # replicate r is the first n draws of child stream r
    g = derive_stream(StreamKey(1))
    d = simulate_tz(ChiSquared(10), 12, 40, g)
    for r in range(40):
        x = sample_iid(ChiSquared(10), 12, g.spawn(r))
        assert d.t[r] == pytest.approx(t_statistic(x), rel=1e-12)
        assert d.z[r] == pytest.approx(z_statistic(x), rel=1e-12)
    assert np.allclose(d.tc(0.5), d.t + 0.5 / d.s)


def test_tz_thread_invariance():
    a = simulate_tz(FisherF(5, 5), 20, 10_000, derive_stream(StreamKey(2)), threads=1)
    b = simulate_tz(FisherF(5, 5), 20, 10_000, derive_stream(StreamKey(2)), threads=8)
    assert np.array_equal(a.t, b.t) and np.array_equal(a.z, b.z)


def test_symmetric_law_gives_half():
    e = estimate_exceedance("T0", StdNormal(), 5, 0.0, 10**6, derive_stream(StreamKey(3)))
    assert abs(e.estimate - 0.5) <= 3 * 0.0005


def test_z0_exactly_normal():
    e = estimate_exceedance("Z0", StdNormal(), 7, 1.959964, 10**6, derive_stream(StreamKey(4)))
    assert abs(e.estimate - 0.025) <= 3 * e.se


def test_t0_under_normal_is_scaled_student_t():
    # with the 1/n variance, T0 sqrt((n-1)/n) is Student t with n-1 df
    n = 8
    d = simulate_tz(StdNormal(), n, 200_000, derive_stream(StreamKey(5)))
    assert stats.kstest(d.t * math.sqrt((n - 1) / n), stats.t(n - 1).cdf).pvalue > 0.001


def test_chi2_t0_below_normal_tail():
    e = estimate_exceedance("T0", ChiSquared(10), 400, 2.0, 10**6, derive_stream(StreamKey(6)))
    assert stats.norm.sf(2) - e.estimate > 3 * e.se


def test_estimate_exceedance_errors():
    g = derive_stream(StreamKey(7))
    with pytest.raises(ConfigError):
        estimate_exceedance("T0", StdNormal(), 5, 0.0, 99, g)
    with pytest.raises(ConfigError):
        estimate_exceedance("T1", StdNormal(), 5, 0.0, 100, g)
    with pytest.raises(ConfigError):
        estimate_exceedance("T0_vs_boot_quantile", StdNormal(), 5, 0.05, 100, g)


def test_calibration_dual_route():
    g = derive_stream(StreamKey(8))
    n, B, m = 10, 400, 30
    for independent in (True, False):
        run = simulate_calibration(NormalAbsPow(1), n, B, m, g, independent=independent)
        kb = 0
        for r in range(m):
            x = sample_iid(NormalAbsPow(1), n, g.spawn(0).spawn(r))
            y = sample_iid(NormalAbsPow(1), n, g.spawn(2).spawn(r)) if independent else x
            t = t_statistic(y)
            assert run.t[r] == pytest.approx(t, rel=1e-12)
            d = bootstrap_t_draws(x, B, g.spawn(1).spawn(r))
            assert run.valid[r] == d.b_eff
            assert run.below[r] == int(np.sum(d.sorted_t < run.t[r]))
            kb += t > bootstrap_quantile(d, 0.1)
        assert run.exceedances([0.1])[0][0] == kb


def test_calibration_normal_counts():
    g = derive_stream(StreamKey(9))
    run = simulate_calibration(StdNormal(), 10, 200, 500, g)
    _, kn = run.exceedances([0.05, 0.5])
    assert kn[0] == np.sum(run.t > stats.norm.isf(0.05))
    assert kn[1] == np.sum(run.t > 0)


def test_boot_quantile_exceedance_near_alpha_for_normal():
    e = estimate_exceedance(
        "T0_vs_boot_quantile", StdNormal(), 30, 0.1, 4000, derive_stream(StreamKey(10)), B=1000
    )
    assert abs(e.estimate - 0.1) <= 4 * e.se


def test_upper_quantiles_rule():
    s = np.arange(1.0, 101.0)
    assert upper_quantiles(s, [0.05, 0.25]).tolist() == [95.0, 75.0]


def test_mc_t_quantiles_normal():
    n = 10
    q = mc_t_quantiles(StdNormal(), n, [0.05, 0.1], 400_000, derive_stream(StreamKey(11)))
    exact = stats.t(n - 1).isf([0.05, 0.1]) * math.sqrt(n / (n - 1))
    assert np.allclose(q, exact, atol=0.02)


def test_ma_max_replays_matrix_sampler():
    spec = MaStreamSpec(0.5, Pareto(5, 5))
    g = derive_stream(StreamKey(12))
    cols = simulate_ma_max(spec, 10, 6, 5, g, columns=True)
    mx = simulate_ma_max(spec, 10, 6, 5, g)
    for r in range(5):
        m = sample_ma_matrix(spec, 10, 6, g.spawn(r))
        t = [t_statistic(m[:, j]) for j in range(6)]
        assert np.allclose(cols[r * 6:(r + 1) * 6], t, rtol=1e-12)
        assert mx[r] == pytest.approx(max(t), rel=1e-12)


def test_ma_independent_columns_share_marginal():
    spec = MaStreamSpec(0.5, Pareto(5, 5))
    dep = simulate_ma_max(spec, 20, 5, 4000, derive_stream(StreamKey(13)), columns=True)
    ind = simulate_ma_max(spec, 20, 5, 4000, derive_stream(StreamKey(14)), independent=True, columns=True)
    assert stats.ks_2samp(dep, ind).pvalue > 0.001
    # dependent neighbours are correlated, independent ones are not
    d = dep.reshape(-1, 5)
    i = ind.reshape(-1, 5)
    assert np.corrcoef(d[:, 0], d[:, 1])[0, 1] > 0.2
    assert abs(np.corrcoef(i[:, 0], i[:, 1])[0, 1]) < 0.05
