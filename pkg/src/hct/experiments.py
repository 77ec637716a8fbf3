"""The six experiments behind the CLI; each returns tables ready for CSV.

Every experiment reads randomness only from streams under
``StreamKey(seed, (experiment id, ...))`` and labels sub-streams by the
indices of the loop they serve, so outputs depend on config and seed alone.
"""
from __future__ import annotations

import json
import math

import numpy as np

from . import __version__
from .bootstrap import bootstrap_quantile, bootstrap_t_draws, min_resamples
from .config import ExperimentConfig, dist_spec, resolve
from .csvio import Table, write_csv
from .distributions import MaStreamSpec, sample_iid, sample_signal_matrix, skewness
from .errors import ConfigError, InfiniteMoment, InsufficientResamples
from .hc import alpha_grid, default_alpha0, hc_bootstrap, hc_normal, hc_oracle, required_resamples
from .mc import (
    McEstimate,
    mc_t_quantiles,
    parallel_map,
    simulate_calibration,
    simulate_ma_max,
    simulate_tz,
    upper_quantiles,
)
from .normal import std_normal_cdf, std_normal_quantile
from .phase import (
    PhaseRegion,
    classify_region,
    delta_formula,
    make_signal_config,
    rho_std,
    rho_theta,
)
from .prng import StreamKey, derive_stream
from .tail_approx import (
    ApproxInput,
    skew_corrected_quantile,
    standardized_tail_approx,
    studentized_tail_approx,
)

EXPERIMENT_IDS = {
    "tail-compare": 1,
    "boot-quantiles": 2,
    "hc-hist": 3,
    "dep-cdf": 4,
    "phase-plot": 5,
    "calibrate": 6,
}


def _root(cfg: ExperimentConfig):
    return derive_stream(StreamKey(cfg.seed, (EXPERIMENT_IDS[cfg.experiment],)))


def _gamma(spec) -> float:
    try:
        return skewness(spec)
    except InfiniteMoment:
        return math.nan


# ---------------------------------------------------------------- tail-compare


def run_tail_compare(cfg: ExperimentConfig, threads: int = 1) -> list[Table]:
    """Empirical cdfs and upper quantiles of T_0 and Z_0 against normal and skew-corrected forms."""
    cfg = resolve(cfg)
    root = _root(cfg)
    cdf = Table(
        "tail_compare_cdf",
        ["dist", "n", "x", "emp_cdf_T0", "emp_cdf_Z0", "normal_cdf",
         "approx_T0", "approx_Z0", "mc_se", "approx_valid"],
    )
    inv = Table(
        "tail_compare_quantile",
        ["dist", "n", "alpha", "q_T0", "q_Z0", "z_alpha", "approx_q_T0"],
    )
    m = cfg.replicates
    for di, d in enumerate(cfg.dist):
        spec = dist_spec(d)
        gamma = _gamma(spec)
        for ni, n in enumerate(cfg.n):
            draws = simulate_tz(spec, n, m, root.spawn(di, ni), threads)
            ts, zs = np.sort(draws.t), np.sort(draws.z)
            for x in cfg.x_grid:
                kt = int(np.searchsorted(ts, x, side="right"))
                kz = int(np.searchsorted(zs, x, side="right"))
                ft, fz = kt / m, kz / m
                inp = ApproxInput(float(x), n, 0.0 if math.isnan(gamma) else gamma)
                at = studentized_tail_approx(inp)
                az = standardized_tail_approx(inp)
                se = max(McEstimate.from_count(kt, m).se, McEstimate.from_count(kz, m).se)
                cdf.rows.append([
                    spec.label(), n, float(x), ft, fz, std_normal_cdf(float(x)),
                    1.0 - at.value, 1.0 - az.value, se, at.valid and az.valid,
                ])
            qt = upper_quantiles(ts, cfg.alpha_grid)
            qz = upper_quantiles(zs, cfg.alpha_grid)
            for a, q1, q2 in zip(cfg.alpha_grid, qt, qz):
                aq = skew_corrected_quantile(a, n, gamma) if a <= 0.5 and not math.isnan(gamma) else math.nan
                inv.rows.append([spec.label(), n, float(a), q1, q2, std_normal_quantile(a), aq])
    return [cdf, inv]


# ---------------------------------------------------------------- boot-quantiles


def run_boot_quantiles(cfg: ExperimentConfig, threads: int = 1) -> list[Table]:
    """Bootstrap-t quantile curves for repeated samples, with oracle and normal curves."""
    cfg = resolve(cfg)
    root = _root(cfg)
    alphas = [float(a) for a in cfg.alpha_grid]
    need = min_resamples(min(min(alphas), 0.5))
    B = cfg.B if cfg.B is not None else need
    if B < need:
        raise InsufficientResamples(f"B = {B} is below 100 / alpha_min = {need}")
    spec = dist_spec(cfg.dist[0])
    zq = [std_normal_quantile(a) for a in alphas]
    out = Table(
        "boot_quantiles",
        ["n", "rep_id", "alpha", "boot_q", "oracle_q", "normal_q", "n_degenerate"],
    )
    for ni, n in enumerate(cfg.n):
        oracle = mc_t_quantiles(spec, n, alphas, cfg.oracle_draws, root.spawn(ni, 0), threads)

        def one(rep, ni=ni, n=n):
            x = sample_iid(spec, n, root.spawn(ni, 1, rep))
            d = bootstrap_t_draws(x, B, root.spawn(ni, 2, rep))
            return d.n_degenerate, [bootstrap_quantile(d, a) for a in alphas]

        for rep, (ndeg, qs) in enumerate(parallel_map(one, range(cfg.replicates), threads)):
            for a, q, oq, z in zip(alphas, qs, oracle, zq):
                out.rows.append([n, rep, a, q, float(oq), z, ndeg])
    return [out]


# ---------------------------------------------------------------- hc-hist


def hc_design(cfg: ExperimentConfig, n: int, theta: float):
    """(p, grid, B, [(beta, r), ...]) for one (n, theta) block of hc-hist."""
    p = cfg.p if cfg.p is not None else int(round(n ** (1.0 / theta)))
    alpha0 = cfg.grid.get("alpha0") or default_alpha0(n, p)
    grid = alpha_grid(p, alpha0, cfg.grid["i_min"])
    B = cfg.B if cfg.B is not None else required_resamples(grid)
    betas = cfg.betas if cfg.betas is not None else [0.5, 0.5 + (1.0 - theta) / 4.0, 0.75, 1.0]
    if cfg.r is not None:
        if len(cfg.r) != len(betas):
            raise ConfigError("r must list one strength per beta")
        rs = [float(v) for v in cfg.r]
    else:
        rs = [min(1.0, cfg.r_scale * rho_theta(b, theta, closed=True)) for b in betas]
    return p, grid, int(B), list(zip([float(b) for b in betas], rs))


def run_hc_hist(cfg: ExperimentConfig, threads: int = 1) -> list[Table]:
    """hc (oracle), hc_n (bootstrap) and hc_norm under H0 and each H1 design.

    The H0 replicates do not depend on beta, so they are simulated once per
    (n, theta) and written with empty beta and r.
    """
    cfg = resolve(cfg)
    root = _root(cfg)
    spec = dist_spec(cfg.dist[0])
    out = Table(
        "hc_hist",
        ["variant", "hypothesis", "n", "p", "theta", "beta", "r", "replicate", "hc_value", "argmax_alpha"],
    )
    block = 0
    for n in cfg.n:
        for theta in cfg.theta:
            p, grid, B, designs = hc_design(cfg, n, theta)
            base = root.spawn(block)
            block += 1
            oracle_q = mc_t_quantiles(spec, n, grid.alphas, cfg.oracle_draws, base.spawn(0), threads)
            tasks = [("H0", None, None, 0, rep) for rep in range(cfg.replicates)]
            for bi, (beta, r) in enumerate(designs):
                tasks += [("H1", beta, r, bi + 1, rep) for rep in range(cfg.replicates)]

            def one(task, n=n, theta=theta, p=p, grid=grid, B=B, base=base, oracle_q=oracle_q):
                hyp, beta, r, bi, rep = task
                sc = make_signal_config(n, theta, beta if beta is not None else 1.0, r or 0.0, p=p)
                s = base.spawn(1, bi, rep)
                x = sample_signal_matrix(sc, spec, hyp, s.spawn(0)).data
                res = {
                    "oracle": hc_oracle(x, grid, oracle_q),
                    "bootstrap": hc_bootstrap(x, grid, B, s.spawn(1), split=bool(cfg.split), strict=True),
                    "normal": hc_normal(x, grid),
                }
                return [
                    [v, hyp, n, p, theta, beta, r, rep, h.value, h.argmax_alpha]
                    for v, h in res.items()
                ]

            for rows in parallel_map(one, tasks, threads):
                out.rows.extend(rows)
    return [out]


# ---------------------------------------------------------------- dep-cdf


def iid_replicates(m: int, p: int) -> int:
    """Replicates of the independent-column run: about 100 m column draws in total, capped at m."""
    return max(1, min(m, math.ceil(100 * m / p)))


def dep_curves(spec: MaStreamSpec, n: int, p: int, m: int, x_grid, root, threads: int = 1):
    """Joint cdf of max_j T_0^(j) and the product of marginals, with SEs, on ``x_grid``."""
    x_grid = np.asarray(x_grid, dtype=np.float64)
    joint = np.sort(simulate_ma_max(spec, n, p, m, root.spawn(0), threads=threads))
    m_iid = iid_replicates(m, p)
    cols = np.sort(
        simulate_ma_max(spec, n, p, m_iid, root.spawn(1), independent=True, columns=True, threads=threads)
    )
    fj = np.searchsorted(joint, x_grid, side="right") / m
    fm = np.searchsorted(cols, x_grid, side="right") / cols.size
    se_j = np.sqrt(fj * (1.0 - fj) / m)
    prod = fm**p
    se_p = p * fm ** (p - 1) * np.sqrt(fm * (1.0 - fm) / cols.size)
    return fj, prod, se_j, se_p, m_iid


def sup_gap(joint, prod, se_j, se_p) -> tuple[float, float]:
    """sup_x |joint - product| and the SE at the maximising x."""
    d = np.abs(np.asarray(joint) - np.asarray(prod))
    i = int(np.argmax(d))
    return float(d[i]), float(math.hypot(se_j[i], se_p[i]))


def run_dep_cdf(cfg: ExperimentConfig, threads: int = 1) -> list[Table]:
    """Joint versus product cdf of the maximum Studentised statistic under MA dependence."""
    cfg = resolve(cfg)
    root = _root(cfg)
    innov = dist_spec(cfg.dist[0])
    n = cfg.n[0]
    out = Table(
        "dep_cdf",
        ["config", "n", "p", "theta", "x", "joint_cdf", "product_cdf", "joint_se", "product_se", "iid_replicates"],
    )
    for ci, ma in enumerate(cfg.ma):
        p, theta = int(ma["p"]), float(ma["theta"])
        spec = MaStreamSpec(theta, innov)
        fj, prod, se_j, se_p, m_iid = dep_curves(spec, n, p, cfg.replicates, cfg.x_grid, root.spawn(ci), threads)
        for k, x in enumerate(cfg.x_grid):
            out.rows.append([ci, n, p, theta, float(x), fj[k], prod[k], se_j[k], se_p[k], m_iid])
    return [out]


# ---------------------------------------------------------------- phase-plot


def run_phase_plot(cfg: ExperimentConfig, threads: int = 1) -> list[Table]:
    """Phase functions, region labels and delta over beta, theta and sample r values."""
    cfg = resolve(cfg)
    out = Table(
        "phase",
        ["beta", "theta", "rho_theta", "rho_std", "r", "region", "delta", "r_I_II", "r_II_III"],
    )
    for theta in cfg.theta:
        for beta in cfg.beta_grid:
            rt, rs = rho_theta(beta, theta), rho_std(beta)
            for r in cfg.r_grid:
                region = classify_region(beta, r, theta)
                detectable = region not in (PhaseRegion.UNDETECTABLE, PhaseRegion.BELOW_BETA)
                delta = delta_formula(region, beta, r, theta) if detectable else math.nan
                out.rows.append([
                    float(beta), float(theta), rt, rs, float(r), region.value, delta,
                    (1.0 - theta) / 4.0, 0.25,
                ])
    return [out]


# ---------------------------------------------------------------- calibrate


def run_calibrate(cfg: ExperimentConfig, threads: int = 1) -> list[Table]:
    """P(T_0 > t_hat_alpha) and P(T_0 > z_alpha) by Monte Carlo."""
    cfg = resolve(cfg)
    root = _root(cfg)
    spec = dist_spec(cfg.dist[0])
    alphas = [float(a) for a in cfg.alpha_grid]
    need = min_resamples(min(min(alphas), 0.5))
    B = cfg.B if cfg.B is not None else need
    if B < need:
        raise InsufficientResamples(f"B = {B} is below 100 / alpha_min = {need}")
    m = cfg.replicates
    out = Table(
        "calibrate",
        ["n", "alpha", "p_hat_boot", "p_hat_norm", "se", "se_norm", "B", "replicates", "mode"],
    )
    for ni, n in enumerate(cfg.n):
        run = simulate_calibration(
            spec, n, B, m, root.spawn(ni), independent=cfg.mode == "independent", threads=threads
        )
        kb, kn = run.exceedances(alphas)
        for a, b, c in zip(alphas, kb, kn):
            eb, en = McEstimate.from_count(int(b), m), McEstimate.from_count(int(c), m)
            out.rows.append([n, a, eb.estimate, en.estimate, eb.se, en.se, B, m, cfg.mode])
    return [out]


RUNNERS = {
    "tail-compare": run_tail_compare,
    "boot-quantiles": run_boot_quantiles,
    "hc-hist": run_hc_hist,
    "dep-cdf": run_dep_cdf,
    "phase-plot": run_phase_plot,
    "calibrate": run_calibrate,
}


def output_header(cfg: ExperimentConfig) -> list[str]:
    """Version, seed and the resolved config; the output directory is left out
    so that identical runs written to different places stay byte-identical."""
    body = cfg.to_json()
    del body["output_dir"]
    cfg_json = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return [f"hct {__version__}", f"seed {cfg.seed}", f"config {cfg_json}"]


def run_experiment(cfg: ExperimentConfig, threads: int = 1, out_dir: str | None = None) -> list[str]:
    """Run, write one CSV per table, and return the file paths."""
    cfg = resolve(cfg)
    tables = RUNNERS[cfg.experiment](cfg, threads)
    out_dir = out_dir or cfg.output_dir
    header = output_header(cfg)
    paths = []
    for t in tables:
        path = f"{out_dir}/{t.name}.csv"
        write_csv(path, t, header)
        paths.append(path)
    return paths
