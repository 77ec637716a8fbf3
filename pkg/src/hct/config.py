"""Experiment configuration: JSON schema 1, defaults per experiment and scale."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Any

from .distributions import DistSpec
from .errors import ConfigError

SCHEMA = 1
EXPERIMENTS = ("tail-compare", "boot-quantiles", "hc-hist", "dep-cdf", "phase-plot", "calibrate")
DEFAULT_SEED = 20100101


@dataclass
class ExperimentConfig:
    """Everything an experiment run depends on, apart from the thread count.

    Fields left as None are filled by :func:`resolve` from the experiment's
    desk-scale (or, with ``paper_scale``, paper-scale) defaults, so the
    resolved config written to output headers is complete.
    """

    experiment: str
    schema: int = SCHEMA
    seed: int = DEFAULT_SEED
    paper_scale: bool = False
    n: list | None = None
    p: int | None = None
    theta: list | None = None
    B: int | None = None
    replicates: int | None = None
    dist: list | None = None
    ma: list | None = None
    betas: list | None = None
    r: list | None = None
    r_scale: float | None = None
    grid: dict | None = None
    x_grid: list | None = None
    alpha_grid: list | None = None
    beta_grid: list | None = None
    r_grid: list | None = None
    oracle_draws: int | None = None
    mode: str | None = None
    split: bool | None = None
    output_dir: str = "out"

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        if obj.get("schema") != SCHEMA:
            raise ConfigError(f'config needs "schema": {SCHEMA}, got {obj.get("schema")!r}')
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(obj) - names)
        if unknown:
            raise ConfigError(f"unknown config fields: {unknown}")
        if "experiment" not in obj:
            raise ConfigError('config needs an "experiment" field')
        cfg = cls(**obj)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        for name in ("p", "B", "replicates", "oracle_draws"):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, int) or v < 1):
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if self.n is not None and (
            not isinstance(self.n, list) or not all(isinstance(v, int) and v >= 2 for v in self.n)
        ):
            raise ConfigError(f"n must be a list of integers >= 2, got {self.n!r}")
        if self.mode is not None and self.mode not in ("independent", "shared"):
            raise ConfigError(f"mode must be 'independent' or 'shared', got {self.mode!r}")
        if self.dist is not None:
            for d in self.dist:
                dist_spec(d)
        if self.grid is not None:
            extra = set(self.grid) - {"alpha0", "i_min"}
            if extra:
                raise ConfigError(f"unknown grid fields: {sorted(extra)}")


def dist_spec(obj: Any) -> DistSpec:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError(f'distribution must be an object with "kind" and "params", got {obj!r}')
    return DistSpec.from_json(obj)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return ExperimentConfig.from_json(obj)


def _d(kind, *params):
    return {"kind": kind, "params": list(params), "standardized": True}


_PHASE_BETAS = [round(0.5 + 0.01 * i, 2) for i in range(1, 50)]

_DESK: dict[str, dict] = {
    "tail-compare": dict(
        n=[50, 100],
        dist=[_d("NormalAbsPow", 1), _d("NormalAbsPow", 5)],
        replicates=10**6,
        x_grid=[round(-4.0 + 0.25 * i, 2) for i in range(33)],
        alpha_grid=[0.001, 0.005, 0.01, 0.025, 0.05, 0.1, 0.2, 0.3, 0.5],
    ),
    "boot-quantiles": dict(
        n=[50, 100, 250],
        dist=[_d("FisherF", 5, 5)],
        replicates=200,
        alpha_grid=[0.01, 0.02, 0.05, 0.1, 0.15, 0.2],
        oracle_draws=10**6,
    ),
    "hc-hist": dict(
        n=[30],
        theta=[0.5],
        dist=[_d("FisherF", 5, 5)],
        replicates=200,
        r_scale=1.0,
        grid={"alpha0": None, "i_min": 10},
        oracle_draws=10**7,
        split=False,
    ),
    "dep-cdf": dict(
        n=[50],
        dist=[_d("Pareto", 5, 5)],
        ma=[{"p": 100, "theta": 0.5}, {"p": 100, "theta": 0.2}, {"p": 10**4, "theta": 0.2}],
        replicates=5000,
        x_grid=[round(1.0 + 0.1 * i, 2) for i in range(41)],
    ),
    "phase-plot": dict(
        theta=[0.25, 0.5, 0.75],
        beta_grid=_PHASE_BETAS,
        r_grid=[round(0.05 * i, 2) for i in range(1, 20)],
    ),
    "calibrate": dict(
        n=[50],
        dist=[_d("FisherF", 5, 5)],
        alpha_grid=[0.05, 0.1],
        replicates=2 * 10**4,
        mode="independent",
    ),
}

_PAPER = {
    "tail-compare": dict(replicates=10**7),
    "boot-quantiles": dict(oracle_draws=10**7),
    "hc-hist": dict(n=[100], replicates=1000, grid={"alpha0": None, "i_min": 1}),
    "dep-cdf": dict(replicates=10**4),
    "calibrate": dict(replicates=10**5),
}


def resolve(cfg: ExperimentConfig) -> ExperimentConfig:
    """A copy with every unset field filled from the experiment defaults."""
    cfg.validate()
    defaults = dict(_DESK[cfg.experiment])
    if cfg.paper_scale:
        defaults.update(_PAPER.get(cfg.experiment, {}))
    out = dataclasses.replace(cfg)
    for name, value in defaults.items():
        if getattr(out, name) is None:
            setattr(out, name, json.loads(json.dumps(value)))
    if out.grid is not None:
        out.grid = {"alpha0": out.grid.get("alpha0"), "i_min": int(out.grid.get("i_min", 1))}
    out.validate()
    return out


def default_config(experiment: str, *, paper_scale: bool = False, seed: int = DEFAULT_SEED) -> ExperimentConfig:
    return resolve(ExperimentConfig(experiment, seed=seed, paper_scale=paper_scale))


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return dataclasses.replace(cfg, **{k: v for k, v in kw.items() if v is not None})


__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "SCHEMA",
    "default_config",
    "dist_spec",
    "load_config",
    "resolve",
    "with_overrides",
]
