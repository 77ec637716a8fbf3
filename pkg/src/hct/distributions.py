"""Standardised skewed / heavy-tailed laws and the MA(10) feature model.

Every sampler is built from the Philox stream through inverse transforms:
normals via the inverse normal cdf, exponentials via ``-log(U)``.  Integer
degrees of freedom let chi-squared and F variables be assembled exactly from
those pieces, so draws are reproducible whatever order streams are consumed
in.  Standardisation always uses closed-form moments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ConfigError, InfiniteMoment
from .prng import Stream, next_normal, next_open_uniform

KINDS = ("StdNormal", "NormalAbsPow", "ChiSquared", "FisherF", "Pareto")
_CODE = {k: i for i, k in enumerate(KINDS)}
_ARITY = {"StdNormal": 0, "NormalAbsPow": 1, "ChiSquared": 1, "FisherF": 2, "Pareto": 2}
MA_LAG = 10


def _double_factorial(k: int) -> int:
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def _abs_normal_moment(k: int) -> float:
    """E|N|**k for integer k >= 0."""
    if k % 2 == 0:
        return float(_double_factorial(k - 1))
    return math.sqrt(2.0 / math.pi) * _double_factorial(k - 1)


@dataclass(frozen=True)
class DistSpec:
    """A law for U; with ``standardized`` the sampled X is (U - EU) / sd(U).

    ``Pareto(a, b)`` has shape ``a`` and scale ``b`` with support [b, inf).
    """

    kind: str
    params: tuple = ()
    standardized: bool = True

    def __post_init__(self):
        if self.kind not in _CODE:
            raise ConfigError(f"unknown distribution kind {self.kind!r}; choose from {KINDS}")
        params = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", params)
        if len(params) != _ARITY[self.kind]:
            raise ConfigError(f"{self.kind} takes {_ARITY[self.kind]} parameter(s), got {params}")
        if self.kind in ("NormalAbsPow", "ChiSquared", "FisherF"):
            for v in params:
                if v != int(v) or v < (0 if self.kind == "NormalAbsPow" else 1):
                    raise ConfigError(f"{self.kind} needs integer parameters, got {params}")
        if self.kind == "Pareto" and (params[0] <= 0 or params[1] <= 0):
            raise ConfigError(f"Pareto shape and scale must be positive, got {params}")

    @classmethod
    def from_json(cls, obj: dict) -> "DistSpec":
        return cls(obj["kind"], tuple(obj.get("params", ())), bool(obj.get("standardized", True)))

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": list(self.params), "standardized": self.standardized}

    def label(self) -> str:
        args = ",".join(f"{v:g}" for v in self.params)
        return f"{self.kind}({args})" + (" standardised" if self.standardized else "")


def StdNormal() -> DistSpec:
    return DistSpec("StdNormal")


def NormalAbsPow(m: int) -> DistSpec:
    return DistSpec("NormalAbsPow", (m,))


def ChiSquared(k: int) -> DistSpec:
    return DistSpec("ChiSquared", (k,))


def FisherF(d1: int, d2: int) -> DistSpec:
    return DistSpec("FisherF", (d1, d2))


def Pareto(a: float, b: float) -> DistSpec:
    return DistSpec("Pareto", (a, b))


def standardizing_moments(spec: DistSpec) -> tuple[float, float]:
    """Closed-form mean and variance of the raw law U."""
    kind, p = spec.kind, spec.params
    if kind == "StdNormal":
        return 0.0, 1.0
    if kind == "NormalAbsPow":
        m = int(p[0])
        mu = 0.0 if m % 2 else _abs_normal_moment(m + 1)
        return mu, float(_double_factorial(2 * m + 1)) - mu * mu
    if kind == "ChiSquared":
        return p[0], 2.0 * p[0]
    if kind == "FisherF":
        d1, d2 = p
        if d2 <= 4:
            raise InfiniteMoment(f"F({d1:g},{d2:g}) has infinite variance (needs d2 > 4)")
        mu = d2 / (d2 - 2)
        var = 2 * d2**2 * (d1 + d2 - 2) / (d1 * (d2 - 2) ** 2 * (d2 - 4))
        return mu, var
    a, b = p
    if a <= 2:
        raise InfiniteMoment(f"Pareto shape {a:g} gives infinite variance (needs a > 2)")
    return a * b / (a - 1), b * b * a / ((a - 1) ** 2 * (a - 2))


def skewness(spec: DistSpec) -> float:
    """Closed-form skewness E(X**3) of the standardised law where it is finite."""
    kind, p = spec.kind, spec.params
    if kind == "StdNormal":
        return 0.0
    if kind == "ChiSquared":
        return math.sqrt(8.0 / p[0])
    if kind == "NormalAbsPow":
        m = int(p[0])
        mu, var = standardizing_moments(spec)
        if m % 2:
            return 0.0
        e2 = float(_double_factorial(2 * m + 1))
        e3 = _abs_normal_moment(3 * m + 3)
        return (e3 - 3 * mu * e2 + 2 * mu**3) / var**1.5
    if kind == "FisherF":
        d1, d2 = p
        if d2 <= 6:
            raise InfiniteMoment(f"F({d1:g},{d2:g}) has infinite skewness (needs d2 > 6)")
        return (2 * d1 + d2 - 2) * math.sqrt(8 * (d2 - 4)) / ((d2 - 6) * math.sqrt(d1 * (d1 + d2 - 2)))
    a = p[0]
    if a <= 3:
        raise InfiniteMoment(f"Pareto shape {a:g} gives infinite skewness (needs a > 3)")
    return 2 * (1 + a) / (a - 3) * math.sqrt((a - 2) / a)


@dataclass(frozen=True)
class KernelLaw:
    """Flat numeric form of a DistSpec handed to numba kernels."""

    code: int
    a: float
    b: float
    shift: float
    scale: float

    def as_tuple(self):
        return self.code, self.a, self.b, self.shift, self.scale


def kernel_law(spec: DistSpec) -> KernelLaw:
    p = spec.params + (0.0, 0.0)
    if spec.standardized:
        mu, var = standardizing_moments(spec)
        return KernelLaw(_CODE[spec.kind], p[0], p[1], mu, math.sqrt(var))
    return KernelLaw(_CODE[spec.kind], p[0], p[1], 0.0, 1.0)


@njit(cache=True, nogil=True, _nrt=False)
def _chi2_int(k, st):
    """Chi-squared with integer k: -2 log of k // 2 uniforms, plus N**2 if k is odd."""
    prod = 1.0
    out = 0.0
    for _ in range(int(k) // 2):
        prod *= next_open_uniform(st)
        if prod < 1e-280:
            out -= 2.0 * math.log(prod)
            prod = 1.0
    out -= 2.0 * math.log(prod)
    if int(k) % 2 == 1:
        z = next_normal(st)
        out += z * z
    return out


@njit(cache=True, nogil=True, _nrt=False)
def draw(code, a, b, shift, scale, st):
    """One standardised draw for the law encoded by :class:`KernelLaw`."""
    if code == 0:
        u = next_normal(st)
    elif code == 1:
        z = next_normal(st)
        u = abs(z) ** (int(a) + 1)
        if z < 0.0 and int(a) % 2 == 1:
            u = -u
    elif code == 2:
        u = _chi2_int(a, st)
    elif code == 3:
        u = (_chi2_int(a, st) / a) / (_chi2_int(b, st) / b)
    else:
        u = b * next_open_uniform(st) ** (-1.0 / a)
    return (u - shift) / scale


@njit(cache=True, nogil=True)
def _fill_iid(code, a, b, shift, scale, st, out):
    for i in range(out.size):
        out[i] = draw(code, a, b, shift, scale, st)


@njit(cache=True, nogil=True)
def _fill_ma(code, a, b, shift, scale, theta, lag, st, out):
    """Rows of U_k = sum_j theta**j eps_{j+k}, already divided by sd(U)."""
    n, p = out.shape
    w = np.empty(lag + 1)
    tot = 0.0
    for j in range(lag + 1):
        w[j] = theta**j
        tot += w[j] * w[j]
    norm = math.sqrt(tot)
    eps = np.empty(p + lag)
    for i in range(n):
        for k in range(p + lag):
            eps[k] = draw(code, a, b, shift, scale, st)
        for k in range(p):
            u = 0.0
            for j in range(lag + 1):
                u += w[j] * eps[j + k]
            out[i, k] = u / norm


def sample_iid(spec: DistSpec, n: int, g: Stream) -> np.ndarray:
    """``n`` i.i.d. draws, standardised when ``spec.standardized`` is set."""
    law = kernel_law(spec)
    out = np.empty(int(n))
    _fill_iid(*law.as_tuple(), g.state, out)
    return out


@dataclass(frozen=True)
class MaStreamSpec:
    """Short-range dependent features: MA(lag) of i.i.d. innovations."""

    theta: float
    innovation: DistSpec = field(default_factory=lambda: Pareto(5, 5))
    lag: int = MA_LAG

    def __post_init__(self):
        if not 0.0 <= self.theta < 1.0:
            raise ConfigError(f"theta must lie in [0, 1), got {self.theta}")
        if not self.innovation.standardized:
            raise ConfigError("MA innovations must be standardised")
        if self.lag < 0:
            raise ConfigError("lag must be non-negative")

    def lag_correlation(self, d: int) -> float:
        """Exact correlation between columns k and k + d."""
        w = self.theta ** np.arange(self.lag + 1)
        if d > self.lag:
            return 0.0
        return float(np.dot(w[: self.lag + 1 - d], w[d:]) / np.dot(w, w))


def sample_ma_matrix(spec: MaStreamSpec, n: int, p: int, g: Stream) -> np.ndarray:
    """n-by-p matrix whose rows are MA(lag) windows over p + lag innovations."""
    if p < 1 or n < 1:
        raise ConfigError("n and p must be positive")
    law = kernel_law(spec.innovation)
    out = np.empty((int(n), int(p)))
    _fill_ma(*law.as_tuple(), float(spec.theta), int(spec.lag), g.state, out)
    return out


@dataclass(frozen=True)
class SignalSample:
    """A feature matrix together with the indices of its mean-shifted columns."""

    data: np.ndarray
    shifted: np.ndarray
    shift: float


def sample_signal_matrix(cfg, spec: DistSpec, hypothesis: str, g: Stream) -> SignalSample:
    """n-by-p i.i.d. noise; under H1 the first ``cfg.k`` columns get mean tau_n / sqrt(n).

    Which columns carry the signal is immaterial to every statistic here
    (they are all column-permutation invariant), so they are the leading ones.
    """
    if hypothesis not in ("H0", "H1"):
        raise ConfigError(f"hypothesis must be 'H0' or 'H1', got {hypothesis!r}")
    law = kernel_law(spec)
    data = np.empty((cfg.n, cfg.p))
    _fill_iid(*law.as_tuple(), g.state, data.reshape(-1))
    if hypothesis == "H0":
        return SignalSample(data, np.empty(0, dtype=np.int64), 0.0)
    if cfg.k < 1:
        raise ConfigError(
            f"no signal columns: eps_n * p = {cfg.eps_n * cfg.p:.3g} rounds to 0"
        )
    shift = cfg.tau_n / math.sqrt(cfg.n)
    data[:, : cfg.k] += shift
    return SignalSample(data, np.arange(cfg.k), shift)
