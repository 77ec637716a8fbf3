"""Detection-boundary geometry for sparse mean shifts with p = n**(1/theta).

Signals occupy a fraction ``eps_n = p**-beta`` of the features with size
``tau_n = sqrt(2 r log p)``.  ``rho_theta(beta)`` is the boundary above
which bootstrap-t higher criticism separates the hypotheses, and
``delta_exponent`` is the growth rate hc ~ p**delta above it.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ConfigError, NotDetectable


class PhaseRegion(str, enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    UNDETECTABLE = "Undetectable"
    BELOW_BETA = "BelowBeta"


def _check_theta(theta: float) -> None:
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")


def rho_theta(beta: float, theta: float, *, closed: bool = False) -> float:
    """Phase function: the minimal detectable strength r at sparsity beta.

    ``closed=True`` also accepts the endpoints beta = 1/2 and beta = 1, where
    the branch formulas extend continuously (used for simulation designs).
    """
    _check_theta(theta)
    inside = 0.5 <= beta <= 1.0 if closed else 0.5 < beta < 1.0
    if not inside:
        raise ValueError(f"beta must lie in (1/2, 1), got {beta}")
    knee = 0.5 + (1.0 - theta) / 4.0
    if beta <= knee:
        return (math.sqrt(1.0 - theta) - math.sqrt((1.0 - theta) / 2.0 + 0.5 - beta)) ** 2
    if beta <= 0.75:
        return beta - 0.5
    return (1.0 - math.sqrt(1.0 - beta)) ** 2


def rho_std(beta: float) -> float:
    """The classical boundary for known Gaussian noise, rho_theta at theta = 1."""
    return rho_theta(beta, 1.0)


def classify_region(beta: float, r: float, theta: float) -> PhaseRegion:
    """Which part of the (beta, r) plane a scenario falls in.

    The boundary r = rho_theta(beta) itself is undetectable.  r = 1/4 exactly
    is put in region III; the I/II/III formulas for delta agree there.
    """
    _check_theta(theta)
    if beta <= 0.5:
        return PhaseRegion.BELOW_BETA
    if beta > 1.0:
        raise ValueError(f"beta must not exceed 1, got {beta}")
    if r <= rho_theta(beta, theta, closed=True):
        return PhaseRegion.UNDETECTABLE
    if r < (1.0 - theta) / 4.0:
        return PhaseRegion.I
    if r < 0.25:
        return PhaseRegion.II
    return PhaseRegion.III


def delta_formula(region: PhaseRegion, beta: float, r: float, theta: float) -> float:
    """The per-region expression for delta, with no detectability check."""
    if region is PhaseRegion.I:
        return 0.5 - beta + (1.0 - theta) / 2.0 - (math.sqrt(1.0 - theta) - math.sqrt(r)) ** 2
    if region is PhaseRegion.II:
        return r - beta + 0.5
    if region is PhaseRegion.III:
        return 1.0 - beta - (1.0 - math.sqrt(r)) ** 2
    raise ValueError(f"no delta formula for region {region}")


def delta_exponent(beta: float, r: float, theta: float) -> float:
    """Exponent delta(beta, r, theta) > 0 of hc growth under the alternative."""
    region = classify_region(beta, r, theta)
    if region in (PhaseRegion.UNDETECTABLE, PhaseRegion.BELOW_BETA):
        raise NotDetectable(
            f"(beta={beta}, r={r}) does not lie above the detection boundary"
        )
    return delta_formula(region, beta, r, theta)


@dataclass(frozen=True)
class SignalConfig:
    """Sparse-mean scenario with p = round(n**(1/theta))."""

    n: int
    theta: float
    beta: float
    r: float
    p: int
    eps_n: float
    tau_n: float
    k: int

    def to_json(self) -> dict:
        return {"n": self.n, "theta": self.theta, "beta": self.beta, "r": self.r}


def make_signal_config(n: int, theta: float, beta: float, r: float, p: int | None = None) -> SignalConfig:
    """Derive p, eps_n, tau_n and the number k of signal columns.

    ``p`` may be given explicitly (it must then be >= 2); otherwise it is
    round(n**(1/theta)).  beta = 1 is allowed and yields a single signal.
    """
    if n < 2:
        raise ConfigError(f"n must be at least 2, got {n}")
    if p is None:
        if not 0.0 < theta < 1.0:
            raise ConfigError(f"theta must lie in (0, 1), got {theta}")
        p = int(round(n ** (1.0 / theta)))
    if p < 2:
        raise ConfigError(f"p must be at least 2, got {p}")
    if not 0.0 < beta <= 1.0:
        raise ConfigError(f"beta must lie in (0, 1], got {beta}")
    if not 0.0 <= r <= 1.0:
        raise ConfigError(f"r must lie in [0, 1], got {r}")
    eps_n = p ** (-beta)
    tau_n = math.sqrt(2.0 * r * math.log(p))
    k = int(round(eps_n * p))
    return SignalConfig(int(n), float(theta), float(beta), float(r), int(p), eps_n, tau_n, k)
