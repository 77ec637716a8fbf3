import math

import numpy as np
import pytest

from hct.errors import ConfigError, NotDetectable
from hct.phase import (
    PhaseRegion,
    classify_region,
    delta_exponent,
    delta_formula,
    make_signal_config,
    rho_std,
    rho_theta,
)

THETAS = np.round(np.arange(0.05, 1.0, 0.05), 2)


def test_rho_theta_examples():
    for theta in (0.0, 0.3, 0.5, 0.9, 1.0):
        assert rho_theta(0.75, theta) == pytest.approx(0.25, abs=1e-15)
    assert rho_theta(0.6, 0.5) == pytest.approx((math.sqrt(0.5) - math.sqrt(0.15)) ** 2, rel=1e-14)
    assert rho_theta(0.6, 0.5) == pytest.approx(0.1022774425, abs=1e-9)
    for beta in (0.55, 0.7, 0.9):
        assert rho_theta(beta, 0.0) == pytest.approx((1 - math.sqrt(1 - beta)) ** 2, abs=1e-15)


def test_rho_std_examples():
    assert rho_std(0.6) == pytest.approx(0.1)
    assert rho_std(0.75) == pytest.approx(0.25)
    assert rho_std(0.96) == pytest.approx(0.64)


@pytest.mark.parametrize("beta,theta", [(0.5, 0.5), (1.0, 0.5), (0.7, -0.1), (0.7, 1.1)])
def test_rho_rejects_out_of_range(beta, theta):
    with pytest.raises(ValueError):
        rho_theta(beta, theta)


def test_closed_endpoints():
    assert rho_theta(1.0, 0.5, closed=True) == pytest.approx(1.0)
    assert rho_theta(0.5, 0.5, closed=True) == pytest.approx(0.5 * (1 - math.sqrt(0.5)) ** 2)


@pytest.mark.parametrize("theta", THETAS)
def test_continuity_at_knees(theta):
    knee = 0.5 + (1 - theta) / 4
    for b in (knee, 0.75):
        left = rho_theta(b - 1e-13, theta)
        right = rho_theta(b + 1e-13, theta)
        assert abs(left - right) < 1e-12


@pytest.mark.parametrize("theta", THETAS)
def test_rho_theta_dominates_rho_std_and_decreases_in_theta(theta):
    betas = np.linspace(0.51, 0.99, 49)
    for b in betas:
        assert rho_theta(b, theta) >= rho_std(b) - 1e-15
        assert rho_theta(b, theta) >= rho_theta(b, min(1.0, theta + 0.05)) - 1e-15


def test_classify_examples():
    assert classify_region(0.6, 0.11, 0.5) is PhaseRegion.I
    assert classify_region(0.6, 0.2, 0.5) is PhaseRegion.II
    assert classify_region(0.6, 0.5, 0.5) is PhaseRegion.III
    r = rho_theta(0.6, 0.5)
    assert classify_region(0.6, r, 0.5) is PhaseRegion.UNDETECTABLE
    assert classify_region(0.4, 0.5, 0.5) is PhaseRegion.BELOW_BETA
    assert classify_region(0.6, 0.25, 0.5) is PhaseRegion.III


def test_delta_vanishes_on_boundary():
    for theta in THETAS:
        for beta in np.linspace(0.51, 0.99, 50):
            r = rho_theta(beta, theta)
            if r < (1 - theta) / 4:
                region = PhaseRegion.I
            elif r < 0.25:
                region = PhaseRegion.II
            else:
                region = PhaseRegion.III
            assert abs(delta_formula(region, beta, r, theta)) < 1e-12
            assert delta_exponent(beta, r + 1e-6, theta) > 0


def test_delta_continuous_across_regions():
    for theta in THETAS:
        for beta in np.linspace(0.51, 0.99, 50):
            r1 = (1 - theta) / 4
            a = delta_formula(PhaseRegion.I, beta, r1, theta)
            b = delta_formula(PhaseRegion.II, beta, r1, theta)
            assert abs(a - b) < 1e-12 and abs(a - (0.5 - beta + (1 - theta) / 4)) < 1e-12
            c = delta_formula(PhaseRegion.II, beta, 0.25, theta)
            d = delta_formula(PhaseRegion.III, beta, 0.25, theta)
            assert abs(c - d) < 1e-12 and abs(c - (0.75 - beta)) < 1e-12


def test_delta_errors():
    with pytest.raises(NotDetectable):
        delta_exponent(0.6, rho_theta(0.6, 0.5), 0.5)
    with pytest.raises(NotDetectable):
        delta_exponent(0.6, 0.01, 0.5)


def test_signal_config_examples():
    c = make_signal_config(100, 0.5, 0.75, 0.25)
    assert c.p == 10**4
    assert c.eps_n == pytest.approx(1e-3) and c.k == 10
    assert c.tau_n == pytest.approx(2.14597, abs=1e-5)
    one = make_signal_config(30, 0.5, 1.0, 0.5)
    assert one.p == 900 and one.k == 1


@pytest.mark.parametrize("kw", [dict(n=1), dict(theta=0.0), dict(beta=0.0), dict(r=1.5)])
def test_signal_config_validation(kw):
    args = dict(n=100, theta=0.5, beta=0.75, r=0.25)
    args.update(kw)
    with pytest.raises(ConfigError):
        make_signal_config(**args)
