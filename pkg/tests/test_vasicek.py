from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyito.errors import ConfigError, DomainError
from levyito.levy import LevyModel
from levyito.mc import McConfig
from levyito.presets import vasicek_jump_preset
from levyito.rates import vasicek as vas


@settings(max_examples=40, deadline=None)
@given(k=st.floats(0.05, 3.0), theta=st.floats(0.001, 0.1), r=st.floats(-0.05, 0.15),
       t=st.floats(0.0, 5.0), tau=st.floats(0.01, 30.0))
def test_zero_volatility_equals_classical(k, theta, r, t, tau):
    spec = vas.levy_vasicek(k, theta, 0.03, LevyModel.symmetric_bernoulli(), 0.0, 0.0)
    a = vas.bond_price_closed_form(spec, r, t, t + tau)
    assert abs(a - vas.classical_vasicek_bond(k, theta, r, tau)) <= 1e-12


def test_jump_integral_matches_exponential_formula_route():
    for lam in (0.0, 0.1, 0.3):
        spec = vasicek_jump_preset(lam)
        for T in (1.0, 5.0):
            assert vas.jump_integral(spec, 0.0, T) == pytest.approx(
                vas.jump_term_via_exponential_formula(spec, 0.0, T), rel=1e-9, abs=1e-14)


def test_short_rate_moments_closed_form():
    spec = vasicek_jump_preset(0.1, vol=0.02)
    t = 2.0
    assert float(vas.short_rate_mean(spec, t)) == pytest.approx(0.04 + (0.03 - 0.04) * math.exp(-1.0))
    # symmetric unit jumps at unit rate: int e^{2k(s-t)} vol^2 ds
    assert vas.short_rate_variance(spec, t) == pytest.approx(0.02**2 * -math.expm1(-2 * 0.5 * t) / (2 * 0.5))


def test_short_rate_starts_at_r0_and_bond_below_one_for_positive_rates():
    spec = vasicek_jump_preset(0.1)
    b = spec.model.sample_batch(1.0, 1, np.arange(10))
    r = vas.short_rate_values(spec, b, [0.0, 1.0])
    assert np.allclose(r[:, 0], spec.r0)
    assert vas.bond_price_closed_form(spec, 0.03, 0.0, 1.0) < 1.0


def test_bond_mc_restart_at_later_time():
    spec = vasicek_jump_preset(0.3)
    cf = vas.bond_price_closed_form(spec, 0.05, 2.0, 6.0)
    e = vas.bond_price_mc(spec, 2.0, 6.0, McConfig(3, 40_000), r_t=0.05)
    assert e.within(cf)


def test_validation():
    with pytest.raises(ConfigError):
        vas.classical_vasicek(-0.1, 0.04, 0.03)
    with pytest.raises(DomainError):
        vas.bond_price_closed_form(vas.classical_vasicek(0.5, 0.04, 0.03), 0.03, 2.0, 1.0)
