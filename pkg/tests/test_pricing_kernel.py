from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from levyito.errors import DomainError
from levyito.levy import LevyModel
from levyito.mc import McConfig, collect, estimate
from levyito.paths import sample_brownian
from levyito.pricing_kernel import (AssetExposure, Lambda_from_lambda, RiskAversion, Sigma_from_sigma,
                                    excess_rate_of_return, kernel_log_values, lambda_from_Lambda,
                                    money_market, sigma_from_Sigma, simulate_asset_price,
                                    simulate_pricing_kernel)


@settings(max_examples=30, deadline=None)
@given(v=st.floats(-5.0, 5.0))
def test_parametrisations_invert(v):
    assert float(lambda_from_Lambda(Lambda_from_lambda(v))) == pytest.approx(v, abs=1e-9)
    assert float(sigma_from_Sigma(Sigma_from_sigma(v))) == pytest.approx(v, abs=1e-9)


def test_parametrisation_domains():
    with pytest.raises(DomainError):
        lambda_from_Lambda(1.0)
    with pytest.raises(DomainError):
        sigma_from_Sigma(-1.0)


@settings(max_examples=10, deadline=None)
@given(lam=st.floats(-0.5, 0.5), s=st.floats(-0.5, 0.5))
def test_excess_rate_against_scipy(lam, s):
    model = LevyModel.merton(1.5, 0.1, 0.3)
    risk = RiskAversion(lam=lambda x, t: lam * np.asarray(x) + 0 * np.asarray(t), tilt=abs(lam))
    expo = AssetExposure(sigma_jump=lambda x, t: s * np.asarray(x) + 0 * np.asarray(t), tilt=abs(s))
    dens = stats.norm(0.1, np.sqrt(0.3)).pdf
    sd = np.sqrt(0.3)
    ref = 1.5 * integrate.quad(lambda x: -np.expm1(-lam * x) * np.expm1(s * x) * dens(x),
                               0.1 - 14 * sd, 0.1 + 14 * sd, epsabs=1e-13, limit=200)[0]
    assert excess_rate_of_return(risk, expo, model, 0.0) == pytest.approx(ref, abs=1e-10)


def test_brownian_excess_rate_is_inner_product():
    risk = RiskAversion(kappa=np.array([0.2, -0.1]))
    expo = AssetExposure(sigma_brownian=np.array([0.3, 0.4]))
    assert excess_rate_of_return(risk, expo, LevyModel.symmetric_bernoulli(), 0.0) == pytest.approx(0.02)


def test_kernel_with_brownian_and_rate_is_deflator():
    model = LevyModel.symmetric_bernoulli(1.0)
    risk = RiskAversion(kappa=np.array([0.4]), lam=lambda x, t: 0.3 * np.asarray(x) + 0 * np.asarray(t), tilt=0.3)
    r = 0.05
    grid = [0.0, 0.5, 1.0]

    def fn(rng, paths):
        b = model.sample_batch(1.0, rng, paths, grid)
        w = sample_brownian(grid, 1, rng, paths)
        return np.exp(kernel_log_values(risk, r, model, b, [1.0], w)[:, 0])

    e = estimate(collect(McConfig(8, 100_000), fn))
    assert e.within(np.exp(-r))


def test_paths_positive_and_start_values():
    model = LevyModel.merton(2.0, -0.1, 0.2)
    risk = RiskAversion(lam=0.1)
    expo = AssetExposure(sigma_jump=lambda x, t: 0.5 * np.asarray(x) + 0 * np.asarray(t), tilt=0.5)
    jp = model.sample_batch(1.0, 3, np.arange(100))
    pk = simulate_pricing_kernel(risk, 0.01, model, jp, grid=[0, 0.5, 1])
    S = simulate_asset_price(risk, expo, 0.01, model, jp, grid=[0, 0.5, 1], s0=2.0)
    assert np.all(pk.values > 0) and np.all(S.values > 0)
    assert np.allclose(pk.values[:, 0], 1.0) and np.allclose(S.values[:, 0], 2.0)
    assert money_market(0.01, [2.0])[0] == pytest.approx(np.exp(0.02))
