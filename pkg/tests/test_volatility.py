from __future__ import annotations

import numpy as np
import pytest

from levyito.errors import ConfigError
from levyito.levy import LevyModel
from levyito.mc import McConfig, collect, estimate
from levyito.paths import sample_brownian
from levyito.pricing_kernel import RiskAversion, kernel_log_values
from levyito.rates.curve import YieldCurve
from levyito.rates.volatility import bond_log_values, exponential_family, money_market_log_values

CURVE = YieldCurve([1.0, 3.0, 10.0], [0.98, 0.93, 0.75])
MODEL = LevyModel.symmetric_bernoulli(1.0)
RISKY = RiskAversion(kappa=np.array([0.3]), lam=lambda x, t: 0.2 * np.asarray(x) + 0 * np.asarray(t), tilt=0.2)


def test_initial_bond_prices_match_curve():
    vol = exponential_family(CURVE, a=0.01, b=0.5, c=0.02)
    b = MODEL.sample_batch(1.0, 1, np.arange(3))
    w = sample_brownian([0.0, 1.0], 1, 1, np.arange(3))
    for T in (0.5, 2.0, 7.0):
        lp = bond_log_values(vol, RISKY, MODEL, b, [0.0], T, w)
        assert np.allclose(np.exp(lp), CURVE.discount(T), rtol=1e-12)


@pytest.mark.parametrize("risk", [RiskAversion(), RISKY], ids=["neutral", "risky"])
def test_deflated_bond_is_martingale(risk):
    # pi_t P_tT with pi_t = rho_t / B_t has expectation P_0T
    vol = exponential_family(CURVE, a=0.01, b=0.5, c=0.05)
    grid = list(np.linspace(0.0, 1.0, 41))
    T = 5.0

    def fn(rng, paths):
        b = MODEL.sample_batch(1.0, rng, paths, grid)
        w = sample_brownian(grid, 1, rng, paths)
        logB = money_market_log_values(vol, risk, MODEL, b, [1.0], w)[:, 0]
        logP = bond_log_values(vol, risk, MODEL, b, [1.0], T, w)[:, 0]
        logrho = kernel_log_values(risk, None, MODEL, b, [1.0], w)[:, 0]
        return np.exp(logrho - logB + logP)

    e = estimate(collect(McConfig(12, 60_000), fn))
    assert e.within(float(CURVE.discount(T)))


def test_money_market_starts_at_one():
    vol = exponential_family(CURVE, a=0.02, b=0.3, c=0.0)
    b = MODEL.sample_batch(1.0, 1, np.arange(2))
    w = sample_brownian([0.0, 1.0], 1, 1, np.arange(2))
    assert np.allclose(money_market_log_values(vol, RiskAversion(), MODEL, b, [0.0], w), 0.0)
    with pytest.raises(ConfigError):
        money_market_log_values(vol, RiskAversion(), MODEL, b, [1.0])
