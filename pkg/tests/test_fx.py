from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyito import fx
from levyito.errors import ConfigError, DomainError
from levyito.levy import LevyModel, levy_exponent

GRID = np.linspace(0.0, 1.0, 5)
angle = st.floats(0.0, 360.0)


def _systems():
    return [
        fx.gbm_system(fx.unit_vectors([10, 100, 250]), rates=[0.01, 0.0, 0.02]),
        fx.merton_system([[0.3, -0.2], [-0.1, 0.5], [0.2, 0.2]], 2.0, mean=[0.1, -0.1],
                         cov=[[0.2, 0.05], [0.05, 0.1]]),
        fx.vg_system(fx.unit_vectors([0, 70, 140], 1.2), 2.0, rates=[0.03, 0.01, 0.02]),
        fx.iid_system(LevyModel.merton(1.0, 0.0, 0.3), [0.2, -0.4, 0.7]),
    ]


@pytest.mark.parametrize("sys_", _systems(), ids=lambda s: s.family)
def test_pathwise_identities(sys_):
    noise = fx.sample_fx_noise(sys_, 1.0, 3, np.arange(500), GRID)
    rep = fx.fx_identity_check(sys_, noise, GRID)
    assert rep.passed()
    # the 0-140 degree vg pair lies outside the exponent domain
    assert rep.undefined_pairs == (2 if sys_.family == "vg" else 0)
    assert max(rep.reciprocal, rep.triangle, rep.decomposition, rep.deflation, rep.diagonal) <= 1e-12
    F = fx.exchange_rate_values(sys_, noise, GRID)
    assert np.all(F > 0)


@pytest.mark.parametrize("sys_", _systems()[1:], ids=lambda s: s.family)
def test_quadrature_matches_closed_form(sys_):
    for i, j in itertools.permutations(range(sys_.N), 2):
        d = np.atleast_1d(sys_.lambdas[j] - sys_.lambdas[i])
        if sys_.family == "vg" and d @ d >= 2 * sys_.model.m:
            with pytest.raises(DomainError):
                fx.excess_rate_closed_form(sys_, i, j)
            continue
        assert fx.fx_excess_rate(sys_, i, j) == pytest.approx(fx.excess_rate_closed_form(sys_, i, j), abs=1e-8)


@settings(max_examples=30, deadline=None)
@given(a=angle, b=angle, L=st.floats(0.05, 1.9))
def test_vg_excess_rate_formula(a, b, L):
    s = fx.vg_system(fx.unit_vectors([a, b], L), 2.0)
    li, lj = s.lambdas
    m = LevyModel.two_dim_variance_gamma(2.0)
    diff = lj - li
    if diff @ diff >= 4.0 - 1e-9:
        return
    expected = levy_exponent(m, diff) + levy_exponent(m, -lj) - levy_exponent(m, -li)
    assert fx.excess_rate_closed_form(s, 0, 1) == pytest.approx(expected, rel=1e-12, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(a=angle, b=angle, c=angle, L=st.floats(0.1, 3.0))
def test_gbm_equal_length_siegel(a, b, c, L):
    s = fx.gbm_system(fx.unit_vectors([a, b, c], L))
    rep = fx.siegel_check(s)
    for i, j in itertools.permutations(range(3), 2):
        d = s.lambdas[j] - s.lambdas[i]
        assert rep.R[0, i, j] == pytest.approx(0.5 * float(d @ d), abs=1e-12)
    assert np.all(rep.R[0][~np.eye(3, dtype=bool)] >= -1e-15)


def test_gbm_120_degree_example():
    rep = fx.siegel_check(fx.gbm_system(fx.unit_vectors([0, 120, 240])))
    assert np.allclose(rep.R[0][~np.eye(3, dtype=bool)], 1.5, atol=1e-12)
    assert rep.numeric and rep.analytic


def test_iid_siegel_by_jensen():
    s = fx.iid_system(LevyModel.variance_gamma(1.0), [0.5, 0.5, 0.5])
    rep = fx.siegel_check(s)
    assert rep.numeric and rep.analytic


def test_vg_orthogonal_value():
    s = fx.vg_system(fx.unit_vectors([0, 90]), 2.0)
    assert fx.excess_rate_closed_form(s, 0, 1) == pytest.approx(2 * math.log(2), rel=1e-13)


def test_vg_domain_and_undefined_rates():
    with pytest.raises(DomainError):
        fx.vg_system(fx.unit_vectors([0, 90], 2.1), 2.0)
    s = fx.vg_system(fx.unit_vectors([0, 170], 1.9), 2.0)
    rep = fx.siegel_check(s)
    assert np.isnan(rep.R[0, 0, 1]) and not rep.numeric


def test_siegel_search_small():
    for fam in ("gbm", "iid", "merton", "vg"):
        res = fx.siegel_search(fam, 50, seed=3)
        assert res.violations == 0 and res.configs == 50


def test_drift_regression_vg():
    from levyito.mc import McConfig
    s = fx.vg_system(fx.unit_vectors([0, 40], 1.0), 2.0, rates=[0.01, 0.04])
    e = fx.fx_drift_regression(s, (0, 1), McConfig(5, 40_000), steps=4)
    assert e.within(0.03 + fx.excess_rate_closed_form(s, 0, 1))


def test_system_validation():
    with pytest.raises(ConfigError):
        fx.CurrencySystem("gbm", (np.ones(2),), (0.0,))
    with pytest.raises(ConfigError):
        fx.CurrencySystem("nope", (np.ones(2), np.zeros(2)), (0.0, 0.0))
    with pytest.raises(ConfigError):
        fx.gbm_system([[1.0, 0.0], [0.0, 1.0]], initial=[1.0, -1.0])
