from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyito.errors import ConfigError, DomainError
from levyito.levy import DiscreteLaw, LevyModel, levy_exponent, sample_jump_path
from levyito.mc import McConfig, collect, estimate


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-1.5, 1.5), lam=st.floats(0.1, 3.0))
def test_bernoulli_exponent(a, lam):
    m = LevyModel.symmetric_bernoulli(lam)
    assert levy_exponent(m, a) == pytest.approx(lam * (math.cosh(a) - 1), rel=1e-12, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-1.0, 1.0), mu=st.floats(-0.5, 0.5), var=st.floats(0.01, 1.0))
def test_merton_exponent(a, mu, var):
    m = LevyModel.merton(1.5, mu, var)
    assert levy_exponent(m, a) == pytest.approx(1.5 * math.expm1(mu * a + 0.5 * var * a * a), rel=1e-12, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(mparam=st.floats(0.5, 5.0), frac=st.floats(-0.95, 0.95))
def test_variance_gamma_exponent(mparam, frac):
    a = frac * math.sqrt(2 * mparam)
    m = LevyModel.variance_gamma(mparam)
    assert levy_exponent(m, a) == pytest.approx(-mparam * math.log1p(-a * a / (2 * mparam)), rel=1e-10, abs=1e-14)


def test_two_dim_and_gamma_exponents():
    v = np.array([0.3, -0.4])
    assert levy_exponent(LevyModel.two_dim_variance_gamma(2.0), v) == pytest.approx(-2 * math.log1p(-0.25 / 4))
    assert levy_exponent(LevyModel.gamma(2.0), 0.5) == pytest.approx(-2 * math.log1p(-0.25))


def test_exponent_domain():
    m = LevyModel.variance_gamma(2.0)
    assert not np.all(m.in_exponent_domain(np.array([2.5])))
    with pytest.raises(DomainError):
        levy_exponent(m, 2.5)


def test_constructor_validation():
    with pytest.raises(ConfigError):
        LevyModel.variance_gamma(-1.0)
    with pytest.raises((ConfigError, ValueError)):
        DiscreteLaw([1.0, -1.0], [0.7, 0.7])


def test_nu_integral_against_moments():
    m = LevyModel.merton(2.0, 0.1, 0.25)
    assert m.nu_integral(lambda x, s: x * x) == pytest.approx(2.0 * (0.25 + 0.01), rel=1e-10)
    cp = LevyModel.compound_poisson(3.0, DiscreteLaw([-1.0, 2.0], [0.5, 0.5]))
    assert cp.nu_integral(lambda x, s: x) == pytest.approx(1.5)


@pytest.mark.parametrize("model", [LevyModel.symmetric_bernoulli(2.0), LevyModel.merton(1.0, 0.0, 0.5),
                                   LevyModel.variance_gamma(2.0)])
def test_moment_generating_function_by_simulation(model):
    a, t = 0.4, 1.5

    def fn(rng, paths):
        b = model.sample_batch(t, rng, paths, [0.0, t])
        return np.exp(a * b.jump_sum(lambda x, s: x, [t])[:, 0])

    e = estimate(collect(McConfig(5, 100_000), fn))
    assert e.within(math.exp(t * levy_exponent(model, a)), k=4)


def test_sampling_is_path_addressed():
    m = LevyModel.merton(3.0, 0.0, 1.0)
    full = m.sample_batch(2.0, 7, np.arange(50))
    part = m.sample_batch(2.0, 7, np.arange(20, 30))
    for k in range(10):
        a, b = full.path(20 + k), part.path(k)
        assert np.array_equal(a.times, b.times) and np.array_equal(a.sizes, b.sizes)


def test_jump_path_ordering_and_restriction():
    p = sample_jump_path(LevyModel.symmetric_bernoulli(5.0), 3.0, 1)
    assert np.all(np.diff(p.times) >= 0) and np.all((p.times > 0) & (p.times <= 3.0))
    r = p.restrict(1.0)
    assert np.all(r.times <= 1.0) and r.count == int(np.sum(p.times <= 1.0))


def test_variance_gamma_events_on_grid():
    m = LevyModel.variance_gamma(2.0)
    b = m.sample_batch(1.0, 3, np.arange(4), [0.0, 0.25, 0.5, 1.0])
    assert set(np.unique(b.times)) == {0.25, 0.5, 1.0}
