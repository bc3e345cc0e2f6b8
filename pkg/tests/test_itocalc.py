from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyito.itocalc import (LevyItoCoefficients, apply_ito_transform, compensator, exponential_formula_rhs,
                             integrate_levy_ito, levy_ito_values)
from levyito.levy import LevyModel, levy_exponent, sample_jump_path
from levyito.mc import McConfig, collect, estimate
from levyito.presets import exponential_formula_cases


def test_bundled_cases_closed_forms():
    for case in exponential_formula_cases():
        rhs = exponential_formula_rhs(case.f, case.model, case.t0, case.t1, case.time_breaks, case.tilt)
        assert rhs == pytest.approx(case.closed_form, rel=1e-10), case.name


@settings(max_examples=20, deadline=None)
@given(a=st.floats(-1.2, 1.2), t1=st.floats(0.1, 3.0))
def test_exponential_formula_linear_integrand(a, t1):
    # f(x) = a x: rhs = exp(t (psi(a) - a * int x nu)) and the compensated mean of x is zero here
    m = LevyModel.variance_gamma(2.0)
    rhs = exponential_formula_rhs(lambda x, s: a * np.asarray(x) + 0 * np.asarray(s), m, 0.0, t1, tilt=abs(a))
    assert rhs == pytest.approx(math.exp(t1 * levy_exponent(m, a)), rel=1e-9)


def test_compensator_is_linear_in_time_for_constant_integrand():
    m = LevyModel.merton(2.0, 0.0, 1.0)
    c = compensator(m, lambda x, s: x * x + 0 * s, [0.5, 1.0, 2.0])
    assert np.allclose(c, 2.0 * np.array([0.5, 1.0, 2.0]), rtol=1e-10)


def test_levy_ito_integral_mean():
    m = LevyModel.symmetric_bernoulli(2.0, 0.5)
    coeffs = LevyItoCoefficients(alpha=0.3, gamma=lambda x, s: np.exp(-s) * x, delta=None)

    def fn(rng, paths):
        b = m.sample_batch(1.0, rng, paths)
        return levy_ito_values(coeffs, b, m, [1.0])[:, 0]

    e = estimate(collect(McConfig(2, 50_000), fn))
    assert e.within(0.3)


def test_ito_transform_reproduces_function_of_path():
    m = LevyModel.merton(2.0, 0.0, 0.09)
    jp = sample_jump_path(m, 1.0, 5)
    c = LevyItoCoefficients(alpha=0.1, gamma=lambda x, t: 0.5 * x, delta=lambda x, t: 0.5 * x)
    p = integrate_levy_ito(c, jp, m, np.linspace(0, 1, 11))
    for name, f in [("exp", np.exp), ("square", np.square)]:
        q = apply_ito_transform(p, name)
        assert np.allclose(q.values, f(p.values), rtol=1e-10, atol=1e-12)
