from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyito.errors import QuadratureError
from levyito.quadrature import (check_agreement, gauss_legendre, geometric_breaks, integrate_time,
                                integrate_to_infinity, panel_rule, subdivide)


@settings(max_examples=30, deadline=None)
@given(deg=st.integers(0, 31))
def test_gauss_legendre_exact_for_polynomials(deg):
    x, w = gauss_legendre(16)
    assert w @ x**deg == pytest.approx(1.0 / (deg + 1), rel=1e-13)


def test_panel_rule_integrates_smooth_function():
    x, w = panel_rule([0.0, 0.5, 2.0, 3.0])
    assert w @ np.exp(x) == pytest.approx(math.expm1(3.0), rel=1e-14)


def test_subdivide_and_geometric_breaks():
    b = subdivide([0.0, 2.5, 3.0], 1.0)
    assert np.all(np.diff(b) <= 1.0 + 1e-12)
    assert {0.0, 2.5, 3.0} <= set(b.tolist())
    g = geometric_breaks(0.1, 10.0)
    assert g[0] == 0.1 and g[-1] == 10.0 and np.all(np.diff(g) > 0)


def test_integrate_time_with_kink():
    val = integrate_time(lambda s: np.abs(s - 1.3), 0.0, 3.0, breaks=[1.3])
    assert val == pytest.approx(0.5 * 1.3**2 + 0.5 * 1.7**2, rel=1e-13)


@settings(max_examples=15, deadline=None)
@given(rate=st.floats(0.05, 3.0), a=st.floats(0.0, 5.0))
def test_integrate_to_infinity_exponential(rate, a):
    val = integrate_to_infinity(lambda s: np.exp(-rate * s), a, cap=10.0)
    assert val == pytest.approx(math.exp(-rate * a) / rate, rel=1e-10)


def test_check_agreement_raises_on_mismatch():
    check_agreement(1.0, 1.0 + 1e-15, "fine")
    with pytest.raises(QuadratureError):
        check_agreement(1.0, 1.1, "coarse")
