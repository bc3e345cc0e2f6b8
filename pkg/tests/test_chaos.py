from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyito.errors import ConfigError, CurveError
from levyito.levy import LevyModel
from levyito.mc import McConfig
from levyito.presets import symmetric_chaos_preset
from levyito.rates import chaos
from levyito.rates.curve import YieldCurve

MODEL = LevyModel.symmetric_bernoulli(1.0)


@settings(max_examples=6, deadline=None)
@given(r=st.floats(0.005, 0.08))
def test_flat_calibration_round_trip(r):
    curve = YieldCurve.flat(r)
    spec = chaos.calibrate_to_curve(curve, MODEL)
    assert chaos.calibration_residual(spec, curve, [0.1, 1.0, 4.0, 12.0, 40.0]) <= 1e-8


def test_sloped_curve_round_trip_and_monotone_coefficients():
    curve = YieldCurve([1.0, 2.0, 5.0, 10.0], [0.98, 0.955, 0.87, 0.74])
    spec = chaos.calibrate_to_curve(curve, MODEL)
    abc = chaos.compute_abc(spec)
    assert chaos.calibration_residual(spec, curve) <= 1e-8
    ts = np.array([0.0, 0.5, 1.0, 3.0, 8.0, 20.0])
    assert np.all(np.diff(abc.A(ts)) < 0)
    assert np.all(abc.C(ts) >= 0)
    assert abc.normalized().A(0.0)[0] == pytest.approx(1.0)


def test_kernel_positive_and_bond_ratio_at_zero():
    curve = YieldCurve.flat(0.03)
    spec = chaos.calibrate_to_curve(curve, MODEL)
    abc = chaos.compute_abc(spec)
    b = MODEL.sample_batch(2.0, 4, np.arange(2000))
    st_ = chaos.simulate_chaos_state(spec, b, [0.0, 1.0, 2.0])
    assert chaos.positivity_fraction(abc, st_, 2.0) == 0.0
    assert np.all(chaos.pricing_kernel_chaos(abc, st_, 1.0) > 0)
    assert np.allclose(chaos.bond_price_chaos(abc, st_, 0.0, 7.0), curve.discount(7.0), rtol=1e-12)
    P = chaos.bond_price_chaos(abc, st_, 1.0, 4.0)
    assert np.all((P > 0) & np.isfinite(P))
    assert np.all(chaos.bond_price_chaos(abc, st_, 2.0, 1.0) == 0.0)


def test_state_off_grid_raises():
    spec = chaos.calibrate_to_curve(YieldCurve.flat(0.02), MODEL)
    s = chaos.simulate_chaos_state(spec, MODEL.sample_batch(1.0, 1, np.arange(3)), [0.0, 1.0])
    with pytest.raises(ConfigError):
        s.at(0.5)


def test_default_gamma_shape():
    g = chaos.default_gamma(0.5)
    assert np.allclose(g(np.array([-3.0, 0.2, 3.0]), 0.0), [-1.0, 0.2, 1.0])
    assert g(1.0, 2.0) == pytest.approx(np.exp(-1.0))


def test_negative_forward_rejected():
    with pytest.raises(CurveError):
        YieldCurve([1.0, 2.0], [0.98, 0.99])


def test_conditional_variance_small_preset():
    spec = symmetric_chaos_preset()
    e, pi_t = chaos.conditional_variance_mc(spec, 0.0, McConfig(6, 8000, batch_size=4000))
    assert e.within(pi_t)


def test_conditional_variance_needs_zero_mean_integrands():
    spec = chaos.calibrate_to_curve(YieldCurve.flat(0.03), MODEL)
    with pytest.raises(ConfigError):
        chaos.conditional_variance_mc(spec, 0.0, McConfig(6, 10))


def test_frn_identity_flat():
    spec = chaos.calibrate_to_curve(YieldCurve.flat(0.03), MODEL)
    e = chaos.frn_identity_check(spec, 0.0, McConfig(7, 10_000, batch_size=5000))
    assert e.within(1.0)
