from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyito.errors import CurveError, DataError
from levyito.rates.curve import YieldCurve


@settings(max_examples=25, deadline=None)
@given(r=st.floats(0.001, 0.2), t=st.floats(0.01, 60.0))
def test_flat_curve(r, t):
    c = YieldCurve.flat(r)
    assert float(c.discount(t)) == pytest.approx(math.exp(-r * t), rel=1e-12)
    assert float(c.forward(t)) == pytest.approx(r, rel=1e-12)


def test_csv_round_trip_and_zero_rate_variant(tmp_path):
    ten = [0.5, 1.0, 2.0, 5.0]
    z = [0.02, 0.022, 0.025, 0.03]
    p = tmp_path / "z.csv"
    p.write_text("tenor_years,zero_rate\n" + "".join(f"{t},{r}\n" for t, r in zip(ten, z)))
    c = YieldCurve.from_csv(p)
    assert np.allclose(c.discount(ten), np.exp(-np.array(z) * ten), rtol=1e-14)
    q = tmp_path / "d.csv"
    q.write_text("tenor_years,discount_factor\n" + "".join(f"{t},{d!r}\n" for t, d in c.to_rows()))
    assert np.allclose(YieldCurve.from_csv(q).discount(ten), c.discount(ten), rtol=1e-15)


def test_log_linear_interpolation_gives_piecewise_constant_forwards():
    c = YieldCurve([1.0, 2.0], [0.97, 0.93])
    assert float(c.forward(0.3)) == pytest.approx(-math.log(0.97))
    assert float(c.forward(1.5)) == pytest.approx(math.log(0.97 / 0.93))
    assert float(c.discount(1.5)) == pytest.approx(math.sqrt(0.97 * 0.93))
    assert float(c.forward_price(1.0, 2.0)) == pytest.approx(0.93 / 0.97)


@pytest.mark.parametrize("text", ["tenor,df\n1,0.9\n", "tenor_years,discount_factor\n1,abc\n",
                                  "tenor_years,discount_factor\n2,0.9\n1,0.95\n",
                                  "tenor_years,discount_factor\n1,1.2\n"])
def test_bad_files(tmp_path, text):
    p = tmp_path / "c.csv"
    p.write_text(text)
    with pytest.raises(DataError):
        YieldCurve.from_csv(p)


def test_missing_file_and_error_hierarchy(tmp_path):
    with pytest.raises(DataError):
        YieldCurve.from_csv(tmp_path / "none.csv")
    assert issubclass(CurveError, DataError)
