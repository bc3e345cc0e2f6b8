"""Initial discount curves with log-linear interpolation."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import CurveError, DataError


@dataclass(frozen=True, eq=False)
class YieldCurve:
    """Discount function P(0, t) interpolated log-linearly.

    Log-linear interpolation makes instantaneous forwards piecewise constant
    between tenors.  Beyond the last tenor the last forward is continued.

    Attributes
    ----------
    tenors : ndarray
        Strictly increasing positive times.
    discounts : ndarray
        Discount factors at ``tenors``, strictly decreasing and in (0, 1).
    """

    tenors: np.ndarray
    discounts: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.tenors, dtype=float).ravel()
        d = np.asarray(self.discounts, dtype=float).ravel()
        if t.size != d.size or t.size == 0:
            raise CurveError("tenors and discounts must be non-empty and of equal length")
        if t[0] == 0.0:
            if d[0] != 1.0:
                raise CurveError("discount at tenor 0 must be 1")
            t, d = t[1:], d[1:]
        if t.size == 0:
            raise CurveError("curve needs at least one positive tenor")
        if not np.all(np.isfinite(t)) or not np.all(np.isfinite(d)):
            raise CurveError("curve contains non-finite values")
        if t[0] <= 0 or np.any(np.diff(t) <= 0):
            raise CurveError("tenors must be positive and strictly increasing")
        if np.any(d <= 0) or np.any(d > 1):
            raise CurveError("discount factors must lie in (0, 1]")
        logd = np.concatenate([[0.0], np.log(d)])
        if np.any(np.diff(logd) >= 0):
            raise CurveError("discount function must be strictly decreasing (forwards > 0)")
        object.__setattr__(self, "tenors", t)
        object.__setattr__(self, "discounts", d)
        object.__setattr__(self, "_knots", np.concatenate([[0.0], t]))
        object.__setattr__(self, "_logd", logd)
        object.__setattr__(self, "_fwd", -np.diff(logd) / np.diff(self._knots))

    @classmethod
    def flat(cls, rate: float, horizon: float = 100.0) -> "YieldCurve":
        if not rate > 0:
            raise CurveError("flat rate must be positive")
        return cls(np.array([horizon]), np.array([math.exp(-rate * horizon)]))

    @classmethod
    def from_zero_rates(cls, tenors, zero_rates) -> "YieldCurve":
        t = np.asarray(tenors, dtype=float)
        return cls(t, np.exp(-np.asarray(zero_rates, dtype=float) * t))

    @classmethod
    def from_csv(cls, path: str | Path) -> "YieldCurve":
        """Read ``tenor_years,discount_factor`` or ``tenor_years,zero_rate``."""
        path = Path(path)
        try:
            with path.open(newline="") as fh:
                rows = list(csv.reader(fh))
        except OSError as exc:
            raise DataError(f"cannot read curve file {path}: {exc}") from exc
        rows = [r for r in rows if r and any(c.strip() for c in r)]
        if len(rows) < 2:
            raise DataError(f"{path}: curve file needs a header and at least one row")
        header = [c.strip() for c in rows[0]]
        if header not in (["tenor_years", "discount_factor"], ["tenor_years", "zero_rate"]):
            raise DataError(f"{path}: unexpected header {header}")
        try:
            vals = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
        except ValueError as exc:
            raise DataError(f"{path}: non-numeric entry ({exc})") from exc
        if vals.ndim != 2 or vals.shape[1] != 2:
            raise DataError(f"{path}: every row needs exactly two columns")
        if header[1] == "zero_rate":
            return cls.from_zero_rates(vals[:, 0], vals[:, 1])
        return cls(vals[:, 0], vals[:, 1])

    @property
    def breaks(self) -> tuple:
        """Tenors, where forwards jump."""
        return tuple(float(t) for t in self.tenors)

    def _segment(self, t: np.ndarray) -> np.ndarray:
        return np.clip(np.searchsorted(self._knots, t, side="right") - 1, 0, self._fwd.size - 1)

    def log_discount(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise CurveError("discount requested at negative time")
        k = self._segment(t)
        return self._logd[k] - self._fwd[k] * (t - self._knots[k])

    def discount(self, t) -> np.ndarray:
        """P(0, t); 1 at t = 0."""
        return np.exp(self.log_discount(t))

    def forward(self, t) -> np.ndarray:
        """Right-continuous instantaneous forward f(0, t)."""
        t = np.asarray(t, dtype=float)
        return self._fwd[self._segment(t)]

    def forward_price(self, t, T) -> np.ndarray:
        """P(0, T) / P(0, t)."""
        return np.exp(self.log_discount(T) - self.log_discount(t))

    def to_rows(self) -> list[tuple[float, float]]:
        return list(zip(self.tenors.tolist(), self.discounts.tolist()))
