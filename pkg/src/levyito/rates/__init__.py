"""Interest-rate models: curves, volatility structures, Vasicek and chaos."""

from .curve import YieldCurve

__all__ = ["YieldCurve"]
