"""Lévy-Ito models for asset pricing, interest rates and foreign exchange.

Subpackages and modules
-----------------------
levy, itocalc, quadrature
    Lévy measures, jump sampling, compensators and Lévy-Ito integrals.
mc, rng
    Deterministic counter-based Monte Carlo.
pricing_kernel
    Pricing kernels, risky assets and excess rates of return.
rates
    Yield curves, volatility-structure models, the jump Vasicek model and
    second-order chaos models.
fx
    Multi-currency kernels, exchange rates and the Siegel condition.
cli
    Scenario runner (``levyito`` console script).
"""

from .errors import (
    ConfigError,
    CurveError,
    DataError,
    DomainError,
    GridError,
    LevyItoError,
    NumericsError,
    PathError,
    PositivityError,
    QuadratureError,
    TailError,
    UnsupportedError,
)
from .levy import DiscreteLaw, GaussianLaw, JumpBatch, JumpPath, LevyModel, levy_exponent, sample_jump_path
from .mc import Estimate, McConfig, TimeGrid, run_batch, run_paths
from .pricing_kernel import AssetExposure, RiskAversion, simulate_asset_price, simulate_pricing_kernel
from .rates import YieldCurve
from .rng import CounterRNG

__version__ = "0.1.0"

__all__ = [
    "AssetExposure",
    "ConfigError",
    "CounterRNG",
    "CurveError",
    "DataError",
    "DiscreteLaw",
    "DomainError",
    "Estimate",
    "GaussianLaw",
    "GridError",
    "JumpBatch",
    "JumpPath",
    "LevyItoError",
    "LevyModel",
    "McConfig",
    "NumericsError",
    "PathError",
    "PositivityError",
    "QuadratureError",
    "RiskAversion",
    "TailError",
    "TimeGrid",
    "UnsupportedError",
    "YieldCurve",
    "levy_exponent",
    "run_batch",
    "run_paths",
    "sample_jump_path",
    "simulate_asset_price",
    "simulate_pricing_kernel",
    "__version__",
]
