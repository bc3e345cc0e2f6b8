"""Bundled models and coefficient sets used by tests, the CLI and examples."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .itocalc import compensated_integral
from .levy import LevyModel
from .mc import Estimate, McConfig, collect, estimate
from .pricing_kernel import AssetExposure, RiskAversion
from .rates.chaos import ChaosSpec, default_gamma
from .rates.vasicek import VasicekSpec


# ---------------------------------------------------------------------------
# exponential formula


@dataclass(frozen=True, eq=False)
class FormulaCase:
    """A (model, f) pair with an independent closed form of the right side.

    ``grid`` is the simulation grid; variance-gamma increments are events at
    its points, so ``f`` is linear in ``x`` for those models.
    """

    name: str
    model: LevyModel
    f: Callable
    t0: float
    t1: float
    closed_form: float
    tilt: float = 0.0
    time_breaks: tuple = ()
    grid: tuple = ()


def exponential_formula_cases() -> list[FormulaCase]:
    cp = LevyModel.symmetric_bernoulli(1.0)
    mert = LevyModel.merton(1.0, 0.0, 0.25)
    vg = LevyModel.variance_gamma(2.0)
    vg2 = LevyModel.two_dim_variance_gamma(2.0)
    a2 = np.array([0.5, -0.3])
    return [
        FormulaCase("cp-linear", cp, lambda x, s: np.asarray(x, dtype=float) + 0.0 * np.asarray(s),
                    0.0, 1.0, math.exp(math.cosh(1.0) - 1.0), tilt=1.0),
        FormulaCase("cp-half-window", cp,
                    lambda x, s: np.asarray(x, dtype=float) * (np.asarray(s) <= 0.5),
                    0.0, 1.0, math.exp(0.5 * (math.cosh(1.0) - 1.0)), tilt=1.0, time_breaks=(0.5,)),
        FormulaCase("merton-half", mert, lambda x, s: 0.5 * np.asarray(x, dtype=float) + 0.0 * np.asarray(s),
                    0.0, 1.0, math.exp(math.expm1(0.5 * 0.25 * 0.25)), tilt=0.5),
        FormulaCase("vg-linear", vg, lambda x, s: 0.4 * np.asarray(x, dtype=float) + 0.0 * np.asarray(s),
                    0.0, 1.0, math.exp(-2.0 * math.log1p(-0.16 / 4.0)), tilt=0.4, grid=(0.0, 0.5, 1.0)),
        FormulaCase("vg2d-linear", vg2, lambda x, s: np.asarray(x, dtype=float) @ a2 + 0.0 * np.asarray(s),
                    0.0, 1.0, math.exp(-2.0 * math.log1p(-float(a2 @ a2) / 4.0)), tilt=float(np.linalg.norm(a2)),
                    grid=(0.0, 1.0)),
    ]


def exponential_formula_mc(case: FormulaCase, mc: McConfig) -> Estimate:
    """MC estimate of E[exp int int f dN~] over (t0, t1]."""
    grid = case.grid or None

    def fn(rng, paths):
        b = case.model.sample_batch(case.t1, rng, paths, grid)
        return np.exp(compensated_integral(case.f, b, case.model, case.t0, case.t1,
                                           case.time_breaks, case.tilt))

    return estimate(collect(mc, fn))


# ---------------------------------------------------------------------------
# risk aversion and assets


def merton_risk_preset() -> tuple[LevyModel, RiskAversion]:
    """Merton jumps N(0, 1) at unit intensity, lambda = 0.2 on down jumps, kappa = 0.25."""
    model = LevyModel.merton(1.0, 0.0, 1.0)
    risk = RiskAversion(kappa=np.array([0.25]),
                        lam=lambda x, t: 0.2 * (np.asarray(x) < 0) + 0.0 * np.asarray(t),
                        time_breaks=(), tilt=0.0)
    return model, risk


def vg_risk_preset() -> tuple[LevyModel, RiskAversion]:
    """Variance gamma with m = 2 and linear risk aversion lambda(x) = 0.5 x."""
    model = LevyModel.variance_gamma(2.0)
    risk = RiskAversion(lam=lambda x, t: 0.5 * np.asarray(x, dtype=float) + 0.0 * np.asarray(t), tilt=0.5)
    return model, risk


def merton_asset_preset() -> tuple[LevyModel, RiskAversion, AssetExposure]:
    """Merton model with lambda = 0.2 on down jumps and sigma(x) = 0.3 x."""
    model = LevyModel.merton(1.0, 0.0, 1.0)
    risk = RiskAversion(lam=lambda x, t: 0.2 * (np.asarray(x) < 0) + 0.0 * np.asarray(t))
    expo = AssetExposure(sigma_jump=lambda x, t: 0.3 * np.asarray(x, dtype=float) + 0.0 * np.asarray(t),
                         tilt=0.3)
    return model, risk, expo


# ---------------------------------------------------------------------------
# interest rates


def vasicek_jump_preset(jump_risk: float = 0.1, k: float = 0.5, theta: float = 0.04,
                        r0: float = 0.03, vol: float = 0.01) -> VasicekSpec:
    """Symmetric unit jumps; sigma(x) = vol |x| and lambda(x) = jump_risk on down jumps."""
    model = LevyModel.symmetric_bernoulli(1.0)
    lam_c, vol_c = float(jump_risk), float(vol)
    return VasicekSpec(k, theta, r0, model,
                       sigma=lambda x, t: vol_c * np.abs(np.asarray(x, dtype=float)) + 0.0 * np.asarray(t),
                       lam=lambda x, t: lam_c * (np.asarray(x) < 0) + 0.0 * np.asarray(t),
                       tilt=vol_c / k + abs(lam_c), name=f"jump-vasicek-{jump_risk:g}")


def symmetric_chaos_preset(a: float = 0.15, b: float = 0.1, decay: float = 0.3,
                           gamma_decay: float = 0.5) -> ChaosSpec:
    """Small factorizable spec on symmetric unit jumps with zero-mean phi and beta.

    ``phi = a x e^{-decay s}``, ``beta = b x e^{-decay s}`` and the default
    gamma; suited to nested conditional-variance checks.
    """
    model = LevyModel.symmetric_bernoulli(1.0)
    return ChaosSpec(lambda x, s: a * np.asarray(x, dtype=float) * np.exp(-decay * np.asarray(s)),
                     lambda x, s: b * np.asarray(x, dtype=float) * np.exp(-decay * np.asarray(s)),
                     default_gamma(gamma_decay), model)


__all__ = [
    "FormulaCase",
    "exponential_formula_cases",
    "exponential_formula_mc",
    "merton_asset_preset",
    "merton_risk_preset",
    "symmetric_chaos_preset",
    "vasicek_jump_preset",
    "vg_risk_preset",
]
