"""Lévy-Ito pricing kernel, risky asset prices and the excess rate of return.

The kernel is

    pi_t = exp(-int r ds - int kappa.dW - 1/2 int |kappa|^2 ds)
           * exp(-int int lambda dN~ - int int (e^{-lambda} - 1 + lambda) nu ds),

and a non-dividend asset with Brownian volatility sigma and jump
volatility sigma(x) grows at rate r + R with
R = kappa.sigma + int Lambda Sigma nu, Lambda = 1 - e^{-lambda},
Sigma = e^{sigma(x)} - 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .coeffs import is_zero, space_time_fn, time_fn
from .errors import ConfigError, DomainError
from .itocalc import compensator, time_integral
from .levy import JumpBatch, JumpPath, LevyModel
from .mc import Estimate, estimate
from .paths import BrownianBatch, PathBundle, ScalarPath, assemble_path, check_grid


def lambda_from_Lambda(Lam) -> np.ndarray:
    """lambda = -log(1 - Lambda); requires Lambda < 1."""
    Lam = np.asarray(Lam, dtype=float)
    if np.any(~(Lam < 1.0)):
        raise DomainError("Lambda must be strictly below 1")
    return -np.log1p(-Lam)


def Lambda_from_lambda(lam) -> np.ndarray:
    return -np.expm1(-np.asarray(lam, dtype=float))


def sigma_from_Sigma(Sig) -> np.ndarray:
    """Exponential volatility from dynamical volatility; requires Sigma > -1."""
    Sig = np.asarray(Sig, dtype=float)
    if np.any(~(Sig > -1.0)):
        raise DomainError("Sigma must be strictly above -1")
    return np.log1p(Sig)


def Sigma_from_sigma(sig) -> np.ndarray:
    return np.expm1(np.asarray(sig, dtype=float))


@dataclass(frozen=True, eq=False)
class RiskAversion:
    """Market prices of risk.

    Attributes
    ----------
    kappa : array or callable of t, optional
        Brownian market price of risk, shape (d,).
    lam : float or callable (x, t), optional
        Jump risk aversion lambda_t(x).
    time_breaks : tuple of float
    tilt : float
        Bound on the exponential growth of lambda in x, passed to quadrature.
    """

    kappa: object = None
    lam: object = None
    time_breaks: tuple = ()
    tilt: float = 0.0

    @classmethod
    def from_Lambda(cls, Lam, kappa=None, **kw) -> "RiskAversion":
        f = space_time_fn(Lam)
        return cls(kappa=kappa, lam=lambda x, t: lambda_from_Lambda(f(x, t)), **kw)

    @property
    def brownian_dim(self) -> int:
        if self.kappa is None:
            return 0
        if callable(self.kappa):
            return int(np.asarray(self.kappa(np.zeros(1))).shape[-1])
        return int(np.atleast_1d(self.kappa).size)

    def lam_fn(self) -> Callable:
        return space_time_fn(self.lam)

    def Lambda(self, x, t) -> np.ndarray:
        return Lambda_from_lambda(self.lam_fn()(x, t))

    def check(self, model: LevyModel, horizon: float) -> dict:
        """Quadrature checks of the integrability conditions on [0, horizon]."""
        Lam = lambda x, t: self.Lambda(x, t)  # noqa: E731
        small = compensator(model, lambda x, t: Lam(x, t) ** 2, [horizon], "small",
                            time_breaks=self.time_breaks, tilt=self.tilt)[0]
        large = compensator(model, lambda x, t: np.abs(Lam(x, t)), [horizon], "large",
                            time_breaks=self.time_breaks, tilt=self.tilt)[0]
        rule = model.rule(self.tilt, sampled=True)
        ts = np.linspace(0.0, horizon, 9)
        lam = np.broadcast_to(self.lam_fn()(rule.space_nodes(1), ts[None, :]), (rule.size, ts.size))
        if not np.all(np.isfinite(lam)):
            raise DomainError("lambda is not finite, so Lambda reaches 1")
        if not (math.isfinite(small) and math.isfinite(large)):
            raise DomainError("risk aversion fails the integrability conditions")
        return {"small_shell_L2": small, "large_shell_L1": large}


@dataclass(frozen=True, eq=False)
class AssetExposure:
    """Volatility of a risky asset.

    Attributes
    ----------
    sigma_brownian : array or callable of t, optional
    sigma_jump : float or callable (x, t), optional
        Exponential jump volatility sigma_t(x); Sigma = e^sigma - 1.
    """

    sigma_brownian: object = None
    sigma_jump: object = None
    time_breaks: tuple = ()
    tilt: float = 0.0

    @classmethod
    def from_Sigma(cls, Sig, sigma_brownian=None, **kw) -> "AssetExposure":
        f = space_time_fn(Sig)
        return cls(sigma_brownian=sigma_brownian,
                   sigma_jump=lambda x, t: sigma_from_Sigma(f(x, t)), **kw)

    def sigma_fn(self) -> Callable:
        return space_time_fn(self.sigma_jump)

    def Sigma(self, x, t) -> np.ndarray:
        return Sigma_from_sigma(self.sigma_fn()(x, t))


def _short_rate_integral(short_rate, times, time_breaks=()) -> np.ndarray:
    if short_rate is None:
        return np.zeros(np.shape(times))
    return time_integral(short_rate, times, time_breaks)


def _brownian_parts(vec, brownian: BrownianBatch | None, times, n_paths: int):
    if vec is None or is_zero(vec):
        return np.zeros((n_paths, len(times))), np.zeros(len(times))
    if brownian is None:
        raise ConfigError("a Brownian path is required for nonzero Brownian coefficients")
    return brownian.integral(vec, times), brownian.quadratic_variation(vec, times)


def kernel_log_values(risk: RiskAversion, short_rate, model: LevyModel, batch: JumpBatch,
                      times, brownian: BrownianBatch | None = None, strict: bool = False,
                      check: bool = True) -> np.ndarray:
    """log pi at ``times`` for every path of ``batch``."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    P = batch.n_paths
    out = np.zeros((P, times.size))
    out -= _short_rate_integral(short_rate, times, risk.time_breaks)[None, :]
    wk, qk = _brownian_parts(risk.kappa, brownian, times, P)
    out -= wk + 0.5 * qk[None, :]
    if risk.lam is not None and not is_zero(risk.lam):
        lam = risk.lam_fn()
        out -= batch.jump_sum(lam, times, strict)
        # -int int (e^{-lam} - 1 + lam) nu ds - int int lam nu ds, merged
        comp = compensator(model, lambda x, t: np.expm1(-lam(x, t)), times,
                           time_breaks=risk.time_breaks, tilt=risk.tilt, check=check)
        out -= comp[None, :]
    return out


def simulate_pricing_kernel(risk: RiskAversion, short_rate, model: LevyModel,
                            jumps: JumpPath | JumpBatch, brownian: BrownianBatch | None = None,
                            grid: Sequence[float] | None = None) -> ScalarPath | PathBundle:
    """Pricing kernel pi on ``grid`` (default [0, horizon]); pi_0 = 1."""
    grid = check_grid(grid if grid is not None else [0.0, jumps.horizon])
    if isinstance(jumps, JumpBatch):
        return PathBundle(grid, np.exp(kernel_log_values(risk, short_rate, model, jumps, grid, brownian)),
                          jumps.paths)
    batch = jumps.as_batch()
    ev = lambda t, strict: np.exp(kernel_log_values(risk, short_rate, model, batch, t, brownian, strict))  # noqa: E731
    return assemble_path(grid, jumps.times, ev, dict(kind="pricing_kernel"))


def excess_rate_of_return(risk: RiskAversion, exposure: AssetExposure, model: LevyModel,
                          t: float, check: bool = True) -> float:
    """R_t = kappa_t . sigma_t + int Lambda_t(x) Sigma_t(x) nu(dx)."""
    out = 0.0
    if risk.kappa is not None and exposure.sigma_brownian is not None:
        d = risk.brownian_dim
        k = time_fn(risk.kappa, d)(np.asarray(t))
        s = time_fn(exposure.sigma_brownian, d)(np.asarray(t))
        out += float(np.dot(k, s))
    if risk.lam is None or exposure.sigma_jump is None:
        return out
    tilt = max(risk.tilt, exposure.tilt)
    g = lambda x, s: risk.Lambda(x, s) * exposure.Sigma(x, s)  # noqa: E731
    val = model.nu_integral(g, t, tilt=tilt, sampled=True, check=check)
    if not math.isfinite(val):
        raise DomainError("Lambda Sigma is not integrable")
    return out + val


def excess_rate_integral(risk: RiskAversion, exposure: AssetExposure, model: LevyModel, times,
                         brownian: BrownianBatch | None = None, check: bool = True) -> np.ndarray:
    """int_0^t R_s ds; the Brownian part uses the grid's left-point rule."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.zeros(times.size)
    if risk.kappa is not None and exposure.sigma_brownian is not None:
        if brownian is not None:
            out += brownian.cross_variation(risk.kappa, exposure.sigma_brownian, times)
        else:
            d = risk.brownian_dim
            k, s = time_fn(risk.kappa, d), time_fn(exposure.sigma_brownian, d)
            out += time_integral(lambda u: (k(u) * s(u)).sum(axis=-1), times)
    if risk.lam is not None and exposure.sigma_jump is not None:
        tilt = max(risk.tilt, exposure.tilt)
        g = lambda x, s: risk.Lambda(x, s) * exposure.Sigma(x, s)  # noqa: E731
        out += compensator(model, g, times, tilt=tilt, check=check,
                           time_breaks=tuple(risk.time_breaks) + tuple(exposure.time_breaks))
    return out


def asset_log_values(risk: RiskAversion, exposure: AssetExposure, short_rate, model: LevyModel,
                     batch: JumpBatch, times, s0: float, brownian: BrownianBatch | None = None,
                     strict: bool = False, check: bool = True) -> np.ndarray:
    """log S at ``times``."""
    if not s0 > 0:
        raise DomainError("s0 must be positive")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    P = batch.n_paths
    brk = tuple(risk.time_breaks) + tuple(exposure.time_breaks)
    out = np.full((P, times.size), math.log(s0))
    out += _short_rate_integral(short_rate, times, brk)[None, :]
    out += excess_rate_integral(risk, exposure, model, times, brownian, check)[None, :]
    ws, qs = _brownian_parts(exposure.sigma_brownian, brownian, times, P)
    out += ws - 0.5 * qs[None, :]
    if exposure.sigma_jump is not None and not is_zero(exposure.sigma_jump):
        sig = exposure.sigma_fn()
        out += batch.jump_sum(sig, times, strict)
        out -= compensator(model, lambda x, t: np.expm1(sig(x, t)), times, time_breaks=brk,
                           tilt=exposure.tilt, check=check)[None, :]
    return out


def simulate_asset_price(risk: RiskAversion, exposure: AssetExposure, short_rate, model: LevyModel,
                         jumps: JumpPath | JumpBatch, brownian: BrownianBatch | None = None,
                         grid: Sequence[float] | None = None, s0: float = 1.0) -> ScalarPath | PathBundle:
    """Risky asset price S on ``grid``; S_0 = s0 and S > 0 pathwise."""
    grid = check_grid(grid if grid is not None else [0.0, jumps.horizon])
    if isinstance(jumps, JumpBatch):
        return PathBundle(grid, np.exp(asset_log_values(risk, exposure, short_rate, model, jumps, grid,
                                                        s0, brownian)), jumps.paths)
    batch = jumps.as_batch()
    ev = lambda t, strict: np.exp(asset_log_values(risk, exposure, short_rate, model, batch, t, s0,  # noqa: E731
                                                   brownian, strict))
    return assemble_path(grid, jumps.times, ev, dict(kind="asset"))


def money_market(short_rate, times, time_breaks: Sequence[float] = ()) -> np.ndarray:
    """B_t = exp(int_0^t r ds) for a deterministic short rate."""
    return np.exp(_short_rate_integral(short_rate, times, time_breaks))


def drift_correction(exposure: AssetExposure, model: LevyModel, t: float = 0.0,
                     brownian_dim: int | None = None) -> float:
    """1/2 |sigma|^2 + int (e^sigma - 1 - sigma) nu: E[d log(S/B)] + correction = R dt."""
    out = 0.0
    if exposure.sigma_brownian is not None and not is_zero(exposure.sigma_brownian):
        if brownian_dim is None:
            sb = exposure.sigma_brownian
            brownian_dim = int(np.asarray(sb(np.zeros(1)) if callable(sb) else np.atleast_1d(sb)).shape[-1])
        s = np.atleast_1d(time_fn(exposure.sigma_brownian, brownian_dim)(np.asarray(t)))
        out += 0.5 * float(np.dot(s, s))
    if exposure.sigma_jump is not None:
        sig = exposure.sigma_fn()
        out += model.nu_integral(lambda x, u: np.expm1(sig(x, u)) - sig(x, u), t,
                                 tilt=exposure.tilt, sampled=True)
    return out


def drift_regression(log_excess: np.ndarray, times, correction: float) -> Estimate:
    """Per-path least-squares slope through the origin, plus a constant correction.

    ``log_excess`` has shape (P, T) and holds log(S_t / (s0 B_t)) at the
    positive ``times``.
    """
    t = np.atleast_1d(np.asarray(times, dtype=float))
    slopes = (log_excess @ t) / float(t @ t)
    e = estimate(slopes)
    return Estimate(e.mean + correction, e.stderr, e.n)
