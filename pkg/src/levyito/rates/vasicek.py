"""Vasicek short-rate model driven by a Poisson random measure.

The short rate solves

    dr = k (theta - r) dt - int sigma(x, t) N~(dx, dt),

and the pricing kernel carries a deterministic jump risk aversion
``lam(x, t)``.  Bond prices have a closed form whose jump contribution is
a space-time integral; a Monte Carlo valuation of ``E_t[pi_T] / pi_t``
serves as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..coeffs import is_zero, space_time_fn
from ..errors import ConfigError, DomainError
from ..itocalc import compensator, exponential_formula_rhs
from ..levy import JumpBatch, JumpPath, LevyModel
from ..mc import Estimate, McConfig, run_batch
from ..paths import PathBundle, ScalarPath, assemble_path, check_grid


@dataclass(frozen=True, eq=False)
class VasicekSpec:
    """Parameters of the jump Vasicek model.

    Attributes
    ----------
    k, theta : float
        Mean-reversion speed and level, both positive.
    r0 : float
    sigma : float or callable (x, t)
        Jump volatility of the short rate.
    lam : float or callable (x, t)
        Jump risk aversion.
    model : LevyModel
    tilt : float
        Bound on the exponential growth in ``x`` of ``sigma / k - lam``;
        needed for quadrature against variance-gamma measures.
    """

    k: float
    theta: float
    r0: float
    model: LevyModel
    sigma: object = 0.0
    lam: object = 0.0
    tilt: float = 0.0
    time_breaks: tuple = ()
    name: str = field(default="levy-ito-vasicek")

    def __post_init__(self):
        if not self.k > 0:
            raise ConfigError("mean-reversion speed k must be positive")
        if not self.theta > 0:
            raise ConfigError("mean-reversion level theta must be positive")
        if not math.isfinite(self.r0):
            raise ConfigError("r0 must be finite")

    @property
    def sigma_fn(self):
        return space_time_fn(self.sigma)

    @property
    def lam_fn(self):
        return space_time_fn(self.lam)

    def duration(self, s, T) -> np.ndarray:
        """(1 - e^{k(s - T)}) / k."""
        return -np.expm1(self.k * (np.asarray(s, dtype=float) - T)) / self.k

    def f_T(self, T: float):
        """Exponent ``f_T(x, s) = duration(s, T) sigma(x, s) - lam(x, s)``."""
        sig, lam = self.sigma_fn, self.lam_fn

        def f(x, s):
            return self.duration(s, T) * sig(x, s) - lam(x, s)

        return f

    def check(self, horizon: float) -> dict:
        """Quadrature checks of the integrability conditions on [0, horizon]."""
        sig, lam = self.sigma_fn, self.lam_fn
        k = self.k
        parts = {
            "sigma_small_L2": compensator(self.model, lambda x, s: sig(x, s) ** 2, [horizon], "small",
                                          sampled=False, time_breaks=self.time_breaks, tilt=self.tilt)[0],
            "sigma_large_exp": compensator(self.model, lambda x, s: np.exp(sig(x, s) / k), [horizon], "large",
                                           sampled=False, time_breaks=self.time_breaks, tilt=self.tilt)[0],
            "lam_small_L2": compensator(self.model, lambda x, s: lam(x, s) ** 2, [horizon], "small",
                                        sampled=False, time_breaks=self.time_breaks, tilt=self.tilt)[0],
            "lam_large_L1": compensator(self.model, lambda x, s: np.abs(lam(x, s)), [horizon], "large",
                                        sampled=False, time_breaks=self.time_breaks, tilt=self.tilt)[0],
        }
        bad = [n for n, v in parts.items() if not math.isfinite(v)]
        if bad:
            raise DomainError(f"integrability conditions fail: {', '.join(bad)}")
        return parts


def levy_vasicek(k: float, theta: float, r0: float, model: LevyModel, sigma: float,
                 lam: float) -> VasicekSpec:
    """Scalar special case ``sigma(x, t) = sigma x`` and ``lam(x, t) = lam x``."""
    if model.dimension != 1:
        raise ConfigError("the scalar preset needs a one-dimensional model")
    s, l = float(sigma), float(lam)
    return VasicekSpec(k, theta, r0, model,
                       sigma=lambda x, t: s * np.asarray(x, dtype=float),
                       lam=lambda x, t: l * np.asarray(x, dtype=float),
                       tilt=abs(s) / k + abs(l), name="levy-vasicek")


def classical_vasicek(k: float, theta: float, r0: float, model: LevyModel | None = None) -> VasicekSpec:
    """Jump-free preset: the short rate decays deterministically to theta."""
    model = model or LevyModel.symmetric_bernoulli(1.0)
    return VasicekSpec(k, theta, r0, model, sigma=0.0, lam=0.0, name="classical")


# ---------------------------------------------------------------------------
# short rate


def short_rate_mean(spec: VasicekSpec, t, r_start: float | None = None) -> np.ndarray:
    r = spec.r0 if r_start is None else r_start
    return spec.theta + (r - spec.theta) * np.exp(-spec.k * np.asarray(t, dtype=float))


def short_rate_variance(spec: VasicekSpec, t: float) -> float:
    """int_0^t int e^{2k(s - t)} sigma^2 nu(dx) ds."""
    if is_zero(spec.sigma) or t <= 0:
        return 0.0
    sig, k = spec.sigma_fn, spec.k
    return float(compensator(spec.model, lambda x, s: np.exp(2 * k * (s - t)) * sig(x, s) ** 2, [t],
                             sampled=False, time_breaks=spec.time_breaks, tilt=2 * spec.tilt)[0])


def short_rate_values(spec: VasicekSpec, batch: JumpBatch, times, strict: bool = False,
                      r_start: float | None = None, offset: float = 0.0, check: bool = True) -> np.ndarray:
    """Short rate at ``times`` for each path, shape (P, T).

    ``offset`` shifts the coefficient clock: jumps at local time ``s`` use
    ``sigma(x, offset + s)``, which restarts the model at ``offset`` from
    ``r_start``.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    k = spec.k
    out = np.broadcast_to(short_rate_mean(spec, times, r_start), (batch.n_paths, times.size)).copy()
    if is_zero(spec.sigma):
        return out
    sig = spec.sigma_fn
    for j, t in enumerate(times):
        h = lambda x, s, t=t: np.exp(k * (s - t)) * sig(x, offset + s)  # noqa: E731
        jumps = batch.jump_sum(h, [t], strict)[:, 0]
        comp = 0.0
        if t > 0:
            comp = compensator(spec.model, h, [t], sampled=True, tilt=spec.tilt, check=check,
                               time_breaks=_shift(spec.time_breaks, offset))[0]
        out[:, j] -= jumps - comp
    return out


def _shift(breaks, offset):
    return tuple(b - offset for b in breaks if b > offset)


def simulate_short_rate(spec: VasicekSpec, jumps: JumpPath | JumpBatch,
                        grid: Sequence[float] | None = None) -> ScalarPath | PathBundle:
    """Short-rate path on ``grid``, with left limits at jump times."""
    grid = check_grid(grid if grid is not None else [0.0, jumps.horizon])
    if isinstance(jumps, JumpBatch):
        return PathBundle(grid, short_rate_values(spec, jumps, grid), jumps.paths)
    batch = jumps.as_batch()
    return assemble_path(grid, jumps.times, lambda t, strict: short_rate_values(spec, batch, t, strict),
                         dict(kind="short_rate", spec=spec, jumps=jumps))


def integrated_short_rate_values(spec: VasicekSpec, batch: JumpBatch, times, r_values: np.ndarray,
                                 check: bool = True) -> np.ndarray:
    """I_t = theta t - (r_t - r0) / k - (1/k) int int sigma dN~."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    k = spec.k
    out = spec.theta * times[None, :] - (r_values - spec.r0) / k
    if is_zero(spec.sigma):
        return out
    sig = spec.sigma_fn
    comp = compensator(spec.model, sig, times, sampled=True, tilt=spec.tilt, check=check,
                       time_breaks=spec.time_breaks)
    return out - (batch.jump_sum(sig, times) - comp[None, :]) / k


def integrated_short_rate(spec: VasicekSpec, short_rate_path: ScalarPath | PathBundle,
                          jumps: JumpPath | JumpBatch) -> ScalarPath | PathBundle:
    """Integrated short rate on the grid of ``short_rate_path``."""
    grid = short_rate_path.grid
    if isinstance(jumps, JumpBatch):
        if not isinstance(short_rate_path, PathBundle):
            raise ConfigError("a batch of jumps needs a bundle of short-rate paths")
        return PathBundle(grid, integrated_short_rate_values(spec, jumps, grid, short_rate_path.values),
                          jumps.paths)
    meta_jumps = short_rate_path.meta.get("jumps") if isinstance(short_rate_path, ScalarPath) else None
    if meta_jumps is not None and not (np.array_equal(meta_jumps.times, jumps.times)
                                       and np.array_equal(meta_jumps.sizes, jumps.sizes)):
        raise ConfigError("short-rate path was built from different jumps")
    batch = jumps.as_batch()
    vals = integrated_short_rate_values(spec, batch, grid, short_rate_path.values[None, :])[0]
    # I is continuous, so its left limits are the values at the jump times
    left = vals[np.searchsorted(grid, short_rate_path.jump_times)]
    return ScalarPath(grid, vals, short_rate_path.jump_times, left, dict(kind="integrated_short_rate"))


# ---------------------------------------------------------------------------
# bond prices


def jump_integral(spec: VasicekSpec, t: float, T: float, check: bool = True) -> float:
    """int_t^T int [(e^{D sigma} - 1) e^{-lam} - D sigma] nu(dx) ds, D = duration(s, T)."""
    if is_zero(spec.sigma):
        return 0.0
    sig, lam = spec.sigma_fn, spec.lam_fn

    def g(x, s):
        ds = spec.duration(s, T) * sig(x, s)
        return np.expm1(ds) * np.exp(-lam(x, s)) - ds

    return float(compensator(spec.model, g, [T], sampled=False, time_breaks=spec.time_breaks,
                             tilt=spec.tilt, check=check, start=t)[0])


def bond_log_price(spec: VasicekSpec, r_t, t: float, T: float, check: bool = True):
    if not t < T:
        raise DomainError("bond price needs t < T")
    r_t = np.asarray(r_t, dtype=float)
    tau = T - t
    affine = -tau * spec.theta + (-math.expm1(-spec.k * tau) / spec.k) * (spec.theta - r_t)
    return affine + jump_integral(spec, t, T, check)


def bond_price_closed_form(spec: VasicekSpec, r_t, t: float, T: float, check: bool = True):
    """Closed-form price of the unit bond maturing at ``T``, seen at ``t`` with rate ``r_t``."""
    out = np.exp(bond_log_price(spec, r_t, t, T, check))
    return float(out) if np.ndim(out) == 0 else out


def jump_term_via_exponential_formula(spec: VasicekSpec, t: float, T: float) -> float:
    """Same jump integral, assembled from the exponential formula.

    Equals ``log E[exp int int f_T dN~] - int int (e^{-lam} - 1 + lam) nu ds``.
    """
    lam = spec.lam_fn
    ef = exponential_formula_rhs(spec.f_T(T), spec.model, t, T, spec.time_breaks, spec.tilt)
    if is_zero(spec.lam):
        return math.log(ef)
    rem = compensator(spec.model, lambda x, s: np.expm1(-lam(x, s)) + lam(x, s), [T], sampled=False,
                      time_breaks=spec.time_breaks, tilt=spec.tilt, start=t)[0]
    return math.log(ef) - rem


def classical_vasicek_bond(k: float, theta: float, r_t, tau: float, eta: float = 0.0,
                           market_price: float = 0.0):
    """Textbook affine bond price for dr = k(theta - r) dt - eta dW.

    ``market_price`` is the Brownian market price of risk in the kernel
    ``d pi / pi = -r dt - market_price dW``.
    """
    if not tau >= 0:
        raise DomainError("time to maturity must be nonnegative")
    b = -math.expm1(-k * tau) / k
    theta_q = theta + eta * market_price / k
    a = (theta_q - eta * eta / (2 * k * k)) * (b - tau) - eta * eta * b * b / (4 * k)
    return np.exp(a - b * np.asarray(r_t, dtype=float))


def kernel_ratio_log(spec: VasicekSpec, batch: JumpBatch, r_t: float, t: float, T: float,
                     check: bool = True) -> np.ndarray:
    """log(pi_T / pi_t) per path from the short-rate representation of the kernel.

    ``batch`` holds jumps on (0, T - t] measured from ``t``.
    """
    tau = T - t
    r_T = short_rate_values(spec, batch, [tau], r_start=r_t, offset=t, check=check)[:, 0]
    out = -spec.theta * tau + (r_T - r_t) / spec.k
    sig, lam = spec.sigma_fn, spec.lam_fn
    if is_zero(spec.sigma) and is_zero(spec.lam):
        return out
    g = lambda x, s: sig(x, t + s) / spec.k - lam(x, t + s)  # noqa: E731
    brk = _shift(spec.time_breaks, t)
    out = out + batch.jump_sum(g, [tau])[:, 0]
    out -= compensator(spec.model, g, [tau], sampled=True, time_breaks=brk, tilt=spec.tilt, check=check)[0]
    if not is_zero(spec.lam):
        out -= compensator(spec.model, lambda x, s: np.expm1(-lam(x, t + s)) + lam(x, t + s), [tau],
                           sampled=True, time_breaks=brk, tilt=spec.tilt, check=check)[0]
    return out


def bond_price_mc(spec: VasicekSpec, t: float, T: float, mc: McConfig, r_t: float | None = None,
                  grid_steps: int | None = None) -> Estimate:
    """Monte Carlo estimate of E_t[pi_T] / pi_t.

    The model is restarted at ``t`` from ``r_t`` (the deterministic mean
    when omitted) and the kernel ratio is simulated over ``(t, T]``.
    """
    if not t < T:
        raise DomainError("bond price needs t < T")
    r_start = float(short_rate_mean(spec, t)) if r_t is None else float(r_t)
    tau = T - t
    steps = grid_steps or (mc.grid.steps if mc.grid is not None else max(1, int(math.ceil(tau * 50))))
    grid = np.linspace(0.0, tau, steps + 1)

    def fn(rng, paths):
        batch = spec.model.sample_batch(tau, rng, paths, grid)
        return np.exp(kernel_ratio_log(spec, batch, r_start, t, T, check=False))

    return run_batch(mc, fn)
