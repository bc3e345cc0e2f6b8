"""Money market account and discount bonds from volatility structures.

Inputs are a Brownian bond volatility ``omega(s, T)`` (vector valued), a
jump bond volatility ``Omega(x, s, T) > -1``, the market prices of risk and
an initial discount curve.  With ``lam`` the jump risk aversion,

    log B_t = -log P(0,t) - int kappa_s.omega_st ds - int omega_st.dW
              + 1/2 int |omega_st|^2 ds - sum log(1 + Omega_st(x))
              + int int e^{-lam} Omega_st nu ds,

and the bond price follows the same pattern with ``omega_sT - omega_st``
and ``(1 + Omega_sT) / (1 + Omega_st)``.  Terms involving the Brownian
motion use left-point sums on the simulation grid so the deflated bond
is an exact discrete martingale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..coeffs import time_fn
from ..errors import ConfigError, DomainError, GridError
from ..itocalc import compensator
from ..levy import JumpBatch, JumpPath, LevyModel
from ..paths import BrownianBatch, PathBundle, ScalarPath, assemble_path, check_grid
from ..pricing_kernel import RiskAversion
from .curve import YieldCurve


@dataclass(frozen=True, eq=False)
class VolStructure:
    """Bond volatility structures plus the initial curve.

    Attributes
    ----------
    omega : callable (s, T) -> array of shape s.shape + (d,), optional
        Brownian bond volatility; must vanish as s -> T.
    Omega : callable (x, s, T), optional
        Jump bond volatility in dynamical form, greater than -1.
    curve : YieldCurve
    brownian_dim : int
    tilt : float
        Bound on exponential growth of log(1 + Omega) in x.
    """

    curve: YieldCurve
    omega: Callable | None = None
    Omega: Callable | None = None
    brownian_dim: int = 1
    tilt: float = 0.0
    time_breaks: tuple = ()

    def omega_at(self, s, T) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.omega is None:
            return np.zeros(s.shape + (self.brownian_dim,))
        out = np.asarray(self.omega(s, T), dtype=float)
        return np.broadcast_to(out, s.shape + (self.brownian_dim,))

    def check(self, model: LevyModel, maturities: Sequence[float] = (1.0,), tol: float = 1e-12) -> None:
        """Maturity limits and Omega > -1 on the quadrature nodes."""
        rule = model.rule(self.tilt, sampled=True)
        xs = rule.space_nodes(1)
        for T in maturities:
            ts = np.linspace(0.0, T, 9)
            if self.omega is not None:
                if np.max(np.abs(self.omega_at(np.array([T]), T))) > tol:
                    raise DomainError(f"omega does not vanish at maturity {T}")
            if self.Omega is not None:
                if np.max(np.abs(self.Omega(xs, np.array([[T]]), T))) > tol:
                    raise DomainError(f"Omega does not vanish at maturity {T}")
                if np.any(~(self.Omega(xs, ts[None, :], T) > -1.0)):
                    raise DomainError("Omega must exceed -1")


def exponential_family(curve: YieldCurve, a=0.01, b: float = 0.5, c: float = 0.0,
                       brownian_dim: int | None = None) -> VolStructure:
    """Bundled test family with decaying volatility.

    ``omega_tT = -a (1 - e^{-b(T-t)}) / b`` and
    ``Omega_tT(x) = exp(-c x (1 - e^{-b(T-t)}) / b) - 1``: both vanish at
    maturity and follow the shape of an affine short-rate model.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    d = brownian_dim or a.size
    a = np.broadcast_to(a, (d,))
    if not b > 0:
        raise ConfigError("decay b must be positive")

    def dur(s, T):
        return -np.expm1(-b * (T - np.asarray(s, dtype=float))) / b

    def omega(s, T):
        return -dur(s, T)[..., None] * a

    def Omega(x, s, T):
        return np.expm1(-c * np.asarray(x, dtype=float) * dur(s, T))

    return VolStructure(curve, omega if np.any(a != 0) else None, Omega if c != 0 else None,
                        d, tilt=abs(c) / b)


# ---------------------------------------------------------------------------
# Brownian pieces with a maturity argument


def _brownian_two_time(brownian: BrownianBatch | None, vol: VolStructure, kappa, times,
                       maturity: Callable[[float], float], subtract_running: bool, n_paths: int):
    """Return (stochastic integral (P,T), |w|^2 sums (T,), kappa.w sums (T,)).

    The integrand at query time t is ``omega(s, maturity(t))`` minus
    ``omega(s, t)`` when ``subtract_running``.
    """
    times = np.atleast_1d(times)
    P = n_paths
    if vol.omega is None:
        return np.zeros((P, times.size)), np.zeros(times.size), np.zeros(times.size)
    if brownian is None:
        raise ConfigError("a Brownian path is required for nonzero omega")
    g = brownian.grid
    if np.any(times > g[-1] * (1 + 1e-12)):
        raise GridError("query time outside the Brownian grid")
    dt = np.diff(g)
    left = g[:-1]
    kap = time_fn(kappa, brownian.dim)(left) if kappa is not None else np.zeros((left.size, brownian.dim))
    stoch = np.zeros((P, times.size))
    qv = np.zeros(times.size)
    cross = np.zeros(times.size)
    for j, t in enumerate(times):
        frac = np.clip((t - left) / dt, 0.0, 1.0)
        w = vol.omega_at(left, maturity(t))
        if subtract_running:
            w = w - vol.omega_at(left, t)
        stoch[:, j] = np.einsum("pkd,kd->pk", brownian.increments, w) @ frac
        qv[j] = frac @ ((w * w).sum(axis=1) * dt)
        cross[j] = frac @ ((kap * w).sum(axis=1) * dt)
    return stoch, qv, cross


def _log1p_checked(v):
    v = np.asarray(v, dtype=float)
    if np.any(~(v > -1.0)):
        raise DomainError("1 + Omega is not positive at a realised jump")
    return np.log1p(v)


def _jump_pieces(vol: VolStructure, risk: RiskAversion, model: LevyModel, batch: JumpBatch,
                 times, maturity: Callable[[float], float], subtract_running: bool,
                 strict: bool, check: bool):
    """Return (jump sums of log(1+Omega) ratios (P,T), compensators (T,))."""
    times = np.atleast_1d(times)
    sums = np.zeros((batch.n_paths, times.size))
    comp = np.zeros(times.size)
    if vol.Omega is None:
        return sums, comp
    lam = risk.lam_fn() if risk.lam is not None else (lambda x, s: 0.0)
    tilt = max(vol.tilt, risk.tilt)
    brk = tuple(vol.time_breaks) + tuple(risk.time_breaks)
    for j, t in enumerate(times):
        T = maturity(t)

        def h(x, s, T=T, t=t):
            out = _log1p_checked(vol.Omega(x, s, T))
            if subtract_running:
                out = out - _log1p_checked(vol.Omega(x, s, t))
            return out

        def g(x, s, T=T, t=t):
            om = vol.Omega(x, s, T)
            if subtract_running:
                om = om - vol.Omega(x, s, t)
            return np.exp(-np.asarray(lam(x, s), dtype=float)) * om

        sums[:, j] = batch.jump_sum(h, [t], strict)[:, 0]
        if t > 0:
            comp[j] = compensator(model, g, [t], time_breaks=brk, tilt=tilt, check=check)[0]
    return sums, comp


def money_market_log_values(vol: VolStructure, risk: RiskAversion, model: LevyModel,
                            batch: JumpBatch, times, brownian: BrownianBatch | None = None,
                            strict: bool = False, check: bool = True) -> np.ndarray:
    """log B_t at ``times`` for every path in ``batch``."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    running = lambda t: t  # noqa: E731
    stoch, qv, cross = _brownian_two_time(brownian, vol, risk.kappa, times, running, False, batch.n_paths)
    sums, comp = _jump_pieces(vol, risk, model, batch, times, running, False, strict, check)
    det = -vol.curve.log_discount(times) - cross + 0.5 * qv + comp
    return det[None, :] - stoch - sums


def money_market_account_vol(vol: VolStructure, risk: RiskAversion, model: LevyModel,
                             jumps: JumpPath | JumpBatch, brownian: BrownianBatch | None = None,
                             grid: Sequence[float] | None = None) -> ScalarPath | PathBundle:
    """Money market account implied by the volatility structures; B_0 = 1."""
    grid = check_grid(grid if grid is not None else [0.0, jumps.horizon])
    if isinstance(jumps, JumpBatch):
        return PathBundle(grid, np.exp(money_market_log_values(vol, risk, model, jumps, grid, brownian)),
                          jumps.paths)
    batch = jumps.as_batch()
    ev = lambda t, strict: np.exp(money_market_log_values(vol, risk, model, batch, t, brownian, strict))  # noqa: E731
    return assemble_path(grid, jumps.times, ev, dict(kind="money_market"))


def bond_log_values(vol: VolStructure, risk: RiskAversion, model: LevyModel, batch: JumpBatch,
                    times, T: float, brownian: BrownianBatch | None = None, strict: bool = False,
                    check: bool = True) -> np.ndarray:
    """log P_tT at ``times`` (all below ``T``)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times >= T):
        raise DomainError("bond log-price requested at or after maturity")
    fixed = lambda t: T  # noqa: E731
    stoch, _, cross = _brownian_two_time(brownian, vol, risk.kappa, times, fixed, True, batch.n_paths)
    _, qv_T, _ = _brownian_two_time(brownian, vol, None, times, fixed, False, batch.n_paths)
    _, qv_t, _ = _brownian_two_time(brownian, vol, None, times, lambda t: t, False, batch.n_paths)
    sums, comp = _jump_pieces(vol, risk, model, batch, times, fixed, True, strict, check)
    det = np.log(vol.curve.forward_price(times, T)) + cross - 0.5 * (qv_T - qv_t) - comp
    return det[None, :] + stoch + sums


def discount_bond_vol(vol: VolStructure, risk: RiskAversion, model: LevyModel,
                      jumps: JumpPath | JumpBatch, T: float, brownian: BrownianBatch | None = None,
                      grid: Sequence[float] | None = None) -> ScalarPath | PathBundle:
    """Price of the unit bond maturing at ``T``; zero at and after maturity."""
    if not T > 0:
        raise ConfigError("maturity must be positive")
    grid = check_grid(grid if grid is not None else [0.0, jumps.horizon])

    def ev_batch(batch, t, strict):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros((batch.n_paths, t.size))
        live = t < T
        if np.any(live):
            out[:, live] = np.exp(bond_log_values(vol, risk, model, batch, t[live], T, brownian, strict))
        return out

    if isinstance(jumps, JumpBatch):
        return PathBundle(grid, ev_batch(jumps, grid, False), jumps.paths)
    batch = jumps.as_batch()
    return assemble_path(grid, jumps.times, lambda t, strict: ev_batch(batch, t, strict),
                         dict(kind="bond", maturity=T))
