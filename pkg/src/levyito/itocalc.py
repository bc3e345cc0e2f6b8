"""Lévy-Ito integrals, exponential SDEs, the exponential formula and the Ito map.

The processes handled here are

    Y_t = y0 + int alpha ds + int beta . dW
             + int int_{|x|<1} gamma dN~ + int int_{|x|>=1} delta dN,

with deterministic coefficients.  Jump terms are sums over realised
events; every compensator is a deterministic space-time integral computed
by quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .coeffs import is_zero, space_time_fn, time_fn
from .errors import ConfigError, DomainError, UnsupportedError
from .levy import JumpBatch, JumpPath, LevyModel
from .paths import BrownianBatch, PathBundle, ScalarPath, assemble_path, check_grid
from .quadrature import Antiderivative, check_agreement, gauss_legendre


# ---------------------------------------------------------------------------
# compensators


def space_time_density(model: LevyModel, g: Callable, region: str | None = None,
                       sampled: bool = True, tilt: float = 0.0, level: int = 0,
                       space_breaks: Sequence[float] = ()) -> Callable:
    """``h(s) = int_region g(x, s) nu(dx)`` as a vectorised function of time."""
    rule = model.rule(tilt, level, sampled, space_breaks).restrict(region)
    g = space_time_fn(g)

    def h(s):
        s = np.asarray(s, dtype=float)
        return rule.integrate_over_time(g, s.ravel()).reshape(s.shape)

    return h


def compensator_fn(model: LevyModel, g: Callable, horizon: float, region: str | None = None,
                   sampled: bool = True, time_breaks: Sequence[float] = (), tilt: float = 0.0,
                   check: bool = True, start: float = 0.0,
                   space_breaks: Sequence[float] = ()) -> Antiderivative:
    """Antiderivative ``t -> int_start^t int_region g(x, s) nu(dx) ds``."""
    h = space_time_density(model, g, region, sampled, tilt, 0, space_breaks)
    pts = sorted({start, horizon, *[b for b in time_breaks if start < b < horizon]})
    if check and not model._exact_rule():
        probe = np.linspace(start, horizon, 5)
        fine = space_time_density(model, g, region, sampled, tilt, 1, space_breaks)
        check_agreement(h(probe), fine(probe), f"compensator against {model.describe()}")
    return Antiderivative(h, pts, check=check)


def compensator(model: LevyModel, g: Callable, times, region: str | None = None,
                sampled: bool = True, time_breaks: Sequence[float] = (), tilt: float = 0.0,
                check: bool = True, start: float = 0.0) -> np.ndarray:
    """``int_start^t int_region g nu ds`` at each of ``times``."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    horizon = float(times.max()) if times.size else start
    if horizon <= start:
        return np.zeros(times.shape)
    brk = tuple(time_breaks) + tuple(times[(times > start) & (times < horizon)])
    return compensator_fn(model, g, horizon, region, sampled, brk, tilt, check, start)(times)


def time_integral(c, times, time_breaks: Sequence[float] = (), start: float = 0.0) -> np.ndarray:
    """``int_start^t c(s) ds`` for scalar time coefficients."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    val = getattr(c, "constant", None) if callable(c) else c
    if val is not None and np.ndim(val) == 0:
        return float(val) * (times - start)
    f = time_fn(c)
    horizon = float(times.max())
    if horizon <= start:
        return np.zeros(times.shape)
    pts = sorted({start, horizon, *[b for b in (*time_breaks, *times) if start < b < horizon]})
    return Antiderivative(f, pts)(times)


# ---------------------------------------------------------------------------
# coefficient bundle


@dataclass(frozen=True, eq=False)
class LevyItoCoefficients:
    """Deterministic coefficients of a Lévy-Ito process.

    Attributes
    ----------
    alpha : float or callable of t
    beta : array or callable of t returning shape (d,), optional
    gamma : callable (x, t), integrand on the small-jump shell
    delta : callable (x, t), integrand on the large-jump shell
    time_breaks : tuple of float
        Times where the coefficients are not smooth.
    """

    alpha: object = 0.0
    beta: object = None
    gamma: object = None
    delta: object = None
    time_breaks: tuple = ()

    @property
    def brownian_dim(self) -> int:
        if self.beta is None:
            return 0
        if callable(self.beta):
            return int(np.asarray(self.beta(np.zeros(1))).shape[-1])
        return int(np.atleast_1d(self.beta).size)

    def check_integrability(self, model: LevyModel, horizon: float) -> float:
        """Numerical value of int (|alpha| + |beta|^2 + int_{|x|<1} gamma^2 nu) ds."""
        a = time_fn(self.alpha)
        g = space_time_fn(self.gamma)
        pts = sorted({0.0, horizon, *[b for b in self.time_breaks if 0 < b < horizon]})
        total = Antiderivative(lambda s: np.abs(a(s)), pts)(horizon)
        if self.beta is not None:
            b = time_fn(self.beta, self.brownian_dim)
            total += Antiderivative(lambda s: (b(s) ** 2).sum(axis=-1), pts)(horizon)
        total += compensator(model, lambda x, t: g(x, t) ** 2, [horizon], "small",
                             time_breaks=self.time_breaks)[0]
        if not math.isfinite(total):
            raise ConfigError("coefficients fail the integrability condition")
        return float(total)


def _region_masks(sizes: np.ndarray, dimension: int):
    r = np.abs(sizes) if dimension == 1 else np.linalg.norm(sizes, axis=-1)
    return r < 1.0


def _shell_integrand(small_fn: Callable | None, large_fn: Callable | None, dimension: int) -> Callable:
    """Event integrand using ``small_fn`` on |x|<1 and ``large_fn`` elsewhere."""

    def h(x, s):
        small = _region_masks(x, dimension)
        out = np.zeros(small.shape)
        if small_fn is not None and np.any(small):
            out = np.where(small, np.broadcast_to(small_fn(x, s), small.shape), out)
        if large_fn is not None and np.any(~small):
            out = np.where(small, out, np.broadcast_to(large_fn(x, s), small.shape))
        return out

    return h


def levy_ito_values(coeffs: LevyItoCoefficients, batch: JumpBatch, model: LevyModel,
                    times, y0: float = 0.0, brownian: BrownianBatch | None = None,
                    strict: bool = False, check: bool = True) -> np.ndarray:
    """Values of Y at ``times`` for every path of ``batch``; shape (P, T)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = y0 + np.broadcast_to(time_integral(coeffs.alpha, times, coeffs.time_breaks), (batch.n_paths, times.size))
    out = np.array(out, dtype=float)
    if coeffs.beta is not None and not is_zero(coeffs.beta):
        if brownian is None:
            raise ConfigError("a Brownian path is required when beta is nonzero")
        out += brownian.integral(coeffs.beta, times)
    gam = None if coeffs.gamma is None else space_time_fn(coeffs.gamma)
    dlt = None if coeffs.delta is None else space_time_fn(coeffs.delta)
    if gam is not None or dlt is not None:
        out += batch.jump_sum(_shell_integrand(gam, dlt, model.dimension), times, strict)
    if gam is not None:
        out -= compensator(model, gam, times, "small", time_breaks=coeffs.time_breaks, check=check)[None, :]
    return out


def integrate_levy_ito(coeffs: LevyItoCoefficients, jumps: JumpPath | JumpBatch, model: LevyModel,
                       grid: Sequence[float], y0: float = 0.0,
                       brownian: BrownianBatch | None = None) -> ScalarPath | PathBundle:
    """Lévy-Ito integral on ``grid``.

    For a single :class:`JumpPath` the result is a :class:`ScalarPath` whose
    grid includes the jump times, with left limits stored; for a
    :class:`JumpBatch` a :class:`PathBundle` on ``grid``.
    """
    grid = check_grid(grid)
    if isinstance(jumps, JumpBatch):
        return PathBundle(grid, levy_ito_values(coeffs, jumps, model, grid, y0, brownian), jumps.paths)
    batch = jumps.as_batch()

    def ev(t, strict):
        return levy_ito_values(coeffs, batch, model, t, y0, brownian, strict)

    meta = dict(kind="levy_ito", coeffs=coeffs, model=model, jumps=jumps, brownian=brownian, y0=y0)
    return assemble_path(grid, jumps.times, ev, meta)


# ---------------------------------------------------------------------------
# exponential SDE


def exponential_log_values(mu, Gamma, Delta, batch: JumpBatch, model: LevyModel, times,
                           z0: float = 1.0, sigma=None, brownian: BrownianBatch | None = None,
                           time_breaks: Sequence[float] = (), strict: bool = False,
                           check: bool = True) -> np.ndarray:
    """log Z at ``times`` for dZ/Z- = mu dt + sigma.dW + Gamma dN~ (small) + Delta dN (large)."""
    if not z0 > 0:
        raise DomainError("z0 must be positive")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    P = batch.n_paths
    out = np.full((P, times.size), math.log(z0))
    out += time_integral(mu, times, time_breaks)[None, :]
    if sigma is not None and not is_zero(sigma):
        if brownian is None:
            raise ConfigError("a Brownian path is required when sigma is nonzero")
        out += brownian.integral(sigma, times) - 0.5 * brownian.quadratic_variation(sigma, times)[None, :]
    gam = None if Gamma is None else space_time_fn(Gamma)
    dlt = None if Delta is None else space_time_fn(Delta)

    def log1p_checked(fn):
        def h(x, s):
            v = np.asarray(fn(x, s), dtype=float)
            if np.any(~(v > -1.0)):
                raise DomainError("jump factor 1 + Gamma or 1 + Delta is not positive")
            return np.log1p(v)
        return h

    if gam is not None or dlt is not None:
        h = _shell_integrand(None if gam is None else log1p_checked(gam),
                             None if dlt is None else log1p_checked(dlt), model.dimension)
        out += batch.jump_sum(h, times, strict)
    if gam is not None:
        out -= compensator(model, gam, times, "small", time_breaks=time_breaks, check=check)[None, :]
    return out


def solve_exponential_sde(mu, Gamma, Delta, jumps: JumpPath | JumpBatch, model: LevyModel,
                          z0: float, grid: Sequence[float] | None = None, sigma=None,
                          brownian: BrownianBatch | None = None,
                          time_breaks: Sequence[float] = ()) -> ScalarPath | PathBundle:
    """Exact solution Z of the exponential Lévy-Ito SDE.

    log Z_t = log z0 + int mu ds + sum log(1 + Gamma) - int int_{|x|<1} Gamma nu ds
              + sum log(1 + Delta),
    the sums running over realised small and large jumps respectively.  An
    optional Brownian volatility ``sigma`` adds ``int sigma.dW - 1/2 int |sigma|^2 ds``.
    """
    grid = check_grid(grid if grid is not None else [0.0, jumps.horizon])
    if isinstance(jumps, JumpBatch):
        lv = exponential_log_values(mu, Gamma, Delta, jumps, model, grid, z0, sigma, brownian, time_breaks)
        return PathBundle(grid, np.exp(lv), jumps.paths)
    batch = jumps.as_batch()

    def ev(t, strict):
        return np.exp(exponential_log_values(mu, Gamma, Delta, batch, model, t, z0, sigma,
                                             brownian, time_breaks, strict))

    coeffs = exponential_log_coefficients(mu, Gamma, Delta, model, time_breaks)
    meta = dict(kind="exponential", coeffs=coeffs, model=model, jumps=jumps, brownian=brownian,
                y0=math.log(z0))
    return assemble_path(grid, jumps.times, ev, meta)


def exponential_log_coefficients(mu, Gamma, Delta, model: LevyModel,
                                 time_breaks: Sequence[float] = ()) -> LevyItoCoefficients:
    """Lévy-Ito coefficients of log Z for the exponential SDE (no Brownian part).

    alpha = mu + int_{|x|<1} (log(1+Gamma) - Gamma) nu, gamma = log(1+Gamma),
    delta = log(1+Delta).
    """
    gam = None if Gamma is None else space_time_fn(Gamma)
    dlt = None if Delta is None else space_time_fn(Delta)
    mu_f = time_fn(mu)
    if gam is None:
        alpha = mu
    else:
        conv = space_time_density(model, lambda x, s: np.log1p(gam(x, s)) - gam(x, s), "small")
        alpha = lambda s: mu_f(s) + conv(s)  # noqa: E731
    return LevyItoCoefficients(
        alpha=alpha,
        gamma=None if gam is None else (lambda x, s: np.log1p(gam(x, s))),
        delta=None if dlt is None else (lambda x, s: np.log1p(dlt(x, s))),
        time_breaks=tuple(time_breaks),
    )


def large_jump_drift(Delta, model: LevyModel, time_breaks: Sequence[float] = ()) -> Callable:
    """``mu(t) = -int_{|x|>=1} Delta nu``, the drift that makes Z a martingale."""
    dens = space_time_density(model, space_time_fn(Delta), "large")
    return lambda s: -dens(s)


def exponential_martingale(Gamma, Delta, jumps: JumpPath | JumpBatch, model: LevyModel,
                           z0: float = 1.0, grid: Sequence[float] | None = None,
                           time_breaks: Sequence[float] = ()) -> ScalarPath | PathBundle:
    """Exponential SDE with the large-jump drift compensated, so E[Z_t] = z0."""
    mu = large_jump_drift(Delta, model) if Delta is not None else 0.0
    return solve_exponential_sde(mu, Gamma, Delta, jumps, model, z0, grid, time_breaks=time_breaks)


# ---------------------------------------------------------------------------
# exponential formula


def exponential_formula_rhs(f, model: LevyModel, t0: float, t1: float,
                            time_breaks: Sequence[float] = (), tilt: float = 0.0,
                            check: bool = True) -> float:
    """exp of int_{t0}^{t1} int (e^f - 1 - f) nu(dx) ds."""
    if t1 < t0:
        raise ConfigError("t1 must not precede t0")
    if t1 == t0 or is_zero(f):
        return 1.0
    f = space_time_fn(f)
    g = lambda x, s: _exp_remainder(f(x, s))  # noqa: E731
    val = compensator(model, g, [t1], None, sampled=False, time_breaks=time_breaks,
                      tilt=tilt, check=check, start=t0)[0]
    return math.exp(val)


def _exp_remainder(v):
    v = np.asarray(v, dtype=float)
    return np.expm1(v) - v


def compensated_integral(f, batch: JumpBatch, model: LevyModel, t0: float, t1: float,
                         time_breaks: Sequence[float] = (), tilt: float = 0.0,
                         check: bool = True) -> np.ndarray:
    """Per-path ``int_{t0}^{t1} int f dN~`` over the simulated jumps."""
    f = space_time_fn(f)
    sums = batch.jump_sum(f, [t0, t1])
    comp = compensator(model, f, [t1], None, sampled=True, time_breaks=time_breaks,
                       tilt=tilt, check=check, start=t0)[0]
    return sums[:, 1] - sums[:, 0] - comp


# ---------------------------------------------------------------------------
# Ito map


@dataclass(frozen=True)
class ItoMap:
    """A twice-differentiable scalar map with its derivatives."""

    f: Callable
    df: Callable
    d2f: Callable
    name: str = "F"

    @classmethod
    def identity(cls) -> "ItoMap":
        return cls(lambda y: y, lambda y: np.ones_like(y), lambda y: np.zeros_like(y), "identity")

    @classmethod
    def exp(cls) -> "ItoMap":
        return cls(np.exp, np.exp, np.exp, "exp")

    @classmethod
    def log(cls) -> "ItoMap":
        def f(y):
            y = np.asarray(y, dtype=float)
            if np.any(~(y > 0)):
                raise DomainError("log applied to a nonpositive value")
            return np.log(y)
        return cls(f, lambda y: 1.0 / y, lambda y: -1.0 / (y * y), "log")

    @classmethod
    def square(cls) -> "ItoMap":
        return cls(lambda y: y * y, lambda y: 2.0 * y, lambda y: np.full_like(y, 2.0), "square")

    @classmethod
    def named(cls, name: str) -> "ItoMap":
        table = {"identity": cls.identity, "exp": cls.exp, "log": cls.log, "square": cls.square}
        try:
            return table[name]()
        except KeyError as exc:
            raise ConfigError(f"unknown map {name!r}") from exc


def apply_ito_transform(path: ScalarPath, F: ItoMap | str, order: int = 16) -> ScalarPath:
    """F(Y) assembled from the terms of the Ito formula.

    The path must come from :func:`integrate_levy_ito` or
    :func:`solve_exponential_sde` (its ``meta`` carries the coefficients).
    The drift term, the Ito correction on the small-jump shell and the
    compensated jump term are accumulated separately and reported in
    ``meta['terms']``.  With a Brownian part the continuous terms use
    left-point sums on the path grid and the result is approximate.
    """
    F = ItoMap.named(F) if isinstance(F, str) else F
    meta = path.meta
    if "coeffs" not in meta:
        raise ConfigError("path carries no coefficients; build it with integrate_levy_ito")
    if F.name == "identity":
        return ScalarPath(path.grid, path.values.copy(), path.jump_times, path.left_limits.copy(), meta)
    coeffs: LevyItoCoefficients = meta["coeffs"]
    model: LevyModel = meta["model"]
    jumps: JumpPath = meta["jumps"]
    if meta["kind"] == "exponential":
        y_grid = np.log(path.values)
        y_left = np.log(path.left_limits) if path.left_limits.size else path.left_limits
    else:
        y_grid, y_left = path.values, path.left_limits
    has_beta = coeffs.beta is not None and not is_zero(coeffs.beta)
    if has_beta and meta["brownian"] is None:
        raise ConfigError("missing Brownian path")

    grid = path.grid
    horizon = float(grid[-1])
    rule = model.rule(sampled=True).restrict("small")
    gam = None if coeffs.gamma is None else space_time_fn(coeffs.gamma)
    dlt = None if coeffs.delta is None else space_time_fn(coeffs.delta)
    alpha = time_fn(coeffs.alpha)
    brk = sorted({0.0, horizon, *[b for b in coeffs.time_breaks if 0 < b < horizon]})
    if gam is not None:
        c_gamma = space_time_density(model, gam, "small")
    else:
        c_gamma = lambda s: np.zeros(np.shape(s))  # noqa: E731
    drift = Antiderivative(lambda s: alpha(s) - c_gamma(s), brk)

    # value of Y at time s inside [a, b) given Y_a, for beta == 0
    x_nodes, w_nodes = gauss_legendre(order)
    a, b = grid[:-1], grid[1:]
    width = b - a
    s = a[:, None] + width[:, None] * x_nodes[None, :]
    if has_beta:
        ys = np.broadcast_to(y_grid[:-1, None], s.shape)
    else:
        ys = y_grid[:-1, None] + drift(s.ravel()).reshape(s.shape) - drift(a)[:, None]
    wts = width[:, None] * w_nodes[None, :]

    fp = F.df(ys)
    term_drift = (fp * alpha(s) * wts).sum(axis=1)
    term_corr = np.zeros(a.size)
    term_comp = np.zeros(a.size)
    if gam is not None and rule.size:
        xq = rule.space_nodes(2)
        gq = np.broadcast_to(gam(xq, s[None, :, :]), (rule.size,) + s.shape)
        y3 = ys[None, :, :]
        diff = F.f(y3 + gq) - F.f(y3)
        term_comp = -np.einsum("q,qkj,kj->k", rule.weights, diff, wts)
        term_corr = np.einsum("q,qkj,kj->k", rule.weights, diff - F.df(y3) * gq, wts)
    term_brown = np.zeros(a.size)
    term_qv = np.zeros(a.size)
    if has_beta:
        bw = meta["brownian"]
        wb = bw.integral(coeffs.beta, grid)[0]
        term_brown = F.df(y_grid[:-1]) * np.diff(wb)
        qv = bw.quadratic_variation(coeffs.beta, grid)
        term_qv = 0.5 * F.d2f(y_grid[:-1]) * np.diff(qv)

    # realised jumps at the right end of each interval
    term_jump = np.zeros(a.size)
    if jumps.count:
        idx = np.searchsorted(grid, jumps.times) - 1
        yl = y_left
        small = _region_masks(jumps.sizes, model.dimension)
        inc = np.zeros(jumps.count)
        if gam is not None:
            gv = np.broadcast_to(gam(jumps.sizes, jumps.times), small.shape)
            inc = np.where(small, F.f(yl + gv) - F.f(yl), inc)
        if dlt is not None:
            dv = np.broadcast_to(dlt(jumps.sizes, jumps.times), small.shape)
            inc = np.where(small, inc, F.f(yl + dv) - F.f(yl))
        np.add.at(term_jump, idx, inc)

    steps = term_drift + term_corr + term_comp + term_jump + term_brown + term_qv
    y0 = y_grid[0]
    vals = F.f(np.asarray(y0)) + np.concatenate([[0.0], np.cumsum(steps)])
    left = vals[np.searchsorted(grid, jumps.times)] - (
        term_jump[np.searchsorted(grid, jumps.times) - 1] if jumps.count else 0.0)
    terms = dict(drift=term_drift, correction=term_corr, compensator=term_comp,
                 jumps=term_jump, brownian=term_brown, quadratic=term_qv)
    out_meta = dict(meta, kind="ito_transform", source=path, terms=terms, map=F.name)
    return ScalarPath(grid, vals, path.jump_times, np.atleast_1d(left), out_meta)


__all__ = [
    "ItoMap",
    "LevyItoCoefficients",
    "apply_ito_transform",
    "compensated_integral",
    "compensator",
    "compensator_fn",
    "exponential_formula_rhs",
    "exponential_log_values",
    "exponential_martingale",
    "integrate_levy_ito",
    "levy_ito_values",
    "solve_exponential_sde",
    "space_time_density",
    "time_integral",
]
