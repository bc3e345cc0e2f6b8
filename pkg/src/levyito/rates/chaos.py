"""Second-order chaos interest-rate models.

In the factorizable case the pricing kernel is

    pi_t = A_t + B_t M_t + C_t (M_t^2 - Q_t),

with ``M_t = int int gamma dN~`` and ``Q_t = int int gamma^2 nu ds``.  The
coefficients are tail integrals

    A_t = int_t^inf [ |phi|^2 + |beta|^2 h_s ] ds,  B_t = 2 int_t^inf <phi, beta> ds,
    C_t = int_t^inf |beta|^2 ds,

where ``|g|^2`` means ``int g^2 nu(dx)`` and ``h_s = Q_s``.  Tails beyond
the cap ``H`` are integrated with doubling panels until negligible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from ..coeffs import is_zero, space_time_fn
from ..errors import ConfigError, CurveError, PositivityError, QuadratureError
from ..itocalc import compensator_fn, space_time_density
from ..levy import JumpBatch, JumpPath, LevyModel
from ..mc import Estimate, McConfig, collect, estimate
from ..quadrature import (Antiderivative, check_agreement, gauss_legendre, geometric_breaks,
                          integrate_to_infinity, subdivide)
from .curve import YieldCurve

DEFAULT_CAP = 60.0
_FAR_DOUBLINGS = 14
_CHUNK = 100_000
# path index reserved for the conditioning prefix in nested simulations
PREFIX_PATH = 2**63 - 1
# left end of the piece-integral tables when conditioning at t = 0
_FIRST_NODE = 1e-9


class _Cumulative:
    """``s -> int_0^s rho(u) du`` for all s >= 0, saturating far beyond the cap."""

    def __init__(self, rho: Callable, cap: float, breaks: Sequence[float] = ()):
        head = subdivide(sorted({0.0, cap, *[b for b in breaks if 0 < b < cap]}), 1.0)
        far = cap * 2.0 ** np.arange(1, _FAR_DOUBLINGS + 1)
        self.ant = Antiderivative(rho, np.concatenate([head, far]), max_width=np.inf)
        self.limit = float(self.ant.cumulative[-1])

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        flat = np.minimum(s.ravel(), self.ant.upper)
        out = np.empty(flat.size)
        for lo in range(0, flat.size, _CHUNK):
            out[lo:lo + _CHUNK] = self.ant(flat[lo:lo + _CHUNK])
        return out.reshape(s.shape)


def _hermite(rho: Callable, pts: Sequence[float], grade0: bool = False, per_panel: int = 32):
    """Cubic Hermite table of ``s -> int_{pts[0]}^s rho``.

    Values come from Gauss-Legendre panel sums and slopes from ``rho``
    itself, so the table is accurate to O(width^4) between nodes.
    """
    pts = np.asarray(pts, dtype=float)
    nodes = np.unique(np.concatenate([np.linspace(a, b, per_panel + 1) for a, b in zip(pts[:-1], pts[1:])]))
    ant = Antiderivative(rho, pts, grade0=grade0, max_width=np.inf)
    vals = np.asarray(ant(nodes), dtype=float)
    ders = np.asarray(rho(nodes), dtype=float)
    if grade0 and not np.isfinite(ders[0]):
        ders[0] = ders[1]
    return CubicHermiteSpline(nodes, vals, ders)


def _pts(lo: float, hi: float, breaks: Sequence[float], extra: Sequence[float] = ()) -> list:
    pts = {lo, hi, *[b for b in (*breaks, *extra) if lo < b < hi]}
    pts.update(float(k) for k in range(int(math.floor(lo)) + 1, int(math.ceil(hi))))
    if 0 < lo < 1:
        pts.update(float(b) for b in geometric_breaks(lo, min(1.0, hi)))
    return sorted(pts)


def tail_integral(rho: Callable, t, cap: float, breaks: Sequence[float] = ()) -> np.ndarray:
    """``int_t^inf rho(s) ds`` for each entry of ``t``.

    Raises QuadratureError when the integral does not converge at the
    lower end (for instance a 1/s singularity at t = 0).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t.size)
    beyond = integrate_to_infinity(rho, cap, cap, breaks)
    inner = t < cap
    if np.any(inner):
        lo = float(t[inner].min())
        ant = Antiderivative(rho, _pts(lo, cap, breaks, t[inner]), grade0=(lo == 0.0))
        out[inner] = ant(cap) - ant(t[inner]) + beyond
    for i in np.flatnonzero(~inner):
        out[i] = integrate_to_infinity(rho, t[i], t[i], breaks)
    return out


# ---------------------------------------------------------------------------
# specification


@dataclass(frozen=True, eq=False)
class ChaosSpec:
    """Factorizable second-order chaos coefficients.

    Attributes
    ----------
    phi, beta, gamma : float or callable (x, s)
        First-chaos integrand and the two factors of the second-chaos
        integrand ``phi_{s s1}(x, x1) = beta_s(x) gamma_{s1}(x1)``.
    model : LevyModel
    horizon_cap : float
        Time H beyond which tail integrals switch to doubling panels.
    time_breaks : tuple
        Kinks of the coefficients in time.
    """

    phi: object
    beta: object
    gamma: object
    model: LevyModel
    horizon_cap: float = DEFAULT_CAP
    time_breaks: tuple = ()
    tilt: float = 0.0
    meta: dict = field(default_factory=dict, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.horizon_cap > 0:
            raise ConfigError("horizon_cap must be positive")

    @property
    def phi_fn(self):
        return space_time_fn(self.phi)

    @property
    def beta_fn(self):
        return space_time_fn(self.beta)

    @property
    def gamma_fn(self):
        return space_time_fn(self.gamma)

    def density(self, which: str) -> Callable:
        """Time function ``int g(x, s) nu(dx)`` for g in phi2, beta2, phibeta, gamma2."""
        if which not in self._cache:
            ph, be, ga = self.phi_fn, self.beta_fn, self.gamma_fn
            g = {
                "phi2": lambda x, s: ph(x, s) ** 2,
                "beta2": lambda x, s: be(x, s) ** 2,
                "phibeta": lambda x, s: ph(x, s) * be(x, s),
                "gamma2": lambda x, s: ga(x, s) ** 2,
            }[which]
            self._cache[which] = space_time_density(self.model, g, sampled=False, tilt=self.tilt)
        return self._cache[which]

    @property
    def h(self) -> _Cumulative:
        """h_s = int_0^s int gamma^2 nu ds1."""
        if "h" not in self._cache:
            self._cache["h"] = _Cumulative(self.density("gamma2"), self.horizon_cap, self.time_breaks)
        return self._cache["h"]

    def phi2(self, s, x, s1, x1):
        return self.beta_fn(x, s) * self.gamma_fn(x1, s1)

    def check(self) -> dict:
        """Square-integrability on [0, inf) with the tail beyond H reported."""
        cap, brk = self.horizon_cap, self.time_breaks
        first = float(tail_integral(self.density("phi2"), [0.0], cap, brk)[0])
        h = self.h
        second = float(tail_integral(lambda s: self.density("beta2")(s) * h(s), [0.0], cap, brk)[0])
        if not (math.isfinite(first) and math.isfinite(second)):
            raise QuadratureError("chaos coefficients are not square integrable")
        return {"first_chaos": first, "second_chaos": second, "h_limit": h.limit}


# ---------------------------------------------------------------------------
# A, B, C


@dataclass(frozen=True, eq=False)
class AbcCoefficients:
    """Deterministic coefficients of the factorizable kernel.

    ``a``, ``b``, ``c`` are the densities with A_t = int_t^inf a, and so on;
    ``scale`` divides all three (set by :meth:`normalized`).
    """

    spec: ChaosSpec
    scale: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False)

    def a(self, s):
        h = self.spec.h
        return (self.spec.density("phi2")(s) + self.spec.density("beta2")(s) * h(s)) / self.scale

    def b(self, s):
        return 2.0 * self.spec.density("phibeta")(s) / self.scale

    def c(self, s):
        return self.spec.density("beta2")(s) / self.scale

    def _tail(self, which: str, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty(t.size)
        todo = []
        for i, v in enumerate(t):
            key = (which, float(v))
            if key in self._cache:
                out[i] = self._cache[key]
            else:
                todo.append(i)
        if todo:
            rho = getattr(self, which)
            if which == "b" and is_zero(self.spec.beta):
                vals = np.zeros(len(todo))
            elif which == "c" and is_zero(self.spec.beta):
                vals = np.zeros(len(todo))
            else:
                vals = np.empty(len(todo))
                tt = t[todo]
                pos = tt > 0
                if np.any(pos):
                    vals[pos] = tail_integral(rho, tt[pos], self.spec.horizon_cap, self.spec.time_breaks)
                if np.any(~pos):
                    try:
                        vals[~pos] = tail_integral(rho, [0.0], self.spec.horizon_cap, self.spec.time_breaks)[0]
                    except QuadratureError:
                        # the density is not integrable at zero (C_0 of a calibrated model)
                        vals[~pos] = math.inf
            for i, v in zip(todo, vals):
                self._cache[(which, float(t[i]))] = float(v)
                out[i] = v
        return out

    def A(self, t) -> np.ndarray:
        return self._tail("a", t)

    def B(self, t) -> np.ndarray:
        return self._tail("b", t)

    def C(self, t) -> np.ndarray:
        return self._tail("c", t)

    def normalized(self) -> "AbcCoefficients":
        """Rescaled so that A_0 = 1."""
        return AbcCoefficients(self.spec, self.scale * float(self.A(0.0)[0]))

    def tail_report(self) -> dict:
        """Contributions beyond the cap, relative to A_0."""
        H = self.spec.horizon_cap
        a0 = float(self.A(0.0)[0])
        return {"A_beyond_cap": float(self.A(H)[0]) / a0, "C_beyond_cap": float(self.C(H)[0]) / a0}


def compute_abc(spec: ChaosSpec) -> AbcCoefficients:
    """Coefficients A, B, C as lazily evaluated tail integrals."""
    return AbcCoefficients(spec)


# ---------------------------------------------------------------------------
# martingale state


@dataclass(frozen=True, eq=False)
class ChaosState:
    """M and Q on a grid.

    ``M`` has shape (P, T) for a batch and (T,) for a single path; ``Q`` is
    deterministic with shape (T,).  ``J`` holds the raw jump sums.
    """

    times: np.ndarray
    M: np.ndarray
    Q: np.ndarray
    J: np.ndarray

    def index(self, t: float) -> int:
        i = int(np.searchsorted(self.times, t))
        if i >= self.times.size or abs(self.times[i] - t) > 1e-12 * max(1.0, abs(t)):
            raise ConfigError(f"time {t} is not on the state grid")
        return i

    def at(self, t: float):
        i = self.index(t)
        return self.M[..., i], self.Q[i]


def _state_parts(spec: ChaosSpec, batch: JumpBatch, times, check: bool = True):
    times = np.atleast_1d(np.asarray(times, dtype=float))
    ga = spec.gamma_fn
    J = batch.jump_sum(ga, times)
    horizon = float(times.max())
    if horizon <= 0:
        return J, np.zeros(times.size), np.zeros(times.size)
    brk = tuple(spec.time_breaks) + tuple(times)
    K = compensator_fn(spec.model, ga, horizon, time_breaks=brk, tilt=spec.tilt, check=check)(times)
    Q = compensator_fn(spec.model, lambda x, s: ga(x, s) ** 2, horizon, time_breaks=brk,
                       tilt=spec.tilt, check=check)(times)
    return J, K, Q


def simulate_chaos_state(spec: ChaosSpec, jumps: JumpPath | JumpBatch,
                         grid: Sequence[float] | None = None) -> ChaosState:
    """M_t = int int gamma dN~ and Q_t = int int gamma^2 nu ds on ``grid``."""
    times = np.asarray(grid if grid is not None else [0.0, jumps.horizon], dtype=float)
    batch = jumps.as_batch() if isinstance(jumps, JumpPath) else jumps
    J, K, Q = _state_parts(spec, batch, times)
    M = J - K[None, :]
    if isinstance(jumps, JumpPath):
        return ChaosState(times, M[0], Q, J[0])
    return ChaosState(times, M, Q, J)


def _kernel_value(abc: AbcCoefficients, M, Q: float, t: float):
    M = np.asarray(M, dtype=float)
    out = abc.A(t)[0] + abc.B(t)[0] * M
    if t > 0:
        out = out + abc.C(t)[0] * (M * M - Q)
    return out


def positivity_fraction(abc: AbcCoefficients, state: ChaosState, t: float) -> float:
    M, Q = state.at(t)
    return float(np.mean(_kernel_value(abc, M, Q, t) <= 0))


def pricing_kernel_chaos(abc: AbcCoefficients, state: ChaosState, t: float):
    """pi_t = A_t + B_t M_t + C_t (M_t^2 - Q_t); raises PositivityError if not positive."""
    M, Q = state.at(t)
    pi = _kernel_value(abc, M, Q, t)
    bad = ~(pi > 0)
    if np.any(bad):
        raise PositivityError(f"pricing kernel not positive on {np.mean(bad):.3%} of paths at t={t}")
    return float(pi) if np.ndim(pi) == 0 else pi


def conditional_kernel(abc: AbcCoefficients, M, Q: float, T: float, t: float):
    """E_t[pi_T] = A_T + B_T M_t + C_T (M_t^2 - Q_t)."""
    M = np.asarray(M, dtype=float)
    out = abc.A(T)[0] + abc.B(T)[0] * M
    if t > 0:
        out = out + abc.C(T)[0] * (M * M - Q)
    return out


def bond_price_chaos(abc: AbcCoefficients, state: ChaosState, t: float, T: float):
    """Ratio of the conditional kernel to the kernel; zero for t >= T."""
    M, Q = state.at(t)
    if t >= T:
        return 0.0 if np.ndim(M) == 0 else np.zeros(np.shape(M))
    num = conditional_kernel(abc, M, Q, T, t)
    den = _kernel_value(abc, M, Q, t)
    if np.any(~(num > 0)) or np.any(~(den > 0)):
        raise PositivityError(f"bond price polynomial not positive at t={t}, T={T}")
    out = num / den
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# general second-order kernel


def factorizable_phi2(spec: ChaosSpec) -> Callable:
    return spec.phi2


def _outer_rule(t: float, cap: float, breaks: Sequence[float], order: int, doublings: int = 12):
    head = subdivide(_pts(t, cap, breaks), 1.0) if t < cap else np.array([t])
    lo = max(t, cap)
    tail = [lo]
    width = max(1.0, lo)
    for _ in range(doublings):
        tail.extend(np.linspace(tail[-1], tail[-1] + width, 5)[1:])
        width *= 2
    b = np.unique(np.concatenate([head, tail]))
    x, w = gauss_legendre(order)
    a, d = b[:-1], np.diff(b)
    nodes = a[:, None] + d[:, None] * x[None, :]
    weights = d[:, None] * w[None, :]
    return b, nodes, weights


def _x_axes(nodes: np.ndarray, dimension: int, pos: int, ndim: int) -> np.ndarray:
    """Place the node axis at ``pos`` of an ``ndim``-axis array."""
    shape = [1] * ndim
    shape[pos] = nodes.shape[0]
    if dimension == 1:
        return nodes.reshape(shape)
    return nodes.reshape(shape + [dimension])


def _second_order_values(phi, phi2, model: LevyModel, batch: JumpBatch, t: float, cap: float,
                         breaks: Sequence[float], tilt: float, order: int, chunk: int = 64):
    phi = space_time_fn(phi)
    full = model.rule(tilt, 0, sampled=False)
    samp = model.rule(tilt, 0, sampled=True)
    dim = model.dimension
    b, nodes, weights = _outer_rule(t, cap, breaks, order)
    n_pan = nodes.shape[0]
    s_all, w_all = nodes.ravel(), weights.ravel()
    pan_of = np.repeat(np.arange(n_pan), order)
    X = full.nodes
    wx = full.weights
    P = batch.n_paths

    # inner compensator nodes on [0, t]
    if t > 0:
        ib = subdivide(sorted({0.0, t, *[v for v in breaks if 0 < v < t]}), 1.0)
        xi, wi = gauss_legendre(order)
        s1 = (ib[:-1, None] + np.diff(ib)[:, None] * xi[None, :]).ravel()
        w1 = (np.diff(ib)[:, None] * wi[None, :]).ravel()
    else:
        s1 = w1 = np.empty(0)

    ev_t, ev_x = batch.times, batch.sizes
    keep = ev_t <= t
    ev_t, ev_x = ev_t[keep], ev_x[keep]
    owner = batch.owner[keep]
    counts = np.bincount(owner, minlength=P)
    offs = np.concatenate([[0], np.cumsum(counts)])

    total = np.zeros(P)
    det_total = 0.0
    x_out4 = _x_axes(X, dim, 1, 4)
    for lo in range(0, s_all.size, chunk):
        s = s_all[lo:lo + chunk]
        ws = w_all[lo:lo + chunk]
        S = s.size
        s4 = s.reshape(S, 1, 1, 1)
        # realised jump part, shape (S, N, E)
        if ev_t.size:
            vals = np.broadcast_to(phi2(s4, x_out4, ev_t.reshape(1, 1, -1, 1),
                                        _x_axes(ev_x, dim, 2, 4)), (S, X.shape[0], ev_t.size, 1))[..., 0]
            cs = np.concatenate([np.zeros((S, X.shape[0], 1)), np.cumsum(vals, axis=2)], axis=2)
            I = cs[:, :, offs[1:]] - cs[:, :, offs[:-1]]
        else:
            I = np.zeros((S, X.shape[0], P))
        if s1.size:
            g = np.broadcast_to(phi2(s4, x_out4, s1.reshape(1, 1, -1, 1), _x_axes(samp.nodes, dim, 3, 4)),
                                (S, X.shape[0], s1.size, samp.size))
            comp = np.einsum("snkq,k,q->sn", g, w1, samp.weights)
            I = I - comp[:, :, None]
        f = np.broadcast_to(phi(_x_axes(X, dim, 1, 2), s.reshape(S, 1)), (S, X.shape[0]))
        sq = (f[:, :, None] + I) ** 2
        total += np.einsum("snp,n,s->p", sq, wx, ws)

        # deterministic part: int_t^s int phi2^2 nu nu ds1
        V = np.zeros(S)
        pan = pan_of[lo:lo + chunk]
        for i in range(S):
            j = pan[i]
            prior = (pan_of < j) & (s_all >= t)
            xi, wi = gauss_legendre(order)
            part_s = b[j] + (s[i] - b[j]) * xi
            part_w = (s[i] - b[j]) * wi
            s1v = np.concatenate([s_all[prior], part_s])
            w1v = np.concatenate([w_all[prior], part_w])
            g2 = np.broadcast_to(phi2(s[i], _x_axes(X, dim, 0, 3), s1v.reshape(1, -1, 1),
                                      _x_axes(X, dim, 2, 3)), (X.shape[0], s1v.size, X.shape[0])) ** 2
            V[i] = np.einsum("nkq,n,k,q->", g2, wx, w1v, wx)
        det_total += float(ws @ V)
    return total + det_total


def pricing_kernel_second_order(phi, phi2, model: LevyModel, jumps: JumpPath | JumpBatch, t: float,
                                cap: float = DEFAULT_CAP, time_breaks: Sequence[float] = (),
                                tilt: float = 0.0, check: bool = True):
    """General second-order chaos kernel given the events up to ``t``.

    ``phi(x, s)`` is the first-chaos integrand and ``phi2(s, x, s1, x1)``
    the second-chaos integrand (for s1 <= s).  Integrals over [t, inf) use
    panels up to ``cap`` followed by doubling panels.
    """
    batch = jumps.as_batch() if isinstance(jumps, JumpPath) else jumps
    val = _second_order_values(phi, phi2, model, batch, t, cap, time_breaks, tilt, 16)
    if check:
        fine = _second_order_values(phi, phi2, model, batch, t, cap, time_breaks, tilt, 24)
        check_agreement(val, fine, "second-order kernel quadrature")
    return float(val[0]) if isinstance(jumps, JumpPath) else val


def pricing_kernel_second_order_mc(phi, phi2, model: LevyModel, t: float, mc: McConfig,
                                   cap: float = DEFAULT_CAP, time_breaks: Sequence[float] = (),
                                   tilt: float = 0.0) -> Estimate:
    """Average of the general kernel over simulated histories up to ``t``.

    The mean estimates E[pi_t], which for factorizable inputs is A_t.
    """
    if t <= 0:
        return Estimate(pricing_kernel_second_order(phi, phi2, model, JumpPath(1.0, np.empty(0),
                        np.empty((0,) if model.dimension == 1 else (0, model.dimension))), 0.0, cap,
                        time_breaks, tilt), 0.0, mc.n_paths)

    def fn(rng, paths):
        batch = model.sample_batch(t, rng, paths)
        return pricing_kernel_second_order(phi, phi2, model, batch, t, cap, time_breaks, tilt, check=False)

    return estimate(collect(mc, fn))


# ---------------------------------------------------------------------------
# calibration


def default_gamma(decay: float = 0.5, dimension: int = 1) -> Callable:
    """gamma_s(x) = e^{-decay s} times x clipped to the unit ball (|x| ∧ 1 for n > 1)."""

    def gamma(x, s):
        x = np.asarray(x, dtype=float)
        core = np.clip(x, -1.0, 1.0) if dimension == 1 else np.minimum(np.linalg.norm(x, axis=-1), 1.0)
        return np.exp(-decay * np.asarray(s, dtype=float)) * core

    gamma.decay = decay
    return gamma


def default_split(model: LevyModel, p: float = 0.5, tilt: float = 0.0):
    """p_t(x) = p (1 ∧ |x|^2) / w and q_t(x) = (1 - p)(1 ∧ |x|^2) / w."""
    if not 0 <= p <= 1:
        raise ConfigError("split weight p must lie in [0, 1]")

    def core(x):
        x = np.asarray(x, dtype=float)
        r2 = x * x if model.dimension == 1 else np.sum(x * x, axis=-1)
        return np.minimum(r2, 1.0)

    w = model.nu_integral(lambda x, t: core(x), tilt=tilt)
    if not (w > 0 and math.isfinite(w)):
        raise ConfigError("the measure gives zero weight to 1 ∧ |x|^2")
    return (lambda x, t: p * core(x) / w + 0.0 * np.asarray(t)), (lambda x, t: (1 - p) * core(x) / w + 0.0 * np.asarray(t))


def calibrate_to_curve(curve: YieldCurve, model: LevyModel, gamma=None, split=None,
                       horizon_cap: float = DEFAULT_CAP, tilt: float = 0.0,
                       check_times: Sequence[float] | None = None) -> ChaosSpec:
    """Chaos coefficients that reproduce ``curve`` as A_t / A_0.

    ``phi^2 = f P p`` and ``beta^2 = f P q / h`` with ``f`` the forward,
    ``P`` the discount function and ``h_t = int_0^t int gamma^2 nu``.
    """
    gamma = gamma if gamma is not None else default_gamma(dimension=model.dimension)
    p_fn, q_fn = split if split is not None else default_split(model, tilt=tilt)
    p_fn, q_fn = space_time_fn(p_fn), space_time_fn(q_fn)
    if np.any(curve.forward(curve._knots) < 0):
        raise CurveError("implied forward rates must be nonnegative")
    ts = np.asarray(check_times if check_times is not None else
                    sorted({0.0, *curve.breaks, 0.5 * curve.tenors[-1], 2 * curve.tenors[-1]}))
    rule = model.rule(tilt, 0, sampled=False)
    xs = rule.space_nodes(1)
    pv = np.broadcast_to(p_fn(xs, ts[None, :]), (rule.size, ts.size))
    qv = np.broadcast_to(q_fn(xs, ts[None, :]), (rule.size, ts.size))
    if np.any(pv < 0) or np.any(qv < 0):
        raise ConfigError("split functions must be nonnegative")
    mass = rule.weights @ (pv + qv)
    if np.max(np.abs(mass - 1.0)) > 1e-10:
        raise ConfigError(f"split violates the unit-mass condition (max error {np.max(np.abs(mass - 1)):.2e})")

    breaks = curve.breaks
    base = ChaosSpec(0.0, 0.0, gamma, model, horizon_cap, breaks, tilt)
    h = base.h
    if not (h.limit > 0 and math.isfinite(h.limit)):
        raise ConfigError("gamma must give 0 < h_t with a finite limit")

    def weight(s):
        s = np.asarray(s, dtype=float)
        return curve.forward(s) * curve.discount(s)

    def phi(x, s):
        return np.sqrt(weight(s) * p_fn(x, s))

    def beta(x, s):
        hs = h(s)
        return np.sqrt(weight(s) * q_fn(x, s) / hs)

    spec = ChaosSpec(phi, beta, gamma, model, horizon_cap, breaks, tilt,
                     meta=dict(curve=curve, split=(p_fn, q_fn)))
    spec._cache["h"] = h
    spec._cache["gamma2"] = base.density("gamma2")
    return spec


def calibration_residual(spec: ChaosSpec, curve: YieldCurve, tenors: Sequence[float] | None = None) -> float:
    """max |A_t / A_0 - P(0, t)| over ``tenors`` (default: curve tenors)."""
    abc = compute_abc(spec)
    t = np.asarray(tenors if tenors is not None else curve.tenors, dtype=float)
    return float(np.max(np.abs(abc.A(t) / abc.A(0.0)[0] - curve.discount(t))))


# ---------------------------------------------------------------------------
# nested simulation: FRN identity and conditional variance


def _prefix(spec: ChaosSpec, t: float, rng, prefix: JumpPath | None) -> JumpBatch:
    if t <= 0:
        return JumpBatch(max(t, 1.0), np.array([PREFIX_PATH], dtype=np.int64), np.array([0, 0]), np.empty(0),
                         np.empty((0,) if spec.model.dimension == 1 else (0, spec.model.dimension)))
    if prefix is not None:
        return prefix.restrict(t).as_batch()
    return spec.model.sample_batch(t, rng, [PREFIX_PATH])


def _continuation(spec: ChaosSpec, t: float, rng, paths) -> tuple[JumpBatch, np.ndarray]:
    """Events on (t, H] with absolute times (time-homogeneous measure)."""
    span = spec.horizon_cap - t
    batch = spec.model.sample_batch(span, rng, paths)
    return batch, batch.times + t


def _piece_ends(owner, t_abs, n_paths, H):
    """End of the constant piece after each event, and each path's first event time."""
    nxt = np.full(t_abs.shape, H)
    first_time = np.full(n_paths, H)
    if t_abs.size:
        same = owner[1:] == owner[:-1]
        nxt[:-1][same] = t_abs[1:][same]
        first_idx = np.flatnonzero(np.concatenate([[True], ~same]))
        first_time[owner[first_idx]] = t_abs[first_idx]
    return first_time, nxt


def frn_identity_check(spec: ChaosSpec, t: float, mc: McConfig, prefix: JumpPath | None = None,
                       abc: AbcCoefficients | None = None) -> Estimate:
    """Monte Carlo estimate of (1 / pi_t) E_t[int_t^inf r_s pi_s ds], expected to be 1.

    Continuations after ``t`` are simulated to the cap H; beyond H the
    conditional expectation of the remaining flow is pi_H.  Between events
    ``r pi = a + b M + c (M^2 - Q)`` is integrated exactly through
    antiderivatives of the coefficient densities.
    """
    abc = abc or compute_abc(spec)
    H = spec.horizon_cap
    if not 0 <= t < H:
        raise ConfigError("t must lie in [0, horizon_cap)")
    rng = mc.rng
    ga = spec.gamma_fn
    brk = spec.time_breaks
    pre = _prefix(spec, t, rng, prefix)
    J_t = float(pre.jump_sum(ga, [t])[0, 0]) if t > 0 else 0.0
    Kf = compensator_fn(spec.model, ga, H, time_breaks=brk, tilt=spec.tilt)
    Qf = compensator_fn(spec.model, lambda x, s: ga(x, s) ** 2, H, time_breaks=brk, tilt=spec.tilt)
    K_t = float(Kf(t)) if t > 0 else 0.0
    Q_t = float(Qf(t)) if t > 0 else 0.0
    M_t = J_t - K_t
    pi_t = float(_kernel_value(abc, M_t, Q_t, t))
    if not pi_t > 0:
        raise PositivityError("pricing kernel not positive at the conditioning time")

    a_int = float(abc.A(t)[0] - abc.A(H)[0])
    grade = t == 0.0
    pts = _pts(t, H, brk)
    bK = Antiderivative(lambda s: abc.b(s) * Kf(s), pts, grade0=grade)
    cKQ = Antiderivative(lambda s: abc.c(s) * (Kf(s) ** 2 - Qf(s)), pts, grade0=grade)
    det = a_int - float(bK(H)) + float(cKQ(H))
    A_H, B_H, C_H = float(abc.A(H)[0]), float(abc.B(H)[0]), float(abc.C(H)[0])
    K_H, Q_H = float(Kf(H)), float(Qf(H))
    # tables for piece integrals; near t = 0 they start at a small positive time
    # because c ~ 1/s there, and pieces before the first event carry J = 0
    lo = t if t > 0 else _FIRST_NODE
    tab = _pts(lo, H, brk)
    Gb = _hermite(abc.b, tab)
    Gc = _hermite(abc.c, tab)
    GcK = _hermite(lambda s: abc.c(s) * Kf(s), tab)

    def fn(rng_, paths):
        batch, t_abs = _continuation(spec, t, rng_, paths)
        P = batch.n_paths
        owner = batch.owner
        g = np.asarray(np.broadcast_to(ga(batch.sizes, t_abs), t_abs.shape), dtype=float)
        csum = np.cumsum(g)
        starts = batch.offsets[:-1]
        base = np.concatenate([[0.0], csum])[starts]
        J_after = J_t + csum - base[owner] if g.size else g
        first_time, nxt = _piece_ends(owner, t_abs, P, H)
        J_H = J_t + np.bincount(owner, weights=g, minlength=P)

        out = np.full(P, det)
        # pieces starting at events
        if t_abs.size:
            db = Gb(nxt) - Gb(t_abs)
            dc = Gc(nxt) - Gc(t_abs)
            dcK = GcK(nxt) - GcK(t_abs)
            piece = J_after * db + J_after ** 2 * dc - 2 * J_after * dcK
            out += np.bincount(owner, weights=piece, minlength=P)
        # first piece [t, first event) carries J_t, which is zero when t = 0
        if J_t != 0.0:
            out += J_t * (Gb(first_time) - Gb(t)) + J_t ** 2 * (Gc(first_time) - Gc(t)) \
                - 2 * J_t * (GcK(first_time) - GcK(t))
        M_H = J_H - K_H
        pi_H = A_H + B_H * M_H + C_H * (M_H ** 2 - Q_H)
        return (out + pi_H) / pi_t

    return estimate(collect(mc, fn))


def conditional_variance_mc(spec: ChaosSpec, t: float, mc: McConfig, prefix: JumpPath | None = None,
                            abc: AbcCoefficients | None = None, check_times: Sequence[float] = (0.0, 1.0, 5.0)):
    """Nested-simulation estimate of Var_t[X_inf] for a factorizable spec.

    ``X_inf`` is the chaos random variable ``int phi dN~ + int beta M_- dN~``.
    Requires ``int phi nu(dx) = int beta nu(dx) = 0`` so that the outer
    integrals need no compensator.  Events are simulated to the cap and
    the conditional variance beyond the cap, E_t[pi_H], is added exactly.

    Returns ``(estimate, pi_t)`` where ``pi_t`` is the closed-form kernel
    for the same conditioning history.
    """
    abc = abc or compute_abc(spec)
    for s in check_times:
        for name, fn_ in (("phi", spec.phi_fn), ("beta", spec.beta_fn)):
            v = spec.model.nu_integral(lambda x, u: fn_(x, u), s, tilt=spec.tilt)
            if abs(v) > 1e-12:
                raise ConfigError(f"int {name} nu(dx) must vanish for the nested estimator")
    H = spec.horizon_cap
    rng = mc.rng
    ga, ph, be = spec.gamma_fn, spec.phi_fn, spec.beta_fn
    pre = _prefix(spec, t, rng, prefix)
    Kf = compensator_fn(spec.model, ga, H, time_breaks=spec.time_breaks, tilt=spec.tilt)
    Qf = compensator_fn(spec.model, lambda x, s: ga(x, s) ** 2, H, time_breaks=spec.time_breaks, tilt=spec.tilt)
    J_t = float(pre.jump_sum(ga, [t])[0, 0]) if t > 0 else 0.0
    M_t = J_t - (float(Kf(t)) if t > 0 else 0.0)
    Q_t = float(Qf(t)) if t > 0 else 0.0
    pi_t = float(_kernel_value(abc, M_t, Q_t, t))
    beyond = float(conditional_kernel(abc, M_t, Q_t, H, t))
    Ktab = _hermite(space_time_density(spec.model, ga, sampled=True, tilt=spec.tilt),
                    _pts(0.0, H, spec.time_breaks))

    def fn(rng_, paths):
        batch, t_abs = _continuation(spec, t, rng_, paths)
        P = batch.n_paths
        owner = batch.owner
        x = batch.sizes
        g = np.asarray(np.broadcast_to(ga(x, t_abs), t_abs.shape), dtype=float)
        csum = np.cumsum(g)
        base = np.concatenate([[0.0], csum])[batch.offsets[:-1]]
        J_before = J_t + (csum - g) - base[owner] if g.size else g
        M_before = J_before - Ktab(t_abs) if g.size else g
        term = ph(x, t_abs) + be(x, t_abs) * M_before
        X = np.bincount(owner, weights=np.broadcast_to(term, t_abs.shape), minlength=P)
        return X * X

    e = estimate(collect(mc, fn))
    return Estimate(e.mean + beyond, e.stderr, e.n), pi_t
