"""Multi-currency systems of pricing kernels and exchange rates.

Each currency ``i`` carries a kernel

    pi^i_t = pi^i_0 exp(-int r^i ds - int int lam^i dN~ - int int (e^{-lam^i} - 1 + lam^i) nu ds)

and the price of one unit of currency ``i`` in units of ``j`` is the ratio
``F^{ij} = pi^i / pi^j``.  The log exchange rate has jump volatility
``sigma^{ij} = lam^j - lam^i`` and drift ``r^j - r^i + R^{ij}`` with

    R^{ij} = int (e^{sigma^{ij}} - 1)(1 - e^{-lam^j}) nu(dx).

Five families are supported:

``gbm``
    Brownian kernels ``exp(-r t - lam.W - |lam|^2 t / 2)``.
``merton``, ``vg``
    Linear risk aversion ``lam.x`` against a shared compound Poisson with
    Gaussian jumps or a (planar) variance-gamma process.
``iid``
    Currency ``i`` is driven by its own independent copy of a scalar Lévy
    process, ``pi^i = exp(-r t - lam^i X^i - psi(-lam^i) t)``.
``general``
    Space-time risk-aversion callables against a shared Lévy model.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, DomainError, UnsupportedError
from .itocalc import compensator, time_integral
from .levy import GaussianLaw, JumpBatch, JumpPath, LevyModel
from .mc import Estimate, McConfig, collect, estimate
from .paths import BrownianBatch, PathBundle, assemble_path, check_grid, sample_brownian
from .pricing_kernel import RiskAversion, kernel_log_values
from .rng import CounterRNG

FAMILIES = ("gbm", "merton", "vg", "iid", "general")
PARAMETRIC = ("gbm", "merton", "vg", "iid")


@dataclass(frozen=True, eq=False)
class CurrencySystem:
    """N pricing kernels, one per currency.

    Attributes
    ----------
    family : str
        One of ``FAMILIES``.
    lambdas : tuple
        Per-currency risk aversion: vectors of length ``n`` (gbm, merton,
        vg), scalars (iid) or callables ``(x, t)`` (general).
    rates : tuple
        Per-currency short rates, constants or callables of t.
    model : LevyModel, optional
        Driving measure; absent for the gbm family.  For iid it is the
        scalar model copied once per currency.
    initial_kernels : array, optional
        pi^i_0 > 0, default all ones.
    tilt : float
        Growth bound of the general-family risk aversion, for quadrature.
    """

    family: str
    lambdas: tuple
    rates: tuple
    model: LevyModel | None = None
    initial_kernels: np.ndarray | None = None
    tilt: float = 0.0
    time_breaks: tuple = ()
    names: tuple = ()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        fam = self.family
        if fam not in FAMILIES:
            raise ConfigError(f"unknown currency family {fam!r}")
        N = len(self.lambdas)
        if N < 2:
            raise ConfigError("a currency system needs at least two currencies")
        if len(self.rates) != N:
            raise ConfigError("one short rate per currency is required")
        k0 = np.ones(N) if self.initial_kernels is None else np.asarray(self.initial_kernels, dtype=float)
        if k0.shape != (N,) or not np.all(np.isfinite(k0)) or np.any(k0 <= 0):
            raise ConfigError("initial kernels must be N positive numbers")
        object.__setattr__(self, "initial_kernels", k0)
        if self.names and len(self.names) != N:
            raise ConfigError("one name per currency is required")
        if fam == "general":
            if self.model is None:
                raise ConfigError("the general family needs a Lévy model")
            if not all(callable(f) for f in self.lambdas):
                raise ConfigError("general-family risk aversions must be callables (x, t)")
            lams = tuple(self.lambdas)
        elif fam == "iid":
            if self.model is None or self.model.dimension != 1:
                raise ConfigError("the iid family needs a one-dimensional Lévy model")
            lams = tuple(float(np.asarray(v, dtype=float).reshape(())) for v in self.lambdas)
            for v in lams:
                if not (np.all(self.model.in_exponent_domain(np.array([v, -v])))):
                    raise DomainError(f"risk aversion {v} outside the exponent domain")
        else:
            lams = tuple(np.atleast_1d(np.asarray(v, dtype=float)) for v in self.lambdas)
            n = lams[0].size
            if any(v.shape != (n,) for v in lams) or not all(np.all(np.isfinite(v)) for v in lams):
                raise ConfigError("risk-aversion vectors must be finite and of equal length")
            if fam == "gbm":
                if self.model is not None:
                    raise ConfigError("the gbm family takes no Lévy model")
            else:
                m = self.model
                if m is None:
                    raise ConfigError(f"the {fam} family needs a Lévy model")
                if fam == "merton" and not (m.kind == "CompoundPoisson" and isinstance(m.jump_law, GaussianLaw)):
                    raise ConfigError("the merton family needs Gaussian compound Poisson jumps")
                if fam == "vg" and m.kind not in ("VarianceGamma", "TwoDimVarianceGamma"):
                    raise ConfigError("the vg family needs a variance-gamma model")
                if m.dimension != n:
                    raise ConfigError("risk-aversion vectors must match the model dimension")
                for v in lams:
                    if not self.model.in_exponent_domain(-v if n > 1 else -v[0]):
                        raise DomainError(f"|lambda| = {np.linalg.norm(v):.6g} is outside the exponent domain")
        object.__setattr__(self, "lambdas", lams)
        if self.n < N - 1:
            raise ConfigError(f"driver dimension {self.n} is below N - 1 = {N - 1}")

    # shape ---------------------------------------------------------------------

    @property
    def N(self) -> int:
        return len(self.lambdas)

    @property
    def n(self) -> int:
        """Dimension of the driving noise."""
        if self.family == "gbm":
            return int(self.lambdas[0].size)
        if self.family == "iid":
            return self.N
        return self.model.dimension

    @property
    def wiring(self) -> str:
        """``"iid"`` for independent copies, ``"shared"`` for one common driver."""
        return "iid" if self.family == "iid" else "shared"

    def label(self, i: int) -> str:
        return self.names[i] if self.names else f"c{i + 1}"

    # coefficients --------------------------------------------------------------

    def psi(self, arg) -> float:
        """Lévy exponent of the driver (|a|^2 / 2 for gbm)."""
        a = np.asarray(arg, dtype=float)
        if self.family == "gbm":
            return 0.5 * float(a @ a)
        if self.family in ("merton", "vg") and self.model.dimension == 1:
            a = a.reshape(-1)[0]
        return float(self.model.exponent(a))

    def lam_fn(self, i: int) -> Callable:
        """lambda^i as a space-time callable (jump families)."""
        if self.family == "general":
            return self.lambdas[i]
        if self.family == "gbm":
            raise UnsupportedError("the gbm family has no jump risk aversion")
        v = self.lambdas[i]
        if self.family == "iid" or self.model.dimension == 1:
            c = float(np.ravel(v)[0])
            return lambda x, t: c * np.asarray(x, dtype=float)
        return lambda x, t: np.asarray(x, dtype=float) @ v

    def sigma_fn(self, i: int, j: int) -> Callable:
        """sigma^{ij} = lambda^j - lambda^i (shared families)."""
        li, lj = self.lam_fn(i), self.lam_fn(j)
        return lambda x, t: lj(x, t) - li(x, t)

    def rate_integral(self, i: int, times) -> np.ndarray:
        return time_integral(self.rates[i], times, self.time_breaks)

    def constant_rate(self, i: int) -> float:
        r = self.rates[i]
        val = getattr(r, "constant", None) if callable(r) else r
        if val is None or np.ndim(val) != 0:
            raise ConfigError("constant short rates are required here")
        return float(val)

    def quad_tilt(self, *idx: int) -> float:
        if self.family == "general":
            return float(self.tilt)
        vs = [np.atleast_1d(self.lambdas[i]) for i in idx]
        cands = [np.linalg.norm(v) for v in vs]
        cands += [np.linalg.norm(a - b) for a, b in itertools.combinations(vs, 2)]
        return float(max(cands))


# ---------------------------------------------------------------------------
# noise


@dataclass(frozen=True, eq=False)
class FxNoise:
    """Randomness driving a batch of currency paths.

    ``jumps`` is one JumpBatch (shared wiring), a tuple of N batches (iid
    wiring) or None (gbm).
    """

    n_paths: int
    jumps: object = None
    brownian: BrownianBatch | None = None

    def event_times(self, p: int = 0) -> np.ndarray:
        bs = () if self.jumps is None else (self.jumps if isinstance(self.jumps, tuple) else (self.jumps,))
        ts = [b.path(p).times for b in bs]
        return np.unique(np.concatenate(ts)) if ts else np.empty(0)


def sample_fx_noise(sys: CurrencySystem, horizon: float, rng: CounterRNG | int, paths,
                    grid: Sequence[float] | None = None) -> FxNoise:
    """Sample the driver on (0, horizon] for the given global path indices.

    ``grid`` carries the Brownian increments (gbm) or the variance-gamma
    increment events.
    """
    rng = rng if isinstance(rng, CounterRNG) else CounterRNG(rng)
    paths = np.atleast_1d(np.asarray(paths, dtype=np.int64))
    g = check_grid(grid if grid is not None else [0.0, horizon])
    if sys.family == "gbm":
        return FxNoise(paths.size, None, sample_brownian(g, sys.n, rng, paths))
    if sys.family == "iid":
        return FxNoise(paths.size, tuple(sys.model.sample_batch(horizon, rng.child(i), paths, g)
                                         for i in range(sys.N)))
    return FxNoise(paths.size, sys.model.sample_batch(horizon, rng, paths, g))


def noise_from_jumps(sys: CurrencySystem, jumps=None, brownian: BrownianBatch | None = None) -> FxNoise:
    """Wrap user-supplied paths (JumpPath, JumpBatch or a sequence for iid)."""

    def as_batch(j):
        return j.as_batch() if isinstance(j, JumpPath) else j

    if sys.family == "gbm":
        if brownian is None:
            raise ConfigError("the gbm family is driven by a Brownian batch")
        return FxNoise(brownian.n_paths, None, brownian)
    if sys.family == "iid":
        if jumps is None or isinstance(jumps, (JumpPath, JumpBatch)) or len(jumps) != sys.N:
            raise ConfigError("the iid family needs one jump path per currency")
        bs = tuple(as_batch(j) for j in jumps)
        return FxNoise(bs[0].n_paths, bs)
    if not isinstance(jumps, (JumpPath, JumpBatch)):
        raise ConfigError("shared-measure families need a single jump path or batch")
    b = as_batch(jumps)
    return FxNoise(b.n_paths, b)


# ---------------------------------------------------------------------------
# kernels and exchange rates


def _lin_sum(sys: CurrencySystem, batch: JumpBatch, vec, times, strict: bool) -> np.ndarray:
    v = np.atleast_1d(np.asarray(vec, dtype=float))
    if batch.sizes.ndim == 1:
        c = float(v[0])
        return batch.jump_sum(lambda x, s: c * x, times, strict)
    return batch.jump_sum(lambda x, s: x @ v, times, strict)


def kernel_log_matrix(sys: CurrencySystem, noise: FxNoise, times, strict: bool = False,
                      check: bool = True) -> np.ndarray:
    """log pi^i_t for every path, currency and time; shape (P, N, T)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    P, N = noise.n_paths, sys.N
    out = np.empty((P, N, times.size))
    for i in range(N):
        base = math.log(sys.initial_kernels[i]) - sys.rate_integral(i, times)
        if sys.family == "gbm":
            lam = sys.lambdas[i]
            w = noise.brownian.integral(lam, times)
            out[:, i] = base[None, :] - w - 0.5 * float(lam @ lam) * times[None, :]
        elif sys.family == "iid":
            lam = sys.lambdas[i]
            xs = _lin_sum(sys, noise.jumps[i], [lam], times, strict)
            out[:, i] = base[None, :] - xs - sys.psi(-lam) * times[None, :]
        elif sys.family in ("merton", "vg"):
            lam = sys.lambdas[i]
            xs = _lin_sum(sys, noise.jumps, lam, times, strict)
            out[:, i] = base[None, :] - xs - sys.psi(-lam) * times[None, :]
        else:
            risk = RiskAversion(lam=sys.lambdas[i], time_breaks=sys.time_breaks, tilt=sys.tilt)
            lk = kernel_log_values(risk, None, sys.model, noise.jumps, times, strict=strict, check=check)
            out[:, i] = base[None, :] + lk
    return out


def exchange_rate_values(sys: CurrencySystem, noise: FxNoise, times, strict: bool = False,
                         check: bool = True) -> np.ndarray:
    """F^{ij}_t = pi^i_t / pi^j_t; shape (P, N, N, T)."""
    pi = np.exp(kernel_log_matrix(sys, noise, times, strict, check))
    return pi[:, :, None, :] / pi[:, None, :, :]


def _sigma_exponent(sys: CurrencySystem, i: int, j: int) -> float:
    """Exponent of the raw volatility sum of log F^{ij} per unit time."""
    if sys.family == "iid":
        return sys.psi(sys.lambdas[j]) + sys.psi(-sys.lambdas[i])
    return sys.psi(sys.lambdas[j] - sys.lambdas[i])


def prop_log_rates(sys: CurrencySystem, noise: FxNoise, i: int, j: int, times,
                   strict: bool = False, check: bool = True) -> np.ndarray:
    """log F^{ij} from the drift / volatility decomposition; shape (P, T).

    ``log F0 + int (r^j - r^i + R^{ij}) ds + S_t - int Psi ds`` where ``S``
    sums the exchange-rate volatility over the driver and ``Psi`` is its
    exponent.  Independent of :func:`exchange_rate_values` except for the
    shared noise.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    logf0 = math.log(sys.initial_kernels[i]) - math.log(sys.initial_kernels[j])
    det = logf0 + sys.rate_integral(j, times) - sys.rate_integral(i, times)
    if i == j:
        return np.broadcast_to(det - logf0, (noise.n_paths, times.size)).copy()
    fam = sys.family
    if fam == "gbm":
        sig = sys.lambdas[j] - sys.lambdas[i]
        S = noise.brownian.integral(sig, times)
    elif fam == "iid":
        S = (_lin_sum(sys, noise.jumps[j], [sys.lambdas[j]], times, strict)
             - _lin_sum(sys, noise.jumps[i], [sys.lambdas[i]], times, strict))
    elif fam in ("merton", "vg"):
        S = _lin_sum(sys, noise.jumps, sys.lambdas[j] - sys.lambdas[i], times, strict)
    else:
        sig = sys.sigma_fn(i, j)
        lj = sys.lam_fn(j)
        S = noise.jumps.jump_sum(sig, times, strict)
        R_int = compensator(sys.model, lambda x, s: np.expm1(sig(x, s)) * -np.expm1(-lj(x, s)), times,
                            time_breaks=sys.time_breaks, tilt=sys.tilt, check=check)
        Psi_int = compensator(sys.model, lambda x, s: np.expm1(sig(x, s)), times,
                              time_breaks=sys.time_breaks, tilt=sys.tilt, check=check)
        return (det + R_int - Psi_int)[None, :] + S
    R = excess_rate_closed_form(sys, i, j)
    return (det + (R - _sigma_exponent(sys, i, j)) * times)[None, :] + S


def exchange_rate_paths(sys: CurrencySystem, jumps=None, grid: Sequence[float] | None = None,
                        brownian: BrownianBatch | None = None) -> list:
    """N x N matrix of exchange-rate paths.

    A single JumpPath (or a sequence of them for iid) yields ScalarPath
    entries carrying left limits at the events; batches yield PathBundles.
    """
    noise = noise_from_jumps(sys, jumps, brownian)
    if grid is None:
        if brownian is not None:
            grid = brownian.grid
        else:
            b = noise.jumps[0] if isinstance(noise.jumps, tuple) else noise.jumps
            grid = [0.0, b.horizon]
    grid = check_grid(grid)
    single = isinstance(jumps, JumpPath) or (
        sys.family == "iid" and jumps is not None and isinstance(jumps[0], JumpPath)) or (
        sys.family == "gbm" and noise.n_paths == 1 and not isinstance(jumps, JumpBatch))
    N = sys.N
    if not single:
        vals = exchange_rate_values(sys, noise, grid)
        ids = np.arange(noise.n_paths)
        return [[PathBundle(grid, vals[:, i, j], ids) for j in range(N)] for i in range(N)]
    ev_times = noise.event_times(0)
    out = []
    for i in range(N):
        row = []
        for j in range(N):
            ev = lambda t, strict, i=i, j=j: exchange_rate_values(sys, noise, t, strict)[:, i, j]  # noqa: E731
            row.append(assemble_path(grid, ev_times, ev, dict(kind="fx", pair=(i, j))))
        out.append(row)
    return out


@dataclass(frozen=True)
class FxIdentityReport:
    """Largest pathwise deviations of the exchange-rate identities."""

    reciprocal: float
    triangle: float
    decomposition: float
    deflation: float
    diagonal: float
    undefined_pairs: int = 0

    def passed(self, tol: float = 1e-12, decomposition_tol: float = 1e-10) -> bool:
        return (self.reciprocal <= tol and self.triangle <= tol and self.diagonal == 0.0
                and self.deflation <= tol and self.decomposition <= decomposition_tol)


def fx_identity_check(sys: CurrencySystem, noise: FxNoise, times) -> FxIdentityReport:
    """Reciprocal, triangle, decomposition and deflation identities on ``noise``.

    Pairs whose excess rate is undefined (outside the exponent domain) are
    left out of the decomposition check and counted in ``undefined_pairs``.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    logpi = kernel_log_matrix(sys, noise, times)
    pi = np.exp(logpi)
    F = pi[:, :, None, :] / pi[:, None, :, :]
    N = sys.N
    recip = float(np.max(np.abs(F * np.swapaxes(F, 1, 2) - 1.0)))
    tri = 0.0
    for a, b, c in itertools.permutations(range(N), 3):
        tri = max(tri, float(np.max(np.abs(F[:, a, b] * F[:, b, c] * F[:, c, a] - 1.0))))
    diag = float(np.max(np.abs(F[:, np.arange(N), np.arange(N)] - 1.0)))
    defl = 0.0
    dec = 0.0
    undefined = 0
    for i, j in itertools.permutations(range(N), 2):
        defl = max(defl, float(np.max(np.abs(pi[:, j] * F[:, i, j] / pi[:, i] - 1.0))))
        try:
            lf = prop_log_rates(sys, noise, i, j, times)
        except DomainError:
            undefined += 1
            continue
        dec = max(dec, float(np.max(np.abs(np.expm1(lf - np.log(F[:, i, j]))))))
    return FxIdentityReport(recip, tri, dec, defl, diag, undefined)


# ---------------------------------------------------------------------------
# excess rates of return


def excess_rate_closed_form(sys: CurrencySystem, i: int, j: int) -> float:
    """psi(lam^j - lam^i) + psi(-lam^j) - psi(-lam^i); psi(lam) + psi(-lam) for iid."""
    if i == j:
        return 0.0
    if sys.family == "general":
        raise UnsupportedError("no closed form for general risk aversion")
    if sys.family == "iid":
        lj = sys.lambdas[j]
        return sys.psi(lj) + sys.psi(-lj)
    li, lj = sys.lambdas[i], sys.lambdas[j]
    return sys.psi(lj - li) + sys.psi(-lj) - sys.psi(-li)


def fx_excess_rate(sys: CurrencySystem, i: int, j: int, t: float = 0.0, check: bool = True) -> float:
    """R^{ij}_t by quadrature against the Lévy measure.

    For gbm the Brownian excess rate ``(lam^j - lam^i).lam^j`` is returned.
    """
    if i == j:
        return 0.0
    if sys.family == "gbm":
        return float((sys.lambdas[j] - sys.lambdas[i]) @ sys.lambdas[j])
    if sys.family == "iid":
        # only jumps of copy j move both factors
        a = sys.lambdas[j]
        g = lambda x, s: np.expm1(a * x) * -np.expm1(-a * x)  # noqa: E731
        tilt = abs(a)
    else:
        sig, lj = sys.sigma_fn(i, j), sys.lam_fn(j)
        g = lambda x, s: np.expm1(sig(x, s)) * -np.expm1(-lj(x, s))  # noqa: E731
        tilt = sys.quad_tilt(i, j)
    val = sys.model.nu_integral(g, t, tilt=tilt, sampled=True, check=check)
    if not math.isfinite(val):
        raise DomainError("excess rate of return is not finite")
    return float(val)


def excess_rate_matrix(sys: CurrencySystem, t: float = 0.0, method: str = "closed") -> np.ndarray:
    """N x N matrix of R^{ij}_t with zero diagonal."""
    N = sys.N
    R = np.zeros((N, N))
    for i, j in itertools.permutations(range(N), 2):
        R[i, j] = excess_rate_closed_form(sys, i, j) if method == "closed" else fx_excess_rate(sys, i, j, t)
    return R


# ---------------------------------------------------------------------------
# Siegel condition


@dataclass(frozen=True, eq=False)
class SiegelReport:
    """Excess rates for every ordered pair with numeric and analytic verdicts.

    Attributes
    ----------
    R : ndarray, shape (T, N, N)
        Excess rates at each report time; NaN where undefined.
    positive : ndarray of bool, shape (N, N)
        True when R^{ij} > 0 at every report time (False on the diagonal).
    analytic : bool or None
        Verdict of the family's sufficient condition, None when it does not
        apply.
    diagnostics : dict
        Norms, pairwise angles in degrees and exponent-domain margins.
    """

    family: str
    times: np.ndarray
    R: np.ndarray
    positive: np.ndarray
    analytic: bool | None
    reason: str
    diagnostics: dict

    @property
    def N(self) -> int:
        return self.positive.shape[0]

    @property
    def numeric(self) -> bool:
        off = ~np.eye(self.N, dtype=bool)
        return bool(np.all(self.positive[off]))

    @property
    def violations(self) -> list[tuple[int, int]]:
        return [(i, j) for i, j in itertools.permutations(range(self.N), 2) if not self.positive[i, j]]

    def rows(self) -> list[tuple]:
        """(time, i, j, R, positive) for every ordered pair."""
        out = []
        for k, t in enumerate(self.times):
            for i, j in itertools.permutations(range(self.N), 2):
                out.append((float(t), i, j, float(self.R[k, i, j]), bool(self.R[k, i, j] > 0)))
        return out


def _geometry(vs: list[np.ndarray]) -> dict:
    norms = np.array([np.linalg.norm(v) for v in vs])
    N = len(vs)
    ang = np.zeros((N, N))
    for i, j in itertools.permutations(range(N), 2):
        d = norms[i] * norms[j]
        c = float(vs[i] @ vs[j]) / d if d > 0 else 1.0
        ang[i, j] = math.degrees(math.acos(min(1.0, max(-1.0, c))))
    return {"norms": norms, "angles_deg": ang}


def _equal_distinct(vs: list[np.ndarray], rtol: float = 1e-9) -> tuple[bool, bool]:
    norms = np.array([np.linalg.norm(v) for v in vs])
    equal = bool(norms.max() - norms.min() <= rtol * max(norms.max(), 1e-300)) and norms.max() > 0
    distinct = all(np.linalg.norm(a - b) > rtol * norms.max() for a, b in itertools.combinations(vs, 2))
    return equal, distinct


def _analytic(sys: CurrencySystem, diag: dict) -> tuple[bool | None, str]:
    fam = sys.family
    if fam == "general":
        return None, "no analytic condition for general risk aversion"
    if fam == "iid":
        lams = np.array(sys.lambdas)
        if np.ptp(lams) != 0:
            return None, "risk aversions differ between copies"
        if lams[0] == 0:
            return False, "zero risk aversion gives zero excess rates"
        return True, "common risk aversion: psi(lam) + psi(-lam) > 0 by Jensen"
    vs = [np.atleast_1d(v) for v in sys.lambdas]
    equal, distinct = _equal_distinct(vs)
    if not (equal and distinct):
        return None, "risk-aversion vectors are not distinct and of equal length"
    if fam == "gbm":
        return True, "distinct equal-length vectors: L^2 (1 - cos theta) > 0"
    if fam == "merton":
        law = sys.model.jump_law
        c = law.cov
        iso = np.allclose(c, c[0, 0] * np.eye(c.shape[0]), rtol=0, atol=1e-14 * c[0, 0])
        if np.any(law.mean != 0) or not iso:
            return None, "condition needs centred jumps with isotropic covariance"
        return True, "centred isotropic jumps with distinct equal-length vectors"
    m = sys.model.m
    L2 = float(diag["norms"][0] ** 2)
    cos = np.cos(np.radians(diag["angles_deg"]))
    off = ~np.eye(sys.N, dtype=bool)
    bound = 1.0 - m / L2
    ok = bool(np.all(cos[off] > bound))
    if L2 < 0.5 * m:
        why = "L^2 < m/2: positive for every angle"
    elif np.all(cos[off] > 0.5):
        why = "all pairwise angles below sixty degrees"
    else:
        why = f"cos theta > 1 - m/L^2 = {bound:.6g} " + ("holds" if ok else "fails")
    return ok, why


def siegel_check(sys: CurrencySystem, times: Sequence[float] = (0.0,), method: str = "auto",
                 check: bool = True) -> SiegelReport:
    """Evaluate the Siegel condition on every ordered currency pair.

    ``method`` is ``"closed"`` (exponent combinations), ``"quadrature"`` or
    ``"auto"`` (closed form for parametric families).  Pairs whose excess
    rate is undefined (outside the exponent domain) are reported as NaN and
    not positive.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if method == "auto":
        method = "quadrature" if sys.family == "general" else "closed"
    if method not in ("closed", "quadrature"):
        raise ConfigError(f"unknown method {method!r}")
    N = sys.N
    R = np.zeros((times.size, N, N))
    for k, t in enumerate(times):
        for i, j in itertools.permutations(range(N), 2):
            try:
                R[k, i, j] = (excess_rate_closed_form(sys, i, j) if method == "closed"
                              else fx_excess_rate(sys, i, j, float(t), check))
            except DomainError:
                R[k, i, j] = np.nan
    pos = np.all(R > 0, axis=0)
    pos[np.arange(N), np.arange(N)] = False
    diag: dict = {}
    if sys.family != "general":
        vs = [np.atleast_1d(np.asarray(v, dtype=float)) for v in sys.lambdas]
        diag.update(_geometry(vs))
        if sys.family == "vg":
            two_m = 2.0 * sys.model.m
            marg = np.zeros((N, N))
            for i, j in itertools.permutations(range(N), 2):
                marg[i, j] = two_m - float(np.sum((vs[j] - vs[i]) ** 2))
            diag["domain_margin"] = marg
            diag["kernel_margin"] = two_m - diag["norms"] ** 2
    analytic, reason = _analytic(sys, diag)
    return SiegelReport(sys.family, times, R, pos, analytic, reason, diag)


# ---------------------------------------------------------------------------
# drift regression


def drift_correction_fx(sys: CurrencySystem, i: int, j: int) -> float:
    """Psi - E[S_1]: added to the mean log-rate slope to recover r^j - r^i + R^{ij}."""
    fam = sys.family
    if fam == "gbm":
        return _sigma_exponent(sys, i, j)
    if fam == "general":
        sig = sys.sigma_fn(i, j)
        return sys.model.nu_integral(lambda x, s: np.expm1(sig(x, s)) - sig(x, s), 0.0,
                                     tilt=sys.tilt, sampled=True)
    if fam == "iid":
        mean1 = sys.model.nu_integral(lambda x, s: x, 0.0, sampled=True)
        return _sigma_exponent(sys, i, j) - (sys.lambdas[j] - sys.lambdas[i]) * mean1
    sig = sys.lambdas[j] - sys.lambdas[i]
    if fam == "merton":
        law = sys.model.jump_law
        drift = sys.model.intensity * float(sig @ law.mean)
    else:
        drift = 0.0
    return _sigma_exponent(sys, i, j) - drift


def fx_drift_regression(sys: CurrencySystem, pair: tuple[int, int], mc: McConfig,
                        horizon: float = 1.0, steps: int | None = None) -> Estimate:
    """MC estimate of r^j - r^i + R^{ij} from simulated exchange rates.

    Per path, the least-squares slope of ``log F_t - log F_0`` through the
    origin on the grid is taken; the volatility correction is added.
    """
    i, j = pair
    if sys.family == "general":
        raise UnsupportedError("drift regression needs a parametric family with constant coefficients")
    for k in (i, j):
        sys.constant_rate(k)
    if steps is None:
        steps = mc.grid.steps if mc.grid is not None else 4
    grid = np.linspace(0.0, horizon, steps + 1)
    t = grid[1:]
    logf0 = math.log(sys.initial_kernels[i] / sys.initial_kernels[j])

    def fn(rng, paths):
        noise = sample_fx_noise(sys, horizon, rng, paths, grid)
        lp = kernel_log_matrix(sys, noise, t)
        lf = lp[:, i] - lp[:, j] - logf0
        return (lf @ t) / float(t @ t)

    e = estimate(collect(mc, fn))
    return Estimate(e.mean + drift_correction_fx(sys, i, j), e.stderr, e.n)


# ---------------------------------------------------------------------------
# constructors and randomized search


def unit_vectors(angles_deg: Sequence[float], length: float = 1.0) -> list[np.ndarray]:
    """Planar vectors of a common length at the given polar angles."""
    return [length * np.array([math.cos(math.radians(a)), math.sin(math.radians(a))]) for a in angles_deg]


def gbm_system(lambdas, rates=None, initial=None, names=()) -> CurrencySystem:
    lambdas = [np.asarray(v, dtype=float) for v in lambdas]
    rates = tuple(rates) if rates is not None else (0.0,) * len(lambdas)
    return CurrencySystem("gbm", tuple(lambdas), rates, None, initial, names=tuple(names))


def merton_system(lambdas, intensity: float = 1.0, mean=None, cov=None, rates=None, initial=None,
                  names=()) -> CurrencySystem:
    lambdas = [np.atleast_1d(np.asarray(v, dtype=float)) for v in lambdas]
    n = lambdas[0].size
    mean = np.zeros(n) if mean is None else mean
    cov = np.eye(n) if cov is None else cov
    model = LevyModel.merton(intensity, mean, cov)
    rates = tuple(rates) if rates is not None else (0.0,) * len(lambdas)
    return CurrencySystem("merton", tuple(lambdas), rates, model, initial, names=tuple(names))


def vg_system(lambdas, m: float, rates=None, initial=None, names=()) -> CurrencySystem:
    lambdas = [np.atleast_1d(np.asarray(v, dtype=float)) for v in lambdas]
    n = lambdas[0].size
    if n == 1:
        model = LevyModel.variance_gamma(m)
    elif n == 2:
        model = LevyModel.two_dim_variance_gamma(m)
    else:
        raise UnsupportedError("variance-gamma drivers are available in one and two dimensions")
    rates = tuple(rates) if rates is not None else (0.0,) * len(lambdas)
    return CurrencySystem("vg", tuple(lambdas), rates, model, initial, names=tuple(names))


def iid_system(model: LevyModel, lambdas, rates=None, initial=None, names=()) -> CurrencySystem:
    rates = tuple(rates) if rates is not None else (0.0,) * len(lambdas)
    return CurrencySystem("iid", tuple(lambdas), rates, model, initial, names=tuple(names))


def random_equal_length_system(family: str, rng: np.random.Generator, N: int | None = None) -> CurrencySystem:
    """Random configuration meeting the family's sufficient condition.

    gbm: N in 2..6 distinct equal-length vectors in dimension N-1..N+1.
    iid: a bundled scalar driver and a common nonzero risk aversion.
    merton: centred isotropic planar jumps, N in 2..3 distinct equal-length vectors.
    vg: planar driver with either L^2 < m/2 or all angles inside a sixty-degree cone.
    """
    if family == "gbm":
        N = N or int(rng.integers(2, 7))
        n = max(1, N - 1 + int(rng.integers(0, 3)))
        L = float(rng.uniform(0.05, 3.0))
        vs = []
        while len(vs) < N:
            u = rng.normal(size=n)
            if n == 1:
                u = np.array([1.0 if len(vs) == 0 else -1.0])
            u = L * u / np.linalg.norm(u)
            if all(np.linalg.norm(u - v) > 1e-6 * L for v in vs):
                vs.append(u)
        return gbm_system(vs, rates=rng.uniform(0, 0.05, N))
    if family == "iid":
        N = N or int(rng.integers(2, 6))
        kind = int(rng.integers(0, 4))
        if kind == 0:
            model = LevyModel.merton(float(rng.uniform(0.2, 3)), float(rng.normal(0, 0.3)), float(rng.uniform(0.05, 1)))
            lam = float(rng.uniform(-2, 2))
        elif kind == 1:
            m = float(rng.uniform(0.5, 5))
            model = LevyModel.variance_gamma(m)
            lam = float(rng.uniform(-0.95, 0.95) * math.sqrt(2 * m))
        elif kind == 2:
            model = LevyModel.symmetric_bernoulli(float(rng.uniform(0.2, 3)), float(rng.uniform(0.1, 2)))
            lam = float(rng.uniform(-2, 2))
        else:
            m = float(rng.uniform(0.5, 5))
            model = LevyModel.gamma(m)
            lam = float(rng.uniform(-0.95, 0.95) * m)
        if lam == 0.0:
            lam = 0.5
        return iid_system(model, [lam] * N, rates=rng.uniform(0, 0.05, N))
    if family == "merton":
        N = N or int(rng.integers(2, 4))
        L = float(rng.uniform(0.05, 2.0))
        ang = np.sort(rng.uniform(0, 360, N))
        while np.min(np.diff(np.concatenate([ang, [ang[0] + 360]]))) < 1e-3:
            ang = np.sort(rng.uniform(0, 360, N))
        s = float(rng.uniform(0.1, 1.5))
        return merton_system(unit_vectors(ang, L), float(rng.uniform(0.1, 5)), np.zeros(2), s * s * np.eye(2),
                             rates=rng.uniform(0, 0.05, N))
    if family == "vg":
        N = N or int(rng.integers(2, 4))
        m = float(rng.uniform(0.5, 5))
        if rng.uniform() < 0.5:
            L = float(math.sqrt(rng.uniform(0.01, 0.5) * m))
            ang = rng.uniform(0, 360, N)
        else:
            L = float(math.sqrt(rng.uniform(0.01, 0.99) * 2 * m))
            base = rng.uniform(0, 360)
            ang = base + rng.uniform(0, 59.9, N)
        ang = np.sort(ang)
        while np.min(np.diff(ang)) < 1e-3:
            ang = np.sort(ang + rng.uniform(0, 1e-2, N))
        return vg_system(unit_vectors(ang, L), m, rates=rng.uniform(0, 0.05, N))
    raise ConfigError(f"no randomized generator for family {family!r}")


@dataclass(frozen=True)
class SearchResult:
    family: str
    configs: int
    violations: int
    analytic_failures: int
    candidates: tuple


def siegel_search(family: str, n_configs: int = 1000, seed: int = 0) -> SearchResult:
    """Draw random configurations and count Siegel violations.

    ``candidates`` lists the indices of configurations with a nonpositive
    excess rate, which would be counterexample candidates.
    """
    rng = np.random.default_rng(seed)
    bad, analytic_bad = [], 0
    for k in range(n_configs):
        sys = random_equal_length_system(family, rng)
        rep = siegel_check(sys)
        if not rep.numeric:
            bad.append(k)
        if rep.analytic is not True:
            analytic_bad += 1
    return SearchResult(family, n_configs, len(bad), analytic_bad, tuple(bad))


__all__ = [
    "CurrencySystem",
    "FxIdentityReport",
    "FxNoise",
    "SearchResult",
    "SiegelReport",
    "drift_correction_fx",
    "exchange_rate_paths",
    "exchange_rate_values",
    "excess_rate_closed_form",
    "excess_rate_matrix",
    "fx_drift_regression",
    "fx_excess_rate",
    "fx_identity_check",
    "gbm_system",
    "iid_system",
    "kernel_log_matrix",
    "merton_system",
    "noise_from_jumps",
    "prop_log_rates",
    "random_equal_length_system",
    "sample_fx_noise",
    "siegel_check",
    "siegel_search",
    "unit_vectors",
    "vg_system",
]
