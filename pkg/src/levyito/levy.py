"""Lévy measures, exponents and jump-path sampling.

A :class:`LevyModel` bundles a Lévy measure on R^n minus the origin with
three capabilities: evaluating the Lévy exponent, building quadrature
rules against the measure, and sampling the jumps of the associated Poisson
random measure over a horizon.

Coefficient callables throughout the package share one convention: they
are called as ``f(x, t)`` with ``x`` of shape ``(...)`` when ``n == 1`` and
``(..., n)`` otherwise, ``t`` broadcastable against the leading axes of
``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .errors import ConfigError, DomainError, GridError, UnsupportedError
from .quadrature import (
    SpaceRule,
    check_agreement,
    gauss_legendre,
    geometric_breaks,
    merge_rules,
    panel_rule,
    subdivide,
)
from .rng import CounterRNG, Substream

KINDS = ("CompoundPoisson", "Gamma", "VarianceGamma", "TwoDimVarianceGamma", "Custom")

# smallest radius resolved by the geometric panels of infinite-activity rules
_INNER = 2.0**-44


# ---------------------------------------------------------------------------
# jump-size laws for compound Poisson models


@dataclass(frozen=True, eq=False)
class DiscreteLaw:
    """Jump sizes drawn from finitely many atoms.

    Parameters
    ----------
    atoms : array_like
        Shape (k,) for scalar jumps or (k, n) for vector jumps.
    probs : array_like
        Probabilities, summing to one.
    """

    atoms: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        if atoms.ndim == 2 and atoms.shape[1] == 1:
            atoms = atoms[:, 0]
        if atoms.shape[0] != probs.shape[0] or probs.ndim != 1:
            raise ConfigError("atoms and probs must have matching leading length")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ConfigError("jump-law probabilities must be nonnegative and sum to 1")
        norms = np.abs(atoms) if atoms.ndim == 1 else np.linalg.norm(atoms, axis=1)
        if np.any(norms[probs > 0] == 0):
            raise ConfigError("jump law puts mass on the origin")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "_cdf", np.cumsum(probs))

    @property
    def dimension(self) -> int:
        return 1 if self.atoms.ndim == 1 else self.atoms.shape[1]

    def mgf(self, arg) -> np.ndarray:
        arg = np.asarray(arg, dtype=float)
        if self.dimension == 1:
            return np.exp(arg[..., None] * self.atoms) @ self.probs
        return np.exp(arg @ self.atoms.T) @ self.probs

    def sample(self, rng: CounterRNG, paths: np.ndarray, index: np.ndarray) -> np.ndarray:
        u = rng.uniform(paths, Substream.SIZES, index)
        k = np.searchsorted(self._cdf, u, side="right")
        k = np.minimum(k, self.probs.size - 1)
        return self.atoms[k]

    def rule(self, intensity: float) -> SpaceRule:
        keep = self.probs > 0
        return SpaceRule(self.atoms[keep], intensity * self.probs[keep], self.dimension)


@dataclass(frozen=True, eq=False)
class GaussianLaw:
    """Gaussian jump sizes (the Merton family)."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise ConfigError("covariance shape does not match mean")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise ConfigError("jump covariance must be positive definite") from exc
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "_chol", chol)

    @property
    def dimension(self) -> int:
        return self.mean.size

    def mgf(self, arg) -> np.ndarray:
        arg = np.asarray(arg, dtype=float)
        if self.dimension == 1:
            a = arg
            return np.exp(a * self.mean[0] + 0.5 * a * a * self.cov[0, 0])
        quad = np.einsum("...i,ij,...j->...", arg, self.cov, arg)
        return np.exp(arg @ self.mean + 0.5 * quad)

    def sample(self, rng: CounterRNG, paths: np.ndarray, index: np.ndarray) -> np.ndarray:
        n = self.dimension
        idx = index[:, None] * n + np.arange(n)[None, :]
        z = rng.normal(paths[:, None], Substream.SIZES, idx)
        x = self.mean[None, :] + z @ self._chol.T
        return x[:, 0] if n == 1 else x

    def rule(self, intensity: float, tilt: float = 0.0, level: int = 0,
             breaks: Sequence[float] = ()) -> SpaceRule:
        n = self.dimension
        if n == 1:
            mu, sd = self.mean[0], math.sqrt(self.cov[0, 0])
            shift = tilt * sd * sd
            lo = mu - 12.0 * sd - shift
            hi = mu + 12.0 * sd + shift
            pts = [lo, hi] + [p for p in (-1.0, 0.0, 1.0, *breaks) if lo < p < hi]
            b = subdivide(sorted(pts), sd / (2.0 * (level + 1)))
            x, w = panel_rule(b, 16)
            dens = np.exp(-0.5 * ((x - mu) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))
            return SpaceRule(x, intensity * w * dens, 1)
        order = 32 + 16 * level
        z, wz = np.polynomial.hermite.hermgauss(order)
        grids = np.meshgrid(*([z] * n), indexing="ij")
        zz = np.stack([g.ravel() for g in grids], axis=-1) * math.sqrt(2.0)
        ww = np.ones(zz.shape[0])
        for g in np.meshgrid(*([wz] * n), indexing="ij"):
            ww = ww * g.ravel()
        ww = ww / math.pi ** (n / 2)
        x = self.mean[None, :] + zz @ self._chol.T
        return SpaceRule(x, intensity * ww, n)


# ---------------------------------------------------------------------------
# jump paths


@dataclass(frozen=True, eq=False)
class JumpPath:
    """Realised jumps of one path on (0, horizon].

    Attributes
    ----------
    horizon : float
    times : ndarray, shape (K,)
        Strictly increasing event times.
    sizes : ndarray, shape (K,) or (K, n)
    truncation_radius : float
        Jumps with norm at or below this radius were not sampled.
    """

    horizon: float
    times: np.ndarray
    sizes: np.ndarray
    truncation_radius: float = 0.0

    @property
    def count(self) -> int:
        return int(self.times.size)

    def as_batch(self) -> "JumpBatch":
        return JumpBatch(
            horizon=self.horizon,
            paths=np.array([0], dtype=np.int64),
            offsets=np.array([0, self.count], dtype=np.int64),
            times=self.times,
            sizes=self.sizes,
            truncation_radius=self.truncation_radius,
        )

    def restrict(self, t: float) -> "JumpPath":
        keep = self.times <= t
        return JumpPath(t, self.times[keep], self.sizes[keep], self.truncation_radius)


@dataclass(frozen=True, eq=False)
class JumpBatch:
    """Jumps of several paths stored contiguously, ordered by (path, time).

    ``offsets[p]:offsets[p+1]`` slices the events of local path ``p`` whose
    global index is ``paths[p]``.
    """

    horizon: float
    paths: np.ndarray
    offsets: np.ndarray
    times: np.ndarray
    sizes: np.ndarray
    truncation_radius: float = 0.0

    @property
    def n_paths(self) -> int:
        return int(self.paths.size)

    @property
    def owner(self) -> np.ndarray:
        """Local path index of every event."""
        return np.repeat(np.arange(self.n_paths), np.diff(self.offsets))

    @property
    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    def path(self, p: int) -> JumpPath:
        sl = slice(self.offsets[p], self.offsets[p + 1])
        return JumpPath(self.horizon, self.times[sl], self.sizes[sl], self.truncation_radius)

    def jump_sum(self, h: Callable, times, strict: bool = False) -> np.ndarray:
        """Per-path sums of ``h(x_e, s_e)`` over events with ``s_e <= t``.

        Returns an array of shape (n_paths, len(times)).  With ``strict``
        the inequality is ``s_e < t`` (left limits).
        """
        times = np.atleast_1d(np.asarray(times, dtype=float))
        out = np.zeros((self.n_paths, times.size))
        if self.times.size == 0:
            return out
        vals = np.broadcast_to(np.asarray(h(self.sizes, self.times), dtype=float), self.times.shape)
        owner = self.owner
        for j, t in enumerate(times):
            mask = self.times < t if strict else self.times <= t
            out[:, j] = np.bincount(owner, weights=np.where(mask, vals, 0.0), minlength=self.n_paths)
        return out


def log_jump_sum(batch: JumpBatch, factor: Callable, times, strict: bool = False) -> np.ndarray:
    """Sum of ``log(factor(x_e, s_e))`` per path, raising if any factor is not positive."""

    def h(x, s):
        f = np.asarray(factor(x, s), dtype=float)
        if np.any(~(f > 0)):
            raise DomainError("multiplicative jump factor is not strictly positive")
        return np.log(f)

    return batch.jump_sum(h, times, strict)


# ---------------------------------------------------------------------------
# the model


@dataclass(frozen=True, eq=False)
class LevyModel:
    """A Lévy measure with exponent, quadrature and sampling capabilities.

    Use the named constructors rather than the raw initialiser.

    Attributes
    ----------
    kind : str
        One of ``KINDS``.
    dimension : int
    intensity : float
        Total mass for compound Poisson; subordinator intensity ``m`` for the
        gamma and variance-gamma kinds.
    jump_law : DiscreteLaw or GaussianLaw, optional
    density : callable, optional
        Lévy density for the Custom kind.
    epsilon : float
        Truncation radius for sampling the Custom kind.
    support : tuple of float
        Interval carrying the Custom density.
    """

    kind: str
    dimension: int
    intensity: float
    jump_law: object = None
    density: Callable | None = None
    epsilon: float = 0.0
    support: tuple = (-np.inf, np.inf)
    breaks: tuple = ()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}")
        if not (self.dimension >= 1):
            raise ConfigError("dimension must be a positive integer")
        if not (self.intensity >= 0) or not math.isfinite(self.intensity):
            raise ConfigError("intensity must be finite and nonnegative")
        if self.kind in ("Gamma", "VarianceGamma", "TwoDimVarianceGamma") and self.intensity <= 0:
            raise ConfigError("subordinator intensity must be positive")

    # constructors ----------------------------------------------------------

    @classmethod
    def compound_poisson(cls, intensity: float, law) -> "LevyModel":
        if not isinstance(law, (DiscreteLaw, GaussianLaw)):
            raise ConfigError("jump law must be a DiscreteLaw or GaussianLaw")
        return cls("CompoundPoisson", law.dimension, float(intensity), jump_law=law)

    @classmethod
    def symmetric_bernoulli(cls, intensity: float = 1.0, size: float = 1.0) -> "LevyModel":
        """Jumps of +size or -size with equal probability."""
        return cls.compound_poisson(intensity, DiscreteLaw([-size, size], [0.5, 0.5]))

    @classmethod
    def merton(cls, intensity: float, mean=0.0, cov=1.0) -> "LevyModel":
        return cls.compound_poisson(intensity, GaussianLaw(mean, cov))

    @classmethod
    def variance_gamma(cls, m: float) -> "LevyModel":
        return cls("VarianceGamma", 1, float(m))

    @classmethod
    def two_dim_variance_gamma(cls, m: float) -> "LevyModel":
        return cls("TwoDimVarianceGamma", 2, float(m))

    @classmethod
    def gamma(cls, m: float) -> "LevyModel":
        """Gamma subordinator with unit mean rate and variance rate ``1/m``."""
        return cls("Gamma", 1, float(m))

    @classmethod
    def custom(cls, density: Callable, epsilon: float | None = None, support=(-50.0, 50.0),
               dimension: int = 1, breaks: Sequence[float] = ()) -> "LevyModel":
        """One-dimensional Lévy measure given by a density on ``support``.

        With ``epsilon=None`` the truncation radius is chosen so that the
        dropped small jumps carry at most 1e-6 of the second moment taken
        over the unit ball.
        """
        if dimension != 1:
            raise UnsupportedError("custom Lévy densities are supported in one dimension only")
        lo, hi = float(support[0]), float(support[1])
        if not (lo < 0 < hi) and not (lo == 0 < hi) and not (lo < 0 == hi):
            raise ConfigError("support must be an interval containing or bounded by 0")
        model = cls("Custom", 1, 0.0, density=density, epsilon=0.0, support=(lo, hi),
                    breaks=tuple(breaks))
        model._check_levy_integrability()
        if epsilon is None:
            epsilon = model._default_epsilon()
        if not epsilon > 0:
            raise ConfigError("custom models need a positive truncation radius")
        out = cls("Custom", 1, 0.0, density=density, epsilon=float(epsilon), support=(lo, hi),
                  breaks=tuple(breaks))
        mass = out.rule(sampled=True).weights.sum()
        if not np.isfinite(mass):
            raise ConfigError("density is not integrable outside the truncation radius")
        return out

    # basic properties --------------------------------------------------------

    @property
    def finite_activity(self) -> bool:
        return self.kind == "CompoundPoisson"

    @property
    def m(self) -> float:
        return self.intensity

    def describe(self) -> str:
        return f"{self.kind}(n={self.dimension}, m={self.intensity:g})"

    # exponent ----------------------------------------------------------------

    def in_exponent_domain(self, arg) -> np.ndarray:
        arg = np.asarray(arg, dtype=float)
        if self.kind in ("VarianceGamma", "TwoDimVarianceGamma"):
            sq = arg * arg if self.dimension == 1 else (arg * arg).sum(axis=-1)
            return sq < 2.0 * self.intensity
        if self.kind == "Gamma":
            return arg < self.intensity
        return np.ones(arg.shape if self.dimension == 1 else arg.shape[:-1], dtype=bool)

    def exponent(self, arg) -> np.ndarray | float:
        """Lévy exponent psi with E[exp(arg . X_t)] = exp(t psi(arg)).

        ``X`` is the sum of jumps for the finite-variation kinds; for the
        Custom kind the small jumps are compensated.
        """
        arg = np.asarray(arg, dtype=float)
        if self.dimension > 1 and arg.shape[-1:] != (self.dimension,):
            raise DomainError(f"argument must have trailing dimension {self.dimension}")
        if not np.all(self.in_exponent_domain(arg)):
            raise DomainError(f"argument outside the exponent domain of {self.describe()}")
        m = self.intensity
        if self.kind == "CompoundPoisson":
            out = m * (self.jump_law.mgf(arg) - 1.0)
        elif self.kind in ("VarianceGamma", "TwoDimVarianceGamma"):
            sq = arg * arg if self.dimension == 1 else (arg * arg).sum(axis=-1)
            out = -m * np.log1p(-sq / (2.0 * m))
        elif self.kind == "Gamma":
            out = -m * np.log1p(-arg / m)
        else:
            a = np.atleast_1d(arg)
            rule = self.rule()

            def one(alpha):
                x = rule.nodes
                comp = np.where(np.abs(x) < 1.0, alpha * x, 0.0)
                return rule.weights @ (np.expm1(alpha * x) - comp)

            try:
                vals = np.array([one(al) for al in a.ravel()]).reshape(a.shape)
            except FloatingPointError as exc:  # pragma: no cover
                raise UnsupportedError("exponent not available") from exc
            if not np.all(np.isfinite(vals)):
                raise UnsupportedError("exponent not finite for the custom density")
            out = vals if arg.ndim else vals[0]
        return float(out) if np.ndim(out) == 0 else out

    # quadrature ----------------------------------------------------------------

    def rule(self, tilt: float = 0.0, level: int = 0, sampled: bool = False,
             breaks: Sequence[float] = ()) -> SpaceRule:
        """Quadrature rule against the Lévy measure.

        Parameters
        ----------
        tilt : float
            Largest exponential growth rate |a| of integrands ``exp(a . x)``
            the rule must resolve in the tails.
        level : int
            Refinement level; level 1 is used for self-checks.
        sampled : bool
            For the Custom kind, restrict to jumps larger than ``epsilon``
            (the part of the measure that is simulated).
        breaks : sequence of float
            Extra points of non-smoothness (one-dimensional kinds only).
        """
        key = (round(float(tilt), 12), level, bool(sampled), tuple(breaks))
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        m = self.intensity
        if self.kind == "CompoundPoisson":
            if isinstance(self.jump_law, DiscreteLaw):
                rule = self.jump_law.rule(m)
            else:
                rule = self.jump_law.rule(m, tilt, level, tuple(self.breaks) + tuple(breaks))
        elif self.kind == "VarianceGamma":
            c = math.sqrt(2 * m)
            pos = _radial_rule(lambda r: m * np.exp(-c * r) / r, c - tilt, level, breaks, tilt)
            rule = merge_rules(SpaceRule(-pos.nodes[::-1], pos.weights[::-1], 1), pos)
        elif self.kind == "Gamma":
            rule = _radial_rule(lambda r: m * np.exp(-m * r) / r, m - tilt, level, breaks, tilt)
        elif self.kind == "TwoDimVarianceGamma":
            rule = _vg2d_rule(m, tilt, level)
        else:
            rule = self._custom_rule(level, sampled, breaks)
        self._cache[key] = rule
        return rule

    def _custom_sides(self, level: int, sampled: bool, breaks: Sequence[float]):
        """Panel breaks and weighted nodes on each side of the origin."""
        lo, hi = self.support
        inner = self.epsilon if sampled else _INNER
        order = 16 + 8 * level
        sides = []
        for sign, end in ((-1.0, -lo), (1.0, hi)):
            if end <= inner:
                continue
            b = list(geometric_breaks(inner, min(1.0, end), 2.0 ** (1.0 / (level + 1))))
            if end > 1.0:
                b += list(subdivide([1.0, end], 1.0 / (level + 1)))
            b += [sign * p for p in (*self.breaks, *breaks) if inner < sign * p < end]
            b = np.unique(b)
            x, w = panel_rule(b, order)
            dens = np.asarray(self.density(sign * x), dtype=float)
            if np.any(dens < 0) or not np.all(np.isfinite(dens)):
                raise ConfigError("custom Lévy density must be finite and nonnegative")
            sides.append((sign, b, sign * x, w * dens, order))
        return sides

    def _custom_rule(self, level: int, sampled: bool, breaks: Sequence[float]) -> SpaceRule:
        sides = self._custom_sides(level, sampled, breaks)
        rule = merge_rules(*[SpaceRule(x, w, 1) for _, _, x, w, _ in sides])
        order_ = np.argsort(rule.nodes, kind="stable")
        return SpaceRule(rule.nodes[order_], rule.weights[order_], 1)

    def _check_levy_integrability(self) -> None:
        """Numerical check that int min(1, x^2) nu(dx) is finite.

        Second-moment mass on consecutive dyadic shells must shrink toward
        the origin; equal or growing shells signal a non-Lévy density.
        """
        rule = self._custom_rule(0, False, ())
        x, w = rule.nodes, rule.weights
        vals = w * np.minimum(1.0, x * x)
        r = np.abs(x)
        a = vals[(r >= 2.0**-42) & (r < 2.0**-40)].sum()
        b = vals[(r >= 2.0**-40) & (r < 2.0**-38)].sum()
        if not np.isfinite(vals.sum()) or (b > 0 and a >= 0.999 * b) or (b == 0 and a > 0):
            raise ConfigError("Lévy density violates int min(1, x^2) nu(dx) < infinity")

    def _default_epsilon(self) -> float:
        rule = self._custom_rule(0, False, ())
        x, w = rule.nodes, rule.weights
        small = np.abs(x) < 1.0
        sq = w * x * x * small
        total = sq.sum()
        order_ = np.argsort(np.abs(x))
        cum = np.cumsum(sq[order_])
        k = np.searchsorted(cum, 1e-6 * total, side="right")
        return float(np.abs(x[order_][max(k - 1, 0)])) if k > 0 else _INNER

    def nu_integral(self, g: Callable, t: float = 0.0, region: str | None = None,
                    tilt: float = 0.0, sampled: bool = False, check: bool = True,
                    breaks: Sequence[float] = ()) -> float:
        """Integral of ``g(x, t)`` against the measure, optionally on one shell."""
        val = self.rule(tilt, 0, sampled, breaks).restrict(region).integrate(g, t)
        if check and not self._exact_rule():
            fine = self.rule(tilt, 1, sampled, breaks).restrict(region).integrate(g, t)
            check_agreement(val, fine, f"quadrature against {self.describe()}")
        return val

    def _exact_rule(self) -> bool:
        return self.kind == "CompoundPoisson" and isinstance(self.jump_law, DiscreteLaw)

    def mass(self, region: str | None = None, sampled: bool = True) -> float:
        """Mass of the (sampled) measure on a shell; infinite for infinite activity."""
        if self.kind in ("VarianceGamma", "TwoDimVarianceGamma", "Gamma"):
            if region == "large":
                return self.nu_integral(lambda x, t: 1.0, region="large")
            return math.inf
        if self.kind == "CompoundPoisson" and region is None:
            return self.intensity
        return float(self.rule(sampled=sampled).restrict(region).weights.sum())

    # sampling ------------------------------------------------------------------

    def sample_batch(self, horizon: float, rng: CounterRNG | int, paths,
                     grid: Sequence[float] | None = None) -> JumpBatch:
        """Sample jumps on (0, horizon] for the given global path indices.

        For the gamma and variance-gamma kinds each step of ``grid`` carries
        one event at its right end whose size is the exact increment of the
        process over the step.
        """
        if not horizon > 0:
            raise ConfigError("horizon must be positive")
        rng = rng if isinstance(rng, CounterRNG) else CounterRNG(rng)
        paths = np.atleast_1d(np.asarray(paths, dtype=np.int64))
        if self.kind in ("CompoundPoisson", "Custom"):
            return self._sample_finite(horizon, rng, paths)
        return self._sample_increments(horizon, rng, paths, grid)

    def _sample_finite(self, horizon: float, rng: CounterRNG, paths: np.ndarray) -> JumpBatch:
        if self.kind == "CompoundPoisson":
            mass = self.intensity
        else:
            table = self._inverse_cdf_table()
            mass = table[2]
        upaths = paths.astype(np.uint64)
        counts = rng.poisson(upaths, Substream.COUNT, mass * horizon) if mass > 0 else np.zeros(paths.size, np.int64)
        offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        total = int(offsets[-1])
        owner = np.repeat(np.arange(paths.size), counts)
        j = np.arange(total) - offsets[:-1][owner]
        gp = upaths[owner]
        ju = j.astype(np.uint64)
        times = rng.uniform(gp, Substream.TIMES, ju) * horizon
        if self.kind == "CompoundPoisson":
            sizes = self.jump_law.sample(rng, gp, ju) if total else self._empty_sizes()
        else:
            u = rng.uniform(gp, Substream.SIZES, ju)
            sizes = np.interp(u, table[0], table[1]) if total else self._empty_sizes()
        order = np.lexsort((times, owner))
        return JumpBatch(horizon, paths, offsets, times[order], sizes[order],
                         self.epsilon if self.kind == "Custom" else 0.0)

    def _empty_sizes(self) -> np.ndarray:
        return np.empty((0,) if self.dimension == 1 else (0, self.dimension))

    def _inverse_cdf_table(self):
        """Piecewise-linear inverse CDF of the sampled Custom measure.

        Panel masses equal those of the quadrature rule, so the simulated
        jump rate matches the compensators exactly; within a panel the
        density is resolved on 64 midpoint cells.
        """
        cached = self._cache.get("icdf")
        if cached is not None:
            return cached
        xs, cum = [], []
        total = 0.0
        for sign, b, _, w, order in self._custom_sides(0, True, ()):
            masses = w.reshape(-1, order).sum(axis=1)
            edges = b if sign > 0 else -b[::-1]
            pm = masses if sign > 0 else masses[::-1]
            for (a, c), mass in zip(zip(edges[:-1], edges[1:]), pm):
                cell = np.linspace(a, c, 65)
                mid = 0.5 * (cell[:-1] + cell[1:])
                d = np.asarray(self.density(mid), dtype=float) * np.diff(cell)
                d = d * (mass / d.sum()) if d.sum() > 0 else np.full(64, mass / 64)
                xs.append(cell)
                cum.append(total + np.concatenate([[0.0], np.cumsum(d)]))
                total += mass
        xs = np.concatenate(xs)
        u = np.concatenate(cum) / total
        table = (u, xs, total)
        self._cache["icdf"] = table
        return table

    def _sample_increments(self, horizon: float, rng: CounterRNG, paths: np.ndarray,
                           grid: Sequence[float] | None) -> JumpBatch:
        g = np.asarray([0.0, horizon] if grid is None else grid, dtype=float)
        if g[0] != 0.0:
            g = np.concatenate([[0.0], g])
        if np.any(np.diff(g) <= 0) or abs(g[-1] - horizon) > 1e-12 * max(1.0, horizon):
            raise GridError("grid must increase strictly from 0 to the horizon")
        dt = np.diff(g)
        k = dt.size
        m = self.intensity
        up = paths.astype(np.uint64)[:, None]
        idx = np.arange(k, dtype=np.uint64)[None, :]
        u = rng.uniform(up, Substream.SUBORDINATOR, idx)
        gam = special.gammaincinv(np.broadcast_to(m * dt, u.shape), u) / m
        if self.kind == "Gamma":
            sizes = gam
        else:
            n = self.dimension
            zi = idx[..., None] * np.uint64(n) + np.arange(n, dtype=np.uint64)
            z = rng.normal(up[..., None], Substream.SIZES, zi)
            sizes = np.sqrt(gam)[..., None] * z
            if n == 1:
                sizes = sizes[..., 0]
        norm = np.abs(sizes) if sizes.ndim == 2 else np.linalg.norm(sizes, axis=-1)
        keep = norm > 0
        counts = keep.sum(axis=1)
        offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        times = np.broadcast_to(g[1:], keep.shape)[keep]
        return JumpBatch(horizon, paths, offsets, times, sizes[keep], 0.0)


def _radial_cutoff(decay: float, tilt: float, level: int) -> float:
    """Outer radius of radial rules.

    Far enough for exp(-decay r) to be negligible, near enough for
    exp(tilt r) to stay representable.
    """
    want = (60.0 + 10.0 * level) / decay
    cap = 700.0 / tilt if tilt > 0 else np.inf
    rmax = max(2.0, min(want, cap))
    if decay * rmax < 36.0:
        raise DomainError("tilt too close to the edge of the exponent domain for quadrature")
    return rmax


def _radial_rule(density: Callable, decay: float, level: int,
                 breaks: Sequence[float] = (), tilt: float = 0.0) -> SpaceRule:
    """Rule on (0, infinity) for a density singular like 1/r at the origin."""
    if decay <= 0:
        raise DomainError("tilt reaches the edge of the exponent domain")
    order = 16 + 8 * level
    ratio = 2.0 ** (1.0 / (level + 1))
    inner = geometric_breaks(_INNER, 1.0, ratio)
    rmax = _radial_cutoff(decay, tilt, level)
    outer = geometric_breaks(1.0, rmax, ratio)
    b = np.unique(np.concatenate([inner, outer, [p for p in breaks if _INNER < p < outer[-1]]]))
    # keep outer panels no wider than a few decay lengths
    b = np.unique(np.concatenate([b[b <= 1.0], subdivide(b[b >= 1.0], max(4.0 / decay, 1.0))]))
    x, w = panel_rule(b, order)
    return SpaceRule(x, w * density(x), 1)


def _vg2d_rule(m: float, tilt: float, level: int) -> SpaceRule:
    """Polar rule for the planar variance-gamma measure.

    Radial density (m c / pi) K_1(c r) with c = sqrt(2m); periodic
    trapezoid in the angle with a node count that resolves exp(tilt r cos).
    """
    c = math.sqrt(2 * m)
    decay = c - tilt
    if decay <= 0:
        raise DomainError("tilt reaches the edge of the exponent domain")
    order = 12 + 6 * level
    ratio = 2.0 ** (1.0 / (level + 1))
    inner = geometric_breaks(2.0**-40, 1.0, ratio)
    rmax = _radial_cutoff(decay, tilt, level)
    outer = subdivide(geometric_breaks(1.0, rmax, ratio), max(4.0 / decay, 1.0))
    r, wr = panel_rule(np.unique(np.concatenate([inner, outer])), order)
    radial = wr * (m * c / math.pi) * special.k1e(c * r) * np.exp(-c * r)
    z = max(tilt, 1.0) * r
    n_theta = np.ceil((z + 10.0 * np.sqrt(z) + 24.0) * (1.0 + 0.5 * level) / 4.0).astype(int) * 4
    nodes, weights = [], []
    for nt in np.unique(n_theta):
        sel = n_theta == nt
        th = 2.0 * math.pi * (np.arange(nt) + 0.5) / nt
        rr = r[sel][:, None]
        nodes.append(np.stack([(rr * np.cos(th)).ravel(), (rr * np.sin(th)).ravel()], axis=-1))
        weights.append((radial[sel][:, None] * (2.0 * math.pi / nt) * np.ones(nt)).ravel())
    return SpaceRule(np.concatenate(nodes), np.concatenate(weights), 2)


# ---------------------------------------------------------------------------
# module-level operations


def levy_exponent(model: LevyModel, arg) -> float | np.ndarray:
    """Lévy exponent of ``model`` at ``arg``; see :meth:`LevyModel.exponent`."""
    return model.exponent(arg)


def sample_jump_path(model: LevyModel, horizon: float, rng: CounterRNG | int,
                     path_index: int = 0, grid: Sequence[float] | None = None) -> JumpPath:
    """Jumps of a single path; identical to the matching row of a batch."""
    return model.sample_batch(horizon, rng, [path_index], grid).path(0)


def sample_jump_batch(model: LevyModel, horizon: float, rng: CounterRNG | int, paths,
                      grid: Sequence[float] | None = None) -> JumpBatch:
    return model.sample_batch(horizon, rng, paths, grid)


__all__ = [
    "DiscreteLaw",
    "GaussianLaw",
    "JumpBatch",
    "JumpPath",
    "LevyModel",
    "levy_exponent",
    "log_jump_sum",
    "sample_jump_batch",
    "sample_jump_path",
    "gauss_legendre",
]
