"""Path containers and Brownian sampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .coeffs import time_fn
from .errors import DomainError, GridError
from .rng import CounterRNG, Substream


def check_grid(grid: Sequence[float]) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < 1 or g[0] != 0.0:
        raise GridError("time grid must be one-dimensional and start at 0")
    if np.any(np.diff(g) <= 0):
        raise GridError("time grid must be strictly increasing")
    return g


@dataclass(frozen=True, eq=False)
class ScalarPath:
    """One realised scalar process.

    Attributes
    ----------
    grid : ndarray
        Increasing times starting at 0; jump times are included.
    values : ndarray
        Value at each grid time (right-continuous).
    jump_times : ndarray
    left_limits : ndarray
        Value just before each jump time.
    meta : dict
        Inputs needed by downstream operators (coefficients, model, jumps).
    """

    grid: np.ndarray
    values: np.ndarray
    jump_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    left_limits: np.ndarray = field(default_factory=lambda: np.empty(0))
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError("values must align with the grid")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("path contains non-finite values")

    def at(self, t: float) -> float:
        """Value at time ``t`` (must be a grid point)."""
        i = np.searchsorted(self.grid, t)
        if i >= self.grid.size or abs(self.grid[i] - t) > 1e-12 * max(1.0, abs(t)):
            raise GridError(f"time {t} is not on the path grid")
        return float(self.values[i])

    @property
    def terminal(self) -> float:
        return float(self.values[-1])

    def left_limit(self, t: float) -> float:
        i = np.searchsorted(self.jump_times, t)
        if i < self.jump_times.size and self.jump_times[i] == t:
            return float(self.left_limits[i])
        return self.at(t)


@dataclass(frozen=True, eq=False)
class PathBundle:
    """Values of many paths on a shared grid; shape (n_paths, len(grid))."""

    grid: np.ndarray
    values: np.ndarray
    paths: np.ndarray | None = None

    def column(self, t: float) -> np.ndarray:
        i = np.searchsorted(self.grid, t)
        if i >= self.grid.size or abs(self.grid[i] - t) > 1e-12 * max(1.0, abs(t)):
            raise GridError(f"time {t} is not on the bundle grid")
        return self.values[:, i]

    @property
    def terminal(self) -> np.ndarray:
        return self.values[:, -1]


@dataclass(frozen=True, eq=False)
class BrownianBatch:
    """Increments of a d-dimensional Brownian motion on a grid.

    ``increments`` has shape (n_paths, K, d) for a grid with K steps.
    Between grid points the path is taken as linear, which only affects
    values reported at off-grid jump times.
    """

    grid: np.ndarray
    increments: np.ndarray

    @property
    def dim(self) -> int:
        return self.increments.shape[2]

    @property
    def n_paths(self) -> int:
        return self.increments.shape[0]

    def values(self) -> np.ndarray:
        """W at grid times, shape (n_paths, K+1, d)."""
        w = np.cumsum(self.increments, axis=1)
        return np.concatenate([np.zeros((self.n_paths, 1, self.dim)), w], axis=1)

    def path(self, p: int) -> "BrownianBatch":
        return BrownianBatch(self.grid, self.increments[p:p + 1])

    def _fractions(self, times: np.ndarray):
        g = self.grid
        if np.any(times < 0) or np.any(times > g[-1] * (1 + 1e-12)):
            raise GridError("query time outside the Brownian grid")
        # weight of step k in the integral up to t: 1 for complete steps, partial otherwise
        dt = np.diff(g)
        frac = np.clip((times[:, None] - g[None, :-1]) / dt[None, :], 0.0, 1.0)
        return frac, dt

    def integral(self, beta, times) -> np.ndarray:
        """Left-point sums of beta(t_{k-1}) . dW_k up to each time; shape (P, T)."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        frac, _ = self._fractions(times)
        b = time_fn(beta, self.dim)(self.grid[:-1])
        proj = np.einsum("pkd,kd->pk", self.increments, b)
        return proj @ frac.T

    def quadratic_variation(self, beta, times) -> np.ndarray:
        """Left-point sums of |beta(t_{k-1})|^2 dt_k; shape (T,)."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        frac, dt = self._fractions(times)
        b = time_fn(beta, self.dim)(self.grid[:-1])
        return frac @ ((b * b).sum(axis=1) * dt)

    def cross_variation(self, beta, gamma, times) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        frac, dt = self._fractions(times)
        b = time_fn(beta, self.dim)(self.grid[:-1])
        c = time_fn(gamma, self.dim)(self.grid[:-1])
        return frac @ ((b * c).sum(axis=1) * dt)


def sample_brownian(grid: Sequence[float], dim: int, rng: CounterRNG | int, paths) -> BrownianBatch:
    """Brownian increments on ``grid`` for the given global path indices."""
    g = check_grid(grid)
    rng = rng if isinstance(rng, CounterRNG) else CounterRNG(rng)
    paths = np.atleast_1d(np.asarray(paths, dtype=np.uint64))
    k = g.size - 1
    idx = (np.arange(k, dtype=np.uint64)[:, None] * np.uint64(dim) + np.arange(dim, dtype=np.uint64)[None, :])
    z = rng.normal(paths[:, None, None], Substream.BROWNIAN, idx[None, :, :])
    return BrownianBatch(g, z * np.sqrt(np.diff(g))[None, :, None])


def merge_grid(grid: Sequence[float], extra: Sequence[float]) -> np.ndarray:
    g = check_grid(grid)
    extra = np.asarray(extra, dtype=float)
    if extra.size and (extra.max() > g[-1] * (1 + 1e-12) or extra.min() <= 0):
        raise GridError("jump times fall outside the grid")
    return np.union1d(g, extra)


def assemble_path(grid, jump_times, evaluate: Callable, meta: dict | None = None) -> ScalarPath:
    """Build a :class:`ScalarPath` from a batch evaluator.

    ``evaluate(times, strict)`` returns values of shape (1, len(times));
    ``strict=True`` requests left limits.
    """
    full = merge_grid(grid, jump_times)
    vals = evaluate(full, False)[0]
    jt = np.asarray(jump_times, dtype=float)
    left = evaluate(jt, True)[0] if jt.size else np.empty(0)
    return ScalarPath(full, vals, jt, left, meta or {})
