"""Deterministic Monte Carlo harness.

Path ``p`` draws all its randomness from counters keyed on
``(master_seed, p, substream)``, so a path's value does not depend on which
batch or worker evaluated it.  Per-path values are gathered in index order
and reduced with :func:`math.fsum`, which fixes the result to the last bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, LevyItoError, PathError
from .rng import CounterRNG, PathStream


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on [0, horizon] with ``steps`` steps."""

    horizon: float
    steps: int = 1

    def __post_init__(self):
        if not self.horizon > 0:
            raise ConfigError("grid horizon must be positive")
        if self.steps < 1:
            raise ConfigError("grid needs at least one step")

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.steps + 1)


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo run parameters.

    Attributes
    ----------
    master_seed : int
        Unsigned 64-bit seed.
    n_paths : int
    grid : TimeGrid, optional
    worker_hint : int, optional
        Number of threads; never changes the result.
    batch_size : int
        Paths per vectorised batch.
    """

    master_seed: int
    n_paths: int
    grid: TimeGrid | None = None
    worker_hint: int | None = None
    batch_size: int = 25_000

    def __post_init__(self):
        if self.n_paths < 1:
            raise ConfigError("n_paths must be at least 1")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        if self.worker_hint is not None and self.worker_hint < 1:
            raise ConfigError("worker_hint must be positive")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be positive")

    @property
    def rng(self) -> CounterRNG:
        return CounterRNG(self.master_seed)

    def chunks(self) -> list[np.ndarray]:
        idx = np.arange(self.n_paths, dtype=np.int64)
        return [idx[i:i + self.batch_size] for i in range(0, self.n_paths, self.batch_size)]


@dataclass(frozen=True)
class Estimate:
    """Sample mean with its standard error."""

    mean: float
    stderr: float
    n: int

    def within(self, target: float, k: float = 3.0) -> bool:
        """True when ``|mean - target| <= k * stderr``.

        A slack of a few ulps of the target absorbs rounding when the
        per-path values are deterministic.
        """
        slack = 16 * np.finfo(float).eps * max(1.0, abs(target))
        return abs(self.mean - target) <= k * self.stderr + slack

    def zscore(self, target: float) -> float:
        diff = self.mean - target
        if self.stderr == 0:
            return 0.0 if diff == 0 else math.copysign(math.inf, diff)
        return diff / self.stderr

    def __str__(self) -> str:
        return f"{self.mean:.6g} +/- {self.stderr:.2g} (n={self.n})"


def estimate(values) -> Estimate:
    """Estimate from per-path values using exactly rounded sums."""
    v = np.asarray(values, dtype=float).ravel()
    n = v.size
    if n == 0:
        raise ConfigError("no samples")
    if not np.all(np.isfinite(v)):
        raise LevyItoError("non-finite per-path value")
    mean = math.fsum(v) / n
    if n == 1:
        return Estimate(mean, 0.0, 1)
    var = math.fsum((v - mean) ** 2) / (n - 1)
    return Estimate(mean, math.sqrt(var / n), n)


def estimate_columns(values) -> list[Estimate]:
    v = np.asarray(values, dtype=float)
    return [estimate(v[:, j]) for j in range(v.shape[1])]


def collect(config: McConfig, batch_functional: Callable[[CounterRNG, np.ndarray], np.ndarray]) -> np.ndarray:
    """Per-path values of a vectorised functional, in path order.

    ``batch_functional(rng, paths)`` receives global path indices and must
    return an array whose leading axis matches ``paths``.
    """
    rng = config.rng
    chunks = config.chunks()

    def run(paths):
        out = np.asarray(batch_functional(rng, paths))
        if out.shape[:1] != paths.shape:
            raise ConfigError("batch functional returned the wrong number of rows")
        return out

    workers = config.worker_hint or 1
    if workers == 1 or len(chunks) == 1:
        parts = [run(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    return np.concatenate(parts, axis=0)


def run_batch(config: McConfig, batch_functional) -> Estimate:
    """Estimate from a vectorised functional returning one value per path."""
    return estimate(collect(config, batch_functional))


def run_paths(config: McConfig, path_functional: Callable[[PathStream], float]) -> Estimate:
    """Estimate from a scalar functional evaluated path by path.

    The first failing path is reported as :class:`PathError` carrying its
    index.
    """
    rng = config.rng

    def run(paths):
        vals = np.empty(paths.size)
        for i, p in enumerate(paths):
            try:
                vals[i] = float(path_functional(PathStream(rng, int(p))))
            except Exception as exc:  # noqa: BLE001
                raise PathError(int(p), exc) from exc
        return vals

    chunks = config.chunks()
    workers = config.worker_hint or 1
    if workers == 1 or len(chunks) == 1:
        parts = [run(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    return estimate(np.concatenate(parts))


def slope_estimate(values: np.ndarray, t: float, offset: float = 0.0) -> Estimate:
    """Estimate of ``mean(values) / t + offset``."""
    e = estimate(np.asarray(values) / t)
    return Estimate(e.mean + offset, e.stderr, e.n)


def grid_with(times: Sequence[float], horizon: float | None = None) -> np.ndarray:
    """Sorted unique grid starting at zero that contains ``times``."""
    pts = set(float(t) for t in times)
    pts.add(0.0)
    if horizon is not None:
        pts.add(float(horizon))
    return np.array(sorted(pts))
