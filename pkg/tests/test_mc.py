from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyito.errors import ConfigError
from levyito.mc import Estimate, McConfig, TimeGrid, collect, estimate, grid_with, run_batch, run_paths


def _normal(rng, paths):
    return rng.normal(paths, 0, 0)


@settings(max_examples=10, deadline=None)
@given(batch=st.integers(1, 5000), workers=st.integers(1, 6))
def test_results_independent_of_batching_and_workers(batch, workers):
    ref = collect(McConfig(1, 5000), _normal)
    other = collect(McConfig(1, 5000, worker_hint=workers, batch_size=batch), _normal)
    assert np.array_equal(ref, other)


def test_estimate_and_within():
    e = estimate([1.0, 2.0, 3.0, 4.0])
    assert e.mean == 2.5 and e.n == 4
    assert e.stderr == pytest.approx(math.sqrt(np.var([1, 2, 3, 4], ddof=1) / 4))
    assert e.within(2.5 + 2.9 * e.stderr) and not e.within(2.5 + 3.1 * e.stderr)
    assert Estimate(1.0, 0.0, 5).within(1.0 + 1e-16)
    assert Estimate(1.0, 0.0, 5).zscore(2.0) == -math.inf


def test_run_batch_and_run_paths_agree():
    a = run_batch(McConfig(4, 2000), _normal)
    b = run_paths(McConfig(4, 2000), lambda ps: float(ps.rng.normal(ps.path_index, 0, 0)))
    assert a.mean == pytest.approx(b.mean, abs=1e-15)


def test_config_validation():
    with pytest.raises(ConfigError):
        McConfig(0, 0)
    with pytest.raises(ConfigError):
        McConfig(-1, 10)
    with pytest.raises(ConfigError):
        McConfig(0, 10, worker_hint=0)
    g = TimeGrid(2.0, 4)
    assert np.allclose(g.times(), [0, 0.5, 1, 1.5, 2])
    assert np.array_equal(grid_with([1.0, 0.5], 2.0), [0.0, 0.5, 1.0, 2.0])
