from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyito.rng import CounterRNG, PathStream, philox4x64


def test_philox_is_deterministic_and_key_sensitive():
    ctr = np.array([[1, 2, 3, 4]], dtype=np.uint64)
    k1 = np.array([5, 6], dtype=np.uint64)
    k2 = np.array([5, 7], dtype=np.uint64)
    a = philox4x64(ctr, k1)
    assert np.array_equal(a, philox4x64(ctr, k1))
    assert not np.array_equal(a, philox4x64(ctr, k2))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), path=st.integers(0, 10**9), idx=st.integers(0, 10**6),
       sub=st.integers(0, 7))
def test_draws_are_addressed_not_sequential(seed, path, idx, sub):
    rng = CounterRNG(seed)
    single = rng.uniform(path, sub, idx)
    batch = rng.uniform(np.array([path, path + 1]), sub, np.array([idx, idx]))
    assert single == batch[0]
    assert 0.0 < single < 1.0


def test_substreams_and_paths_differ():
    rng = CounterRNG(3)
    a = rng.uniform(0, 0, np.arange(64))
    assert not np.array_equal(a, rng.uniform(0, 1, np.arange(64)))
    assert not np.array_equal(a, rng.uniform(1, 0, np.arange(64)))


def test_child_streams_are_distinct_and_reproducible():
    rng = CounterRNG(11)
    c0, c1 = rng.child(0), rng.child(1)
    u = rng.uniform(0, 0, np.arange(32))
    assert not np.array_equal(u, c0.uniform(0, 0, np.arange(32)))
    assert not np.array_equal(c0.uniform(0, 0, np.arange(32)), c1.uniform(0, 0, np.arange(32)))
    assert np.array_equal(c1.uniform(0, 0, np.arange(32)), CounterRNG(11).child(1).uniform(0, 0, np.arange(32)))


def test_distribution_moments():
    rng = CounterRNG(2024)
    n = 200_000
    u = rng.uniform(np.arange(n), 0, 0)
    z = rng.normal(np.arange(n), 1, 0)
    p = rng.poisson(np.arange(n), 2, 3.5)
    g = rng.gamma(np.arange(n), 3, 0, 2.0)
    assert abs(u.mean() - 0.5) < 4 * np.sqrt(1 / 12 / n)
    assert abs(z.mean()) < 4 / np.sqrt(n)
    assert abs(z.var() - 1) < 4 * np.sqrt(2 / n)
    assert abs(p.mean() - 3.5) < 4 * np.sqrt(3.5 / n)
    assert abs(g.mean() - 2.0) < 4 * np.sqrt(2.0 / n)


def test_path_stream_matches_generator():
    rng = CounterRNG(9)
    ps = PathStream(rng, 17)
    assert np.array_equal(ps.normal(4, 10), rng.normal(17, 4, np.arange(10)))


def test_seed_range():
    with pytest.raises(ValueError):
        CounterRNG(-1)
    with pytest.raises(ValueError):
        CounterRNG(2**64)
