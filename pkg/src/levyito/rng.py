"""Counter-based random streams keyed on (seed, path, substream).

Every draw is a pure function of ``(master_seed, path_index, substream,
draw_index)`` evaluated with the Philox4x64-10 bijection, vectorised over
numpy arrays.  Nothing is stateful, so a batch of paths can be split
between workers in any way without changing a single bit of output.
"""

from __future__ import annotations

import enum

import numpy as np
from scipy import special

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_LO32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)


class Substream(enum.IntEnum):
    """Independent sources of randomness within one path."""

    COUNT = 1
    TIMES = 2
    SIZES = 3
    BROWNIAN = 4
    SUBORDINATOR = 5
    AUX = 6


def _mulhilo(a: np.ndarray, b: np.uint64) -> tuple[np.ndarray, np.ndarray]:
    a_lo, a_hi = a & _LO32, a >> _S32
    b_lo, b_hi = b & _LO32, b >> _S32
    p0 = a_lo * b_lo
    p1 = a_lo * b_hi
    p2 = a_hi * b_lo
    p3 = a_hi * b_hi
    mid = (p0 >> _S32) + (p1 & _LO32) + (p2 & _LO32)
    hi = p3 + (p1 >> _S32) + (p2 >> _S32) + (mid >> _S32)
    return hi, a * b


def philox4x64(counter: np.ndarray, key: np.ndarray, rounds: int = 10) -> np.ndarray:
    """Philox4x64 block function.

    ``counter`` has shape (..., 4) and ``key`` shape (2,) or (..., 2), both
    uint64.  Returns an array shaped like ``counter``.
    """
    c = np.asarray(counter, dtype=np.uint64)
    k = np.asarray(key, dtype=np.uint64)
    c0, c1, c2, c3 = (c[..., i].copy() for i in range(4))
    k0 = np.broadcast_to(k[..., 0], c0.shape).copy()
    k1 = np.broadcast_to(k[..., 1], c0.shape).copy()
    with np.errstate(over="ignore"):
        for r in range(rounds):
            if r:
                k0 += _W0
                k1 += _W1
            hi0, lo0 = _mulhilo(c0, _M0)
            hi1, lo1 = _mulhilo(c2, _M1)
            c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return np.stack([c0, c1, c2, c3], axis=-1)


def _to_unit(bits: np.ndarray) -> np.ndarray:
    # 53-bit mantissa, shifted by half an ulp so 0 and 1 never occur
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


class CounterRNG:
    """Stateless generator addressed by (path, substream, draw index)."""

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = seed
        self._key = np.array([seed & 0xFFFFFFFFFFFFFFFF, 0x4C4556594954], dtype=np.uint64)

    def __repr__(self) -> str:
        return f"CounterRNG(seed={self.seed})"

    def child(self, tag: int) -> "CounterRNG":
        """Generator with the same seed and a disjoint key, one per ``tag``."""
        out = CounterRNG(self.seed)
        mixed = (0x4C4556594954 ^ ((int(tag) + 1) * 0x9E3779B97F4A7C15)) & 0xFFFFFFFFFFFFFFFF
        out._key = np.array([self._key[0], mixed], dtype=np.uint64)
        return out

    def bits(self, path, substream: int, index) -> np.ndarray:
        """Raw 64-bit words for broadcast arrays of path and draw indices."""
        path, index = np.broadcast_arrays(
            np.asarray(path, dtype=np.uint64), np.asarray(index, dtype=np.uint64)
        )
        block = index >> np.uint64(2)
        lane = (index & np.uint64(3)).astype(np.intp)
        ctr = np.stack(
            [block, path, np.full_like(block, np.uint64(substream)), np.zeros_like(block)],
            axis=-1,
        )
        out = philox4x64(ctr, self._key)
        return np.take_along_axis(out, lane[..., None], axis=-1)[..., 0]

    def uniform(self, path, substream: int, index) -> np.ndarray:
        return _to_unit(self.bits(path, substream, index))

    def normal(self, path, substream: int, index) -> np.ndarray:
        return special.ndtri(self.uniform(path, substream, index))

    def poisson(self, path, substream: int, mean) -> np.ndarray:
        """One Poisson draw per path, by inversion of a single uniform."""
        u = self.uniform(path, substream, 0)
        mean = np.broadcast_to(np.asarray(mean, dtype=float), u.shape)
        out = np.zeros(u.shape, dtype=np.int64)
        pos = mean > 0
        if np.any(pos):
            # pdtrik inverts the CDF continuously; round up to the integer quantile
            k = np.ceil(special.pdtrik(u[pos], mean[pos]) - 1e-9)
            k = np.maximum(k, 0).astype(np.int64)
            # guard the boundary where ceil lands one step high or low
            lo = special.pdtr(k - 1, mean[pos]) >= u[pos]
            k = np.where(lo & (k > 0), k - 1, k)
            hi = special.pdtr(k, mean[pos]) < u[pos]
            out[pos] = np.where(hi, k + 1, k)
        return out

    def gamma(self, path, substream: int, index, shape) -> np.ndarray:
        """Unit-rate gamma variates by inversion."""
        u = self.uniform(path, substream, index)
        return special.gammaincinv(np.broadcast_to(shape, u.shape), u)


class PathStream:
    """Convenience view of a :class:`CounterRNG` pinned to one path."""

    def __init__(self, rng: CounterRNG | int, path_index: int):
        self.rng = rng if isinstance(rng, CounterRNG) else CounterRNG(rng)
        self.path_index = int(path_index)

    def uniform(self, substream: int, n: int) -> np.ndarray:
        return self.rng.uniform(self.path_index, substream, np.arange(n))

    def normal(self, substream: int, n: int) -> np.ndarray:
        return self.rng.normal(self.path_index, substream, np.arange(n))
