"""Normalisation of deterministic coefficient callables.

Users may pass numbers, arrays or callables; these helpers turn each into
a vectorised callable with a predictable output shape.
"""

from __future__ import annotations

from typing import Callable

import numpy as np


def time_fn(c, dim: int | None = None) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorised ``f(t)``.

    With ``dim=None`` the output has the shape of ``t``; otherwise shape
    ``t.shape + (dim,)``.
    """
    if c is None:
        c = 0.0 if dim is None else np.zeros(dim)
    if callable(c):
        def f(t):
            t = np.asarray(t, dtype=float)
            out = np.asarray(c(t), dtype=float)
            shape = t.shape if dim is None else t.shape + (dim,)
            if out.shape != shape:
                out = np.broadcast_to(out, shape)
            return out
        return f
    val = np.asarray(c, dtype=float)
    if dim is not None:
        val = np.broadcast_to(val, (dim,))

    def const(t):
        t = np.asarray(t, dtype=float)
        shape = t.shape if dim is None else t.shape + (dim,)
        return np.broadcast_to(val, shape)

    const.constant = val
    return const


def space_time_fn(c) -> Callable:
    """Vectorised ``f(x, t)``; constants are broadcast over the leading axes."""
    if c is None:
        c = 0.0
    if callable(c):
        return c
    val = float(c)

    def const(x, t):
        # callers broadcast against the point axes they know about
        return np.full(np.shape(t), val)

    const.constant = val
    return const


def is_zero(c) -> bool:
    if c is None:
        return True
    if callable(c):
        val = getattr(c, "constant", None)
        return val is not None and np.all(np.asarray(val) == 0)
    return bool(np.all(np.asarray(c) == 0))


def lead_shape(x, dimension: int) -> tuple:
    """Shape of the point axes of ``x`` for a model of the given dimension."""
    x = np.asarray(x)
    return x.shape if dimension == 1 else x.shape[:-1]


def linear(vec) -> Callable:
    """``x -> vec . x`` as a space-time callable (time independent)."""
    v = np.asarray(vec, dtype=float)
    if v.ndim == 0 or v.size == 1:
        a = float(v.ravel()[0]) if v.ndim else float(v)

        def lin1(x, t):
            return a * np.asarray(x, dtype=float)

        lin1.vector = np.atleast_1d(a)
        return lin1

    def lin(x, t):
        return np.asarray(x, dtype=float) @ v

    lin.vector = v
    return lin
