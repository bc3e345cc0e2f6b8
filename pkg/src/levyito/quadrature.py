"""Fixed-rule quadrature in time and over Lévy measures.

Everything here is built from composite Gauss-Legendre panels.  A rule is
evaluated once on a tensor of (space nodes x time nodes), which keeps the
compensator computations vectorised.  Accuracy is guarded by comparing a
rule against a refined copy of itself and raising :class:`QuadratureError`
when the two disagree.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import legendre

from .errors import QuadratureError, TailError

ATOL = 1e-10
RTOL = 1e-8


@functools.lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = legendre.leggauss(order)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(breaks: Sequence[float], order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule over consecutive ``breaks``."""
    b = np.asarray(breaks, dtype=float)
    if b.size < 2:
        return np.empty(0), np.empty(0)
    a, h = b[:-1], np.diff(b)
    x, w = gauss_legendre(order)
    nodes = (a[:, None] + h[:, None] * x[None, :]).ravel()
    weights = (h[:, None] * w[None, :]).ravel()
    return nodes, weights


def subdivide(breaks: Sequence[float], max_width: float) -> np.ndarray:
    """Insert points so that no panel is wider than ``max_width``."""
    b = np.unique(np.asarray(breaks, dtype=float))
    out = [b[:1]]
    for lo, hi in zip(b[:-1], b[1:]):
        k = max(1, int(math.ceil((hi - lo) / max_width - 1e-12)))
        out.append(np.linspace(lo, hi, k + 1)[1:])
    return np.concatenate(out)


def geometric_breaks(lo: float, hi: float, ratio: float = 2.0) -> np.ndarray:
    """Breaks from ``lo`` to ``hi`` (both > 0) growing by ``ratio``."""
    k = max(1, int(math.ceil(math.log(hi / lo) / math.log(ratio) - 1e-12)))
    b = lo * ratio ** np.arange(k + 1.0)
    b[-1] = hi
    return b


def check_agreement(coarse, fine, what: str, atol: float = ATOL, rtol: float = RTOL) -> None:
    coarse = np.asarray(coarse, dtype=float)
    fine = np.asarray(fine, dtype=float)
    err = np.abs(coarse - fine)
    bad = err > atol + rtol * np.abs(fine)
    if np.any(bad) or not np.all(np.isfinite(fine)):
        raise QuadratureError(
            f"{what}: refinement check failed (max error {float(np.nanmax(err)):.3e})"
        )


# ---------------------------------------------------------------------------
# space rules


@dataclass(frozen=True, eq=False)
class SpaceRule:
    """Discrete approximation sum_q w_q g(x_q) of an integral against nu.

    ``nodes`` has shape (Q,) in one dimension and (Q, n) otherwise.
    """

    nodes: np.ndarray
    weights: np.ndarray
    dimension: int

    @property
    def size(self) -> int:
        return int(self.weights.size)

    def norms(self) -> np.ndarray:
        if self.dimension == 1:
            return np.abs(self.nodes)
        return np.linalg.norm(self.nodes, axis=-1)

    def restrict(self, region: str | None) -> "SpaceRule":
        """Restrict to the small shell (|x| < 1) or the large shell (|x| >= 1)."""
        if region is None or region == "all":
            return self
        r = self.norms()
        if region == "small":
            keep = r < 1.0
        elif region == "large":
            keep = r >= 1.0
        else:
            raise ValueError(f"unknown region {region!r}")
        return SpaceRule(self.nodes[keep], self.weights[keep], self.dimension)

    def space_nodes(self, extra_axes: int = 0) -> np.ndarray:
        """Nodes with ``extra_axes`` singleton axes for broadcasting against time."""
        x = self.nodes
        if self.dimension == 1:
            return x.reshape(x.shape + (1,) * extra_axes)
        return x.reshape((x.shape[0],) + (1,) * extra_axes + (x.shape[1],))

    def integrate(self, g: Callable, t=0.0) -> float:
        """Integrate ``g(x, t)`` over x at a single time."""
        vals = np.broadcast_to(g(self.nodes, t), self.weights.shape)
        return float(self.weights @ vals)

    def integrate_over_time(self, g: Callable, s: np.ndarray) -> np.ndarray:
        """Return ``h(s) = sum_q w_q g(x_q, s)`` for an array of times."""
        s = np.asarray(s, dtype=float)
        if s.ndim == 0:
            return np.asarray(self.integrate(g, float(s)))
        x = self.space_nodes(1)
        vals = np.broadcast_to(g(x, s[None, :]), (self.size, s.size))
        return self.weights @ vals


def merge_rules(*rules: SpaceRule) -> SpaceRule:
    dim = rules[0].dimension
    nodes = np.concatenate([r.nodes for r in rules], axis=0)
    weights = np.concatenate([r.weights for r in rules])
    return SpaceRule(nodes, weights, dim)


# ---------------------------------------------------------------------------
# time rules


class Antiderivative:
    """Cumulative integral ``H(t) = int_a^t h(s) ds`` of a vectorised ``h``.

    Exact panel sums are tabulated at the breaks; evaluation at an
    arbitrary point adds a Gauss-Legendre integral over the partial panel.

    Parameters
    ----------
    h : callable
        Vectorised function of time.
    breaks : sequence of float
        Points where ``h`` may be non-smooth; the first and last define the
        domain.
    order : int
        Gauss-Legendre order per panel.
    max_width : float
        Maximum panel width after subdivision.
    grade0 : bool
        Use the substitution ``s = a + u**2`` on the first panel, which
        absorbs inverse square-root behaviour at the left end.
    check : bool
        Compare the panel sums against a higher-order rule.
    """

    def __init__(
        self,
        h: Callable,
        breaks: Sequence[float],
        order: int = 16,
        max_width: float = 1.0,
        grade0: bool = False,
        check: bool = True,
    ):
        self.h = h
        self.order = order
        self.grade0 = grade0
        self.breaks = subdivide(breaks, max_width)
        if self.breaks.size < 2:
            self.breaks = np.array([self.breaks[0], self.breaks[0]])
        sums = self._panel_sums(self.breaks[:-1], self.breaks[1:], order)
        if check:
            fine = self._panel_sums(self.breaks[:-1], self.breaks[1:], order + 8)
            check_agreement(np.cumsum(sums), np.cumsum(fine), "time quadrature")
        self.cumulative = np.concatenate([[0.0], np.cumsum(sums)])

    @property
    def lower(self) -> float:
        return float(self.breaks[0])

    @property
    def upper(self) -> float:
        return float(self.breaks[-1])

    def _panel_sums(self, lo: np.ndarray, hi: np.ndarray, order: int) -> np.ndarray:
        x, w = gauss_legendre(order)
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        width = hi - lo
        if self.grade0:
            # first panel only (the one touching the left end of the domain)
            first = lo == self.breaks[0]
        else:
            first = np.zeros(lo.shape, dtype=bool)
        out = np.zeros(lo.shape)
        reg = ~first
        if np.any(reg):
            s = lo[reg, None] + width[reg, None] * x[None, :]
            out[reg] = (self._h(s) * w[None, :]).sum(axis=1) * width[reg]
        if np.any(first):
            root = np.sqrt(width[first])
            u = root[:, None] * x[None, :]
            s = lo[first, None] + u * u
            out[first] = (self._h(s) * 2.0 * u * w[None, :]).sum(axis=1) * root
        return out

    def _h(self, s: np.ndarray) -> np.ndarray:
        vals = np.asarray(self.h(s.ravel()), dtype=float)
        return np.broadcast_to(vals, s.size).reshape(s.shape)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        if np.any(t < self.lower - 1e-12) or np.any(t > self.upper * (1 + 1e-12) + 1e-12):
            raise ValueError(
                f"evaluation point outside [{self.lower}, {self.upper}]"
            )
        t = np.clip(t, self.lower, self.upper)
        idx = np.clip(np.searchsorted(self.breaks, t, side="right") - 1, 0, self.breaks.size - 2)
        start = self.breaks[idx]
        out = self.cumulative[idx].copy()
        part = t > start
        if np.any(part):
            out[part] += self._panel_sums(start[part], t[part], self.order)
        return out[0] if scalar else out


def integrate_time(h: Callable, a: float, b: float, breaks: Sequence[float] = (),
                   order: int = 16, max_width: float = 1.0, grade0: bool = False,
                   check: bool = True) -> float:
    """Definite integral of ``h`` over [a, b] with optional interior breaks."""
    if b <= a:
        return 0.0
    pts = [a, b] + [p for p in breaks if a < p < b]
    return float(Antiderivative(h, sorted(pts), order, max_width, grade0, check).cumulative[-1])


def integrate_to_infinity(h: Callable, a: float, cap: float, breaks: Sequence[float] = (),
                          order: int = 16, grade0: bool = False, check: bool = True,
                          tail_tol: float = 1e-14, max_doublings: int = 40) -> float:
    """Integral of ``h`` over [a, infinity).

    The interval [a, cap] is handled by :func:`integrate_time`.  Beyond the
    cap, panels double in width until a panel contributes less than
    ``tail_tol`` relative to the running total; :class:`TailError` is raised
    otherwise.
    """
    head = integrate_time(h, a, max(a, cap), breaks, order, 1.0, grade0, check)
    lo = max(a, cap)
    width = max(1.0, lo)
    total = head
    tail = 0.0
    for _ in range(max_doublings):
        pts = [lo, lo + width] + [p for p in breaks if lo < p < lo + width]
        piece = integrate_time(h, lo, lo + width, pts, order, max(width / 4, 1.0), False, check)
        tail += piece
        total = head + tail
        lo += width
        width *= 2.0
        if abs(piece) <= tail_tol * max(abs(total), 1e-300):
            return total
    raise TailError(f"integrand not negligible at t={lo:.4g}")
