"""Composite Gauss-Legendre rules shared by the assembly and reference code."""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(order):
    """Nodes and weights on [-1, 1]; cached because assembly asks repeatedly."""
    t, w = np.polynomial.legendre.leggauss(order)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def panel_nodes(edges, order=16):
    """Map a Gauss rule onto every panel defined by consecutive ``edges``.

    Returns flat arrays (x, w) so that ``sum(w * f(x))`` integrates f over
    ``[edges[0], edges[-1]]``.
    """
    edges = np.asarray(edges, dtype=float)
    t, w = gauss_legendre(order)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    x = a + half * (t + 1.0)
    return x.ravel(), (half * w).ravel()


def composite(func, a, b, breaks=(), panels=8, order=16):
    """Integrate ``func`` on [a, b] with panels refined between breakpoints.

    ``func`` must accept a 1D array and return an array of the same shape
    (real or complex). Breakpoints outside (a, b) are ignored.
    """
    if b <= a:
        return 0.0
    cuts = [a] + sorted(p for p in breaks if a < p < b) + [b]
    edges = np.concatenate(
        [np.linspace(lo, hi, panels + 1)[:-1] for lo, hi in zip(cuts[:-1], cuts[1:])]
        + [[b]]
    )
    x, w = panel_nodes(edges, order)
    return np.sum(w * func(x))


def adaptive(func, a, b, breaks=(), tol=1e-13, panels=4, order=16, max_panels=4096):
    """Panel-doubling composite rule: refine until two successive levels agree.

    Returns ``(value, error_estimate)``; the caller decides whether the
    estimate is acceptable.
    """
    prev = composite(func, a, b, breaks, panels, order)
    while True:
        panels *= 2
        cur = composite(func, a, b, breaks, panels, order)
        err = abs(cur - prev)
        if err <= tol * max(1.0, abs(cur)) or panels >= max_panels:
            return cur, err
        prev = cur
