"""Ground truth for small problems: exhaustive search and dense quadrature.

Everything here trades speed for trustworthiness; it exists so the fast paths
have something exact to be measured against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .constants import Constants, DEFAULTS
from .dp import edge_weight
from .errors import TooLarge
from .grid import FitGrid
from .pwfunc import DomainKind, PiecewiseLinearDensity

MAX_ENUMERATION = 10 ** 7


def riemann_l1(f, g, lo: float, hi: float, points: int = 10 ** 6,
               domain: DomainKind = DomainKind.REAL) -> float:
    """Composite-midpoint ||f-g||_1 on [lo, hi]; exact inclusive sum on Z."""
    if domain is DomainKind.INTEGER:
        xs = np.arange(math.ceil(lo), math.floor(hi) + 1, dtype=float)
        if xs.size == 0:
            return 0.0
        return float(np.sum(np.abs(np.asarray(f(xs)) - np.asarray(g(xs)))))
    if points < 10 ** 3:
        raise ValueError("riemann_l1 needs at least 1000 points")
    h = (hi - lo) / points
    xs = lo + (np.arange(points) + 0.5) * h
    return float(np.sum(np.abs(np.asarray(f(xs)) - np.asarray(g(xs)))) * h)


def tv_against(density, family, points: int = 400001) -> float:
    """Total variation between an explicit density and a known family."""
    d_lo, d_hi = density.support()
    f_lo, f_hi = family.support()
    lo = min(d_lo, max(f_lo, family.mean - 12.0 * family.std))
    hi = max(d_hi, min(f_hi, family.mean + 12.0 * family.std))
    if density.domain is DomainKind.INTEGER:
        xs = np.arange(math.floor(lo), math.ceil(hi) + 1, dtype=float)
        return 0.5 * float(np.sum(np.abs(density.eval_array(xs) - family.pdf(xs))))
    step = (hi - lo) / points
    xs = lo + (np.arange(points) + 0.5) * step
    inside = 0.5 * float(np.sum(np.abs(density.eval_array(xs) - family.pdf(xs))) * step)
    # family mass outside the integration range counts in full
    tail = family.cdf(lo) + (1.0 - family.cdf(hi))
    return min(inside + 0.5 * tail, 1.0)


@dataclass
class TinyInstance:
    """A fit problem small enough for exhaustive search."""

    grid: FitGrid
    g: PiecewiseLinearDensity
    scale: float = 1.0
    consts: Constants = field(default=DEFAULTS, repr=False)

    def __post_init__(self):
        if (self.grid.num_levels + 1) ** (self.grid.k + 1) > MAX_ENUMERATION:
            raise TooLarge("instance too large for exhaustive enumeration")

    def errors(self):
        """Shared memoized edge-weight table (same one the DP should use)."""
        @lru_cache(maxsize=None)
        def table(i, code_from, code_to):
            return edge_weight(self.g, self.grid, i, code_from, code_to,
                               scale=self.scale, consts=self.consts)
        return table


def brute_force_best(inst: TinyInstance, errors=None):
    """Global minimum over all concave in-grid level sequences.

    Returns (levels, cost) where levels is a tuple of codes with None
    marking -inf endpoints.
    """
    grid = inst.grid
    k = grid.k
    if errors is None:
        errors = inst.errors()
    masses = [errors(i, None, None) for i in range(1, k + 1)]
    pre = [0.0]
    for w in masses:
        pre.append(pre[-1] + w)
    suffix = [0.0] * (k + 2)
    for i in range(k, 0, -1):
        suffix[i] = suffix[i + 1] + masses[i - 1]

    deltas = sorted({b * (1 << c) for b, c in grid.shift_codes})
    codes = range(grid.m_lo, grid.m_hi + 1)

    best_cost = sum(masses)                      # the empty-support sequence
    best_levels = (None,) * (k + 1)

    def close(layer, seq, acc):
        """Cost of stopping the support at this layer."""
        if layer == k + 1:
            return acc
        return acc + errors(layer, seq[-1], None) + suffix[layer + 1]

    def extend(layer, seq, acc, last_delta):
        nonlocal best_cost, best_levels
        total = close(layer, seq, acc)
        if total < best_cost - 1e-15:
            best_cost = total
            start = layer - len(seq) + 1
            best_levels = ((None,) * (start - 1) + tuple(seq)
                           + (None,) * (k + 1 - layer))
        if layer == k + 1:
            return
        for d in deltas:
            if d > last_delta:
                break
            nxt = seq[-1] + d
            if grid.m_lo <= nxt <= grid.m_hi:
                extend(layer + 1, seq + [nxt], acc + errors(layer, seq[-1], nxt), d)

    for start in range(1, k + 2):
        for a in codes:
            extend(start, [a], pre[start - 1], deltas[-1])
    return best_levels, best_cost
