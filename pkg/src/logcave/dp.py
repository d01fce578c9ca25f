"""Shortest path over the layered graph of concave level sequences.

States are (layer, level, tag) where the tag is the last level-difference
used; a step to the next layer may reuse the tag's shift (keeping the level
sequence concave) and zero-cost edges within a layer relax the tag downward.
The sweep keeps one layer of costs at a time; for path recovery it stores,
per state, a single bit saying whether the tag relaxation came from a higher
tag, so the full trace costs one bit per state instead of a backpointer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .constants import Constants, DEFAULTS
from .grid import FitGrid
from .interval_error import CellErrorQuery, cell_error, tolerance
from .pwfunc import DomainKind, IntegerCodedLevels, check_log_concave
from . import _kernels


@dataclass(frozen=True)
class DpResult:
    levels: IntegerCodedLevels      # one code per cell endpoint; None = -inf
    cost: float                     # sum of the traversed edge weights
    path_length: int
    visited: int                    # finite states materialized during the sweep
    num_vertices: int               # closed-form graph size
    num_edges: int
    enter_layer: int | None         # first endpoint with finite level
    exit_layer: int | None          # last endpoint with finite level


def concavity_audit(result: DpResult) -> bool:
    return check_log_concave(result.levels)


def graph_size(grid: FitGrid) -> tuple[int, int]:
    """Closed-form vertex/edge counts of the full layered graph."""
    k = grid.k
    ns = grid.num_levels
    m = grid.num_shifts
    num_v = (k + 1) * ns * (m + 1) + 2 * (k + 2)
    deltas = np.array([b * (1 << c) for b, c in grid.shift_codes], dtype=np.int64)
    advances = k * int(np.maximum(ns - np.abs(deltas), 0).sum())
    tighten = (k + 1) * ns * m
    enter = (k + 1) * ns
    exits = k * ns * (m + 1) + ns * (m + 1)   # interior exits + boundary closers
    stay = k + 2
    return num_v, advances + tighten + enter + exits + stay


# ---------------------------------------------------------------------------
# cell geometry: g restricted to one cell, in cell-local coordinates


def _piece_params(g, x: float) -> tuple[float, float]:
    """(slope, intercept) of g's piece covering x; zeros outside the support."""
    xs = g.breakpoints
    if x < xs[0] or x > xs[-1]:
        return 0.0, 0.0
    i = int(np.searchsorted(xs, x, side="right")) - 1
    i = min(max(i, 0), len(g.pieces) - 1)
    if g.domain is DomainKind.INTEGER and x >= xs[-1]:
        return 0.0, 0.0
    return float(g.pieces[i, 0]), float(g.pieces[i, 1])


def cell_segments(g, grid: FitGrid, i: int):
    """Linear sub-segments of g over cell i, shifted so the cell starts at 0.

    Returns (lo, hi, slope, intercept) arrays; on the integer domain lo/hi are
    the inclusive integer sub-ranges.
    """
    x0 = grid.endpoint(i)
    x1 = grid.endpoint(i + 1)
    if grid.domain is DomainKind.REAL:
        cuts = sorted({x0, x1} | {float(b) for b in g.breakpoints if x0 < b < x1})
        lo, hi, sl, ic = [], [], [], []
        for u, v in zip(cuts[:-1], cuts[1:]):
            p, q = _piece_params(g, 0.5 * (u + v))
            lo.append(u - x0)
            hi.append(v - x0)
            sl.append(p)
            ic.append(q + p * x0)
    else:
        ilo = int(x0)
        ihi = int(x1) - 1 if i < grid.k else int(x1)
        bounds = sorted({ilo, ihi + 1} | {int(b) for b in g.breakpoints
                                          if ilo < b < ihi + 1})
        lo, hi, sl, ic = [], [], [], []
        for u, v in zip(bounds[:-1], bounds[1:]):
            p, q = _piece_params(g, float(u))
            lo.append(u - x0)
            hi.append(v - 1 - x0)
            sl.append(p)
            ic.append(q + p * x0)
    return (np.array(lo, dtype=float), np.array(hi, dtype=float),
            np.array(sl, dtype=float), np.array(ic, dtype=float))


def _cell_mass(g, grid: FitGrid, i: int) -> float:
    x0 = grid.endpoint(i)
    x1 = grid.endpoint(i + 1)
    if grid.domain is DomainKind.REAL:
        return g.mass(max(x0, g.breakpoints[0]), min(x1, g.breakpoints[-1])) \
            if x1 > g.breakpoints[0] and x0 < g.breakpoints[-1] else 0.0
    hi = x1 - 1 if i < grid.k else x1
    return g.mass(x0, hi) if hi >= x0 else 0.0


# ---------------------------------------------------------------------------
# reference edge weights (used for small instances and cross-checks)


def edge_weight(g, grid: FitGrid, i: int, code_from, code_to,
                scale: float = 1.0, consts: Constants = DEFAULTS) -> float:
    """Approximate cost of cell i between two endpoint level codes.

    ``None`` stands for -inf (no support).  Built on the per-cell error
    oracle; the compiled kernels reproduce this function in bulk.
    """
    if code_from is None:
        return _cell_mass(g, grid, i)
    log_sigma = math.log(scale)
    if code_to is None:
        if grid.domain is DomainKind.REAL:
            return _cell_mass(g, grid, i)
        x0 = grid.endpoint(i)
        hval = math.exp(grid.value_of(code_from) - log_sigma)
        hi = grid.endpoint(i + 1) - 1 if i < grid.k else grid.endpoint(i + 1)
        rest = g.mass(x0 + 1, hi) if hi >= x0 + 1 else 0.0
        return abs(g.eval(x0) - hval) + rest
    L = grid.cell_length
    v_from = grid.value_of(code_from)
    v_to = grid.value_of(code_to)
    d = (v_to - v_from) / L
    coef = math.exp(v_from - log_sigma)
    seg_lo, seg_hi, seg_p, seg_q = cell_segments(g, grid, i)
    total = 0.0
    for u, v, p, q in zip(seg_lo, seg_hi, seg_p, seg_q):
        if grid.domain is DomainKind.INTEGER:
            u, v = u - 0.5, v + 0.5
        q_obj = CellErrorQuery(g_slope=p, g_intercept=q, h_coef=coef,
                               h_rate=d, lo=float(u), hi=float(v),
                               domain=grid.domain, eps=grid.eps)
        total += cell_error(q_obj, consts)
    return total


# ---------------------------------------------------------------------------
# the sweep


def shortest_path_fit(g, grid: FitGrid, scale: float = 1.0,
                      errors=None, consts: Constants = DEFAULTS) -> DpResult:
    """Minimum-cost concave level sequence for g on the grid.

    ``errors(i, code_from, code_to)`` overrides the edge-weight oracle
    (codes may be None for -inf); by default the bulk kernels are used.
    """
    k = grid.k
    ns = grid.num_levels
    log_sigma = math.log(scale)
    logv = grid.level_values() - log_sigma
    expv = np.exp(logv)

    delta_all = np.array([b * (1 << c) for b, c in grid.shift_codes],
                         dtype=np.int64)
    usable = np.abs(delta_all) < ns   # larger shifts admit no advance at all
    # tag 0 is "no shift used yet"; tags 1..m are shifts in descending order,
    # so relaxing the tag (concavity) is a prefix minimum over the tag axis
    order = np.argsort(-delta_all[usable], kind="stable")
    delta = np.ascontiguousarray(delta_all[usable][order])
    svals = np.ascontiguousarray(np.asarray(grid.shifts)[usable][order])
    m = len(delta)

    if errors is not None:
        errors = lru_cache(maxsize=None)(errors)
        masses = np.array([errors(i, None, None) for i in range(1, k + 1)])
    else:
        masses = np.array([_cell_mass(g, grid, i) for i in range(1, k + 1)])
    pre = np.concatenate([[0.0], np.cumsum(masses)])     # pre[i-1] = mass before x_i
    full_mass = float(pre[-1])
    suffix = np.concatenate([np.cumsum(masses[::-1])[::-1], [0.0]])

    width_target = consts.c_bis * grid.eps * grid.cell_length / math.log(1.0 / grid.eps)

    def exit_weights(i: int) -> np.ndarray:
        if errors is not None:
            return np.array([errors(i, grid.m_lo + a, None) for a in range(ns)])
        if grid.domain is DomainKind.REAL:
            return np.full(ns, masses[i - 1])
        x0 = grid.endpoint(i)
        hi = grid.endpoint(i + 1) - 1 if i < k else grid.endpoint(i + 1)
        rest = g.mass(x0 + 1, hi) if hi >= x0 + 1 else 0.0
        return np.abs(g.eval(x0) - expv) + rest

    with np.errstate(divide="ignore"):
        decay = np.where(svals < 0, 1.0 / -np.expm1(svals), np.inf)

    def tag_caps(i: int) -> tuple[np.ndarray, np.ndarray]:
        """Mass-coverage cap per tag for the cells still ahead of layer i.

        A non-rising tag covers at most ``caps * expv[a]``; a rising one at
        most ``caps * expv[a + didx]`` (its level after all remaining cells).
        Tag 0 is unconstrained.
        """
        left = i_last - i + 1
        caps = np.full(m + 1, np.inf)
        didx = np.zeros(m + 1, dtype=np.int64)
        flat = svals <= 0
        caps[1:][flat] = grid.cell_length * np.minimum(left, decay[flat])
        caps[1:][~flat] = grid.cell_length * left
        didx[1:][~flat] = np.minimum(delta[~flat] * left, ns)
        return caps, didx

    def layer_step(i: int, cost, relaxed, bits, nxt, bound, rem, caps, didx,
                   pre_next, cell_mass, bands):
        """Relax tags of layer i into `relaxed`/`bits`, advance into `nxt`.

        `bands` holds the per-tag live level intervals (c: cost in, r:
        relaxed out, o: nxt out); memory outside a band is never touched.
        Returns the level range holding finite values in `nxt`.
        """
        c_lo, c_hi, r_lo, r_hi, o_lo, o_hi = bands
        if errors is not None:
            np.minimum.accumulate(cost, axis=0, out=relaxed)
            packed = np.packbits(cost > relaxed, axis=0)
            bits.fill(0)
            bits[:packed.shape[0], :] = packed
            nxt.fill(np.inf)
            for j in range(1, m + 1):
                dlt = int(delta[j - 1])
                a0, a1 = max(0, -dlt), min(ns, ns - dlt)
                for a in range(a0, a1):
                    nxt[j, a + dlt] = relaxed[j, a] + errors(
                        i, grid.m_lo + a, grid.m_lo + a + dlt)
            r_lo[:] = 0
            r_hi[:] = ns
            o_lo[:] = 0
            o_hi[:] = ns
            return 0, ns
        segs = cell_segments(g, grid, i)
        if grid.domain is DomainKind.REAL:
            return _kernels.layer_step_real(cost, relaxed, bits, nxt, delta,
                                            svals, grid.cell_length, expv,
                                            logv, *segs, width_target,
                                            bound, rem, caps, didx,
                                            pre_next, cell_mass,
                                            c_lo, c_hi, r_lo, r_hi, o_lo, o_hi)
        return _kernels.layer_step_int(cost, relaxed, bits, nxt, delta,
                                       svals, grid.cell_length, expv, logv,
                                       *segs, bound, rem, caps, didx,
                                       pre_next, cell_mass,
                                       c_lo, c_hi, r_lo, r_hi, o_lo, o_hi)

    def single_weight(i: int, a_from: int, a_to: int) -> float:
        if errors is not None:
            return float(errors(i, grid.m_lo + a_from, grid.m_lo + a_to))
        dlt = a_to - a_from
        jj = int(np.nonzero(delta == dlt)[0][0])
        w = np.full((1, 1), np.inf)
        segs = cell_segments(g, grid, i)
        sub_exp = expv[a_from:a_from + 1]
        sub_log = logv[a_from:a_from + 1]
        one_delta = np.zeros(1, dtype=np.int64)
        one_sval = svals[jj:jj + 1]
        if grid.domain is DomainKind.REAL:
            _kernels.layer_weights_real(sub_exp, sub_log, one_delta, one_sval,
                                        grid.cell_length, *segs,
                                        width_target, w)
        else:
            _kernels.layer_weights_int(sub_exp, sub_log, one_delta, one_sval,
                                       grid.cell_length, *segs, w)
        return float(w[0, 0])

    def feasible_bound() -> float:
        """Cost of one explicitly constructed path; an upper bound for pruning."""
        if m == 0:
            return full_mass
        step = grid.level_step
        vals = np.array([g.eval(grid.endpoint(i)) for i in range(1, k + 2)])
        raw = np.full(k + 1, -np.inf)
        pos = vals > 0
        raw[pos] = np.log(vals[pos]) + log_sigma
        codes_f = np.round(raw / step)
        good = np.isfinite(codes_f) & (codes_f >= grid.m_lo) & (codes_f <= grid.m_hi)
        if not good.any():
            return full_mass
        peak = int(np.argmax(np.where(good, codes_f, -np.inf)))
        e = peak
        while e > 0 and good[e - 1]:
            e -= 1
        t = peak
        while t < k and good[t + 1]:
            t += 1
        seq = codes_f[e:t + 1]
        codes = [int(seq[0])]
        if len(seq) > 1:
            # least concave majorant (upper hull), so one noisy sample does
            # not drag the rest of the level sequence down
            hull = [0]
            for idx in range(1, len(seq)):
                while len(hull) >= 2:
                    i1, i2 = hull[-2], hull[-1]
                    if ((seq[i2] - seq[i1]) * (idx - i2)
                            <= (seq[idx] - seq[i2]) * (i2 - i1)):
                        hull.pop()
                    else:
                        break
                hull.append(idx)
            diffs = np.empty(len(seq) - 1)
            for i1, i2 in zip(hull[:-1], hull[1:]):
                diffs[i1:i2] = (seq[i2] - seq[i1]) / (i2 - i1)
            lattice = np.sort(delta)
            loc = np.clip(np.searchsorted(lattice, diffs, side="right") - 1,
                          0, m - 1)
            for d in lattice[loc]:                        # snap to usable shifts
                c = codes[-1] + int(d)
                if c < grid.m_lo or c > grid.m_hi:
                    break
                codes.append(c)
        t = e + len(codes) - 1
        total = float(pre[e])                             # enter at endpoint e+1
        for idx in range(len(codes) - 1):
            total += single_weight(e + 1 + idx, codes[idx] - grid.m_lo,
                                   codes[idx + 1] - grid.m_lo)
        if t + 1 <= k:
            total += float(exit_weights(t + 1)[codes[-1] - grid.m_lo])
            total += float(suffix[t + 1])
        return min(total, full_mass)

    # entering at a level whose minimum one-cell h-coverage already exceeds
    # twice the cell's g-mass is weakly dominated by entering one endpoint
    # later (the crossing edge costs at least coverage minus mass), so fresh
    # entries are capped to the levels that could pay off
    if m and errors is None:
        s_min = float(svals.min())
        if grid.domain is DomainKind.REAL:
            phi_min = math.expm1(s_min) / s_min if s_min != 0.0 else 1.0
            cov_unit = grid.cell_length * phi_min
        else:
            cov_unit = 1.0
    else:
        cov_unit = 0.0

    def enter_cap(layer: int) -> int:
        """Highest level index (exclusive) open to a fresh entry at x_layer."""
        if cov_unit <= 0.0 or layer > k:
            return ns
        thresh = (2.0 * float(masses[layer - 1]) + 1e-7) / cov_unit
        return int(np.searchsorted(expv, thresh, side="right"))

    # forward sweep -------------------------------------------------------
    nbytes = (m + 1 + 7) // 8
    cost = np.full((m + 1, ns), np.inf)
    relaxed = np.empty_like(cost)
    nxt = np.empty_like(cost)
    bits = np.zeros((nbytes, ns), dtype=np.uint8)
    c_lo, c_hi, r_lo, r_hi, o_lo, o_hi = (
        np.zeros(m + 1, dtype=np.int64) for _ in range(6))
    best_cost = full_mass
    best_at = None                                  # (layer, level idx, tag)
    trace = []                                      # per layer: packed relax bits
    per_layer_states = ns + int(np.maximum(ns - np.abs(delta), 0).sum())
    visited = 0
    # states whose cost exceeds a known achievable path can never improve the
    # answer (weights are nonnegative), so the sweep prunes against this bound
    bound = np.inf if errors is not None else feasible_bound() + 1e-9
    # cells with no mass are free to cross: a path through an empty prefix is
    # dominated by entering later, one into an empty suffix by exiting earlier,
    # so only layers touching the support of g need to be swept
    occupied = np.nonzero(masses > 0)[0]
    if len(occupied) > 0:
        i_first = int(occupied[0]) + 1
        i_last = int(occupied[-1]) + 1
    else:
        i_first, i_last = 1, 0                      # nothing to fit
    cap0 = enter_cap(i_first) if len(occupied) > 0 else ns
    cost[0, :cap0] = pre[i_first - 1]               # enter right at x_{i_first}
    c_hi[0] = cap0
    visited += ns
    alive = len(occupied) > 0

    for i in range(i_first, i_last + 1):
        n_lo, n_hi = layer_step(i, cost, relaxed, bits, nxt, bound,
                                float(suffix[i - 1]), *tag_caps(i),
                                float(pre[i]), float(masses[i - 1]),
                                (c_lo, c_hi, r_lo, r_hi, o_lo, o_hi))
        trace.append(bits.copy())
        # leaving the support by crossing cell i (any tag: use the full relax,
        # whose live band is the bottom row's band)
        t_lo, t_hi = int(r_lo[m]), int(r_hi[m])
        if t_hi > t_lo:
            totals = relaxed[m, t_lo:t_hi] + exit_weights(i)[t_lo:t_hi] \
                + suffix[i]
            a_star = int(np.argmin(totals))
            if totals[a_star] < best_cost - 1e-15:
                best_cost = float(totals[a_star])
                best_at = (i, t_lo + a_star, None)  # tag resolved from bits later
        bound = min(bound, best_cost + 1e-9)
        visited += per_layer_states
        if i < i_last and pre[i] <= bound:
            # entering stays viable: reopen the level range up to the cap.
            # A fresh entry (tag 0, cost pre[i]) dominates any state that is
            # at least as costly, so those states are dropped as well.
            for j in range(1, m + 1):
                if o_hi[j] > o_lo[j]:
                    row = nxt[j, o_lo[j]:o_hi[j]]
                    row[row > pre[i]] = np.inf
            cap = enter_cap(i + 1)
            nxt[0, :cap] = pre[i]
            o_lo[0], o_hi[0] = 0, cap
            if cap > 0:
                n_lo, n_hi = 0, max(n_hi, cap)
        elif n_hi <= n_lo:
            alive = False                           # no live states remain
            break
        else:
            o_lo[0], o_hi[0] = 0, 0
        cost, nxt = nxt, cost
        c_lo, o_lo = o_lo, c_lo
        c_hi, o_hi = o_hi, c_hi

    if alive:
        # past the support everything is downhill: exiting at the next
        # endpoint weakly dominates any continuation
        i_fin = i_last + 1
        extra = exit_weights(i_fin) + suffix[i_fin] if i_fin <= k else None
        for j in range(m + 1):
            lo, hi = int(c_lo[j]), int(c_hi[j])
            if hi <= lo:
                continue
            vals = cost[j, lo:hi]
            if extra is not None:
                vals = vals + extra[lo:hi]
            off = int(np.argmin(vals))
            if vals[off] < best_cost - 1e-15:
                best_cost = float(vals[off])
                best_at = (i_fin, lo + off, j)

    num_v, num_e = graph_size(grid)
    frac = Fraction(grid.eps).limit_denominator(10 ** 12) / grid.k

    if best_at is None:
        levels = IntegerCodedLevels(levels=(None,) * (k + 1), eps_over_k=frac)
        return DpResult(levels=levels, cost=full_mass, path_length=k + 2,
                        visited=visited, num_vertices=num_v, num_edges=num_e,
                        enter_layer=None, exit_layer=None)

    # path recovery -------------------------------------------------------
    def resolve(layer: int, a: int, j: int) -> int:
        """Follow relax bits of `layer` down to the tag that owns the value."""
        col = trace[layer - i_first][:, a]
        while j > 0 and col[j >> 3] & (128 >> (j & 7)):
            j -= 1
        return j

    i_end, a, j = best_at
    if j is None:
        j = resolve(i_end, a, m)
    codes: list = [None] * (k + 1)
    chain = []
    i = i_end
    while True:
        codes[i - 1] = grid.m_lo + a
        if j == 0:
            enter_layer = i
            break
        a_prev = a - int(delta[j - 1])
        chain.append((i - 1, a_prev, a))
        i, a = i - 1, a_prev
        j = resolve(i, a, j)

    path_cost = float(pre[enter_layer - 1])
    for ci, a_from, a_to in reversed(chain):
        path_cost += single_weight(ci, a_from, a_to)
    if i_end <= k:
        path_cost += float(exit_weights(i_end)[best_at[1]]) + float(suffix[i_end])
    levels = IntegerCodedLevels(levels=tuple(codes), eps_over_k=frac)
    return DpResult(levels=levels, cost=path_cost,
                    path_length=(i_end - enter_layer) + 3,
                    visited=visited, num_vertices=num_v, num_edges=num_e,
                    enter_layer=enter_layer, exit_layer=i_end)
