"""Vectorized edge-weight kernels, pure numpy.

For one grid cell, compute the approximation cost of every (start level,
level shift) pair at once.  The hypothesis piece on a cell in cell-local
coordinates is ``h(xi) = expv[a] * exp(d * xi)`` with ``d = shift / L``, so for
a fixed shift the only per-level dependence is the multiplicative ``expv[a]``
and the additive log-level — everything expensive (exp, expm1, log) is a
scalar per (shift, segment) pair.  Bisection runs only on the rare level
range where the linear and exponential pieces actually cross.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "pure"

_MAX_BISECT = 64


def _bisect_cross_real(hv0, d, p, q, lo, hi, sign_lo, width_target):
    """Crossing of p*x+q and hv0*exp(d*x) on monotone subpieces (arrays)."""
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    lo, hi = np.broadcast_arrays(lo, hi)
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        dm = (p * mid + q) - hv0 * np.exp(d * mid)
        same = np.sign(dm) == sign_lo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
        if np.all(hi - lo <= width_target):
            break
    return 0.5 * (lo + hi)


def _mono_err_real(hv0, d, p, q, lo, hi, d_lo, d_hi, gm, hm, width_target):
    """|integral of g - h| on a subpiece where g - h is monotone (arrays)."""
    base = np.abs(gm - hm)
    cross = np.sign(d_lo) * np.sign(d_hi) < 0
    if not np.any(cross):
        return base
    lo_b = np.broadcast_to(np.asarray(lo, dtype=float), cross.shape)
    hi_b = np.broadcast_to(np.asarray(hi, dtype=float), cross.shape)
    h0 = hv0[cross] if np.ndim(hv0) else hv0
    lo_c = lo_b[cross]
    hi_c = hi_b[cross]
    if d == 0.0:
        xc = np.clip((h0 - q) / p, lo_c, hi_c)
    else:
        xc = _bisect_cross_real(h0, d, p, q, lo_c, hi_c,
                                np.sign(d_lo if np.ndim(d_lo) == 0 else d_lo[cross]),
                                width_target)
    gm_a = 0.5 * p * (xc * xc - lo_c * lo_c) + q * (xc - lo_c)
    if d == 0.0:
        hm_a = h0 * (xc - lo_c)
    else:
        hm_a = h0 * np.exp(d * lo_c) * np.expm1(d * (xc - lo_c)) / d
    gm_c = gm[cross] if np.ndim(gm) else gm
    hm_c = hm[cross] if np.ndim(hm) else hm
    out = base.copy()
    out[cross] = np.abs(gm_a - hm_a) + np.abs((gm_c - gm_a) - (hm_c - hm_a))
    return out


def _seg_err_real(hv0, logv, d, u, v, p, q, width_target):
    """Error of one linear segment against h = hv0*exp(d*x), all levels at once."""
    gu = p * u + q
    gv = p * v + q
    gm = 0.5 * p * (v * v - u * u) + q * (v - u)
    if d == 0.0:
        hu = hv0
        hv = hv0
        hm = hv0 * (v - u)
    else:
        eu = math.exp(d * u)
        ev = math.exp(d * v)
        hu = hv0 * eu
        hv = hv0 * ev
        hm = hu * (math.expm1(d * (v - u)) / d)
    res = _mono_err_real(hv0, d, p, q, u, v, gu - hu, gv - hv, gm, hm, width_target)

    # Levels whose h has an interior stationary point of g - h get split there.
    if d != 0.0 and p != 0.0 and p / d > 0.0:
        c1 = math.log(p / d)
        if d > 0.0:
            mask = (logv > c1 - d * v) & (logv < c1 - d * u)
        else:
            mask = (logv > c1 - d * u) & (logv < c1 - d * v)
        if np.any(mask):
            la = logv[mask]
            h0 = hv0[mask]
            xs = (c1 - la) / d
            hstar = p / d              # h at its own stationary point of g - h
            gstar = p * xs + q
            hum = h0 * math.exp(d * u)
            hvm = h0 * math.exp(d * v)
            gm1 = 0.5 * p * (xs * xs - u * u) + q * (xs - u)
            hm1 = (hstar - hum) / d
            gm2 = gm - gm1
            hm2 = hm[mask] - hm1
            e1 = _mono_err_real(h0, d, p, q, u, xs, gu - hum, gstar - hstar,
                                gm1, hm1, width_target)
            e2 = _mono_err_real(h0, d, p, q, xs, v, gstar - hstar, gv - hvm,
                                gm2, hm2, width_target)
            res[mask] = e1 + e2
    return res


def layer_weights_real(expv, logv, delta, svals, L,
                       seg_u, seg_v, seg_p, seg_q, width_target, out):
    """Fill out[a, j] with the cell cost of advancing level a by shift j."""
    ns = expv.shape[0]
    out.fill(np.inf)
    for j in range(delta.shape[0]):
        dlt = int(delta[j])
        a0 = max(0, -dlt)
        a1 = min(ns, ns - dlt)
        if a1 <= a0:
            continue
        d = float(svals[j]) / L
        hv0 = expv[a0:a1]
        la = logv[a0:a1]
        total = np.zeros(a1 - a0)
        for u, v, p, q in zip(seg_u, seg_v, seg_p, seg_q):
            total += _seg_err_real(hv0, la, d, float(u), float(v),
                                   float(p), float(q), width_target)
        out[a0:a1, j] = total


# ---------------------------------------------------------------------------
# integer domain


def _h_sum(hu, d, n):
    """Sum of hu * exp(d*i) for i = 0..n-1 (hu may be an array)."""
    if n <= 0:
        return np.zeros_like(hu) if np.ndim(hu) else 0.0
    em = math.expm1(d)
    if abs(em) < 1e-9:
        return hu * (n + 0.5 * d * n * (n - 1))
    return hu * (math.expm1(d * n) / em)


def _mono_err_int(hv0, d, p, q, lo, hi, d_lo, d_hi, gm, hm):
    """Discrete analogue of _mono_err_real over integers lo..hi (arrays)."""
    base = np.abs(gm - hm)
    cross = np.sign(d_lo) * np.sign(d_hi) < 0
    if not np.any(cross):
        return base
    lo_b = np.broadcast_to(np.asarray(lo, dtype=float), cross.shape)
    hi_b = np.broadcast_to(np.asarray(hi, dtype=float), cross.shape)
    h0 = hv0[cross] if np.ndim(hv0) else hv0
    a = lo_b[cross].astype(np.int64).astype(float)
    b = hi_b[cross].astype(np.int64).astype(float)
    s_lo = np.sign(d_lo if np.ndim(d_lo) == 0 else d_lo[cross])
    # last integer on the lo side of the crossing
    while np.any(b - a > 1):
        mid = np.floor(0.5 * (a + b))
        dm = (p * mid + q) - h0 * np.exp(d * mid)
        same = np.sign(dm) == s_lo
        zero = dm == 0.0
        take = same | zero
        a = np.where(take, mid, a)
        b = np.where(take, b, mid)
    lo_c = lo_b[cross]
    n1 = a - lo_c + 1.0
    gm_a = p * 0.5 * (lo_c + a) * n1 + q * n1
    em = math.expm1(d)
    hu = h0 * np.exp(d * lo_c)
    if abs(em) < 1e-9:
        hm_a = hu * (n1 + 0.5 * d * n1 * (n1 - 1.0))
    else:
        hm_a = hu * (np.expm1(d * n1) / em)
    gm_c = gm[cross] if np.ndim(gm) else gm
    hm_c = hm[cross] if np.ndim(hm) else hm
    out = base.copy()
    out[cross] = np.abs(gm_a - hm_a) + np.abs((gm_c - gm_a) - (hm_c - hm_a))
    return out


def _seg_err_int(hv0, logv, d, lo, hi, p, q):
    n = hi - lo + 1.0
    gu = p * lo + q
    gv = p * hi + q
    gm = p * 0.5 * (lo + hi) * n + q * n
    hu = hv0 * math.exp(d * lo)
    hv = hv0 * math.exp(d * hi)
    hm = _h_sum(hu, d, int(n))
    res = _mono_err_int(hv0, d, p, q, lo, hi, gu - hu, gv - hv, gm, hm)

    if d != 0.0 and p != 0.0 and p / d > 0.0 and hi > lo:
        c1 = math.log(p / d)
        if d > 0.0:
            mask = (logv > c1 - d * hi) & (logv < c1 - d * lo)
        else:
            mask = (logv > c1 - d * lo) & (logv < c1 - d * hi)
        if np.any(mask):
            la = logv[mask]
            h0 = hv0[mask]
            m = np.floor((c1 - la) / d)
            m = np.clip(m, lo, hi - 1.0)
            hum = h0 * math.exp(d * lo)
            hvm = h0 * math.exp(d * hi)
            n1 = m - lo + 1.0
            gm1 = p * 0.5 * (lo + m) * n1 + q * n1
            em = math.expm1(d)
            if abs(em) < 1e-9:
                hm1 = hum * (n1 + 0.5 * d * n1 * (n1 - 1.0))
            else:
                hm1 = hum * (np.expm1(d * n1) / em)
            gmid1 = p * m + q
            hmid1 = h0 * np.exp(d * m)
            gmid2 = p * (m + 1.0) + q
            hmid2 = h0 * np.exp(d * (m + 1.0))
            e1 = _mono_err_int(h0, d, p, q, lo, m, gu - hum, gmid1 - hmid1,
                               gm1, hm1)
            e2 = _mono_err_int(h0, d, p, q, m + 1.0, hi, gmid2 - hmid2,
                               gv - hvm, gm[mask] - gm1 if np.ndim(gm) else gm - gm1,
                               hm[mask] - hm1)
            res[mask] = e1 + e2
    return res


def layer_weights_int(expv, logv, delta, svals, L,
                      seg_lo, seg_hi, seg_p, seg_q, out):
    """Integer-domain analogue of layer_weights_real; segments are integer ranges."""
    ns = expv.shape[0]
    out.fill(np.inf)
    for j in range(delta.shape[0]):
        dlt = int(delta[j])
        a0 = max(0, -dlt)
        a1 = min(ns, ns - dlt)
        if a1 <= a0:
            continue
        d = float(svals[j]) / L
        hv0 = expv[a0:a1]
        la = logv[a0:a1]
        total = np.zeros(a1 - a0)
        for lo, hi, p, q in zip(seg_lo, seg_hi, seg_p, seg_q):
            total += _seg_err_int(hv0, la, d, float(lo), float(hi),
                                  float(p), float(q))
        out[a0:a1, j] = total


# ---------------------------------------------------------------------------
# fused layer step: relax tags, record trace bits, advance one cell
#
# Layout: cost[j, a] with tag index 0 = "no shift used yet" (largest) and
# tags 1..m = shifts in descending value order, so relaxing toward smaller
# shifts is a prefix minimum along the tag axis.


def _relax(cost, relaxed, bits, bound, rem, caps, didx, expv,
           c_lo, c_hi, r_lo, r_hi):
    """Banded prefix-minimum along the tag axis.

    Row ``j`` of ``cost`` holds meaningful values on ``[c_lo[j], c_hi[j])``
    only; everything outside a band is treated as +inf and its memory is
    never read.  The bands of ``relaxed`` come out in ``r_lo``/``r_hi``.
    """
    ns = expv.shape[0]
    bits.fill(0)
    prev_lo = int(c_lo[0])
    prev_hi = int(c_hi[0])
    if prev_hi > prev_lo:
        seg = cost[0, prev_lo:prev_hi].copy()
        seg[seg > bound] = np.inf
        relaxed[0, prev_lo:prev_hi] = seg
    r_lo[0] = prev_lo
    r_hi[0] = prev_hi
    for j in range(1, cost.shape[0]):
        clo = int(c_lo[j])
        chi = int(c_hi[j])
        if chi <= clo:
            lo, hi = prev_lo, prev_hi
        elif prev_hi <= prev_lo:
            lo, hi = clo, chi
        else:
            lo, hi = min(clo, prev_lo), max(chi, prev_hi)
        # even a zero-cost state cannot cover enough of the mass ahead when
        # the tag's coverage cap falls short of rem - bound
        if rem > bound and np.isfinite(caps[j]):
            idx0 = int(np.searchsorted(expv, (rem - bound) / caps[j]))
            lo = max(lo, idx0 - int(didx[j]))
        if hi <= lo:
            r_lo[j] = 0
            r_hi[j] = 0
            prev_lo, prev_hi = 0, 0
            continue
        seg = np.full(hi - lo, np.inf)
        b0 = max(lo, int(c_lo[j]))
        b1 = min(hi, int(c_hi[j]))
        if b1 > b0:
            seg[b0 - lo:b1 - lo] = cost[j, b0:b1]
        p0 = max(lo, prev_lo)
        p1 = min(hi, prev_hi)
        if p1 > p0:
            prev = relaxed[j - 1, p0:p1]
            cur = seg[p0 - lo:p1 - lo]
            flowed = prev < cur
            if flowed.any():
                cols = np.arange(p0, p1)[flowed]
                bits[j >> 3, cols] |= np.uint8(128 >> (j & 7))
                np.minimum(cur, prev, out=cur)
        reach = np.minimum(np.arange(lo, hi) + int(didx[j]), ns - 1)
        with np.errstate(invalid="ignore"):
            dead = seg > bound
            dead |= seg + rem - caps[j] * expv[reach] > bound
        seg[dead] = np.inf
        relaxed[j, lo:hi] = seg
        r_lo[j] = lo
        r_hi[j] = hi
        prev_lo, prev_hi = lo, hi


def _advance(relaxed, nxt, delta, seg_err, expv, phis, bound, pre_next,
             cell_mass, r_lo, r_hi, o_lo, o_hi):
    """Shift each tag row by its level delta, adding the per-cell error."""
    ns = nxt.shape[1]
    o_lo[:] = 0
    o_hi[:] = 0
    if delta.shape[0] == 0:
        return 0, 0
    n_lo, n_hi = ns, 0
    cut_val = min(pre_next, bound) + cell_mass
    for j in range(1, nxt.shape[0]):
        dlt = int(delta[j - 1])
        a0 = max(0, -dlt, int(r_lo[j]))
        a1 = min(ns, ns - dlt, int(r_hi[j]))
        if a1 <= a0:
            continue
        hoff = dlt if dlt < 0 else 0
        # even a zero-cost state pays at least the tag's coverage minus the
        # cell mass, so high levels are dead regardless of their cost
        idx = int(np.searchsorted(expv, cut_val / phis[j - 1]))
        a1 = min(a1, idx - hoff)
        if a1 <= a0:
            continue
        base = relaxed[j, a0:a1]
        alive = np.isfinite(base)
        if alive.any():
            # an edge at least as costly as entering fresh at the next
            # endpoint cannot matter: tag 0 permits every continuation
            with np.errstate(invalid="ignore"):
                lb = base + phis[j - 1] * expv[a0 + hoff:a1 + hoff] - cell_mass
                alive &= ~((lb >= pre_next) | (lb > bound))
        if not alive.any():
            continue
        idx = np.nonzero(alive)[0]
        s0 = a0 + int(idx[0])
        s1 = a0 + int(idx[-1]) + 1
        sub = alive[s0 - a0:s1 - a0]
        nxt[j, s0 + dlt:s1 + dlt] = np.where(
            sub, relaxed[j, s0:s1] + seg_err(j, s0, s1), np.inf)
        o_lo[j] = s0 + dlt
        o_hi[j] = s1 + dlt
        n_lo = min(n_lo, s0 + dlt)
        n_hi = max(n_hi, s1 + dlt)
    return (n_lo, n_hi) if n_hi > n_lo else (0, 0)


def layer_step_real(cost, relaxed, bits, nxt, delta, svals, L,
                    expv, logv, seg_u, seg_v, seg_p, seg_q, width_target,
                    bound, rem, caps, didx, pre_next, cell_mass,
                    c_lo, c_hi, r_lo, r_hi, o_lo, o_hi):
    _relax(cost, relaxed, bits, bound, rem, caps, didx, expv,
           c_lo, c_hi, r_lo, r_hi)

    # exact one-piece coverage of a cell per tag: integral of
    # h_min * exp(|s| x / L) over [0, L]
    av = np.abs(svals)
    with np.errstate(invalid="ignore"):
        phis = np.where(av < 1e-12, L, L * np.expm1(av) / np.maximum(av, 1e-300))

    def seg_err(j, a0, a1):
        d = float(svals[j - 1]) / L
        hv0 = expv[a0:a1]
        la = logv[a0:a1]
        total = np.zeros(a1 - a0)
        for u, v, p, q in zip(seg_u, seg_v, seg_p, seg_q):
            total += _seg_err_real(hv0, la, d, float(u), float(v),
                                   float(p), float(q), width_target)
        return total

    return _advance(relaxed, nxt, delta, seg_err, expv, phis, bound, pre_next,
                    cell_mass, r_lo, r_hi, o_lo, o_hi)


def layer_step_int(cost, relaxed, bits, nxt, delta, svals, L,
                   expv, logv, seg_lo, seg_hi, seg_p, seg_q,
                   bound, rem, caps, didx, pre_next, cell_mass,
                   c_lo, c_hi, r_lo, r_hi, o_lo, o_hi):
    _relax(cost, relaxed, bits, bound, rem, caps, didx, expv,
           c_lo, c_hi, r_lo, r_hi)

    # discrete one-piece coverage per tag: geometric sum of h_min * exp(|d| i)
    # over the cell's first L integer points (never more than the true sum)
    av = np.abs(svals)
    dd = av / L
    with np.errstate(invalid="ignore"):
        phis = np.where(dd < 1e-12, L,
                        np.expm1(av) / np.maximum(np.expm1(dd), 1e-300))

    def seg_err(j, a0, a1):
        d = float(svals[j - 1]) / L
        hv0 = expv[a0:a1]
        la = logv[a0:a1]
        total = np.zeros(a1 - a0)
        for lo, hi, p, q in zip(seg_lo, seg_hi, seg_p, seg_q):
            total += _seg_err_int(hv0, la, d, float(lo), float(hi),
                                  float(p), float(q))
        return total

    return _advance(relaxed, nxt, delta, seg_err, expv, phis, bound, pre_next,
                    cell_mass, r_lo, r_hi, o_lo, o_hi)
