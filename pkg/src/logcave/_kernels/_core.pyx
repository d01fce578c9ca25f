# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Edge-weight kernels, compiled.

Scalar-loop port of the numpy backend: per (shift, segment) pair all
transcendentals are hoisted to scalars, the per-level inner loop is pure
arithmetic, and bisection happens only where a linear and an exponential
piece actually cross.
"""

from libc.math cimport exp, expm1, log, fabs, floor, INFINITY

import numpy as np

BACKEND = "compiled"

cdef int MAX_BISECT = 64


cdef inline double _mono_real(double hv0, double d, double p, double q,
                              double lo, double hi, double dlo, double dhi,
                              double gm, double hm, double width) noexcept nogil:
    cdef double xc, a, b, mid, dm, gma, hma
    cdef int it
    if dlo == 0.0 or dhi == 0.0 or (dlo > 0.0) == (dhi > 0.0):
        return fabs(gm - hm)
    if d == 0.0:
        xc = (hv0 - q) / p
        if xc < lo:
            xc = lo
        elif xc > hi:
            xc = hi
    else:
        a = lo
        b = hi
        for it in range(MAX_BISECT):
            mid = 0.5 * (a + b)
            dm = (p * mid + q) - hv0 * exp(d * mid)
            if (dm > 0.0 and dlo > 0.0) or (dm < 0.0 and dlo < 0.0):
                a = mid
            else:
                b = mid
            if b - a <= width:
                break
        xc = 0.5 * (a + b)
    gma = 0.5 * p * (xc * xc - lo * lo) + q * (xc - lo)
    if d == 0.0:
        hma = hv0 * (xc - lo)
    else:
        hma = hv0 * exp(d * lo) * expm1(d * (xc - lo)) / d
    return fabs(gma - hma) + fabs((gm - gma) - (hm - hma))


cdef inline double _seg_real(double hv0, double la, double d,
                             double u, double v, double p, double q,
                             double eu, double ev, double f,
                             bint have_c1, double c1, double width) noexcept nogil:
    cdef double gu = p * u + q
    cdef double gv = p * v + q
    cdef double gm = 0.5 * p * (v * v - u * u) + q * (v - u)
    cdef double hu = hv0 * eu
    cdef double hv = hv0 * ev
    cdef double hm = hu * f
    cdef double xs, hstar, gstar, hum, gm1, hm1, e1, e2
    if have_c1:
        xs = (c1 - la) / d
        if u < xs < v:
            hstar = p / d
            gstar = p * xs + q
            gm1 = 0.5 * p * (xs * xs - u * u) + q * (xs - u)
            hm1 = (hstar - hu) / d
            e1 = _mono_real(hv0, d, p, q, u, xs, gu - hu, gstar - hstar,
                            gm1, hm1, width)
            e2 = _mono_real(hv0, d, p, q, xs, v, gstar - hstar, gv - hv,
                            gm - gm1, hm - hm1, width)
            return e1 + e2
    return _mono_real(hv0, d, p, q, u, v, gu - hu, gv - hv, gm, hm, width)


def layer_weights_real(double[::1] expv, double[::1] logv,
                       long long[::1] delta, double[::1] svals, double L,
                       double[::1] seg_u, double[::1] seg_v,
                       double[::1] seg_p, double[::1] seg_q,
                       double width_target, double[:, ::1] out):
    cdef Py_ssize_t ns = expv.shape[0]
    cdef Py_ssize_t m = delta.shape[0]
    cdef Py_ssize_t nseg = seg_u.shape[0]
    cdef Py_ssize_t j, a, a0, a1, si
    cdef long long dlt
    cdef double d, u, v, p, q, eu, ev, f, c1
    cdef bint have_c1
    out[:, :] = INFINITY
    with nogil:
        for j in range(m):
            dlt = delta[j]
            a0 = -dlt if dlt < 0 else 0
            a1 = ns - dlt if dlt > 0 else ns
            if a1 <= a0:
                continue
            d = svals[j] / L
            for si in range(nseg):
                u = seg_u[si]
                v = seg_v[si]
                p = seg_p[si]
                q = seg_q[si]
                if d == 0.0:
                    eu = 1.0
                    ev = 1.0
                    f = v - u
                else:
                    eu = exp(d * u)
                    ev = exp(d * v)
                    f = expm1(d * (v - u)) / d
                have_c1 = d != 0.0 and p != 0.0 and p / d > 0.0
                c1 = log(p / d) if have_c1 else 0.0
                if si == 0:
                    for a in range(a0, a1):
                        out[a, j] = _seg_real(expv[a], logv[a], d, u, v, p, q,
                                              eu, ev, f, have_c1, c1,
                                              width_target)
                else:
                    for a in range(a0, a1):
                        out[a, j] += _seg_real(expv[a], logv[a], d, u, v, p, q,
                                               eu, ev, f, have_c1, c1,
                                               width_target)


cdef inline double _hsum(double hu, double d, double em, double n) noexcept nogil:
    if n <= 0.0:
        return 0.0
    if fabs(em) < 1e-9:
        return hu * (n + 0.5 * d * n * (n - 1.0))
    return hu * (expm1(d * n) / em)


cdef inline double _mono_int(double hv0, double d, double em, double p, double q,
                             double lo, double hi, double dlo, double dhi,
                             double gm, double hm) noexcept nogil:
    cdef double a, b, mid, dm, n1, gma, hma, hu
    if dlo == 0.0 or dhi == 0.0 or (dlo > 0.0) == (dhi > 0.0):
        return fabs(gm - hm)
    a = lo
    b = hi
    while b - a > 1.0:
        mid = floor(0.5 * (a + b))
        dm = (p * mid + q) - hv0 * exp(d * mid)
        if dm == 0.0 or (dm > 0.0) == (dlo > 0.0):
            a = mid
        else:
            b = mid
    n1 = a - lo + 1.0
    gma = p * 0.5 * (lo + a) * n1 + q * n1
    hu = hv0 * exp(d * lo)
    hma = _hsum(hu, d, em, n1)
    return fabs(gma - hma) + fabs((gm - gma) - (hm - hma))


cdef inline double _seg_int(double hv0, double la, double d, double em,
                            double lo, double hi, double p, double q,
                            double eu, double ev,
                            bint have_c1, double c1) noexcept nogil:
    cdef double n = hi - lo + 1.0
    cdef double gu = p * lo + q
    cdef double gv = p * hi + q
    cdef double gm = p * 0.5 * (lo + hi) * n + q * n
    cdef double hu = hv0 * eu
    cdef double hv = hv0 * ev
    cdef double hm = _hsum(hu, d, em, n)
    cdef double xs, mm, n1, gm1, hm1, g1, h1, g2, h2, e1, e2
    if have_c1 and hi > lo:
        xs = (c1 - la) / d
        if lo < xs < hi:
            mm = floor(xs)
            if mm < lo:
                mm = lo
            elif mm > hi - 1.0:
                mm = hi - 1.0
            n1 = mm - lo + 1.0
            gm1 = p * 0.5 * (lo + mm) * n1 + q * n1
            hm1 = _hsum(hu, d, em, n1)
            g1 = p * mm + q
            h1 = hv0 * exp(d * mm)
            g2 = p * (mm + 1.0) + q
            h2 = hv0 * exp(d * (mm + 1.0))
            e1 = _mono_int(hv0, d, em, p, q, lo, mm, gu - hu, g1 - h1,
                           gm1, hm1)
            e2 = _mono_int(hv0, d, em, p, q, mm + 1.0, hi, g2 - h2, gv - hv,
                           gm - gm1, hm - hm1)
            return e1 + e2
    return _mono_int(hv0, d, em, p, q, lo, hi, gu - hu, gv - hv, gm, hm)


def layer_weights_int(double[::1] expv, double[::1] logv,
                      long long[::1] delta, double[::1] svals, double L,
                      double[::1] seg_lo, double[::1] seg_hi,
                      double[::1] seg_p, double[::1] seg_q,
                      double[:, ::1] out):
    cdef Py_ssize_t ns = expv.shape[0]
    cdef Py_ssize_t m = delta.shape[0]
    cdef Py_ssize_t nseg = seg_lo.shape[0]
    cdef Py_ssize_t j, a, a0, a1, si
    cdef long long dlt
    cdef double d, em, lo, hi, p, q, eu, ev, c1
    cdef bint have_c1
    out[:, :] = INFINITY
    with nogil:
        for j in range(m):
            dlt = delta[j]
            a0 = -dlt if dlt < 0 else 0
            a1 = ns - dlt if dlt > 0 else ns
            if a1 <= a0:
                continue
            d = svals[j] / L
            em = expm1(d)
            for si in range(nseg):
                lo = seg_lo[si]
                hi = seg_hi[si]
                p = seg_p[si]
                q = seg_q[si]
                eu = exp(d * lo)
                ev = exp(d * hi)
                have_c1 = d != 0.0 and p != 0.0 and p / d > 0.0
                c1 = log(p / d) if have_c1 else 0.0
                if si == 0:
                    for a in range(a0, a1):
                        out[a, j] = _seg_int(expv[a], logv[a], d, em, lo, hi,
                                             p, q, eu, ev, have_c1, c1)
                else:
                    for a in range(a0, a1):
                        out[a, j] += _seg_int(expv[a], logv[a], d, em, lo, hi,
                                              p, q, eu, ev, have_c1, c1)


# ---------------------------------------------------------------------------
# fused layer step: relax tags, record trace bits, advance one cell
#
# Layout: cost[j, a] with tag index 0 = "no shift used yet" (largest) and
# tags 1..m = shifts in descending value order, so relaxing the tag toward
# smaller shifts is a prefix minimum along contiguous rows.  Each row j
# carries a live level band; memory outside a band is never read, and the
# bands of relaxed / nxt are reported back through r_* / o_*.


cdef inline Py_ssize_t _lower_bound(double[::1] arr, double x) noexcept nogil:
    """First index whose value is >= x in an ascending array."""
    cdef Py_ssize_t lo = 0, hi = arr.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline void _relax_banded(double[:, ::1] cost, double[:, ::1] relaxed,
                               unsigned char[:, ::1] bits, double[::1] expv,
                               double bound, double rem, double[::1] caps,
                               long long[::1] didx,
                               long long[::1] c_lo, long long[::1] c_hi,
                               long long[::1] r_lo, long long[::1] r_hi) noexcept nogil:
    cdef Py_ssize_t mp1 = cost.shape[0]
    cdef Py_ssize_t ns = cost.shape[1]
    cdef Py_ssize_t j, a, lo, hi, clo, chi, prev_lo, prev_hi, ii, idx0
    cdef double prev, cur
    bits[:, :] = 0
    prev_lo = c_lo[0]
    prev_hi = c_hi[0]
    for a in range(prev_lo, prev_hi):
        cur = cost[0, a]
        relaxed[0, a] = cur if cur <= bound else INFINITY
    r_lo[0] = prev_lo
    r_hi[0] = prev_hi
    for j in range(1, mp1):
        clo = c_lo[j]
        chi = c_hi[j]
        if chi <= clo:
            lo = prev_lo
            hi = prev_hi
        elif prev_hi <= prev_lo:
            lo = clo
            hi = chi
        else:
            lo = clo if clo < prev_lo else prev_lo
            hi = chi if chi > prev_hi else prev_hi
        # even a zero-cost state cannot cover enough of the mass ahead when
        # the tag's coverage cap falls short of rem - bound
        if rem > bound and caps[j] != INFINITY:
            idx0 = _lower_bound(expv, (rem - bound) / caps[j]) - didx[j]
            if idx0 > lo:
                lo = idx0
        if hi <= lo:
            r_lo[j] = 0
            r_hi[j] = 0
            prev_lo = 0
            prev_hi = 0
            continue
        for a in range(lo, hi):
            cur = cost[j, a] if clo <= a < chi else INFINITY
            if prev_lo <= a < prev_hi:
                prev = relaxed[j - 1, a]
                if prev < cur:
                    cur = prev
                    bits[j >> 3, a] |= <unsigned char> (128 >> (j & 7))
            if cur > bound:
                relaxed[j, a] = INFINITY
                continue
            # a tag can cover at most caps[j] * (highest level it can still
            # reach) of the rem mass ahead
            ii = a + didx[j]
            if ii > ns - 1:
                ii = ns - 1
            if cur + rem - caps[j] * expv[ii] > bound:
                relaxed[j, a] = INFINITY
            else:
                relaxed[j, a] = cur
        r_lo[j] = lo
        r_hi[j] = hi
        prev_lo = lo
        prev_hi = hi


def layer_step_real(double[:, ::1] cost, double[:, ::1] relaxed,
                    unsigned char[:, ::1] bits, double[:, ::1] nxt,
                    long long[::1] delta, double[::1] svals, double L,
                    double[::1] expv, double[::1] logv,
                    double[::1] seg_u, double[::1] seg_v,
                    double[::1] seg_p, double[::1] seg_q,
                    double width_target, double bound, double rem,
                    double[::1] caps, long long[::1] didx,
                    double pre_next, double cell_mass,
                    long long[::1] c_lo, long long[::1] c_hi,
                    long long[::1] r_lo, long long[::1] r_hi,
                    long long[::1] o_lo, long long[::1] o_hi):
    cdef Py_ssize_t mp1 = cost.shape[0]
    cdef Py_ssize_t ns = cost.shape[1]
    cdef Py_ssize_t nseg = seg_u.shape[0]
    cdef Py_ssize_t j, a, a0, a1, si, s0, s1, idx
    cdef Py_ssize_t n_lo = ns, n_hi = 0
    cdef long long dlt
    cdef double d, u, v, p, q, eu, ev, f, c1, cur, lb, av, phi, cut
    cdef long long hoff
    cdef bint have_c1
    with nogil:
        _relax_banded(cost, relaxed, bits, expv, bound, rem, caps, didx,
                      c_lo, c_hi, r_lo, r_hi)
        for j in range(mp1):
            o_lo[j] = 0
            o_hi[j] = 0
        cut = (pre_next if pre_next < bound else bound) + cell_mass
        for j in range(1, mp1):
            dlt = delta[j - 1]
            a0 = -dlt if dlt < 0 else 0
            a1 = ns - dlt if dlt > 0 else ns
            if a0 < r_lo[j]:
                a0 = r_lo[j]
            if a1 > r_hi[j]:
                a1 = r_hi[j]
            if a1 <= a0:
                continue
            d = svals[j - 1] / L
            # an edge whose resulting cost is at least the cost of entering
            # fresh at the next endpoint cannot matter: tag 0 permits every
            # continuation this tag does (the cell holds exactly
            # phi * min-level of h mass and at most cell_mass of g mass)
            av = svals[j - 1]
            if av < 0.0:
                av = -av
            phi = L if av < 1e-12 else L * expm1(av) / av
            hoff = dlt if dlt < 0 else 0
            # even a zero-cost state dies at levels whose coverage exceeds
            # both the entering cost and the bound
            idx = _lower_bound(expv, cut / phi) - hoff
            if idx < a1:
                a1 = idx
            if a1 <= a0:
                continue
            s0 = -1
            s1 = -1
            for a in range(a0, a1):
                cur = relaxed[j, a]
                if cur != INFINITY:
                    lb = cur + phi * expv[a + hoff] - cell_mass
                    if lb >= pre_next or lb > bound:
                        cur = INFINITY
                nxt[j, a + dlt] = cur
                if cur != INFINITY:
                    if s0 < 0:
                        s0 = a
                    s1 = a + 1
            if s0 < 0:
                continue
            o_lo[j] = s0 + dlt
            o_hi[j] = s1 + dlt
            if s0 + dlt < n_lo:
                n_lo = s0 + dlt
            if s1 + dlt > n_hi:
                n_hi = s1 + dlt
            for si in range(nseg):
                u = seg_u[si]
                v = seg_v[si]
                p = seg_p[si]
                q = seg_q[si]
                if d == 0.0:
                    eu = 1.0
                    ev = 1.0
                    f = v - u
                else:
                    eu = exp(d * u)
                    ev = exp(d * v)
                    f = expm1(d * (v - u)) / d
                have_c1 = d != 0.0 and p != 0.0 and p / d > 0.0
                c1 = log(p / d) if have_c1 else 0.0
                for a in range(s0, s1):
                    if nxt[j, a + dlt] != INFINITY:
                        nxt[j, a + dlt] += _seg_real(expv[a], logv[a], d, u, v,
                                                     p, q, eu, ev, f, have_c1,
                                                     c1, width_target)
    if n_hi <= n_lo:
        return 0, 0
    return n_lo, n_hi


def layer_step_int(double[:, ::1] cost, double[:, ::1] relaxed,
                   unsigned char[:, ::1] bits, double[:, ::1] nxt,
                   long long[::1] delta, double[::1] svals, double L,
                   double[::1] expv, double[::1] logv,
                   double[::1] seg_lo, double[::1] seg_hi,
                   double[::1] seg_p, double[::1] seg_q,
                   double bound, double rem, double[::1] caps,
                   long long[::1] didx, double pre_next, double cell_mass,
                   long long[::1] c_lo, long long[::1] c_hi,
                   long long[::1] r_lo, long long[::1] r_hi,
                   long long[::1] o_lo, long long[::1] o_hi):
    cdef Py_ssize_t mp1 = cost.shape[0]
    cdef Py_ssize_t ns = cost.shape[1]
    cdef Py_ssize_t nseg = seg_lo.shape[0]
    cdef Py_ssize_t j, a, a0, a1, si, s0, s1, idx
    cdef Py_ssize_t n_lo = ns, n_hi = 0
    cdef long long dlt
    cdef double d, em, lo, hi, p, q, eu, ev, c1, cur, lb, av, phi, cut
    cdef long long hoff
    cdef bint have_c1
    with nogil:
        _relax_banded(cost, relaxed, bits, expv, bound, rem, caps, didx,
                      c_lo, c_hi, r_lo, r_hi)
        for j in range(mp1):
            o_lo[j] = 0
            o_hi[j] = 0
        cut = (pre_next if pre_next < bound else bound) + cell_mass
        for j in range(1, mp1):
            dlt = delta[j - 1]
            a0 = -dlt if dlt < 0 else 0
            a1 = ns - dlt if dlt > 0 else ns
            if a0 < r_lo[j]:
                a0 = r_lo[j]
            if a1 > r_hi[j]:
                a1 = r_hi[j]
            if a1 <= a0:
                continue
            d = svals[j - 1] / L
            em = expm1(d)
            # an edge whose resulting cost is at least the cost of entering
            # fresh at the next endpoint cannot matter: tag 0 permits every
            # continuation this tag does (the cell holds at least the L-point
            # geometric sum from the min level of h mass and at most
            # cell_mass of g mass)
            av = svals[j - 1]
            if av < 0.0:
                av = -av
            if av / L < 1e-12:
                phi = L
            else:
                phi = expm1(av) / expm1(av / L)
            hoff = dlt if dlt < 0 else 0
            # even a zero-cost state dies at levels whose coverage exceeds
            # both the entering cost and the bound
            idx = _lower_bound(expv, cut / phi) - hoff
            if idx < a1:
                a1 = idx
            if a1 <= a0:
                continue
            s0 = -1
            s1 = -1
            for a in range(a0, a1):
                cur = relaxed[j, a]
                if cur != INFINITY:
                    lb = cur + phi * expv[a + hoff] - cell_mass
                    if lb >= pre_next or lb > bound:
                        cur = INFINITY
                nxt[j, a + dlt] = cur
                if cur != INFINITY:
                    if s0 < 0:
                        s0 = a
                    s1 = a + 1
            if s0 < 0:
                continue
            o_lo[j] = s0 + dlt
            o_hi[j] = s1 + dlt
            if s0 + dlt < n_lo:
                n_lo = s0 + dlt
            if s1 + dlt > n_hi:
                n_hi = s1 + dlt
            for si in range(nseg):
                lo = seg_lo[si]
                hi = seg_hi[si]
                p = seg_p[si]
                q = seg_q[si]
                eu = exp(d * lo)
                ev = exp(d * hi)
                have_c1 = d != 0.0 and p != 0.0 and p / d > 0.0
                c1 = log(p / d) if have_c1 else 0.0
                for a in range(s0, s1):
                    if nxt[j, a + dlt] != INFINITY:
                        nxt[j, a + dlt] += _seg_int(expv[a], logv[a], d, em,
                                                    lo, hi, p, q, eu, ev,
                                                    have_c1, c1)
    if n_hi <= n_lo:
        return 0, 0
    return n_lo, n_hi
