"""Constructive piecewise-linear approximation of an explicit log-concave
density with O(eps^{-1/2}) pieces.

The density is given through an :class:`LcOracle` of callables.  The target is
split at the mode into two monotone halves; each half is partitioned into
intervals on which the density stays within a factor two and the logarithmic
derivative varies by at most the reciprocal interval length.  Each interval is
then linearized by first-order expansion on subintervals chosen from the
interval length and from level crossings of the log-derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .constants import Constants, DEFAULTS
from .errors import HypothesisViolated, NonfiniteMode, OutOfSupport
from .pwfunc import DomainKind, PiecewiseLinearDensity

_BISECT_ITERS = 70


@dataclass(frozen=True)
class LcOracle:
    """Callable bundle describing one log-concave density.

    ``log_deriv`` is d/dx log f on R and the log finite difference
    log f(x+1) - log f(x) on Z; it must raise :class:`OutOfSupport` where
    undefined.  Log-concavity is the caller's responsibility and is only
    spot-checked on a grid.
    """

    pdf: Callable
    log_pdf: Callable
    log_deriv: Callable
    cdf: Callable
    mode: float
    domain: DomainKind
    support: tuple = (-math.inf, math.inf)

    @classmethod
    def from_family(cls, fam) -> "LcOracle":
        return cls(pdf=fam.pdf, log_pdf=fam.log_pdf, log_deriv=fam.log_deriv,
                   cdf=fam.cdf, mode=fam.mode(), domain=fam.domain,
                   support=fam.support())

    # scalar conveniences ---------------------------------------------------

    def f(self, x: float) -> float:
        return float(self.pdf(x))

    def ld(self, x: float) -> float:
        return float(self.log_deriv(x))

    def tail_right(self, b: float) -> float:
        return 1.0 - float(self.cdf(b))

    def tail_left(self, a: float) -> float:
        if self.domain is DomainKind.INTEGER:
            return float(self.cdf(a - 1))
        return float(self.cdf(a))

    def spot_check(self, lo: float, hi: float, points: int = 33) -> bool:
        """Midpoint log-concavity on a grid over [lo, hi]."""
        if self.domain is DomainKind.INTEGER:
            xs = np.arange(math.ceil(lo), math.floor(hi) + 1, dtype=float)
            if len(xs) > points:
                xs = xs[np.linspace(0, len(xs) - 1, points).astype(int)]
        else:
            xs = np.linspace(lo, hi, points)
        with np.errstate(divide="ignore"):
            logs = np.asarray(self.log_pdf(xs), dtype=float)
        finite = np.isfinite(logs)
        logs = logs[finite]
        if len(logs) < 3:
            return True
        d2 = np.diff(logs, 2)
        scale = max(1.0, float(np.max(np.abs(logs))))
        return bool(np.max(d2) <= 1e-7 * scale)


# ---------------------------------------------------------------------------
# interval partition


def _bisect_predicate(ok: Callable[[float], bool], good: float, bad: float) -> float:
    """Largest-in-direction point keeping `ok` true, between good and bad."""
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (good + bad)
        if ok(mid):
            good = mid
        else:
            bad = mid
    return good


def _grow_right_real(f: LcOracle, a: float, ld_a: float, hi_cap: float) -> float:
    """Maximal b with factor-2 range and log-derivative variation <= 1/(b-a)."""

    def ok(b: float) -> bool:
        if b <= a or b > hi_cap:
            return False
        fb = f.f(b)
        if fb <= 0.0 or f.f(a) > 2.0 * fb * (1.0 + 1e-12):
            return False
        try:
            ld_b = f.ld(b)
        except OutOfSupport:
            return False
        return (ld_a - ld_b) * (b - a) <= 1.0 + 1e-12

    step = 1e-6 * (1.0 + abs(a))
    if not ok(a + step):
        return _bisect_predicate(ok, a, a + step)
    b = a + step
    while True:
        nxt = a + 2.0 * (b - a)
        if nxt >= hi_cap:
            if ok(hi_cap):
                return hi_cap
            return _bisect_predicate(ok, b, hi_cap)
        if not ok(nxt):
            return _bisect_predicate(ok, b, nxt)
        b = nxt


def _grow_left_real(f: LcOracle, b: float, ld_b: float, lo_cap: float) -> float:
    """Minimal a with factor-2 range and log-derivative variation <= 1/(b-a)."""

    def ok(a: float) -> bool:
        if a >= b or a < lo_cap:
            return False
        fa = f.f(a)
        if fa <= 0.0 or f.f(b) > 2.0 * fa * (1.0 + 1e-12):
            return False
        try:
            ld_a = f.ld(a)
        except OutOfSupport:
            return False
        return (ld_a - ld_b) * (b - a) <= 1.0 + 1e-12

    step = 1e-6 * (1.0 + abs(b))
    if not ok(b - step):
        return _bisect_predicate(ok, b, b - step)
    a = b - step
    while True:
        nxt = b - 2.0 * (b - a)
        if nxt <= lo_cap:
            if ok(lo_cap):
                return lo_cap
            return _bisect_predicate(ok, a, nxt)
        if not ok(nxt):
            return _bisect_predicate(ok, a, nxt)
        a = nxt


def _int_ld(f: LcOracle, x: int) -> float:
    return float(f.log_deriv(float(x)))


def _grow_right_int(f: LcOracle, a: int, hi_cap: int) -> int:
    """Maximal integer b: range factor 2 on a..b, log-fd variation <= 1/len."""

    fa = f.f(a)

    def ok(b: int) -> bool:
        if b < a or b > hi_cap:
            return False
        fb = f.f(b)
        if fb <= 0.0 or fa > 2.0 * fb * (1.0 + 1e-12):
            return False
        if b == a:
            return True
        return (_int_ld(f, a) - _int_ld(f, b - 1)) * (b - a + 1) <= 1.0 + 1e-12

    b = a
    step = 1
    while b + step <= hi_cap and ok(b + step):
        b += step
        step *= 2
    lo, hi = b, min(b + step, hi_cap + 1)
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _grow_left_int(f: LcOracle, b: int, lo_cap: int) -> int:
    """Minimal integer a with the interval [a, b] admissible."""

    fb = f.f(b)

    def ok(a: int) -> bool:
        if a > b or a < lo_cap:
            return False
        fa = f.f(a)
        if fa <= 0.0 or fb > 2.0 * fa * (1.0 + 1e-12):
            return False
        if a == b:
            return True
        return (_int_ld(f, a) - _int_ld(f, b - 1)) * (b - a + 1) <= 1.0 + 1e-12

    a = b
    step = 1
    while a - step >= lo_cap and ok(a - step):
        a -= step
        step *= 2
    lo, hi = max(a - step, lo_cap - 1), a
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def partition_intervals(f: LcOracle, eps: float,
                        consts: Constants = DEFAULTS) -> list[tuple[float, float]]:
    """Split the target at its mode into monotone factor-2 intervals.

    Returns closed intervals in ascending order; adjacent real intervals share
    endpoints, integer intervals abut.  The two truncated tails hold mass at
    most eps/4 combined whenever the cap on the interval count does not bind.
    """
    mode = f.mode
    if not math.isfinite(mode) or f.f(mode) <= 0.0:
        raise NonfiniteMode(f"mode {mode!r} is not a finite density maximizer")
    cap = max(1, math.ceil(consts.c_m_intervals * math.log(1.0 / eps)))
    tail_budget = eps / 8.0
    lo_sup, hi_sup = f.support

    right: list[tuple[float, float]] = []
    left: list[tuple[float, float]] = []

    if f.domain is DomainKind.INTEGER:
        m = int(math.floor(mode))
        hi_cap = int(hi_sup) if math.isfinite(hi_sup) else m + 1_000_000_000
        lo_cap = int(lo_sup) if math.isfinite(lo_sup) else m - 1_000_000_000
        a = m
        while len(right) < cap and a <= hi_cap:
            b = _grow_right_int(f, a, hi_cap)
            right.append((float(a), float(b)))
            if b >= hi_cap or f.tail_right(float(b)) <= tail_budget:
                break
            a = b + 1
        b_edge = m - 1
        while len(left) < cap and b_edge >= lo_cap:
            a_new = _grow_left_int(f, b_edge, lo_cap)
            left.append((float(a_new), float(b_edge)))
            if a_new <= lo_cap or f.tail_left(float(a_new)) <= tail_budget:
                break
            b_edge = a_new - 1
    else:
        a = float(mode)
        while len(right) < cap and a < hi_sup:
            ld_a = f.ld(a)
            b = _grow_right_real(f, a, ld_a, hi_sup)
            if b <= a:
                break
            right.append((a, b))
            if b >= hi_sup or f.tail_right(b) <= tail_budget:
                break
            a = b
        b_edge = float(mode)
        while len(left) < cap and b_edge > lo_sup:
            ld_b = f.ld(b_edge)
            a_new = _grow_left_real(f, b_edge, ld_b, lo_sup)
            if a_new >= b_edge:
                break
            left.append((a_new, b_edge))
            if a_new <= lo_sup or f.tail_left(a_new) <= tail_budget:
                break
            b_edge = a_new

    return list(reversed(left)) + right


# ---------------------------------------------------------------------------
# linearization


def _check_range(values: list[float], interval) -> None:
    positive = [v for v in values if v > 0.0]
    if not positive:
        raise HypothesisViolated(f"density vanishes on {interval}")
    if max(positive) > 2.0 * min(positive) * (1.0 + 1e-9):
        raise HypothesisViolated(
            f"range factor {max(positive) / min(positive):.3f} exceeds 2 on {interval}")


def _ld_crossings_real(f: LcOracle, lo: float, hi: float, h: float) -> list[float]:
    """Points where the (non-increasing) log-derivative crosses multiples of h."""
    try:
        ld_lo, ld_hi = f.ld(lo), f.ld(hi)
    except OutOfSupport:
        span = hi - lo
        ld_lo, ld_hi = f.ld(lo + 1e-9 * span), f.ld(hi - 1e-9 * span)
    if ld_hi > ld_lo:
        ld_lo, ld_hi = ld_hi, ld_lo  # numerical jitter on a flat derivative
    pts: list[float] = []
    m_lo = math.ceil(ld_hi / h + 1e-12)
    m_hi = math.floor(ld_lo / h - 1e-12)
    for m in range(m_lo, m_hi + 1):
        t = m * h
        if not ld_hi < t < ld_lo:
            continue
        a_, b_ = lo, hi  # ld(a_) >= t >= ld(b_)
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (a_ + b_)
            if f.ld(mid) >= t:
                a_ = mid
            else:
                b_ = mid
        pts.append(0.5 * (a_ + b_))
    return pts


def _piece_from_point(f_y: float, alpha: float, y: float) -> tuple[float, float]:
    """First-order expansion f(y)*(1 + (x-y)*alpha) as (slope, intercept)."""
    return f_y * alpha, f_y * (1.0 - alpha * y)


def linearize(f: LcOracle, interval: tuple[float, float],
              eps: float) -> list[tuple[tuple[float, float], tuple[float, float]]]:
    """Linear pieces on one factor-2 interval: [(subinterval, (slope, b)), ...].

    Real subintervals are half-open cells [y, z); an integer interval [a, b]
    comes back as cells [y, z) covering the integers y..z-1 with z reaching
    b + 1.
    """
    lo, hi = interval
    root = math.sqrt(eps)

    if f.domain is DomainKind.INTEGER:
        lo_i, hi_i = int(lo), int(hi)
        xs = np.arange(lo_i, hi_i + 1, dtype=float)
        vals = np.asarray(f.pdf(xs), dtype=float)
        _check_range([float(v) for v in vals], interval)
        npts = hi_i - lo_i + 1
        if npts == 1:
            return [((float(lo_i), float(lo_i + 1)), (0.0, float(vals[0])))]
        with np.errstate(divide="ignore"):
            ld = np.diff(np.log(vals))
        h = root / npts
        codes = np.floor(ld / h + 1e-12)
        stride = max(1, int(round(root * npts)))
        cuts = {lo_i, hi_i + 1}
        cuts.update(range(lo_i + stride, hi_i + 1, stride))
        cuts.update((lo_i + 1 + np.flatnonzero(codes[1:] != codes[:-1])).tolist())
        knots = sorted(cuts)
        out = []
        for y, z in zip(knots[:-1], knots[1:]):
            f_y = float(vals[y - lo_i])
            alpha = float(ld[y - lo_i]) if y - lo_i < len(ld) else 0.0
            out.append(((float(y), float(z)), _piece_from_point(f_y, alpha, float(y))))
        return out

    span = hi - lo
    if span <= 0.0:
        raise HypothesisViolated(f"empty interval {interval}")
    endpoint_vals = [f.f(lo), f.f(hi)]
    if lo < f.mode < hi:
        endpoint_vals.append(f.f(f.mode))
    _check_range(endpoint_vals, interval)

    cuts = {lo, hi}
    stride = root * span
    j = 1
    while lo + j * stride < hi - 1e-12 * span:
        cuts.add(lo + j * stride)
        j += 1
    cuts.update(_ld_crossings_real(f, lo, hi, root / span))
    knots = sorted(cuts)
    merged = [knots[0]]
    for x in knots[1:]:
        if x - merged[-1] > 1e-10 * span:
            merged.append(x)
    merged[-1] = hi
    out = []
    for y, z in zip(merged[:-1], merged[1:]):
        f_y = f.f(y)
        try:
            alpha = f.ld(y)
        except OutOfSupport:
            alpha = f.ld(y + 1e-9 * span)
        out.append(((y, z), _piece_from_point(f_y, alpha, y)))
    return out


# ---------------------------------------------------------------------------
# assembly


def _clip_negative(breaks: list[float], pieces: list[tuple[float, float]],
                   domain: DomainKind) -> tuple[list[float], list[float]]:
    """Split cells where a piece crosses zero; replace the deficit with zero."""
    out_b = [breaks[0]]
    out_p = []
    for i, (a, b) in enumerate(pieces):
        u, v = breaks[i], breaks[i + 1]
        v_eval = v - 1 if domain is DomainKind.INTEGER else v
        val_u, val_v = a * u + b, a * max(v_eval, u) + b
        if val_u >= 0.0 and val_v >= 0.0:
            out_b.append(v)
            out_p.append((a, b))
            continue
        if val_u < 0.0 and val_v < 0.0:
            out_b.append(v)
            out_p.append((0.0, 0.0))
            continue
        r = -b / a
        if domain is DomainKind.INTEGER:
            r = math.floor(r) + 1 if val_u < 0.0 else math.ceil(r)
            r = min(max(r, u + 1), v - 1)
        if not u < r < v:
            out_b.append(v)
            out_p.append((a, b) if val_u + val_v >= 0.0 else (0.0, 0.0))
            continue
        if val_u < 0.0:
            out_b.extend([r, v])
            out_p.extend([(0.0, 0.0), (a, b)])
        else:
            out_b.extend([r, v])
            out_p.extend([(a, b), (0.0, 0.0)])
    return out_b, out_p


def pwl_approximate(f: LcOracle, eps: float,
                    consts: Constants = DEFAULTS) -> PiecewiseLinearDensity:
    """Normalized piecewise-linear density within eps total variation of f."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    intervals = partition_intervals(f, eps, consts)
    if not intervals:
        raise NonfiniteMode("partition produced no intervals")
    if not f.spot_check(intervals[0][0], intervals[-1][1]):
        raise ValueError("density fails a log-concavity spot check")

    # rank intervals by distance from the mode; far tail intervals carry a
    # geometrically smaller share of the mass, so their accuracy budget grows
    mode = f.mode
    breaks: list[float] = []
    pieces: list[tuple[float, float]] = []
    slack = 0.5 if f.domain is DomainKind.INTEGER else 1e-9 * (1.0 + abs(mode))
    split = next((i for i, (lo, _) in enumerate(intervals) if lo >= mode - slack),
                 len(intervals))
    for idx, (lo, hi) in enumerate(intervals):
        rank = idx - split if idx >= split else split - 1 - idx
        eps_eff = min(consts.c_safe_pwl * eps * 2.0 ** (0.5 * rank), 0.9)
        for (y, z), piece in linearize(f, (lo, hi), eps_eff):
            if not breaks:
                breaks.append(y)
            pieces.append(piece)
            breaks.append(z)

    breaks, pieces = _clip_negative(breaks, pieces, f.domain)
    dens = PiecewiseLinearDensity(f.domain, breaks, pieces)
    return dens.normalize()
