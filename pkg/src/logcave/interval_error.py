"""Fast per-cell L1 error between a linear piece and an exponential piece.

``cell_error`` approximates ``||g - h||_1`` on one cell, with ``g(x) = a*x + b``
linear and ``h(x) = c*exp(d*x)`` exponential, to within an additive
``c_tol * eps^2 / ln(1/eps)``:

1. exact closed forms for the masses of g and h (sums on Z), with small-rate
   series guards;
2. split at the stationary point of h - g when it is interior, so each
   subpiece is monotone;
3. on a monotone subpiece whose endpoint signs differ, bisect to localize the
   crossing;
4. each signed subpiece contributes |mass(g) - mass(h)|.

Elementary-function evaluations (exp/log) are counted so tests can assert the
polylog per-query bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import Constants, DEFAULTS
from .errors import DegenerateCell
from .pwfunc import DomainKind, exp_integral, exp_sum


class _EvalCounter:
    __slots__ = ("count",)

    def __init__(self):
        self.count = 0


_COUNTER = _EvalCounter()


def reset_eval_count() -> None:
    _COUNTER.count = 0


def eval_count() -> int:
    return _COUNTER.count


def _exp(x: float) -> float:
    _COUNTER.count += 1
    return math.exp(x)


def _log(x: float) -> float:
    _COUNTER.count += 1
    return math.log(x)


@dataclass(frozen=True)
class CellErrorQuery:
    """One cell query: g(x) = g_slope*x + g_intercept, h(x) = h_coef*exp(h_rate*x)."""

    g_slope: float
    g_intercept: float
    h_coef: float
    h_rate: float
    lo: float
    hi: float
    domain: DomainKind
    eps: float

    def __post_init__(self):
        if self.hi - self.lo <= 0:
            raise DegenerateCell(f"cell length {self.hi - self.lo} <= 0")
        if self.h_coef < 0:
            raise ValueError("h_coef must be nonnegative")


def tolerance(eps: float, consts: Constants = DEFAULTS) -> float:
    return consts.c_tol * eps * eps / math.log(1.0 / eps)


# ---------------------------------------------------------------------------
# continuous case


def _g_val(q: CellErrorQuery, x: float) -> float:
    return q.g_slope * x + q.g_intercept


def _h_val(q: CellErrorQuery, x: float) -> float:
    if q.h_coef == 0.0:
        return 0.0
    return q.h_coef * _exp(q.h_rate * x)


def _g_mass_real(q: CellErrorQuery, u: float, v: float) -> float:
    return 0.5 * q.g_slope * (v * v - u * u) + q.g_intercept * (v - u)


def _h_mass_real(q: CellErrorQuery, u: float, v: float) -> float:
    if q.h_coef == 0.0 or v <= u:
        return 0.0
    _COUNTER.count += 1  # the expm1 inside the closed form
    return exp_integral(_h_val(q, u), q.h_rate, v - u)


def _signed_piece_real(q: CellErrorQuery, u: float, v: float,
                       bis_width: float, tol: float) -> float:
    """Error contribution of one monotone subpiece of h - g."""
    du = _g_val(q, u) - _h_val(q, u)
    dv = _g_val(q, v) - _h_val(q, v)
    if du == 0.0 or dv == 0.0 or (du > 0.0) == (dv > 0.0):
        return abs(_g_mass_real(q, u, v) - _h_mass_real(q, u, v))
    xi = _bisect_real(q, u, v, du, bis_width, tol)
    return (abs(_g_mass_real(q, u, xi) - _h_mass_real(q, u, xi))
            + abs(_g_mass_real(q, xi, v) - _h_mass_real(q, xi, v)))


def _bisect_real(q: CellErrorQuery, u: float, v: float, sign_u: float,
                 bis_width: float, tol: float) -> float:
    """Localize the single crossing of g - h on a monotone subpiece."""
    # closed forms when the difference is effectively linear
    if q.h_coef == 0.0 or q.h_rate == 0.0:
        a = q.g_slope
        b = q.g_intercept - q.h_coef
        if a != 0.0:
            return min(max(-b / a, u), v)
    if q.g_slope == 0.0 and q.g_intercept > 0.0 and q.h_coef > 0.0 and q.h_rate != 0.0:
        xi = (_log(q.g_intercept / q.h_coef)) / q.h_rate
        return min(max(xi, u), v)
    lo, hi = u, v
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        dm = _g_val(q, mid) - _h_val(q, mid)
        if dm == 0.0:
            return mid
        if (dm > 0.0) == (sign_u > 0.0):
            lo = mid
        else:
            hi = mid
        width = hi - lo
        if width <= bis_width and width * (abs(_g_val(q, mid)) + _h_val(q, mid)) <= 0.25 * tol:
            break
    return 0.5 * (lo + hi)


def _cell_error_real(q: CellErrorQuery, consts: Constants) -> float:
    ln_inv = math.log(1.0 / q.eps)
    L = q.hi - q.lo
    tol = tolerance(q.eps, consts)
    bis_width = consts.c_bis * q.eps * L / ln_inv
    # split at the stationary point of h - g, if interior
    knots = [q.lo, q.hi]
    a, c, d = q.g_slope, q.h_coef, q.h_rate
    if c > 0.0 and d != 0.0 and a != 0.0 and a / (c * d) > 0.0:
        xstar = _log(a / (c * d)) / d
        if q.lo < xstar < q.hi:
            knots = [q.lo, xstar, q.hi]
    total = 0.0
    for u, v in zip(knots[:-1], knots[1:]):
        total += _signed_piece_real(q, u, v, bis_width, tol)
    return total


# ---------------------------------------------------------------------------
# discrete case


def _g_mass_int(q: CellErrorQuery, lo: int, hi: int) -> float:
    if hi < lo:
        return 0.0
    n = hi - lo + 1
    return q.g_slope * 0.5 * (lo + hi) * n + q.g_intercept * n


def _h_mass_int(q: CellErrorQuery, lo: int, hi: int) -> float:
    if q.h_coef == 0.0 or hi < lo:
        return 0.0
    _COUNTER.count += 2  # the expm1 pair inside the closed form
    return exp_sum(_h_val(q, lo), q.h_rate, hi - lo + 1)


def _signed_piece_int(q: CellErrorQuery, lo: int, hi: int) -> float:
    du = _g_val(q, lo) - _h_val(q, lo)
    dv = _g_val(q, hi) - _h_val(q, hi)
    if du == 0.0 or dv == 0.0 or (du > 0.0) == (dv > 0.0):
        return abs(_g_mass_int(q, lo, hi) - _h_mass_int(q, lo, hi))
    # binary search for the last integer on the lo side of the crossing
    a, b = lo, hi
    while b - a > 1:
        mid = (a + b) // 2
        dm = _g_val(q, mid) - _h_val(q, mid)
        if dm == 0.0 or (dm > 0.0) == (du > 0.0):
            a = mid
        else:
            b = mid
    return (abs(_g_mass_int(q, lo, a) - _h_mass_int(q, lo, a))
            + abs(_g_mass_int(q, b, hi) - _h_mass_int(q, b, hi)))


def _cell_error_int(q: CellErrorQuery) -> float:
    lo = int(math.ceil(q.lo))
    hi = int(math.floor(q.hi))
    if hi < lo:
        return 0.0
    split = None
    a, c, d = q.g_slope, q.h_coef, q.h_rate
    if c > 0.0 and d != 0.0 and a != 0.0 and a / (c * d) > 0.0:
        xstar = _log(a / (c * d)) / d
        if lo < xstar < hi:
            split = int(math.floor(xstar))
    if split is None or split < lo or split >= hi:
        ranges = [(lo, hi)]
    else:
        ranges = [(lo, split), (split + 1, hi)]
    return sum(_signed_piece_int(q, u, v) for u, v in ranges)


# ---------------------------------------------------------------------------
# public API


def cell_error(q: CellErrorQuery, consts: Constants = DEFAULTS) -> float:
    """Approximate ||g - h||_1 over the cell to within tolerance(eps)."""
    if q.domain is DomainKind.INTEGER:
        return _cell_error_int(q)
    return _cell_error_real(q, consts)


def boundary_error(g_slope: float, g_intercept: float, lo: float, hi: float,
                   domain: DomainKind) -> float:
    """Mass of the linear piece over the cell: the cost of h being zero there."""
    if domain is DomainKind.INTEGER:
        ilo, ihi = int(math.ceil(lo)), int(math.floor(hi))
        if ihi < ilo:
            return 0.0
        n = ihi - ilo + 1
        return max(g_slope * 0.5 * (ilo + ihi) * n + g_intercept * n, 0.0)
    if hi <= lo:
        return 0.0
    return max(0.5 * g_slope * (hi * hi - lo * lo) + g_intercept * (hi - lo), 0.0)
