"""Piecewise-function algebra for densities on R and Z.

Two hypothesis representations live here:

* :class:`PiecewiseLinearDensity` -- possibly discontinuous, one (slope,
  intercept) pair per cell.  The output format of the stage-1 learner.
* :class:`PiecewiseExpDensity` -- continuous on its support, exponential on
  each cell, parameterized by log-levels at the cell endpoints.  The proper
  hypothesis class.

Conventions:

* At a breakpoint of a discontinuous piecewise-linear function the *right*
  piece's value is used.  On R this only affects sets of measure zero.
* On Z a piecewise-linear cell ``[x_i, x_{i+1})`` covers the integers
  ``x_i .. x_{i+1}-1``; the support is ``[x_1, x_{m+1}-1]``.
* A piecewise-exponential density on Z is supported on the closed integer
  range ``[x_l, x_r]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import DomainMismatch, InvalidProbability, ParseError


class DomainKind(Enum):
    REAL = "real"
    INTEGER = "integer"


NEG_INF = float("-inf")


# ---------------------------------------------------------------------------
# closed-form building blocks


def exp_integral(value_lo: float, rate: float, width: float) -> float:
    """Integral of ``value_lo * exp(rate*t)`` for t in [0, width].

    Switches to a truncated series when |rate*width| is tiny to avoid
    catastrophic cancellation.
    """
    if width <= 0.0:
        return 0.0
    u = rate * width
    if abs(u) < 1e-8:
        return value_lo * width * (1.0 + 0.5 * u + u * u / 6.0)
    return value_lo * math.expm1(u) / rate


def exp_sum(value_lo: float, ratio_log: float, count: int) -> float:
    """Sum of the geometric series ``value_lo * exp(ratio_log*j)``, j = 0..count-1."""
    if count <= 0:
        return 0.0
    denom = math.expm1(ratio_log)
    if abs(denom) < 1e-9:
        d = ratio_log
        n = float(count)
        # second-order expansion of (e^{dn}-1)/(e^d-1)
        return value_lo * (n + d * n * (n - 1.0) / 2.0 + d * d * n * (n - 1.0) * (2.0 * n - 1.0) / 12.0)
    return value_lo * math.expm1(ratio_log * count) / denom


def _linear_integral(slope: float, intercept: float, u: float, v: float) -> float:
    if v <= u:
        return 0.0
    return 0.5 * slope * (v * v - u * u) + intercept * (v - u)


def _linear_int_sum(slope: float, intercept: float, lo: int, hi: int) -> float:
    """Sum of slope*x + intercept over integers lo..hi inclusive."""
    if hi < lo:
        return 0.0
    n = hi - lo + 1
    return slope * 0.5 * (lo + hi) * n + intercept * n


# ---------------------------------------------------------------------------
# integer-coded levels


@dataclass(frozen=True)
class IntegerCodedLevels:
    """Levels as integer multiples of eps/k; ``None`` encodes -inf."""

    levels: tuple
    eps_over_k: Fraction

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if self.eps_over_k <= 0:
            raise ValueError("eps_over_k must be positive")

    def values(self) -> np.ndarray:
        step = float(self.eps_over_k)
        return np.array(
            [NEG_INF if m is None else m * step for m in self.levels], dtype=float
        )

    def finite_slice(self) -> tuple[int, int] | None:
        """Indices [l, r] of the finite stretch, or None if all -inf."""
        finite = [i for i, m in enumerate(self.levels) if m is not None]
        if not finite:
            return None
        return finite[0], finite[-1]


def check_log_concave(coded: IntegerCodedLevels) -> bool:
    """Exact integer concavity check; -inf codes may only flank the support."""
    levels = coded.levels
    span = coded.finite_slice()
    if span is None:
        return True
    l, r = span
    if any(levels[i] is None for i in range(l, r + 1)):
        return False  # internal zero
    for i in range(l + 1, r):
        if levels[i + 1] - levels[i] > levels[i] - levels[i - 1]:
            return False
    return True


# ---------------------------------------------------------------------------
# piecewise linear


class PiecewiseLinearDensity:
    """Piecewise-linear nonnegative function, possibly discontinuous.

    Cell i is [breakpoints[i], breakpoints[i+1]) with value
    slope_i * x + intercept_i; the value at the top breakpoint on R comes from
    the last piece.
    """

    def __init__(
        self,
        domain: DomainKind,
        breakpoints: Sequence[float],
        pieces: Sequence[Sequence[float]],
    ):
        self.domain = domain
        self.breakpoints = np.asarray(breakpoints, dtype=float)
        self.pieces = np.asarray(pieces, dtype=float).reshape(-1, 2)
        if self.breakpoints.ndim != 1 or len(self.breakpoints) != len(self.pieces) + 1:
            raise ValueError("need m pieces and m+1 breakpoints")
        if len(self.pieces) < 1:
            raise ValueError("need at least one piece")
        if not np.all(np.diff(self.breakpoints) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        if domain is DomainKind.INTEGER:
            if not np.all(self.breakpoints == np.round(self.breakpoints)):
                raise ValueError("integer-domain breakpoints must be integers")
        self._check_nonnegative()
        self.total_mass = self.mass(self.breakpoints[0], self.breakpoints[-1])

    def _check_nonnegative(self):
        xs = self.breakpoints
        a = self.pieces[:, 0]
        b = self.pieces[:, 1]
        lo = xs[:-1]
        hi = xs[1:]
        if self.domain is DomainKind.INTEGER:
            hi = hi - 1  # topmost integer actually covered by the cell
            hi = np.maximum(hi, lo)
        vals = np.concatenate([a * lo + b, a * hi + b])
        scale = max(1.0, float(np.max(np.abs(vals))))
        if np.min(vals) < -1e-9 * scale:
            raise ValueError("piecewise-linear density is negative at a cell endpoint")

    # -- evaluation ---------------------------------------------------------

    def eval(self, x: float) -> float:
        return float(self.eval_array(np.array([x]))[0])

    def eval_array(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        xs = self.breakpoints
        idx = np.searchsorted(xs, x, side="right") - 1
        out = np.zeros_like(x)
        if self.domain is DomainKind.REAL:
            # top breakpoint uses the last piece
            top = x == xs[-1]
            idx = np.where(top, len(self.pieces) - 1, idx)
            inside = (idx >= 0) & (idx < len(self.pieces))
        else:
            inside = (idx >= 0) & (idx < len(self.pieces)) & (x < xs[-1])
        ii = idx[inside]
        out[inside] = self.pieces[ii, 0] * x[inside] + self.pieces[ii, 1]
        return np.maximum(out, 0.0)

    # -- integration --------------------------------------------------------

    def mass(self, u: float, v: float) -> float:
        """Integral (R) or inclusive integer sum (Z) of the function over [u, v]."""
        if v < u:
            raise ValueError("mass: need u <= v")
        xs = self.breakpoints
        total = 0.0
        if self.domain is DomainKind.REAL:
            for i in range(len(self.pieces)):
                lo = max(u, xs[i])
                hi = min(v, xs[i + 1])
                if hi > lo:
                    total += _linear_integral(self.pieces[i, 0], self.pieces[i, 1], lo, hi)
        else:
            for i in range(len(self.pieces)):
                lo = int(math.ceil(max(u, xs[i])))
                hi = int(math.floor(min(v, xs[i + 1] - 1)))
                if hi >= lo:
                    total += _linear_int_sum(self.pieces[i, 0], self.pieces[i, 1], lo, hi)
        return total

    def cdf(self, x: float) -> float:
        if x < self.breakpoints[0]:
            return 0.0
        return self.mass(self.breakpoints[0], min(x, self.breakpoints[-1]))

    def quantile(self, p: float) -> float:
        """Least x with CDF(x) >= p * total_mass (p in the open unit interval)."""
        if not 0.0 < p < 1.0:
            raise InvalidProbability(f"p must be in (0,1), got {p}")
        target = p * self.total_mass
        xs = self.breakpoints
        acc = 0.0
        for i in range(len(self.pieces)):
            a, b = self.pieces[i]
            if self.domain is DomainKind.REAL:
                cell = _linear_integral(a, b, xs[i], xs[i + 1])
                if acc + cell >= target or i == len(self.pieces) - 1:
                    return self._invert_cell_real(i, target - acc)
                acc += cell
            else:
                lo, hi = int(xs[i]), int(xs[i + 1]) - 1
                cell = _linear_int_sum(a, b, lo, hi)
                if acc + cell >= target or i == len(self.pieces) - 1:
                    return self._invert_cell_int(i, target - acc)
                acc += cell
        raise AssertionError("unreachable")

    def _invert_cell_real(self, i: int, r: float) -> float:
        a, b = self.pieces[i]
        u, v = self.breakpoints[i], self.breakpoints[i + 1]
        r = min(max(r, 0.0), _linear_integral(a, b, u, v))
        if abs(a) < 1e-300:
            return u if b == 0.0 else min(v, u + r / b)
        # solve a/2 (x^2-u^2) + b (x-u) = r for x in [u, v]
        A = 0.5 * a
        B = b
        C = -(0.5 * a * u * u + b * u + r)
        disc = B * B - 4.0 * A * C
        disc = max(disc, 0.0)
        sq = math.sqrt(disc)
        for root in ((-B + sq) / (2.0 * A), (-B - sq) / (2.0 * A)):
            if u - 1e-9 * (1 + abs(u)) <= root <= v + 1e-9 * (1 + abs(v)):
                return min(max(root, u), v)
        return v

    def _invert_cell_int(self, i: int, r: float) -> float:
        a, b = self.pieces[i]
        lo, hi = int(self.breakpoints[i]), int(self.breakpoints[i + 1]) - 1
        acc = 0.0
        for x in range(lo, hi + 1):
            acc += max(a * x + b, 0.0)
            if acc >= r - 1e-12:
                return float(x)
        return float(hi)

    # -- misc ---------------------------------------------------------------

    def normalize(self) -> "PiecewiseLinearDensity":
        if self.total_mass <= 0:
            raise ValueError("cannot normalize a zero-mass function")
        scaled = self.pieces / self.total_mass
        return PiecewiseLinearDensity(self.domain, self.breakpoints, scaled)

    @property
    def num_pieces(self) -> int:
        return len(self.pieces)

    def support(self) -> tuple[float, float]:
        if self.domain is DomainKind.INTEGER:
            return float(self.breakpoints[0]), float(self.breakpoints[-1] - 1)
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    def to_dict(self) -> dict:
        return {
            "domain": self.domain.value,
            "kind": "pwl",
            "breakpoints": [float(x) for x in self.breakpoints],
            "pieces": [[float(a), float(b)] for a, b in self.pieces],
        }


# ---------------------------------------------------------------------------
# piecewise exponential


class PiecewiseExpDensity:
    """Continuous piecewise-exponential density on a closed support.

    density(x) = exp(linear interpolation of log_levels at x) / (scale * Z)
    on [x[0], x[-1]], zero outside.  Z normalizes the total mass to one.
    Log-levels must form a concave sequence.
    """

    def __init__(
        self,
        domain: DomainKind,
        endpoints: Sequence[float],
        log_levels: Sequence[float],
        scale: float,
        codes: Optional[IntegerCodedLevels] = None,
        concavity_tol: float = 1e-9,
    ):
        self.domain = domain
        self.endpoints = np.asarray(endpoints, dtype=float)
        self.log_levels = np.asarray(log_levels, dtype=float)
        self.scale = float(scale)
        self.codes = codes
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.endpoints.ndim != 1 or self.endpoints.shape != self.log_levels.shape:
            raise ValueError("endpoints and log_levels must be 1-D of equal length")
        min_len = 1 if domain is DomainKind.INTEGER else 2
        if len(self.endpoints) < min_len:
            raise ValueError("support needs at least two endpoints on R (one on Z)")
        if len(self.endpoints) > 1 and not np.all(np.diff(self.endpoints) > 0):
            raise ValueError("endpoints must be strictly increasing")
        if domain is DomainKind.INTEGER and not np.all(
            self.endpoints == np.round(self.endpoints)
        ):
            raise ValueError("integer-domain endpoints must be integers")
        if not np.all(np.isfinite(self.log_levels)):
            raise ValueError("log levels on the support must be finite")
        if codes is not None and not check_log_concave(codes):
            raise ValueError("integer-coded levels are not concave")
        d = np.diff(self.log_levels)
        if len(d) > 1 and np.max(np.diff(d)) > concavity_tol:
            raise ValueError("log levels are not concave")
        self.Z = self._raw_mass()
        if self.Z <= 0:
            raise ValueError("zero-mass piecewise exponential")

    def _raw_mass(self) -> float:
        """Mass of exp(interp)/scale over the support, before normalization."""
        xs, a = self.endpoints, self.log_levels
        total = 0.0
        if self.domain is DomainKind.REAL:
            for i in range(len(xs) - 1):
                w = xs[i + 1] - xs[i]
                rate = (a[i + 1] - a[i]) / w
                total += exp_integral(math.exp(a[i]) / self.scale, rate, w)
        else:
            for i in range(len(xs) - 1):
                w = int(xs[i + 1] - xs[i])
                rate = (a[i + 1] - a[i]) / w
                total += exp_sum(math.exp(a[i]) / self.scale, rate, w)
            total += math.exp(a[-1]) / self.scale  # closed top endpoint
        return total

    # -- evaluation ---------------------------------------------------------

    def log_raw(self, x: np.ndarray) -> np.ndarray:
        """log of the unnormalized level interpolation (before /scale/Z); -inf outside."""
        x = np.asarray(x, dtype=float)
        xs, a = self.endpoints, self.log_levels
        out = np.full_like(x, NEG_INF)
        if len(xs) == 1:
            np.copyto(out, a[0], where=(x == xs[0]))
            return out
        inside = (x >= xs[0]) & (x <= xs[-1])
        out[inside] = np.interp(x[inside], xs, a)
        return out

    def eval(self, x: float) -> float:
        return float(self.eval_array(np.array([x]))[0])

    def eval_array(self, x: np.ndarray) -> np.ndarray:
        lr = self.log_raw(x)
        with np.errstate(over="ignore"):
            return np.exp(lr) / (self.scale * self.Z)

    # -- integration --------------------------------------------------------

    def mass(self, u: float, v: float) -> float:
        """Normalized mass over [u, v] (inclusive integer sum on Z)."""
        if v < u:
            raise ValueError("mass: need u <= v")
        xs, a = self.endpoints, self.log_levels
        norm = self.scale * self.Z
        total = 0.0
        if self.domain is DomainKind.REAL:
            for i in range(len(xs) - 1):
                lo = max(u, xs[i])
                hi = min(v, xs[i + 1])
                if hi > lo:
                    w = xs[i + 1] - xs[i]
                    rate = (a[i + 1] - a[i]) / w
                    v_lo = math.exp(a[i] + rate * (lo - xs[i])) / norm
                    total += exp_integral(v_lo, rate, hi - lo)
        else:
            if len(xs) == 1:
                return math.exp(a[0]) / norm if u <= xs[0] <= v else 0.0
            for i in range(len(xs) - 1):
                top = xs[i + 1] - 1 if i < len(xs) - 2 else xs[i + 1]
                lo = int(math.ceil(max(u, xs[i])))
                hi = int(math.floor(min(v, top)))
                if hi >= lo:
                    w = xs[i + 1] - xs[i]
                    rate = (a[i + 1] - a[i]) / w
                    v_lo = math.exp(a[i] + rate * (lo - xs[i])) / norm
                    total += exp_sum(v_lo, rate, hi - lo + 1)
        return total

    @property
    def total_mass(self) -> float:
        return 1.0

    def support(self) -> tuple[float, float]:
        return float(self.endpoints[0]), float(self.endpoints[-1])

    def to_dict(self) -> dict:
        return {
            "domain": self.domain.value,
            "kind": "pwexp",
            "breakpoints": [float(x) for x in self.endpoints],
            "log_levels": ["neg_inf" if a == NEG_INF else float(a) for a in self.log_levels],
            "scale": float(self.scale),
        }


# ---------------------------------------------------------------------------
# total variation distance


def _piece_descriptors(f, cell_lo: float, cell_hi: float):
    """Yield (lo, hi, kind, p0, p1) descriptors covering [cell_lo, cell_hi].

    kind 'lin': p0*x + p1; kind 'exp': exp(p0 + p1*x).  Zero regions are
    emitted as flat 'lin' pieces.
    """
    if isinstance(f, PiecewiseLinearDensity):
        xs = f.breakpoints
        segs = []
        if cell_lo < xs[0]:
            segs.append((cell_lo, min(cell_hi, xs[0]), "lin", 0.0, 0.0))
        for i in range(len(f.pieces)):
            lo = max(cell_lo, xs[i])
            hi = min(cell_hi, xs[i + 1])
            if hi > lo:
                segs.append((lo, hi, "lin", float(f.pieces[i, 0]), float(f.pieces[i, 1])))
        if cell_hi > xs[-1]:
            segs.append((max(cell_lo, xs[-1]), cell_hi, "lin", 0.0, 0.0))
        return segs
    xs, a = f.endpoints, f.log_levels
    norm = math.log(f.scale * f.Z)
    segs = []
    if cell_lo < xs[0]:
        segs.append((cell_lo, min(cell_hi, xs[0]), "lin", 0.0, 0.0))
    for i in range(len(xs) - 1):
        lo = max(cell_lo, xs[i])
        hi = min(cell_hi, xs[i + 1])
        if hi > lo:
            rate = (a[i + 1] - a[i]) / (xs[i + 1] - xs[i])
            logc = a[i] - rate * xs[i] - norm
            segs.append((lo, hi, "exp", logc, rate))
    if cell_hi > xs[-1]:
        segs.append((max(cell_lo, xs[-1]), cell_hi, "lin", 0.0, 0.0))
    return segs


def _desc_value(kind: str, p0: float, p1: float, x: float) -> float:
    if kind == "lin":
        return p0 * x + p1
    return math.exp(p0 + p1 * x)


def _desc_integral(kind: str, p0: float, p1: float, u: float, v: float) -> float:
    if kind == "lin":
        return _linear_integral(p0, p1, u, v)
    return exp_integral(math.exp(p0 + p1 * u), p1, v - u)


def _crossings(kf, f0, f1, kg, g0, g1, u: float, v: float) -> list[float]:
    """Interior points where the two descriptor functions cross on [u, v]."""
    pts: list[float] = []

    def diff(x: float) -> float:
        return _desc_value(kf, f0, f1, x) - _desc_value(kg, g0, g1, x)

    if kf == "lin" and kg == "lin":
        a, b = f0 - g0, f1 - g1
        if a != 0.0:
            r = -b / a
            if u < r < v:
                pts.append(r)
        return pts
    if kf == "exp" and kg == "exp":
        if f1 != g1:
            r = (g0 - f0) / (f1 - g1)
            if u < r < v:
                pts.append(r)
        return pts
    # linear vs exponential: split at the stationary point of the difference,
    # then bisect each monotone half where the sign changes.
    if kf == "exp":
        kf, f0, f1, kg, g0, g1 = kg, g0, g1, kf, f0, f1
    # now f linear (slope f0), g = exp(g0 + g1 x)
    knots = [u, v]
    if g1 != 0.0 and f0 != 0.0 and f0 / g1 > 0.0:
        xstar = (math.log(f0 / g1) - g0) / g1
        if u < xstar < v:
            knots = [u, xstar, v]
    for lo, hi in zip(knots[:-1], knots[1:]):
        dlo, dhi = diff(lo), diff(hi)
        if dlo == 0.0 or dhi == 0.0 or (dlo > 0) == (dhi > 0):
            continue
        a_, b_ = lo, hi
        for _ in range(80):
            mid = 0.5 * (a_ + b_)
            dm = diff(mid)
            if dm == 0.0:
                a_ = b_ = mid
                break
            if (dm > 0) == (dlo > 0):
                a_ = mid
            else:
                b_ = mid
        pts.append(0.5 * (a_ + b_))
    return sorted(pts)


def _l1_real(f, g, lo: float, hi: float) -> float:
    """L1 distance of two piecewise densities over [lo, hi] on R."""
    cuts = set()
    for obj in (f, g):
        xs = obj.breakpoints if isinstance(obj, PiecewiseLinearDensity) else obj.endpoints
        cuts.update(float(x) for x in xs if lo < x < hi)
    cuts.update((lo, hi))
    knots = sorted(cuts)
    total = 0.0
    for u, v in zip(knots[:-1], knots[1:]):
        fsegs = _piece_descriptors(f, u, v)
        gsegs = _piece_descriptors(g, u, v)
        # refine to common subintervals
        bounds = sorted({s[0] for s in fsegs} | {s[1] for s in fsegs}
                        | {s[0] for s in gsegs} | {s[1] for s in gsegs})
        for a_, b_ in zip(bounds[:-1], bounds[1:]):
            fd = next(s for s in fsegs if s[0] <= a_ and s[1] >= b_)
            gd = next(s for s in gsegs if s[0] <= a_ and s[1] >= b_)
            pts = [a_] + _crossings(fd[2], fd[3], fd[4], gd[2], gd[3], gd[4], a_, b_) + [b_]
            for p_, q_ in zip(pts[:-1], pts[1:]):
                mf = _desc_integral(fd[2], fd[3], fd[4], p_, q_)
                mg = _desc_integral(gd[2], gd[3], gd[4], p_, q_)
                total += abs(mf - mg)
    return total


def l1_distance(f, g) -> float:
    """||f - g||_1 over the union of supports."""
    if f.domain is not g.domain:
        raise DomainMismatch("cannot compare densities on different domains")
    flo, fhi = f.support()
    glo, ghi = g.support()
    lo, hi = min(flo, glo), max(fhi, ghi)
    if f.domain is DomainKind.INTEGER:
        xs = np.arange(int(lo), int(hi) + 1, dtype=float)
        return float(np.sum(np.abs(f.eval_array(xs) - g.eval_array(xs))))
    return _l1_real(f, g, lo, hi)


def tv_distance(f, g) -> float:
    """Total variation distance between two normalized densities."""
    for obj, name in ((f, "f"), (g, "g")):
        if abs(obj.total_mass - 1.0) > 1e-6:
            raise ValueError(f"{name} is not normalized (mass {obj.total_mass})")
    return 0.5 * l1_distance(f, g)


# ---------------------------------------------------------------------------
# serialization


def density_from_dict(data: dict):
    try:
        domain = DomainKind(data["domain"])
        kind = data["kind"]
        if kind == "pwl":
            return PiecewiseLinearDensity(domain, data["breakpoints"], data["pieces"])
        if kind == "pwexp":
            levels = [NEG_INF if a == "neg_inf" else float(a) for a in data["log_levels"]]
            return PiecewiseExpDensity(domain, data["breakpoints"], levels, data["scale"])
        raise ParseError(f"unknown density kind {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed density file: {exc}") from exc


def save_density(f, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(f.to_dict(), fh, indent=1)
        fh.write("\n")


def load_density(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from exc
    return density_from_dict(data)
