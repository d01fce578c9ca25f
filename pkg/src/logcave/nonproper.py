"""Stage-1 learner: samples to a piecewise-linear density.

The learner is deliberately simple and deterministic: split the sample range
into intervals of equal empirical mass, fit one line per interval by matching
the interval's empirical mass and first moment, clip negative endpoints by
moving the line's zero-crossing to the interval boundary, and renormalize.
It is a drop-in surrogate — anything returning a ``PiecewiseLinearDensity``
can replace it without touching the proper-fitting stage.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constants import Constants, DEFAULTS
from .errors import TooFewSamples
from .pwfunc import DomainKind, PiecewiseLinearDensity


@dataclass(frozen=True)
class LearnerConfig:
    eps: float
    domain: DomainKind = DomainKind.REAL
    pieces: int = 0       # 0 means use the default ceil(c_t / sqrt(eps))
    consts: Constants = field(default=DEFAULTS, repr=False)

    def resolved_pieces(self) -> int:
        if self.pieces > 0:
            return self.pieces
        return math.ceil(self.consts.c_t / math.sqrt(self.eps))


def empirical_cdf(samples):
    """Right-continuous empirical CDF, queryable scalar-or-array."""
    xs = np.sort(np.asarray(samples, dtype=float))
    if xs.size == 0:
        raise TooFewSamples("empirical_cdf needs at least one sample")
    n = xs.size

    def cdf(x):
        return np.searchsorted(xs, x, side="right") / n

    return cdf


def _equal_mass_knots(xs: np.ndarray, t: int) -> list[float]:
    """t+1 knots splitting the sorted samples into equal-count blocks."""
    n = xs.size
    knots = [float(xs[0])]
    for j in range(1, t):
        knots.append(float(xs[min(round(j * n / t), n - 1)]))
    knots.append(float(xs[-1]))
    return knots


def _fit_line_real(u: float, v: float, mass: float, moment: float):
    """Slope/intercept matching mass and first moment on [u, v], clipped >= 0."""
    w = v - u
    m = 0.5 * (u + v)
    b = mass / w
    a = 12.0 * (moment - m * mass) / (w ** 3)
    if a * (u - m) + b < 0.0:
        a = 2.0 * mass / (w * w)
        return a, -a * u
    if a * (v - m) + b < 0.0:
        a = -2.0 * mass / (w * w)
        return a, -a * v
    return a, b - a * m


def _fit_line_int(u: int, w: int, mass: float, moment: float):
    """Same on the integers u..w inclusive."""
    n = w - u + 1
    if n == 1:
        return 0.0, mass
    m = 0.5 * (u + w)
    b = mass / n
    a = (moment - m * mass) / (n * (n * n - 1) / 12.0)
    if a * (u - m) + b < 0.0:
        a = 2.0 * mass / (n * (n - 1))
        return a, -a * u
    if a * (w - m) + b < 0.0:
        a = -2.0 * mass / (n * (n - 1))
        return a, -a * w
    return a, b - a * m


def learn_pwl(samples, config: LearnerConfig) -> PiecewiseLinearDensity:
    """Learn a normalized piecewise-linear density from raw samples."""
    xs = np.sort(np.asarray(samples, dtype=float))
    n = xs.size
    t = config.resolved_pieces()
    if n < 2 * t:
        raise TooFewSamples(f"need at least {2 * t} samples for {t} pieces, got {n}")
    if n < config.consts.c_n_pwl * t / config.eps ** 2:
        warnings.warn(f"sample count {n} below the {t}-piece learning budget "
                      f"~{config.consts.c_n_pwl * t / config.eps ** 2:.0f}",
                      stacklevel=2)

    knots = _equal_mass_knots(xs, t)
    if config.domain is DomainKind.INTEGER:
        knots = [float(round(x)) for x in knots]
        knots[-1] += 1.0  # cells are [x_i, x_{i+1}); keep the max sample covered
    else:
        if knots[-1] - knots[0] < 1e-9:
            half = max(1e-9, abs(knots[0]) * 1e-12)
            knots = [knots[0] - half, knots[0] + half]
    # merge duplicate knots (common after integer snapping)
    breaks = [knots[0]]
    for x in knots[1:]:
        if x > breaks[-1]:
            breaks.append(x)
    if len(breaks) < 2:
        breaks.append(breaks[0] + 1.0)

    pieces = []
    for u, v in zip(breaks[:-1], breaks[1:]):
        if v == breaks[-1]:
            inside = (xs >= u) & (xs <= v)
        else:
            inside = (xs >= u) & (xs < v)
        mass = float(np.count_nonzero(inside)) / n
        moment = float(xs[inside].sum()) / n
        if config.domain is DomainKind.INTEGER:
            pieces.append(_fit_line_int(int(u), int(v) - 1, mass, moment))
        else:
            pieces.append(_fit_line_real(u, v, mass, moment))

    g = PiecewiseLinearDensity(domain=config.domain,
                               breakpoints=tuple(breaks),
                               pieces=tuple(pieces))
    return g.normalize()
