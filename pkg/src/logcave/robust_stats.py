"""Robust location and scale of an explicit piecewise-linear density.

The median stands in for the mean and the interquartile range for the standard
deviation; both are read off the stage-1 hypothesis, never off raw samples.
"""

from __future__ import annotations

from dataclasses import dataclass

from .constants import Constants, DEFAULTS
from .pwfunc import DomainKind, PiecewiseLinearDensity


@dataclass(frozen=True)
class RobustMoments:
    location: float   # median of g
    scale: float      # 75th minus 25th percentile of g
    domain: DomainKind
    guarded: bool = False  # True when the degenerate-scale guard fired


def robust_location_scale(g: PiecewiseLinearDensity,
                          consts: Constants = DEFAULTS) -> RobustMoments:
    """Median and interquartile range of g, with a degenerate-scale guard."""
    med = g.quantile(0.5)
    iqr = g.quantile(0.75) - g.quantile(0.25)
    guarded = False
    if g.domain is DomainKind.INTEGER:
        if iqr < consts.scale_guard_int:
            iqr = consts.scale_guard_int
            guarded = True
    elif iqr < 1e-12:
        span = g.breakpoints[-1] - g.breakpoints[0]
        iqr = consts.scale_guard_real * max(span, 1e-6)
        guarded = True
    return RobustMoments(location=float(med), scale=float(iqr),
                         domain=g.domain, guarded=guarded)
