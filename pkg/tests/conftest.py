"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from logcave.families import Family
from logcave.pwfunc import DomainKind, PiecewiseLinearDensity


def fine_pwl(fam: Family, cells: int = 4000, span: float = 8.0) -> PiecewiseLinearDensity:
    """Render a family as a fine piecewise-linear density.

    Real domains use chord interpolation of the pdf on a uniform grid (O(h^2)
    accurate); integer domains are exact per-point pmf cells.
    """
    lo_sup, hi_sup = fam.support()
    lo = max(lo_sup, fam.mean - span * fam.std)
    hi = min(hi_sup, fam.mean + span * fam.std)
    if fam.domain is DomainKind.INTEGER:
        xs = np.arange(np.floor(lo), np.ceil(hi) + 1)
        vals = np.asarray(fam.pdf(xs), dtype=float)
        bps = np.append(xs, xs[-1] + 1)
        pieces = [(0.0, float(v)) for v in vals]
        return PiecewiseLinearDensity(DomainKind.INTEGER, bps, pieces).normalize()
    xs = np.linspace(lo, hi, cells + 1)
    vals = np.asarray(fam.pdf(xs), dtype=float)
    slopes = np.diff(vals) / np.diff(xs)
    intercepts = vals[:-1] - slopes * xs[:-1]
    pieces = np.stack([slopes, intercepts], axis=1)
    return PiecewiseLinearDensity(DomainKind.REAL, xs, pieces).normalize()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
