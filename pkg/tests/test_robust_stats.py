"""Robust location/scale: median and interquartile range of explicit densities."""

import math

import pytest

from logcave.constants import DEFAULTS
from logcave.families import Contaminated, make_family
from logcave.pwfunc import DomainKind, PiecewiseLinearDensity
from logcave.robust_stats import robust_location_scale

from conftest import fine_pwl

FAMILIES = [
    make_family("gaussian", 0.0, 1.0),
    make_family("gaussian", 5.0, 0.5),
    make_family("laplace", 0.0, 1.0),
    make_family("exponential", 1.0),
    make_family("logistic", 0.0, 1.0),
    make_family("uniform", 0.0, 1.0),
    make_family("poisson", 20.0),
    make_family("binomial", 50.0, 0.3),
    make_family("geometric", 0.2),
]


class TestExamples:
    def test_gaussian(self):
        m = robust_location_scale(fine_pwl(make_family("gaussian", 0.0, 1.0)))
        assert m.location == pytest.approx(0.0, abs=1e-3)
        assert m.scale == pytest.approx(1.3490, abs=1e-2)

    def test_exponential(self):
        m = robust_location_scale(fine_pwl(make_family("exponential", 1.0)))
        assert m.location == pytest.approx(math.log(2.0), abs=1e-3)
        assert m.scale == pytest.approx(math.log(3.0), abs=1e-2)

    def test_symmetric_triangle(self):
        g = PiecewiseLinearDensity(DomainKind.REAL, [-1.0, 0.0, 1.0],
                                   [(1.0, 1.0), (-1.0, 1.0)]).normalize()
        m = robust_location_scale(g)
        assert m.location == pytest.approx(0.0, abs=1e-9)


class TestMomentBounds:
    @pytest.mark.parametrize("fam", FAMILIES,
                             ids=[f.spec_string() for f in FAMILIES])
    def test_location_scale_bounds(self, fam):
        m = robust_location_scale(fine_pwl(fam))
        mu, sigma = fam.mean, fam.std
        assert abs(mu - m.location) <= 2.0 * sigma
        assert 0.3 * sigma <= m.scale <= 6.0 * sigma

    def test_bounds_under_contamination(self):
        base = make_family("gaussian", 0.0, 1.0)
        noise = make_family("uniform", -10.0, 10.0)
        mix = Contaminated(base, noise, eta=0.1)
        # render the contaminated density as a fine PWL directly
        import numpy as np
        xs = np.linspace(-10.0, 10.0, 8001)
        vals = np.asarray(mix.pdf(xs), dtype=float)
        slopes = np.diff(vals) / np.diff(xs)
        intercepts = vals[:-1] - slopes * xs[:-1]
        g = PiecewiseLinearDensity(DomainKind.REAL, xs,
                                   list(zip(slopes, intercepts))).normalize()
        m = robust_location_scale(g)
        assert abs(m.location) <= 2.0
        assert 0.3 <= m.scale <= 6.0


class TestGuards:
    def test_integer_scale_floor(self):
        g = PiecewiseLinearDensity(DomainKind.INTEGER, [0.0, 1.0], [(0.0, 1.0)])
        m = robust_location_scale(g)
        assert m.scale >= DEFAULTS.scale_guard_int
        assert m.guarded

    def test_real_degenerate_spike(self):
        g = PiecewiseLinearDensity(DomainKind.REAL, [0.0, 1e-13],
                                   [(0.0, 1e13)]).normalize()
        m = robust_location_scale(g)
        assert m.scale > 0.0
        assert m.guarded
