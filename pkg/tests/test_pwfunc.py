"""Piecewise-function algebra: evaluation, mass, distances, quantiles."""

import math
from fractions import Fraction

import numpy as np
import pytest

from logcave.errors import DomainMismatch, InvalidProbability, ParseError
from logcave.pwfunc import (DomainKind, IntegerCodedLevels, PiecewiseExpDensity,
                            PiecewiseLinearDensity, check_log_concave,
                            density_from_dict, exp_integral, l1_distance,
                            load_density, save_density, tv_distance)


def uniform01():
    return PiecewiseLinearDensity(DomainKind.REAL, [0.0, 1.0], [(0.0, 1.0)])


class TestEval:
    def test_uniform_midpoint(self):
        assert uniform01().eval(0.5) == 1.0

    def test_flat_exponential(self):
        h = PiecewiseExpDensity(DomainKind.REAL, [0.0, 1.0], [0.0, 0.0], 1.0)
        assert h.eval(0.3) == pytest.approx(1.0)

    def test_linear_piece(self):
        f = PiecewiseLinearDensity(DomainKind.REAL, [0.0, 1.0], [(2.0, 0.0)])
        assert f.eval(0.25) == pytest.approx(0.5)

    def test_outside_support_is_zero(self):
        assert uniform01().eval(2.0) == 0.0

    def test_discontinuity_uses_right_piece(self):
        f = PiecewiseLinearDensity(DomainKind.REAL, [0.0, 1.0, 2.0],
                                   [(0.0, 1.0), (0.0, 0.25)])
        assert f.eval(1.0) == pytest.approx(0.25)


class TestMass:
    def test_uniform_total(self):
        assert uniform01().mass(0.0, 1.0) == pytest.approx(1.0)

    def test_exponential_cell(self):
        h = PiecewiseExpDensity(DomainKind.REAL, [0.0, 1.0], [0.0, 1.0], 1.0)
        # unnormalized integral of e^x over [0,1]
        assert h.Z == pytest.approx(math.e - 1.0, abs=1e-9)

    def test_halving_pmf(self):
        # pmf 2^{-x} on x in {1, 2, 3} sums to 7/8
        h = PiecewiseExpDensity(DomainKind.INTEGER, [1.0, 3.0],
                                [-math.log(2.0), -3.0 * math.log(2.0)], 1.0)
        assert h.Z == pytest.approx(7.0 / 8.0, abs=1e-12)

    def test_additive_over_adjacent(self):
        f = PiecewiseLinearDensity(DomainKind.REAL, [0.0, 1.0, 2.0],
                                   [(1.0, 0.0), (0.0, 1.0)]).normalize()
        whole = f.mass(0.0, 2.0)
        assert f.mass(0.0, 0.7) + f.mass(0.7, 2.0) == pytest.approx(whole, abs=1e-12)

    def test_series_guard_matches_limit(self):
        assert exp_integral(2.0, 1e-12, 3.0) == pytest.approx(6.0, rel=1e-9)


class TestTvDistance:
    def test_identity(self):
        assert tv_distance(uniform01(), uniform01()) == 0.0

    def test_disjoint(self):
        b = PiecewiseLinearDensity(DomainKind.REAL, [1.0, 2.0], [(0.0, 1.0)])
        assert tv_distance(uniform01(), b) == pytest.approx(1.0, abs=1e-12)

    def test_shifted_gaussians(self, rng):
        # tv(N(0,1), N(1,1)) via two piecewise-exponential renderings
        def gauss_pwe(mu):
            xs = np.linspace(mu - 8.0, mu + 8.0, 400)
            return PiecewiseExpDensity(DomainKind.REAL, xs,
                                       -0.5 * (xs - mu) ** 2, 1.0)
        tv = tv_distance(gauss_pwe(0.0), gauss_pwe(1.0))
        assert tv == pytest.approx(0.38292, abs=1e-4)

    def test_symmetry_and_triangle(self, rng):
        dens = []
        for _ in range(3):
            bps = np.sort(rng.uniform(-2.0, 2.0, size=4))
            while np.min(np.diff(bps)) < 1e-3:
                bps = np.sort(rng.uniform(-2.0, 2.0, size=4))
            vals = rng.uniform(0.1, 1.0, size=3)
            dens.append(PiecewiseLinearDensity(
                DomainKind.REAL, bps, [(0.0, v) for v in vals]).normalize())
        a, b, c = dens
        assert tv_distance(a, b) == pytest.approx(tv_distance(b, a), abs=1e-12)
        assert tv_distance(a, c) <= tv_distance(a, b) + tv_distance(b, c) + 1e-6

    def test_domain_mismatch(self):
        z = PiecewiseLinearDensity(DomainKind.INTEGER, [0.0, 2.0],
                                   [(0.0, 0.5)])
        with pytest.raises(DomainMismatch):
            tv_distance(uniform01(), z)


class TestQuantile:
    def test_uniform_median(self):
        assert uniform01().quantile(0.5) == pytest.approx(0.5)

    def test_triangle(self):
        f = PiecewiseLinearDensity(DomainKind.REAL, [0.0, 1.0], [(-2.0, 2.0)])
        assert f.quantile(0.75) == pytest.approx(0.5, abs=1e-9)

    def test_symmetric(self):
        f = PiecewiseLinearDensity(DomainKind.REAL, [-1.0, 0.0, 1.0],
                                   [(1.0, 1.0), (-1.0, 1.0)]).normalize()
        assert f.quantile(0.5) == pytest.approx(0.0, abs=1e-9)

    def test_invalid_probability(self):
        with pytest.raises(InvalidProbability):
            uniform01().quantile(1.5)

    def test_roundtrip_with_cdf(self, rng):
        for _ in range(20):
            bps = np.sort(rng.uniform(-3.0, 3.0, size=5))
            while np.min(np.diff(bps)) < 1e-2:
                bps = np.sort(rng.uniform(-3.0, 3.0, size=5))
            vals = rng.uniform(0.1, 1.0, size=4)
            f = PiecewiseLinearDensity(DomainKind.REAL, bps,
                                       [(0.0, v) for v in vals]).normalize()
            for p in (0.25, 0.5, 0.9):
                x = f.quantile(p)
                assert f.cdf(x) == pytest.approx(p, abs=1e-9)


class TestLogConcavityCheck:
    def step(self):
        return Fraction(1, 100)

    def test_concave(self):
        assert check_log_concave(IntegerCodedLevels((0, 1, 1, 0), self.step()))

    def test_increasing_differences(self):
        assert not check_log_concave(IntegerCodedLevels((0, 1, 3), self.step()))

    def test_internal_zero(self):
        assert not check_log_concave(
            IntegerCodedLevels((None, 0, None, 0), self.step()))

    def test_flanking_sentinels_ok(self):
        assert check_log_concave(
            IntegerCodedLevels((None, 0, 2, 3, 3, None), self.step()))

    def test_exp_density_rejects_nonconcave(self):
        with pytest.raises(ValueError):
            PiecewiseExpDensity(DomainKind.REAL, [0.0, 1.0, 2.0],
                                [0.0, 0.0, 1.0], 1.0)


class TestConstruction:
    def test_negative_piece_rejected(self):
        with pytest.raises(ValueError):
            PiecewiseLinearDensity(DomainKind.REAL, [0.0, 1.0], [(2.0, -1.0)])

    def test_integer_breakpoints_enforced(self):
        with pytest.raises(ValueError):
            PiecewiseLinearDensity(DomainKind.INTEGER, [0.0, 1.5], [(0.0, 1.0)])

    def test_normalized_mass(self):
        f = PiecewiseLinearDensity(DomainKind.REAL, [0.0, 2.0], [(0.0, 3.0)]).normalize()
        assert f.total_mass == pytest.approx(1.0, abs=1e-12)


class TestSerialization:
    def test_pwl_roundtrip(self, tmp_path):
        f = PiecewiseLinearDensity(DomainKind.REAL, [0.0, 0.5, 1.0],
                                   [(1.0, 0.25), (-1.0, 1.25)]).normalize()
        path = tmp_path / "f.json"
        save_density(f, str(path))
        g = load_density(str(path))
        assert np.array_equal(f.breakpoints, g.breakpoints)
        assert np.array_equal(f.pieces, g.pieces)

    def test_pwexp_roundtrip(self, tmp_path):
        h = PiecewiseExpDensity(DomainKind.INTEGER, [0.0, 2.0, 5.0],
                                [0.0, 1.0, -2.0], 2.5)
        path = tmp_path / "h.json"
        save_density(h, str(path))
        back = load_density(str(path))
        assert np.array_equal(h.endpoints, back.endpoints)
        assert np.array_equal(h.log_levels, back.log_levels)
        assert back.scale == h.scale

    def test_malformed_rejected(self):
        with pytest.raises(ParseError):
            density_from_dict({"domain": "real", "kind": "spline"})
