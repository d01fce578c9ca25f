"""Constructive piecewise-linear approximation of explicit densities."""

import math

import numpy as np
import pytest

from logcave.errors import HypothesisViolated, NonfiniteMode
from logcave.families import make_family
from logcave.oracle import tv_against
from logcave.pwfunc import DomainKind
from logcave.pwl_approx import (LcOracle, linearize, partition_intervals,
                                pwl_approximate)


def oracle(name, *params):
    return LcOracle.from_family(make_family(name, *params))


class TestPartition:
    def test_exponential_first_interval(self):
        ivs = partition_intervals(oracle("exponential", 1.0), 0.1)
        lo, hi = ivs[0]
        assert lo == 0.0
        assert hi == pytest.approx(math.log(2.0), abs=1e-6)

    def test_uniform_single_interval(self):
        ivs = partition_intervals(oracle("uniform", 0.0, 1.0), 0.1)
        assert ivs == [(0.0, 1.0)]

    def test_gaussian_interval_count_logarithmic(self):
        ivs = partition_intervals(oracle("gaussian", 0.0, 1.0), 0.01)
        per_half = sum(1 for lo, _ in ivs if lo >= 0.0)
        assert per_half <= 12 * math.log(1.0 / 0.01)

    def test_intervals_contiguous_and_sorted(self):
        ivs = partition_intervals(oracle("laplace", 0.0, 1.0), 0.05)
        for (_, hi), (lo, _) in zip(ivs[:-1], ivs[1:]):
            assert lo == pytest.approx(hi, abs=1e-9)

    def test_factor_two_rule_holds(self):
        f = oracle("logistic", 0.0, 1.0)
        for lo, hi in partition_intervals(f, 0.05):
            vals = [f.f(lo), f.f(hi), f.f(0.5 * (lo + hi))]
            assert max(vals) <= 2.0 * min(vals) * (1.0 + 1e-6)

    def test_nonfinite_mode_rejected(self):
        bad = LcOracle(pdf=lambda x: np.exp(np.asarray(x, float)),
                       log_pdf=lambda x: np.asarray(x, float),
                       log_deriv=lambda x: np.ones_like(np.asarray(x, float)),
                       cdf=lambda x: np.zeros_like(np.asarray(x, float)),
                       mode=math.inf, domain=DomainKind.REAL)
        with pytest.raises(NonfiniteMode):
            partition_intervals(bad, 0.1)


class TestLinearize:
    def test_constant_density_single_piece(self):
        pieces = linearize(oracle("uniform", 0.0, 1.0), (0.0, 1.0), 0.25)
        # flat density: every emitted piece has zero slope and exact value
        for (_, _), (slope, intercept) in pieces:
            assert slope == 0.0
            assert intercept == pytest.approx(1.0)

    def test_exponential_sup_error(self):
        eps = 0.01
        for (y, z), (a, b) in linearize(oracle("exponential", 1.0),
                                        (0.0, math.log(2.0)), eps):
            xs = np.linspace(y, z, 200)
            rel = np.max(np.abs(a * xs + b - np.exp(-xs))) / math.exp(-y)
            assert rel <= 10.0 * eps

    def test_gaussian_half_piece_ratio(self):
        f = oracle("gaussian", 0.0, 1.0)

        def half_pieces(eps):
            ivs = [iv for iv in partition_intervals(f, eps) if iv[0] >= 0.0]
            return sum(len(linearize(f, iv, eps)) for iv in ivs)

        ratio = half_pieces(0.04) / half_pieces(0.1)
        assert ratio == pytest.approx(math.sqrt(0.1 / 0.04), abs=0.4)

    def test_range_hypothesis_enforced(self):
        with pytest.raises(HypothesisViolated):
            linearize(oracle("gaussian", 0.0, 1.0), (0.0, 4.0), 0.1)


class TestApproximate:
    @pytest.mark.parametrize("name,params", [("gaussian", (0.0, 1.0)),
                                             ("laplace", (0.0, 1.0))])
    @pytest.mark.parametrize("eps", [0.1, 0.05])
    def test_tv_contract(self, name, params, eps):
        fam = make_family(name, *params)
        dens = pwl_approximate(LcOracle.from_family(fam), eps)
        assert tv_against(dens, fam) <= eps
        assert dens.total_mass == pytest.approx(1.0, abs=1e-9)

    def test_piece_count_slope(self):
        grid = [0.1, 0.05, 0.02, 0.01]
        f = oracle("gaussian", 0.0, 1.0)
        counts = [pwl_approximate(f, e).num_pieces for e in grid]
        slope = np.polyfit(np.log(grid), np.log(counts), 1)[0]
        assert -0.65 <= slope <= -0.35

    def test_poisson_integer_domain(self):
        fam = make_family("poisson", 30.0)
        dens = pwl_approximate(LcOracle.from_family(fam), 0.05)
        assert dens.domain is DomainKind.INTEGER
        assert np.all(dens.breakpoints == np.round(dens.breakpoints))
        assert tv_against(dens, fam) <= 0.05

    def test_geometric_boundary_mode(self):
        fam = make_family("geometric", 0.3)
        dens = pwl_approximate(LcOracle.from_family(fam), 0.05)
        assert tv_against(dens, fam) <= 0.05
