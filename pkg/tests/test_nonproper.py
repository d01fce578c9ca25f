"""Stage-1 learner: samples to a piecewise-linear density."""

import numpy as np
import pytest

from logcave.errors import TooFewSamples
from logcave.families import make_family
from logcave.nonproper import LearnerConfig, empirical_cdf, learn_pwl
from logcave.oracle import tv_against
from logcave.pwfunc import DomainKind


class TestEmpiricalCdf:
    def test_counting(self):
        cdf = empirical_cdf([1.0, 2.0, 3.0])
        assert cdf(2.0) == pytest.approx(2.0 / 3.0)

    def test_below_min(self):
        assert empirical_cdf([1.0, 2.0, 3.0])(0.0) == 0.0

    def test_at_max(self):
        assert empirical_cdf([1.0, 2.0, 3.0])(3.0) == 1.0

    def test_empty_rejected(self):
        with pytest.raises(TooFewSamples):
            empirical_cdf([])


class TestLearner:
    def test_degenerate_integer_samples(self):
        g = learn_pwl(np.zeros(100),
                      LearnerConfig(eps=0.1, domain=DomainKind.INTEGER))
        assert g.eval(0.0) == pytest.approx(1.0, abs=1e-9)
        assert g.mass(0, 0) == pytest.approx(1.0, abs=1e-9)

    def test_uniform_recovery(self):
        fam = make_family("uniform", 0.0, 1.0)
        samples = fam.sample(10 ** 5, seed=4)
        g = learn_pwl(samples, LearnerConfig(eps=0.1, pieces=4))
        assert tv_against(g, fam) <= 0.03

    def test_gaussian_budget(self):
        eps = 0.1
        n = int(10.0 * eps ** -2.5)
        fam = make_family("gaussian", 0.0, 1.0)
        g = learn_pwl(fam.sample(n, seed=1), LearnerConfig(eps=eps))
        assert tv_against(g, fam) <= 0.1

    def test_piece_budget(self):
        config = LearnerConfig(eps=0.05)
        t = config.resolved_pieces()
        g = learn_pwl(make_family("gaussian", 0.0, 1.0).sample(5000, seed=2),
                      config)
        assert g.num_pieces <= 2 * t

    def test_normalized_output(self):
        for seed in range(5):
            g = learn_pwl(make_family("laplace", 0.0, 1.0).sample(3000, seed=seed),
                          LearnerConfig(eps=0.1))
            assert g.total_mass == pytest.approx(1.0, abs=1e-9)
            assert np.all(g.eval_array(g.breakpoints) >= 0.0)

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamples):
            learn_pwl([0.0, 1.0], LearnerConfig(eps=0.1))

    def test_deterministic(self):
        samples = make_family("gaussian", 0.0, 1.0).sample(3000, seed=9)
        a = learn_pwl(samples, LearnerConfig(eps=0.1))
        b = learn_pwl(samples, LearnerConfig(eps=0.1))
        assert np.array_equal(a.breakpoints, b.breakpoints)
        assert np.array_equal(a.pieces, b.pieces)

    def test_integer_domain_knots(self):
        samples = make_family("poisson", 20.0).sample(5000, seed=3)
        g = learn_pwl(samples, LearnerConfig(eps=0.1, domain=DomainKind.INTEGER))
        assert np.all(g.breakpoints == np.round(g.breakpoints))
        assert g.total_mass == pytest.approx(1.0, abs=1e-9)


def sample_pwl(g, n, seed):
    """Vectorized inverse-CDF sampling from a real-domain PWL density."""
    rng = np.random.default_rng(seed)
    xs = g.breakpoints
    a = g.pieces[:, 0]
    b = g.pieces[:, 1]
    cell_mass = (0.5 * a * (xs[1:] ** 2 - xs[:-1] ** 2)
                 + b * (xs[1:] - xs[:-1]))
    cum = np.concatenate([[0.0], np.cumsum(cell_mass)])
    u = rng.random(n) * cum[-1]
    idx = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, len(a) - 1)
    r = u - cum[idx]
    ai, bi, ui = a[idx], b[idx], xs[idx]
    lin = np.abs(ai) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        x_lin = ui + r / np.where(lin, np.maximum(bi, 1e-300), 1.0)
        disc = np.maximum(bi * bi + ai * (ai * ui * ui + 2.0 * bi * ui + 2.0 * r), 0.0)
        x_quad = (-bi + np.sqrt(disc)) / np.where(lin, 1.0, ai)
    out = np.where(lin, x_lin, x_quad)
    return np.clip(out, xs[idx], xs[idx + 1])


class TestConsistency:
    def test_tv_improves_with_truth_in_class(self):
        # median tv to an in-class PWL truth is non-increasing over n
        from logcave.pwfunc import PiecewiseLinearDensity, tv_distance
        truth = PiecewiseLinearDensity(
            DomainKind.REAL, [-1.0, -0.4, 0.1, 0.6, 1.2],
            [(0.5, 0.7), (1.0, 0.9), (-0.8, 1.0), (-0.5, 0.8)]).normalize()
        medians = []
        for n in (10 ** 3, 10 ** 4, 10 ** 5):
            tvs = []
            for seed in range(20):
                g = learn_pwl(sample_pwl(truth, n, seed),
                              LearnerConfig(eps=0.1, pieces=4))
                tvs.append(tv_distance(g, truth))
            medians.append(float(np.median(tvs)))
        assert medians[0] >= medians[1] >= medians[2]
