"""Per-cell L1 error oracle: accuracy, lower bound, query cost."""

import math

import numpy as np
import pytest

from logcave.interval_error import (CellErrorQuery, boundary_error, cell_error,
                                    eval_count, reset_eval_count, tolerance)
from logcave.errors import DegenerateCell
from logcave.pwfunc import DomainKind


def reference_error(q: CellErrorQuery, points: int = 10 ** 6) -> float:
    """Dense Riemann sum (exact integer sum on Z) of |g - h| over the cell."""
    if q.domain is DomainKind.INTEGER:
        xs = np.arange(math.ceil(q.lo), math.floor(q.hi) + 1, dtype=float)
        if xs.size == 0:
            return 0.0
    else:
        h_step = (q.hi - q.lo) / points
        xs = q.lo + (np.arange(points) + 0.5) * h_step
    g = q.g_slope * xs + q.g_intercept
    h = q.h_coef * np.exp(q.h_rate * xs)
    diff = np.abs(g - h)
    if q.domain is DomainKind.INTEGER:
        return float(np.sum(diff))
    return float(np.sum(diff) * (q.hi - q.lo) / points)


def random_query(rng, eps: float, domain: DomainKind) -> CellErrorQuery:
    if domain is DomainKind.INTEGER:
        lo = float(rng.integers(-6, 6))
        hi = lo + float(rng.integers(1, 6))
    else:
        lo = rng.uniform(-2.0, 2.0)
        hi = lo + rng.uniform(0.2, 1.5)
    # nonnegative linear piece: pick endpoint values, derive slope/intercept
    v_lo = rng.uniform(0.0, 1.5)
    v_hi = rng.uniform(0.0, 1.5)
    slope = (v_hi - v_lo) / (hi - lo)
    intercept = v_lo - slope * lo
    rate = rng.uniform(-2.5, 2.5)
    coef = rng.uniform(0.0, 1.5) * math.exp(-rate * 0.5 * (lo + hi))
    return CellErrorQuery(g_slope=slope, g_intercept=intercept, h_coef=coef,
                          h_rate=rate, lo=lo, hi=hi, domain=domain, eps=eps)


class TestExamples:
    def test_disjoint_sign(self):
        q = CellErrorQuery(0.0, 0.0, 1.0, 0.0, 0.0, 1.0, DomainKind.REAL, 0.1)
        assert cell_error(q) == pytest.approx(1.0, abs=1e-9)

    def test_one_sided(self):
        # g(x) = x below h(x) = e^{x-1} throughout [0, 1]
        q = CellErrorQuery(1.0, 0.0, math.exp(-1.0), 1.0, 0.0, 1.0,
                           DomainKind.REAL, 0.1)
        assert cell_error(q) == pytest.approx(0.13212, abs=tolerance(0.1))

    def test_single_crossing(self):
        # g = 0.5 crosses h = e^x at ln(1/2) inside [-2, 0]
        q = CellErrorQuery(0.0, 0.5, 1.0, 1.0, -2.0, 0.0, DomainKind.REAL, 0.1)
        assert cell_error(q) == pytest.approx(0.44216, abs=tolerance(0.1))

    def test_degenerate_cell(self):
        with pytest.raises(DegenerateCell):
            CellErrorQuery(0.0, 0.0, 1.0, 0.0, 1.0, 1.0, DomainKind.REAL, 0.1)


class TestAccuracy:
    @pytest.mark.parametrize("eps", [0.1, 0.05])
    def test_randomized_queries(self, rng, eps):
        tol = tolerance(eps)
        worst = 0.0
        for trial in range(250):
            domain = DomainKind.REAL if trial % 2 == 0 else DomainKind.INTEGER
            q = random_query(rng, eps, domain)
            got = cell_error(q)
            want = reference_error(q, points=200_000)
            worst = max(worst, abs(got - want))
        assert worst <= tol

    def test_dominates_mass_difference(self, rng):
        for _ in range(100):
            q = random_query(rng, 0.1, DomainKind.REAL)
            g_mass = (0.5 * q.g_slope * (q.hi ** 2 - q.lo ** 2)
                      + q.g_intercept * (q.hi - q.lo))
            h_mass = reference_error(
                CellErrorQuery(0.0, 0.0, q.h_coef, q.h_rate, q.lo, q.hi,
                               q.domain, q.eps))
            assert cell_error(q) >= abs(g_mass - h_mass) - 1e-9


class TestQueryCost:
    def test_elementary_count_polylog(self, rng):
        eps = 0.05
        budget = 10.0 * math.log(1.0 / eps) ** 2
        for _ in range(200):
            q = random_query(rng, eps, DomainKind.REAL)
            reset_eval_count()
            cell_error(q)
            assert eval_count() <= budget


class TestBoundaryError:
    def test_constant(self):
        assert boundary_error(0.0, 1.0, 0.0, 0.25, DomainKind.REAL) == pytest.approx(0.25)

    def test_zero(self):
        assert boundary_error(0.0, 0.0, 3.0, 5.0, DomainKind.REAL) == 0.0

    def test_linear(self):
        assert boundary_error(2.0, 0.0, 0.0, 1.0, DomainKind.REAL) == pytest.approx(1.0)

    def test_integer_sum(self):
        # 1 + 2 + 3 over the integers 1..3
        assert boundary_error(1.0, 0.0, 1.0, 3.0, DomainKind.INTEGER) == pytest.approx(6.0)
