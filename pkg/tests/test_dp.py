"""Shortest-path projection onto concave level sequences."""

import math

import numpy as np
import pytest

from logcave.cli import random_tiny_instance
from logcave.dp import concavity_audit, graph_size, shortest_path_fit
from logcave.grid import build_grid
from logcave.oracle import brute_force_best
from logcave.pwfunc import (DomainKind, IntegerCodedLevels,
                            PiecewiseExpDensity, PiecewiseLinearDensity,
                            check_log_concave, tv_distance)
from logcave.robust_stats import RobustMoments

from conftest import fine_pwl
from logcave.families import make_family


class TestTinyEquivalence:
    def test_matches_exhaustive_search(self, rng):
        for _ in range(40):
            inst = random_tiny_instance(rng)
            table = inst.errors()
            result = shortest_path_fit(inst.g, inst.grid, scale=inst.scale,
                                       errors=table)
            levels, best = brute_force_best(inst, errors=table)
            assert result.cost == pytest.approx(best, abs=1e-9)
            assert check_log_concave(result.levels)

    def test_kernel_weights_close_to_exact(self, rng):
        # the fast kernel path stays within the per-edge tolerance overall
        for _ in range(15):
            inst = random_tiny_instance(rng)
            exact = shortest_path_fit(inst.g, inst.grid, scale=inst.scale,
                                      errors=inst.errors())
            fast = shortest_path_fit(inst.g, inst.grid, scale=inst.scale)
            assert abs(fast.cost - exact.cost) <= inst.grid.eps


class TestStructure:
    def test_no_mass_in_window(self, rng):
        inst = random_tiny_instance(rng, domain=DomainKind.REAL)
        beta = inst.grid.beta
        g = PiecewiseLinearDensity(DomainKind.REAL, [beta + 5.0, beta + 6.0],
                                   [(0.0, 1.0)])
        result = shortest_path_fit(g, inst.grid)
        assert result.cost == pytest.approx(0.0, abs=1e-12)
        assert result.levels.finite_slice() is None

    def test_grid_representable_recovery(self):
        eps = 0.1
        moments = RobustMoments(location=0.0, scale=1.0, domain=DomainKind.REAL)
        grid = build_grid(moments, eps)
        step = grid.level_step
        # concave in-grid log-levels with in-T differences
        k = grid.k
        codes = [-(abs(i - k // 2) ** 2) for i in range(k + 1)]
        codes = [max(c * 4, grid.m_lo) for c in codes]
        xs = grid.endpoints()
        h_true = PiecewiseExpDensity(DomainKind.REAL, xs,
                                     [c * step for c in codes], 1.0)
        # render as a fine PWL and project back
        grid_fit = build_grid(RobustMoments(0.0, 1.0, DomainKind.REAL), eps)
        fine = np.linspace(xs[0], xs[-1], 2001)
        vals = h_true.eval_array(fine)
        slopes = np.diff(vals) / np.diff(fine)
        intercepts = vals[:-1] - slopes * fine[:-1]
        g = PiecewiseLinearDensity(DomainKind.REAL, fine,
                                   list(zip(slopes, intercepts))).normalize()
        result = shortest_path_fit(g, grid_fit, scale=1.0)
        assert result.cost <= 2.0 * eps

    def test_concavity_audit(self, rng):
        from fractions import Fraction
        good = IntegerCodedLevels((0, 5, 8, 9), Fraction(1, 10))

        class Stub:
            levels = good
        assert check_log_concave(good)
        for _ in range(10):
            inst = random_tiny_instance(rng)
            result = shortest_path_fit(inst.g, inst.grid, scale=inst.scale)
            assert concavity_audit(result)

    def test_graph_size_bounds(self, rng):
        inst = random_tiny_instance(rng)
        result = shortest_path_fit(inst.g, inst.grid, scale=inst.scale)
        num_v, num_e = graph_size(inst.grid)
        k = inst.grid.k
        s = inst.grid.num_levels
        t = inst.grid.num_shifts
        assert result.num_vertices == num_v
        assert num_v <= (k + 1) * s * (t + 1) + 2 * (k + 2)
        assert num_e <= 5 * num_v

    def test_superset_never_worse(self, rng):
        # adding levels to S cannot increase the optimum
        import dataclasses
        for _ in range(5):
            inst = random_tiny_instance(rng)
            base = shortest_path_fit(inst.g, inst.grid, scale=inst.scale,
                                     errors=inst.errors())
            wider = dataclasses.replace(inst.grid, m_lo=inst.grid.m_lo - 2,
                                        m_hi=inst.grid.m_hi + 1)
            inst2 = dataclasses.replace(inst, grid=wider)
            bigger = shortest_path_fit(inst.g, wider, scale=inst.scale,
                                       errors=inst2.errors())
            assert bigger.cost <= base.cost + 1e-9


class TestDiscreteAccounting:
    def test_path_cost_brackets_l1(self, rng):
        # on Z the summed cell errors track the window L1 between g and h
        fam = make_family("poisson", 20.0)
        g = fine_pwl(fam)
        moments = RobustMoments(20.0, 6.0, DomainKind.INTEGER)
        grid = build_grid(moments, 0.1)
        result = shortest_path_fit(g, grid, scale=moments.scale)
        span = result.levels.finite_slice()
        assert span is not None
        l, r = span
        xs = [grid.endpoint(i + 1) for i in range(l, r + 1)]
        levels = [result.levels.levels[i] * grid.level_step for i in range(l, r + 1)]
        h = PiecewiseExpDensity(DomainKind.INTEGER, xs, levels, moments.scale)
        # unnormalized comparison over the window
        pts = np.arange(grid.alpha, grid.beta + 1)
        hv = np.exp(h.log_raw(pts)) / moments.scale
        gv = g.eval_array(pts)
        l1 = float(np.sum(np.abs(gv - hv)))
        assert result.cost >= l1 - 0.1
        assert result.cost <= 2.0 * l1 + 0.2
