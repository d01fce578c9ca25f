"""Fitting grid: window, cell endpoints, level set, slope set."""

import math

import numpy as np
import pytest

from logcave.constants import DEFAULTS
from logcave.errors import InvalidEpsilon, OutOfRange
from logcave.grid import NEG_INF_CODE, build_grid, quantize_concave_levels
from logcave.pwfunc import DomainKind
from logcave.robust_stats import RobustMoments


def moments(loc=0.0, scale=1.0, domain=DomainKind.REAL):
    return RobustMoments(location=loc, scale=scale, domain=domain)


class TestWindow:
    def test_real_eps01(self):
        grid = build_grid(moments(), 0.1)
        assert grid.k == 24
        assert grid.cell_length == pytest.approx(0.25)
        assert grid.alpha == pytest.approx(-3.0)
        assert grid.beta == pytest.approx(3.0)

    def test_window_centered(self):
        grid = build_grid(moments(loc=5.0), 0.1)
        assert grid.alpha == pytest.approx(2.0)
        assert grid.beta == pytest.approx(8.0)

    def test_integer_small_scale_branch(self):
        grid = build_grid(moments(scale=5.0, domain=DomainKind.INTEGER), 0.1)
        assert grid.cell_length == 1.0
        assert grid.alpha == -24.0
        assert grid.beta == 24.0
        assert grid.k == 48

    def test_integer_large_scale_branch(self):
        grid = build_grid(moments(scale=50.0, domain=DomainKind.INTEGER), 0.1)
        assert grid.cell_length == float(int(grid.cell_length))
        assert grid.cell_length >= 1.0
        assert grid.beta - grid.alpha == grid.k * grid.cell_length

    def test_k_always_even(self):
        for eps in (0.05, 0.08, 0.12, 0.2):
            assert build_grid(moments(), eps).k % 2 == 0

    def test_invalid_eps(self):
        with pytest.raises(InvalidEpsilon):
            build_grid(moments(), 0.7)


class TestLevels:
    def test_level_count_eps01(self):
        grid = build_grid(moments(), 0.1)
        step = 0.1 / 24
        assert grid.m_lo == math.ceil(-2.0 * math.log(10.0) / step)
        assert grid.m_hi == math.floor(2.0 / step)
        # the count implied by the range invariant, frozen for these constants
        assert grid.num_levels == 1586

    def test_level_roundtrip(self):
        grid = build_grid(moments(), 0.1)
        assert grid.level_of(0.0) == 0
        assert grid.value_of(0) == 0.0
        assert grid.level_of(0.0021) == 1
        assert grid.value_of(1) == pytest.approx(0.1 / 24)
        assert grid.level_of(-math.inf) == NEG_INF_CODE
        assert grid.value_of(NEG_INF_CODE) == -math.inf

    def test_rounding_accuracy(self):
        grid = build_grid(moments(), 0.1)
        for a in (-1.234, 0.5, 1.9):
            assert abs(grid.value_of(grid.level_of(a)) - a) <= grid.level_step / 2

    def test_out_of_range(self):
        grid = build_grid(moments(), 0.1)
        with pytest.raises(OutOfRange):
            grid.level_of(10.0)
        with pytest.raises(OutOfRange):
            grid.value_of(grid.m_hi + 1)


class TestSlopes:
    def test_sorted_and_distinct(self):
        grid = build_grid(moments(), 0.1)
        assert np.all(np.diff(grid.shifts) > 0)

    def test_count_matches_closed_form(self):
        eps = 0.1
        grid = build_grid(moments(), eps)
        b_max = math.ceil(math.log(1.0 / eps) / eps)
        c_max = math.ceil(DEFAULTS.c_T * math.log2(1.0 / eps))
        keys = {b * (1 << c) for c in range(c_max + 1)
                for b in range(-b_max, b_max + 1)}
        assert grid.num_shifts == len(keys)

    def test_codes_decode_to_values(self):
        grid = build_grid(moments(), 0.1)
        step = grid.level_step
        for value, (b, c) in zip(grid.shifts, grid.shift_codes):
            assert value == pytest.approx(b * (1 << c) * step)

    def test_concave_differences_representable(self):
        # every consecutive difference of a moderate concave level sequence
        # decodes to a member of T
        grid = build_grid(moments(), 0.1)
        keys = {round(v / grid.level_step) for v in grid.shifts}
        b_max = math.ceil(math.log(1.0 / 0.1) / 0.1)
        for d in range(-b_max, b_max + 1):
            assert d in keys


class TestQuantization:
    def test_concave_sequence_preserved(self):
        grid = build_grid(moments(), 0.1)
        values = [-1.0, -0.3, 0.0, -0.3, -1.0]
        codes = quantize_concave_levels(values, grid)
        diffs = np.diff(codes)
        assert np.all(np.diff(diffs) <= 0)

    def test_deep_levels_become_sentinel(self):
        grid = build_grid(moments(), 0.1)
        codes = quantize_concave_levels([-100.0, 0.0, -math.inf], grid)
        assert codes[0] == NEG_INF_CODE
        assert codes[2] == NEG_INF_CODE
