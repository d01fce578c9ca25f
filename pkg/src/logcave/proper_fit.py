"""End-to-end proper fitting: explicit density in, log-concave density out.

``fit_proper`` projects a stage-1 piecewise-linear density onto the
discretized log-concave piecewise-exponential class; ``learn_logconcave``
runs the whole pipeline from raw samples.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constants import Constants, DEFAULTS
from .dp import shortest_path_fit
from .errors import InvalidEpsilon
from .grid import build_grid
from .nonproper import LearnerConfig, learn_pwl
from .pwfunc import DomainKind, PiecewiseExpDensity, PiecewiseLinearDensity
from .robust_stats import robust_location_scale
from . import _kernels


@dataclass
class FitReport:
    eps: float
    domain: DomainKind
    n: int | None = None
    location: float = 0.0
    scale: float = 0.0
    k: int = 0
    cell_length: float = 0.0
    num_levels: int = 0
    num_shifts: int = 0
    num_vertices: int = 0
    num_edges: int = 0
    dp_cost: float = 0.0
    z: float = 1.0                  # pre-normalization mass of the decoded h
    out_of_window_mass: float = 0.0
    tv_bound: float = 0.0           # dp_cost/2 + out-of-window + renorm slack
    timings: dict = field(default_factory=dict)
    small_sigma_branch: bool = False
    boundary_closure: bool = False
    empty_fit: bool = False
    low_sample_warning: bool = False
    scale_guarded: bool = False
    backend: str = _kernels.BACKEND

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["domain"] = self.domain.value
        out["timings"] = {k: float(v) for k, v in self.timings.items()}
        return out


def _narrow_fallback(domain: DomainKind, center: float,
                     scale: float) -> PiecewiseExpDensity:
    """A near-point-mass density used when the fit window holds no mass."""
    if domain is DomainKind.INTEGER:
        return PiecewiseExpDensity(domain, [round(center)], [0.0], 1.0)
    half = max(abs(center) * 1e-9, 1e-9) * max(scale, 1.0)
    return PiecewiseExpDensity(domain, [center - half, center + half],
                               [0.0, 0.0], 1.0)


def fit_proper(g: PiecewiseLinearDensity, eps: float,
               consts: Constants = DEFAULTS) -> tuple[PiecewiseExpDensity, FitReport]:
    """Project an explicit density onto the log-concave hypothesis class."""
    if not 0.0 < eps < 0.5:
        raise InvalidEpsilon(f"eps must be in (0, 1/2), got {eps}")
    report = FitReport(eps=eps, domain=g.domain)
    t0 = time.perf_counter()
    moments = robust_location_scale(g, consts)
    report.location = moments.location
    report.scale = moments.scale
    report.scale_guarded = moments.guarded
    grid = build_grid(moments, eps, consts)
    report.k = grid.k
    report.cell_length = grid.cell_length
    report.num_levels = grid.num_levels
    report.num_shifts = grid.num_shifts
    report.small_sigma_branch = (g.domain is DomainKind.INTEGER
                                 and moments.scale <= consts.c_disc / eps)
    t1 = time.perf_counter()
    result = shortest_path_fit(g, grid, scale=moments.scale, consts=consts)
    t2 = time.perf_counter()
    report.dp_cost = result.cost
    report.num_vertices = result.num_vertices
    report.num_edges = result.num_edges
    report.boundary_closure = result.exit_layer == grid.k + 1

    window_lo, window_hi = grid.alpha, grid.beta
    g_lo, g_hi = g.support()
    inside = 0.0
    if g_hi >= window_lo and g_lo <= window_hi:
        inside = g.mass(max(g_lo, window_lo), min(g_hi, window_hi))
    report.out_of_window_mass = max(g.total_mass - inside, 0.0)

    span = result.levels.finite_slice()
    if span is None:
        report.empty_fit = True
        h = _narrow_fallback(g.domain, moments.location, moments.scale)
        report.z = h.Z
    else:
        l, r = span
        step = grid.level_step
        xs = [grid.endpoint(i + 1) for i in range(l, r + 1)]
        if g.domain is DomainKind.INTEGER and len(xs) == 1:
            pass  # single-point support is legal on Z
        elif len(xs) == 1:
            half = grid.cell_length * 1e-9
            xs = [xs[0] - half, xs[0] + half]
        levels = [result.levels.levels[i] * step for i in range(l, r + 1)]
        if len(levels) == 1 and len(xs) == 2:
            levels = [levels[0], levels[0]]
        h = PiecewiseExpDensity(g.domain, xs, levels, moments.scale,
                                codes=result.levels)
        report.z = h.Z
    report.tv_bound = (0.5 * report.dp_cost + report.out_of_window_mass
                       + 0.5 * abs(report.z - 1.0))
    t3 = time.perf_counter()
    report.timings = {"grid": t1 - t0, "dp": t2 - t1, "decode": t3 - t2}
    return h, report


def learn_logconcave(samples, eps: float, domain: DomainKind = DomainKind.REAL,
                     consts: Constants = DEFAULTS,
                     pieces: int = 0) -> tuple[PiecewiseExpDensity, FitReport]:
    """Full pipeline: samples -> stage-1 density -> proper log-concave fit."""
    domain = DomainKind(domain)
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    budget = consts.c_n_full * eps ** -2.5
    low = n < budget
    if low:
        warnings.warn(f"sample count {n} below the recommended budget "
                      f"~{budget:.0f} for eps={eps}", stacklevel=2)
    t0 = time.perf_counter()
    config = LearnerConfig(eps=eps, domain=domain, pieces=pieces, consts=consts)
    if n < 2 * config.resolved_pieces():
        # degrade gracefully: fewer pieces instead of refusing the fit
        config = LearnerConfig(eps=eps, domain=domain,
                               pieces=max(1, n // 2), consts=consts)
        low = True
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        g = learn_pwl(samples, config)
    t1 = time.perf_counter()
    h, report = fit_proper(g, eps, consts)
    report.n = n
    report.low_sample_warning = low
    report.timings["stage1"] = t1 - t0
    return h, report
