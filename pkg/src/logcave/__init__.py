"""Agnostic proper learning of univariate log-concave densities.

Pipeline: a non-proper piecewise-linear density is learned from samples, then
projected onto a discretized class of log-concave piecewise-exponential
hypotheses by a shortest-path search over concave level sequences.
"""

from .constants import Constants, DEFAULTS, load_constants
from .dp import DpResult, shortest_path_fit
from .families import Contaminated, Family, PointMass, make_family, parse_family, verify_lc_facts
from .grid import FitGrid, build_grid
from .nonproper import LearnerConfig, learn_pwl
from .proper_fit import FitReport, fit_proper, learn_logconcave
from .pwfunc import (DomainKind, PiecewiseExpDensity, PiecewiseLinearDensity,
                     l1_distance, load_density, save_density, tv_distance)
from .pwl_approx import LcOracle, linearize, partition_intervals, pwl_approximate
from .robust_stats import RobustMoments, robust_location_scale
from ._kernels import BACKEND, available_backends

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Constants",
    "Contaminated",
    "DEFAULTS",
    "DomainKind",
    "DpResult",
    "Family",
    "FitGrid",
    "FitReport",
    "LcOracle",
    "LearnerConfig",
    "PiecewiseExpDensity",
    "PiecewiseLinearDensity",
    "PointMass",
    "RobustMoments",
    "available_backends",
    "build_grid",
    "fit_proper",
    "l1_distance",
    "learn_logconcave",
    "learn_pwl",
    "linearize",
    "load_constants",
    "load_density",
    "make_family",
    "parse_family",
    "partition_intervals",
    "pwl_approximate",
    "robust_location_scale",
    "save_density",
    "shortest_path_fit",
    "tv_distance",
    "verify_lc_facts",
    "__version__",
]
