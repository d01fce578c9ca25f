"""Fitting grid: window, cell endpoints, quantized level set, slope set.

The window is centered at the robust location and sized in robust-scale units;
it is split into ``k`` equal cells.  Candidate hypothesis values at the cell
endpoints are quantized log-levels (integer multiples of ``eps/k``), and
consecutive-level differences are drawn from a dyadic slope set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import Constants, DEFAULTS
from .errors import InvalidEpsilon, OutOfRange
from .pwfunc import DomainKind
from .robust_stats import RobustMoments

NEG_INF_CODE = -(2 ** 62)  # integer sentinel for a -inf level


@dataclass(frozen=True)
class FitGrid:
    """The discretized search space for the proper-fitting step."""

    domain: DomainKind
    alpha: float
    beta: float
    k: int
    cell_length: float
    eps: float
    m_lo: int               # lowest finite level code
    m_hi: int               # highest finite level code
    shifts: np.ndarray = field(repr=False)       # sorted distinct slope values
    shift_codes: tuple = field(repr=False)       # (b, c) pairs, aligned with shifts

    @property
    def level_step(self) -> float:
        return self.eps / self.k

    @property
    def num_levels(self) -> int:
        """Finite levels only; the -inf sentinel is extra."""
        return self.m_hi - self.m_lo + 1

    @property
    def num_shifts(self) -> int:
        return len(self.shifts)

    def endpoints(self) -> np.ndarray:
        """The k+1 cell endpoints x_1 .. x_{k+1}."""
        return self.alpha + self.cell_length * np.arange(self.k + 1)

    def endpoint(self, i: int) -> float:
        """x_i for i in 1..k+1."""
        return self.alpha + self.cell_length * (i - 1)

    def level_of(self, a: float) -> int:
        """Round a log-level to the nearest grid code; -inf maps to the sentinel."""
        if a == -math.inf:
            return NEG_INF_CODE
        code = round(a / self.level_step)
        if code < self.m_lo or code > self.m_hi:
            raise OutOfRange(f"level {a} codes to {code}, outside [{self.m_lo}, {self.m_hi}]")
        return code

    def value_of(self, code: int) -> float:
        if code == NEG_INF_CODE:
            return -math.inf
        if code < self.m_lo or code > self.m_hi:
            raise OutOfRange(f"code {code} outside [{self.m_lo}, {self.m_hi}]")
        return code * self.level_step

    def level_values(self) -> np.ndarray:
        """All finite level values, ascending."""
        return np.arange(self.m_lo, self.m_hi + 1) * self.level_step


def _slope_set(eps: float, k: int, consts: Constants) -> tuple[np.ndarray, tuple]:
    """All distinct values b*eps*2^c/k with the spec'd integer ranges."""
    b_max = math.ceil(math.log(1.0 / eps) / eps)
    c_max = math.ceil(consts.c_T * math.log2(1.0 / eps))
    seen: dict[int, tuple[int, int]] = {}
    for c in range(c_max + 1):
        scale = 1 << c
        for b in range(-b_max, b_max + 1):
            key = b * scale
            if key not in seen:
                seen[key] = (b, c)
    keys = sorted(seen)
    step = eps / k
    shifts = np.array([key * step for key in keys])
    codes = tuple(seen[key] for key in keys)
    return shifts, codes


def build_grid(moments: RobustMoments, eps: float,
               consts: Constants = DEFAULTS) -> FitGrid:
    """Construct the fitting grid around the robust moments."""
    if not 0.0 < eps < 0.5:
        raise InvalidEpsilon(f"eps must be in (0, 1/2), got {eps}")
    ln_inv = math.log(1.0 / eps)
    domain = moments.domain
    mu, sigma = moments.location, moments.scale

    if domain is DomainKind.INTEGER and sigma <= consts.c_disc / eps:
        # Small-scale discrete branch: unit cells over a wide integer window.
        half = math.ceil(consts.c_I * ln_inv / eps)
        alpha = float(math.floor(mu)) - half
        beta = float(math.floor(mu)) + half
        L = 1.0
        k = int(beta - alpha)
        if k % 2:
            beta += 1.0
            k += 1
    else:
        k = math.ceil(consts.c_k * ln_inv / eps)
        if k % 2:
            k += 1
        window = 2.0 * math.ceil(consts.c_I * ln_inv) * sigma
        L = window / k
        if domain is DomainKind.INTEGER:
            L = float(math.ceil(L))
            alpha = float(math.floor(mu - 0.5 * k * L))
        else:
            alpha = mu - 0.5 * window
        beta = alpha + k * L

    step = eps / k
    m_lo = math.ceil(-consts.c_lo * ln_inv / step)
    m_hi = math.floor(consts.c_hi / step)
    shifts, codes = _slope_set(eps, k, consts)
    return FitGrid(domain=domain, alpha=alpha, beta=beta, k=k, cell_length=L,
                   eps=eps, m_lo=m_lo, m_hi=m_hi, shifts=shifts,
                   shift_codes=codes)


def quantize_concave_levels(values, grid: FitGrid):
    """Round a concave log-level sequence onto the grid, preserving concavity.

    Values below the lowest finite level become the -inf sentinel.  Useful for
    building grid-representable fixtures from known log-concave shapes.
    """
    step = grid.level_step
    codes = []
    for a in values:
        if a == -math.inf:
            codes.append(NEG_INF_CODE)
            continue
        code = round(a / step)
        if code < grid.m_lo:
            codes.append(NEG_INF_CODE)
        else:
            codes.append(min(code, grid.m_hi))
    return codes
