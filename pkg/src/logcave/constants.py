"""The constants ledger.

Every asymptotic constant the algorithm depends on lives here with an explicit
default, so a whole run is pinned by (inputs, seed, ledger).  The ledger can be
overridden from a flat ``key=value`` text file, either via the ``--constants``
CLI flag or the ``LOGCAVE_CONSTANTS`` environment variable.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass


@dataclass(frozen=True)
class Constants:
    # Fitting window and grid construction.
    c_I: float = 1.0          # window half-width = ceil(c_I*ln(1/eps)) * sigma units
    c_k: float = 1.0          # cell count k = smallest even integer >= c_k*ln(1/eps)/eps
    c_lo: float = 2.0         # lowest level = -c_lo*ln(1/eps)
    c_hi: float = 2.0         # highest level = c_hi
    c_T: float = 2.0          # slope exponents c in [0, ceil(c_T*log2(1/eps))]
    c_disc: float = 1.0       # discrete small-scale branch taken when sigma <= c_disc/eps

    # Per-cell error oracle.
    c_h: float = 4.0          # expected bound h <= c_h*eps/L on a query cell
    c_tol: float = 1.0        # cell-error additive tolerance = c_tol*eps^2/ln(1/eps)
    c_bis: float = 1.0        # crossing localized within c_bis*eps*L/ln(1/eps)

    # Stage-1 non-proper learner.
    c_t: float = 4.0          # default piece count t = ceil(c_t*eps^{-1/2})
    c_n_pwl: float = 1.0      # warn when n < c_n_pwl * t/eps^2
    c_n_full: float = 10.0    # warn when n < c_n_full * eps^{-5/2}

    # Piecewise-linear approximation of an explicit log-concave density.
    c_safe_pwl: float = 0.125  # internal accuracy factor (safety margin on eps)
    c_m_intervals: float = 40.0  # partition cap: intervals per half <= c_m_intervals*ln(1/eps)

    # Discrete-domain caveats.
    sigma_min_discrete: float = 4.0  # assert the mode lower bound on Z only when sigma >= this

    # Degenerate-scale guards for robust moments.
    scale_guard_real: float = 1e-6   # fraction of the support span substituted on R
    scale_guard_int: float = 1.0     # substituted scale on Z

    def replace(self, **kwargs) -> "Constants":
        return dataclasses.replace(self, **kwargs)


DEFAULTS = Constants()

_FIELD_NAMES = {f.name for f in dataclasses.fields(Constants)}

ENV_VAR = "LOGCAVE_CONSTANTS"


def parse_ledger(text: str) -> dict[str, float]:
    """Parse ``key=value`` lines; '#' starts a comment, blank lines ignored."""
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"constants ledger line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _FIELD_NAMES:
            raise ValueError(f"constants ledger line {lineno}: unknown constant {key!r}")
        values[key] = float(val.strip())
    return values


def load_constants(path: str | None = None) -> Constants:
    """Return the ledger from `path`, the env override, or the defaults."""
    if path is None:
        path = os.environ.get(ENV_VAR)
    if path is None:
        return DEFAULTS
    with open(path, "r", encoding="utf-8") as fh:
        return DEFAULTS.replace(**parse_ledger(fh.read()))


def dump_constants(consts: Constants) -> str:
    """Render a ledger back to its flat text form."""
    lines = [f"{f.name}={getattr(consts, f.name)!r}" for f in dataclasses.fields(Constants)]
    return "\n".join(lines) + "\n"
