"""Reference log-concave families with exact pdf/cdf, log-derivatives and
seeded inverse-CDF samplers, plus a contamination mixer for agnostic tests."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .errors import OutOfSupport, ParseError
from .pwfunc import DomainKind

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Family:
    """One of the supported parametric log-concave families."""

    name: str
    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        spec = _FAMILIES.get(self.name)
        if spec is None:
            raise ValueError(f"unknown family {self.name!r}")
        if len(self.params) != spec.n_params:
            raise ValueError(f"{self.name} takes {spec.n_params} parameters")
        spec.validate(self.params)

    @property
    def domain(self) -> DomainKind:
        return _FAMILIES[self.name].domain

    # exact moments -------------------------------------------------------

    @property
    def mean(self) -> float:
        return _FAMILIES[self.name].mean(self.params)

    @property
    def std(self) -> float:
        return _FAMILIES[self.name].std(self.params)

    def mode(self) -> float:
        return _FAMILIES[self.name].mode(self.params)

    def mode_value(self) -> float:
        return self.pdf(self.mode())

    # pointwise -----------------------------------------------------------

    def pdf(self, x) -> float | np.ndarray:
        return _FAMILIES[self.name].pdf(self.params, np.asarray(x, dtype=float))

    def cdf(self, x) -> float | np.ndarray:
        return _FAMILIES[self.name].cdf(self.params, np.asarray(x, dtype=float))

    def ppf(self, q) -> float | np.ndarray:
        return _FAMILIES[self.name].ppf(self.params, np.asarray(q, dtype=float))

    def log_pdf(self, x) -> float | np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(x))

    def log_deriv(self, x) -> float | np.ndarray:
        """d/dx log f on R; log f(x+1) - log f(x) on Z.

        Raises OutOfSupport where the density vanishes.
        """
        x = np.asarray(x, dtype=float)
        if self.domain is DomainKind.INTEGER:
            num = self.pdf(x + 1)
            den = self.pdf(x)
            if np.any(den <= 0.0) or np.any(num <= 0.0):
                raise OutOfSupport("log finite difference outside the support")
            return np.log(num) - np.log(den)
        if np.any(self.pdf(x) <= 0.0):
            raise OutOfSupport("log derivative outside the support")
        return _FAMILIES[self.name].log_deriv(self.params, x)

    def support(self) -> tuple[float, float]:
        return _FAMILIES[self.name].support(self.params)

    # sampling ------------------------------------------------------------

    def sample(self, n: int, seed: int) -> np.ndarray:
        """Deterministic inverse-CDF sampling."""
        if n < 1:
            raise ValueError("n must be >= 1")
        rng = np.random.default_rng(seed)
        u = rng.random(n)
        return np.asarray(self.ppf(u), dtype=float)

    def spec_string(self) -> str:
        return f"{self.name}:" + ",".join(repr(p) for p in self.params)


@dataclass(frozen=True)
class PointMass:
    """Degenerate point mass; only used as contamination noise."""

    location: float

    @property
    def domain(self) -> DomainKind:
        return DomainKind.INTEGER if self.location == int(self.location) else DomainKind.REAL

    def sample(self, n: int, seed: int) -> np.ndarray:
        return np.full(n, self.location, dtype=float)

    def pdf(self, x):
        # meaningful as a pmf only; on R the atom carries no density
        x = np.asarray(x, dtype=float)
        return np.where(x == self.location, 1.0, 0.0)


@dataclass(frozen=True)
class Contaminated:
    """(1-eta)*base + eta*noise; eta bounds the optimal log-concave error."""

    base: Family
    noise: Family | PointMass
    eta: float

    def __post_init__(self):
        if not 0.0 <= self.eta < 1.0:
            raise ValueError("eta must be in [0, 1)")

    @property
    def domain(self) -> DomainKind:
        return self.base.domain

    def pdf(self, x):
        return (1.0 - self.eta) * self.base.pdf(x) + self.eta * self.noise.pdf(x)

    def cdf(self, x):
        if isinstance(self.noise, PointMass):
            noise_cdf = (np.asarray(x, dtype=float) >= self.noise.location).astype(float)
        else:
            noise_cdf = self.noise.cdf(x)
        return (1.0 - self.eta) * self.base.cdf(x) + self.eta * noise_cdf

    def sample(self, n: int, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        pick_noise = rng.random(n) < self.eta
        base_draw = np.asarray(self.base.ppf(rng.random(n)), dtype=float)
        if isinstance(self.noise, PointMass):
            noise_draw = np.full(n, self.noise.location, dtype=float)
            rng.random(n)  # keep the stream layout uniform across noise kinds
        else:
            noise_draw = np.asarray(self.noise.ppf(rng.random(n)), dtype=float)
        return np.where(pick_noise, noise_draw, base_draw)


# ---------------------------------------------------------------------------
# family table


class _Spec:
    def __init__(self, domain, n_params, validate, mean, std, mode, pdf, cdf, ppf,
                 log_deriv=None, support=None):
        self.domain = domain
        self.n_params = n_params
        self.validate = validate
        self.mean = mean
        self.std = std
        self.mode = mode
        self.pdf = pdf
        self.cdf = cdf
        self.ppf = ppf
        self.log_deriv = log_deriv
        self.support = support or (lambda p: (-math.inf, math.inf))


def _check(cond: bool, msg: str):
    if not cond:
        raise ValueError(msg)


def _gauss_pdf(p, x):
    mu, s = p
    z = (x - mu) / s
    return np.exp(-0.5 * z * z) / (s * _SQRT_2PI)


def _laplace_pdf(p, x):
    mu, b = p
    return np.exp(-np.abs(x - mu) / b) / (2.0 * b)


def _expon_pdf(p, x):
    (lam,) = p
    return np.where(x >= 0.0, lam * np.exp(-lam * np.minimum(np.maximum(x, 0.0), 7e2)), 0.0)


def _logistic_pdf(p, x):
    mu, s = p
    z = np.abs(x - mu) / s
    e = np.exp(-z)
    return e / (s * (1.0 + e) ** 2)


def _uniform_pdf(p, x):
    a, b = p
    return np.where((x >= a) & (x <= b), 1.0 / (b - a), 0.0)


def _poisson_pdf(p, x):
    (lam,) = p
    return stats.poisson.pmf(np.round(x), lam)


def _binom_pdf(p, x):
    n, q = p
    return stats.binom.pmf(np.round(x), int(n), q)


def _geom_pdf(p, x):
    # support starts at 0 with pmf (1-q)^x * q
    (q,) = p
    x = np.round(x)
    with np.errstate(invalid="ignore"):
        out = np.where(x >= 0, np.power(1.0 - q, np.maximum(x, 0)) * q, 0.0)
    return out


_FAMILIES: dict[str, _Spec] = {
    "gaussian": _Spec(
        DomainKind.REAL, 2,
        lambda p: _check(p[1] > 0, "sigma must be positive"),
        lambda p: p[0], lambda p: p[1], lambda p: p[0],
        _gauss_pdf,
        lambda p, x: stats.norm.cdf(x, p[0], p[1]),
        lambda p, q: stats.norm.ppf(q, p[0], p[1]),
        lambda p, x: -(x - p[0]) / (p[1] ** 2),
    ),
    "laplace": _Spec(
        DomainKind.REAL, 2,
        lambda p: _check(p[1] > 0, "b must be positive"),
        lambda p: p[0], lambda p: math.sqrt(2.0) * p[1], lambda p: p[0],
        _laplace_pdf,
        lambda p, x: stats.laplace.cdf(x, p[0], p[1]),
        lambda p, q: stats.laplace.ppf(q, p[0], p[1]),
        lambda p, x: -np.sign(x - p[0]) / p[1],
    ),
    "exponential": _Spec(
        DomainKind.REAL, 1,
        lambda p: _check(p[0] > 0, "lambda must be positive"),
        lambda p: 1.0 / p[0], lambda p: 1.0 / p[0], lambda p: 0.0,
        _expon_pdf,
        lambda p, x: stats.expon.cdf(x, scale=1.0 / p[0]),
        lambda p, q: stats.expon.ppf(q, scale=1.0 / p[0]),
        lambda p, x: np.full_like(np.asarray(x, dtype=float), -p[0]),
        support=lambda p: (0.0, math.inf),
    ),
    "logistic": _Spec(
        DomainKind.REAL, 2,
        lambda p: _check(p[1] > 0, "s must be positive"),
        lambda p: p[0], lambda p: p[1] * math.pi / math.sqrt(3.0), lambda p: p[0],
        _logistic_pdf,
        lambda p, x: stats.logistic.cdf(x, p[0], p[1]),
        lambda p, q: stats.logistic.ppf(q, p[0], p[1]),
        lambda p, x: -np.tanh((np.asarray(x, dtype=float) - p[0]) / (2.0 * p[1])) / p[1],
    ),
    "uniform": _Spec(
        DomainKind.REAL, 2,
        lambda p: _check(p[0] < p[1], "need a < b"),
        lambda p: 0.5 * (p[0] + p[1]),
        lambda p: (p[1] - p[0]) / math.sqrt(12.0),
        lambda p: p[0],  # leftmost maximizer, so one monotone half covers the support
        _uniform_pdf,
        lambda p, x: np.clip((np.asarray(x, dtype=float) - p[0]) / (p[1] - p[0]), 0.0, 1.0),
        lambda p, q: p[0] + q * (p[1] - p[0]),
        lambda p, x: np.zeros_like(np.asarray(x, dtype=float)),
        support=lambda p: (p[0], p[1]),
    ),
    "poisson": _Spec(
        DomainKind.INTEGER, 1,
        lambda p: _check(p[0] > 0, "lambda must be positive"),
        lambda p: p[0], lambda p: math.sqrt(p[0]), lambda p: float(math.floor(p[0])),
        _poisson_pdf,
        lambda p, x: stats.poisson.cdf(np.floor(x), p[0]),
        lambda p, q: stats.poisson.ppf(q, p[0]),
        support=lambda p: (0.0, math.inf),
    ),
    "binomial": _Spec(
        DomainKind.INTEGER, 2,
        lambda p: _check(p[0] >= 1 and p[0] == int(p[0]) and 0 < p[1] < 1,
                         "need integer n >= 1 and 0 < p < 1"),
        lambda p: p[0] * p[1],
        lambda p: math.sqrt(p[0] * p[1] * (1.0 - p[1])),
        lambda p: float(math.floor((p[0] + 1) * p[1])),
        _binom_pdf,
        lambda p, x: stats.binom.cdf(np.floor(x), int(p[0]), p[1]),
        lambda p, q: stats.binom.ppf(q, int(p[0]), p[1]),
        support=lambda p: (0.0, p[0]),
    ),
    "geometric": _Spec(
        DomainKind.INTEGER, 1,
        lambda p: _check(0 < p[0] < 1, "need 0 < p < 1"),
        lambda p: (1.0 - p[0]) / p[0],
        lambda p: math.sqrt(1.0 - p[0]) / p[0],
        lambda p: 0.0,
        _geom_pdf,
        lambda p, x: np.where(np.floor(x) >= 0, 1.0 - np.power(1.0 - p[0], np.floor(np.maximum(x, -1.0)) + 1), 0.0),
        lambda p, q: _geom_ppf(p, q),
        support=lambda p: (0.0, math.inf),
    ),
}


def _geom_ppf(p, q):
    # least x >= 0 with 1-(1-p)^(x+1) >= q
    q = np.asarray(q, dtype=float)
    x = np.ceil(np.log1p(-q) / math.log1p(-p[0]) - 1.0)
    x = np.maximum(x, 0.0)
    # guard rounding at the boundary
    under = 1.0 - np.power(1.0 - p[0], x + 1) < q - 1e-15
    return x + under


def make_family(name: str, *params: float) -> Family:
    return Family(name=name, params=tuple(params))


def parse_family(spec: str) -> Family:
    """Parse 'name:p1,p2' specs like 'gaussian:0,1'."""
    try:
        name, _, rest = spec.partition(":")
        params = tuple(float(tok) for tok in rest.split(",") if tok.strip() != "")
        return Family(name=name.strip().lower(), params=params)
    except ValueError as exc:
        raise ParseError(f"bad family spec {spec!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# structural fact checks


def verify_lc_facts(fam: Family, eps: float = 0.1,
                    sigma_min_discrete: float = 4.0) -> dict:
    """Numeric checks of the mode bounds, the exp envelope, and the tail bound.

    Returns a dict of named booleans plus the measured quantities.
    """
    mu, sigma = fam.mean, fam.std
    mf = fam.mode_value()
    report: dict = {"mode_value": mf, "mean": mu, "std": sigma}

    check_lower = fam.domain is DomainKind.REAL or sigma >= sigma_min_discrete
    report["mode_lower_checked"] = check_lower
    report["mode_lower"] = (mf >= 1.0 / (8.0 * sigma) - 1e-12) if check_lower else True
    report["mode_upper"] = mf <= 1.0 / sigma + 1e-12

    # envelope f(x) <= exp(1 - |x-mu| Mf / e) * Mf on a test grid
    lo, hi = fam.support()
    glo = max(lo, mu - 12.0 * sigma)
    ghi = min(hi, mu + 12.0 * sigma)
    if fam.domain is DomainKind.INTEGER:
        xs = np.arange(math.floor(glo), math.ceil(ghi) + 1, dtype=float)
    else:
        xs = np.linspace(glo, ghi, 4001)
    envelope = np.exp(1.0 - np.abs(xs - mu) * mf / math.e) * mf
    report["envelope"] = bool(np.all(fam.pdf(xs) <= envelope * (1.0 + 1e-9) + 1e-300))

    # tail mass at the radius used by the tail bound
    radius = 8.0 * math.e * sigma * (1.0 + math.log(8.0 * math.e / eps))
    lo_tail = float(fam.cdf(mu - radius)) if fam.domain is DomainKind.REAL else float(
        fam.cdf(math.floor(mu - radius) - 1))
    hi_tail = 1.0 - float(fam.cdf(mu + radius))
    report["tail_radius"] = radius
    report["tails"] = lo_tail <= eps and hi_tail <= eps

    report["all_pass"] = bool(
        report["mode_lower"] and report["mode_upper"] and report["envelope"] and report["tails"]
    )
    return report
