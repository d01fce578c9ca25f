"""Backend equivalence: the compiled kernels must match the numpy reference."""

import warnings

import numpy as np
import pytest

import logcave._kernels as kernels
from logcave._kernels import _pure, available_backends
from logcave.families import make_family
from logcave.proper_fit import learn_logconcave
from logcave.pwfunc import DomainKind

HAS_COMPILED = "compiled" in available_backends()


def fit_with_backend(monkeypatch, backend, samples, eps, domain):
    if backend == "pure":
        monkeypatch.setattr(kernels, "layer_weights_real", _pure.layer_weights_real)
        monkeypatch.setattr(kernels, "layer_weights_int", _pure.layer_weights_int)
        monkeypatch.setattr(kernels, "layer_step_real", _pure.layer_step_real)
        monkeypatch.setattr(kernels, "layer_step_int", _pure.layer_step_int)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return learn_logconcave(samples, eps, domain)


class TestBackendSelection:
    def test_pure_always_available(self):
        assert "pure" in available_backends()

    def test_active_backend_listed(self):
        assert kernels.BACKEND in available_backends()


@pytest.mark.skipif(not HAS_COMPILED, reason="compiled extension not built")
class TestEquivalence:
    def test_real_domain_costs_match(self, monkeypatch):
        samples = make_family("gaussian", 0.0, 1.0).sample(3000, seed=6)
        h1, r1 = fit_with_backend(monkeypatch, "compiled", samples, 0.1,
                                  DomainKind.REAL)
        h2, r2 = fit_with_backend(monkeypatch, "pure", samples, 0.1,
                                  DomainKind.REAL)
        # summation order differs between backends; allow last-bit slack
        assert r1.dp_cost == pytest.approx(r2.dp_cost, rel=1e-12)
        assert np.array_equal(h1.log_levels, h2.log_levels)
        assert np.array_equal(h1.endpoints, h2.endpoints)

    def test_integer_domain_costs_match(self, monkeypatch):
        samples = make_family("poisson", 20.0).sample(3000, seed=6)
        h1, r1 = fit_with_backend(monkeypatch, "compiled", samples, 0.1,
                                  DomainKind.INTEGER)
        h2, r2 = fit_with_backend(monkeypatch, "pure", samples, 0.1,
                                  DomainKind.INTEGER)
        assert r1.dp_cost == pytest.approx(r2.dp_cost, rel=1e-12)
        assert np.array_equal(h1.log_levels, h2.log_levels)
