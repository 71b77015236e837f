import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from arimoto_speed.analysis import derivative_tensors, hessian, spectral_report
from arimoto_speed.arimoto import analyze_at, solve_capacity
from arimoto_speed.catalog import get_channel, stated_optimum
from arimoto_speed.recurrence import build_reduced_model

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_CACHE = {}


def bundle(name: str, at_stated: bool):
    """Fixed point, tensors, spectral report, Hessian and reduced model (cached)."""
    key = (name, at_stated)
    if key not in _CACHE:
        channel = get_channel(name)
        fp = analyze_at(channel, stated_optimum(name)) if at_stated else solve_capacity(channel)
        tensors = derivative_tensors(fp, channel)
        spectral = spectral_report(fp, tensors)
        hess = hessian(fp, tensors)
        model = build_reduced_model(fp, spectral, tensors, hess) if fp.m2 else None
        _CACHE[key] = (channel, fp, tensors, spectral, hess, model)
    return _CACHE[key]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_channel(rng, m: int, n: int, concentration: float = 1.0) -> np.ndarray:
    """Random full-row-rank stochastic matrix with strictly positive entries."""
    while True:
        P = rng.dirichlet(np.full(n, concentration), size=m)
        P = np.maximum(P, 1e-6)
        P /= P.sum(axis=1, keepdims=True)
        if np.linalg.matrix_rank(P) == m:
            return P


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
