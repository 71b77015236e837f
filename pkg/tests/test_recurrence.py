import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from arimoto_speed.recurrence import (
    DivergenceError,
    ReductionError,
    build_reduced_model,
    canonical_iterate,
    divisibility_check,
    manifold_start,
    reduced_iterate,
    reduction_consistency,
    scalar_logistic,
    second_order_iterate,
)

from conftest import bundle


def test_scalar_logistic_n_nu_tends_to_one():
    nu = scalar_logistic(0.5, 10_000)
    assert 10_000 * nu[-1] == pytest.approx(1.0, abs=1e-2)
    assert np.all(np.diff(nu) < 0)


@given(st.floats(0.1, 0.5))
def test_scalar_logistic_limit_independent_of_start(nu0):
    # N nu^N = 1 - (1/nu0 + ln N) / N + ..., so the error here stays below 2e-3
    nu = scalar_logistic(nu0, 20_000)
    assert 20_000 * nu[-1] == pytest.approx(1.0, abs=2e-3)


@pytest.mark.parametrize("name", ["phi2", "phi5", "phi2_exact", "phi5_exact"])
def test_canonical_rows_are_probability_vectors(name):
    model = bundle(name, True)[5]
    assert np.max(np.abs(model.p.sum(axis=1) - 1)) <= 1e-10
    assert np.all(model.p >= -1e-12)
    assert model.sigma_positive


@pytest.mark.parametrize("name", ["phi2", "phi5", "phi2_exact", "phi5_exact"])
def test_reduced_coefficients_match_direct_hessian_evaluation(name):
    _, _, _, _, hess, model = bundle(name, True)
    assert reduction_consistency(model, hess, trials=20, seed=3) <= 1e-10


def test_limits_continue_sigma_onto_eliminated_coordinates():
    model = bundle("phi5", True)[5]
    lim = model.limits_full
    assert np.allclose(lim[2:], model.sigma)
    # symmetric channel: the two support symbols share the eliminated mass
    assert lim[0] == pytest.approx(-1.5 * model.sigma[0], rel=1e-12)
    assert abs(lim.sum()) <= 1e-12


def test_reduction_requires_type_two_symbols():
    _, fp, tensors, spectral, _, _ = bundle("phi1", False)
    with pytest.raises(ReductionError):
        build_reduced_model(fp, spectral, tensors)


def test_second_order_iteration_conserves_mass():
    _, _, _, spectral, hess, model = bundle("phi5", True)
    run = second_order_iterate(manifold_start(model), spectral.jacobian, hess, 100_000, every=10_000)
    assert run.max_mass_drift <= 1e-10


def test_second_order_matches_reduced_recurrence_on_the_manifold():
    _, _, _, spectral, hess, model = bundle("phi2", True)
    mu0 = manifold_start(model, [0.2])
    full = second_order_iterate(mu0, spectral.jacobian, hess, 2000, every=500)
    red = reduced_iterate(mu0[list(model.type2)], model, 2000, every=500)
    assert np.allclose(full.values[:, 2], red.values[:, 0], rtol=1e-8)


def test_second_order_rejects_mass_violation_and_detects_divergence():
    _, _, _, spectral, hess, _ = bundle("phi2", True)
    with pytest.raises(ValueError):
        second_order_iterate(np.array([0.1, 0.0, 0.0]), spectral.jacobian, hess, 10)
    with pytest.raises(DivergenceError):
        second_order_iterate(np.array([0.5, 0.5, -1.0]), spectral.jacobian, hess, 10)


def test_canonical_form_monitors_on_diagonally_dominant_rows(rng):
    q = np.array([[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.1, 0.1, 0.8]])
    for _ in range(5):
        tr = canonical_iterate(rng.uniform(0.05, 0.5, 3), q, 20_000, every=5000)
        assert tr.ordering_violations == []
        assert tr.bounds_ok and tr.decreasing_ok
        assert tr.partial_sum_ok
        assert np.allclose(tr.n_xi[-1], 1.0, atol=5e-3)


def test_canonical_form_rejects_bad_input():
    q = np.eye(2)
    with pytest.raises(ValueError):
        canonical_iterate([0.7, 0.1], q, 10)
    with pytest.raises(ValueError):
        canonical_iterate([0.3, 0.1], [[0.5, 0.4], [0.0, 1.0]], 10)


@pytest.mark.parametrize("name", ["phi2", "phi5"])
def test_divisibility_condition_holds(name):
    channel, fp, _, spectral, _, _ = bundle(name, True)
    for res in divisibility_check(channel, fp, spectral):
        assert res.passed


def test_scalar_logistic_rejects_start_outside_domain():
    with pytest.raises(ValueError):
        scalar_logistic(0.75, 10)


def _full_and_second_order(name, n_max, every):
    from arimoto_speed.speed import run_trace

    channel, fp, _, spectral, hess, _ = bundle(name, True)
    lam0 = np.full(fp.m, 1 / fp.m)
    full = run_trace(channel, lam0, fp, n_max, dps=None)
    approx = second_order_iterate(lam0 - fp.lambda_star, spectral.jacobian, hess, n_max, every=every)
    return full, approx


@pytest.mark.parametrize("name", ["phi2", "phi5", "phi2_exact", "phi5_exact"])
def test_second_order_tracks_full_iteration_at_500(name):
    full, approx = _full_and_second_order(name, 500, 500)
    gap = np.abs(full.n_mu[500] - 500 * approx.at(500)).max()
    assert gap <= 0.05


@pytest.mark.parametrize("name", ["phi2_exact", "phi5_exact"])
def test_second_order_discrepancy_decays_like_log_n_over_n(name):
    full, approx = _full_and_second_order(name, 4000, 500)
    gaps = {n: np.abs(full.n_mu[n] - n * approx.at(n)).max() for n in (500, 1000, 2000, 4000)}
    for n in (500, 1000, 2000):
        ratio = gaps[2 * n] / gaps[n]
        assert 0.5 < ratio < 0.5 * np.log(2 * n) / np.log(n) + 0.1
