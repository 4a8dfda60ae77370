import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from piar.core import NoiseSpec, PeriodicCoefficients, PeriodicSeries, to_vs
from piar.errors import IncompleteYear, InputError, InsufficientHistory, OrderTooHigh, PeriodMismatch
from piar.estimate import FittedModel, residuals
from piar.forecast import ForecastResult, forecast_mc, forecast_vs, vs_matrices
from piar.generate import SimConfig, make_rng, simulate_par, simulate_piar
from piar.mcmatrix import EigenSpec, fd_from_eigen, mc_from_coeffs, noise_cov_descending, sigma_u
from piar.models import table2_model
from piar.pifilter import theta_general

from conftest import random_noise, random_par, random_seeds


def model_of(coeffs, sigma2, mean=0.0):
    return FittedModel.from_coefficients(coeffs, sigma2, mean)


def pi1_model():
    b = table2_model("I")
    return model_of(b.theta(), b.noise), b


def test_pi1_forecasts_constant():
    model, b = pi1_model()
    x = simulate_piar(SimConfig(b.spec, b.noise, 80, rng_seed=1))
    fc = forecast_vs(model, x, 6)
    for h in range(1, 6):
        np.testing.assert_allclose(fc.point[h], fc.point[0], rtol=1e-12, atol=1e-12)
    phi0, phi1 = vs_matrices(model.full_filter)
    step = np.linalg.solve(phi0, phi1)
    np.testing.assert_allclose(step @ step, step, atol=1e-12)


def test_pi1_error_covariance_closed_form():
    model, b = pi1_model()
    x = simulate_piar(SimConfig(b.spec, b.noise, 80, rng_seed=2))
    fc = forecast_vs(model, x, 8)
    phi0, phi1 = vs_matrices(model.full_filter)
    inv0 = np.linalg.inv(phi0)
    step = inv0 @ phi1
    base = inv0 @ noise_cov_descending(b.noise.sigma2, 4) @ inv0.T
    for h in range(1, 9):
        closed = (h - 1) * step @ base @ step.T + base
        np.testing.assert_allclose(fc.err_cov[h - 1], closed, rtol=1e-10, atol=1e-10)


def test_white_noise_forecast():
    noise = NoiseSpec([1.0, 2.0, 3.0])
    model = model_of(PeriodicCoefficients.zeros(3), noise)
    x = PeriodicSeries(np.random.default_rng(0).normal(size=12), 3)
    for fc in (forecast_vs(model, x, 4), forecast_mc(model, x, 4)):
        np.testing.assert_array_equal(fc.point, 0.0)
        for h in range(4):
            np.testing.assert_array_equal(fc.err_cov[h], np.diag([3.0, 2.0, 1.0]))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_vs_equals_mc(p, horizon, seed):
    rng = np.random.default_rng(seed)
    c, noise = random_par(rng, 4, p), random_noise(rng, 4)
    model = model_of(c, noise, mean=float(rng.normal()))
    x = PeriodicSeries(rng.normal(size=24), 4)
    vs, mc = forecast_vs(model, x, horizon), forecast_mc(model, x, horizon)
    np.testing.assert_allclose(mc.point[:, :4], vs.point, rtol=1e-8, atol=1e-8)
    np.testing.assert_allclose(mc.err_cov[:, :4, :4], vs.err_cov, rtol=1e-8, atol=1e-8)


def test_mc_idempotent_closed_form():
    rng = np.random.default_rng(4)
    for m1 in (1, 2, 3):
        spec = EigenSpec(4, 4, (1,) * m1, random_seeds(rng, 4, m1))
        f = fd_from_eigen(spec)
        coeffs = theta_general(spec)
        np.testing.assert_allclose(mc_from_coeffs(coeffs), f, atol=1e-10)
        noise = random_noise(rng, 4)
        model = model_of(coeffs, noise)
        x = PeriodicSeries(rng.normal(size=16), 4)
        fc = forecast_mc(model, x, 6)
        su = sigma_u(coeffs, noise.sigma2)
        for h in range(1, 7):
            closed = su + (h - 1) * f @ su @ f.T
            np.testing.assert_allclose(fc.err_cov[h - 1], closed, rtol=1e-9, atol=1e-9)


def test_zero_horizon():
    model, b = pi1_model()
    x = simulate_piar(SimConfig(b.spec, b.noise, 40, rng_seed=3))
    for fc in (forecast_vs(model, x, 0), forecast_mc(model, x, 0)):
        assert fc.horizon == 0
        assert fc.point.shape == (0, 4)
        assert fc.chronological()[1].size == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 6), st.integers(0, 2**32 - 1))
def test_covariance_properties(p, seed):
    rng = np.random.default_rng(seed)
    model = model_of(random_par(rng, 4, p), random_noise(rng, 4))
    x = PeriodicSeries(rng.normal(size=32), 4)
    fc = forecast_mc(model, x, 8)
    for h in range(8):
        c = fc.err_cov[h]
        np.testing.assert_array_equal(c, c.T)
        assert np.linalg.eigvalsh(c).min() >= -1e-10
        if h:
            assert np.linalg.eigvalsh(c - fc.err_cov[h - 1]).min() >= -1e-10
    assert np.all(fc.lower <= fc.point) and np.all(fc.point <= fc.upper)
    narrow = fc.with_level(0.5)
    assert np.all(narrow.upper - narrow.lower <= fc.upper - fc.lower)


def test_forecast_errors():
    model, b = pi1_model()
    x = simulate_piar(SimConfig(b.spec, b.noise, 40, rng_seed=3))
    with pytest.raises(IncompleteYear):
        forecast_vs(model, PeriodicSeries(x.values[:-1], 4), 2)
    with pytest.raises(PeriodMismatch):
        forecast_vs(model, PeriodicSeries(x.values, 2), 2)
    with pytest.raises(InputError):
        forecast_mc(model, x, -1)
    high = model_of(PeriodicCoefficients(np.full((4, 6), 0.01)), b.noise)
    with pytest.raises(OrderTooHigh):
        forecast_vs(high, x, 2)
    with pytest.raises(InsufficientHistory):
        forecast_mc(high, PeriodicSeries(x.values[:4], 4), 2)
    assert forecast_mc(high, x, 2).point.shape == (2, 6)
    with pytest.raises(InputError):
        forecast_vs(model, x, 2).with_level(1.0)


def test_vs_form_reproduces_innovations():
    rng = np.random.default_rng(5)
    c, noise = random_par(rng, 4, 3), random_noise(rng, 4)
    x = simulate_par(c, noise, 80, rng_seed=5)
    phi0, phi1 = vs_matrices(c)
    vs = to_vs(x)
    eps = to_vs(PeriodicSeries(np.concatenate([np.zeros(3), residuals(model_of(c, noise), x).values]), 4))
    for t in range(1, vs.shape[0]):
        np.testing.assert_allclose(phi0 @ vs[t] - phi1 @ vs[t - 1], eps[t], atol=1e-12)


def test_interval_coverage():
    rng_c = np.random.default_rng(6)
    c, noise = random_par(rng_c, 4, 2), random_noise(rng_c, 4)
    model = model_of(c, noise)
    hits = total = 0
    for r in range(2000):
        rng = make_rng(77, r)
        full = simulate_par(c, noise, 48, burn_in=40, rng=rng)
        hist = PeriodicSeries(full.values[:40], 4)
        fc = forecast_mc(model, hist, 2)
        _, _, lo, up, _ = fc.chronological()
        future = full.values[40:]
        hits += int(np.sum((lo <= future) & (future <= up)))
        total += future.size
    assert abs(hits / total - 0.95) <= 0.03


def test_chronological_and_back_transform():
    fc = ForecastResult(np.array([[4.0, 3.0], [6.0, 5.0]]), np.zeros((2, 2, 2)), 2, origin=9)
    times, pt, lo, up, sd = fc.chronological()
    np.testing.assert_array_equal(times, [9, 10, 11, 12])
    np.testing.assert_array_equal(pt, [3.0, 4.0, 5.0, 6.0])
    np.testing.assert_array_equal(lo, pt)
    np.testing.assert_array_equal(fc.chronological(steps=3)[1], [3.0, 4.0, 5.0])
    with pytest.raises(InputError):
        fc.chronological(steps=5)
    _, ept, elo, eup = fc.back_transform()
    np.testing.assert_allclose(ept, np.exp(pt))
    np.testing.assert_allclose(elo, np.exp(lo))


def test_mean_is_restored():
    model, b = pi1_model()
    x = simulate_piar(SimConfig(b.spec, b.noise, 40, rng_seed=8))
    shifted = model_of(model.full_filter, b.noise, mean=10.0)
    fc0 = forecast_vs(model, x, 3)
    fc1 = forecast_vs(shifted, x.with_values(x.values + 10.0), 3)
    np.testing.assert_allclose(fc1.point, fc0.point + 10.0, atol=1e-10)
    assert fc1.origin == 41
