import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aqforecast.errors import InsufficientDataError, InvalidHorizonError, StateError
from aqforecast.sarima import (
    OrderBounds,
    SarimaModel,
    SarimaOrder,
    choose_differencing,
    css_objective,
    difference,
    fit_sarima,
    forecast_sarima,
    grid_search,
    undifference,
)
from conftest import simulate_arma


def manual(order, ar=(), ma=(), intercept=0.0, w=(), e=(), x=()):
    tail = {"w": np.array(w, float), "e": np.array(e, float), "x": np.array(x, float)}
    return SarimaModel(order, tuple(ar), tuple(ma), (), (), intercept, 1.0, 0.0, 0.0, 1, tail)


def test_difference_examples():
    np.testing.assert_array_equal(difference([4.0] * 6, 1), np.zeros(5))
    np.testing.assert_array_equal(difference([1, 3, 6, 10], 1), [2, 3, 4])
    periodic = np.tile(np.random.default_rng(0).normal(size=24), 4)
    np.testing.assert_array_equal(difference(periodic, 0, 1), np.zeros(72))
    with pytest.raises(InsufficientDataError):
        difference([1.0, 2.0], 2)


def test_undifference_examples():
    np.testing.assert_array_equal(undifference([2, 3, 4], [1], 1), [3, 6, 10])
    assert undifference([], [1, 2, 3], 2).size == 0
    with pytest.raises(InsufficientDataError):
        undifference([1.0], [], 1)


def test_round_trip_d2():
    x = np.random.default_rng(4).normal(size=100)
    back = undifference(difference(x, 2), x[:2], 2)
    np.testing.assert_allclose(back, x[2:], atol=1e-9)


@given(st.integers(0, 2), st.integers(0, 1), st.integers(0, 2**32 - 1), st.integers(0, 80))
@settings(max_examples=100, deadline=None)
def test_round_trip_property(d, D, seed, extra):
    n = d + 24 * D + 1 + extra
    x = np.random.default_rng(seed).normal(0, 50, n)
    r = d + 24 * D
    back = undifference(difference(x, d, D), x[:r], d, D)
    np.testing.assert_allclose(back, x[r:], atol=1e-9, rtol=0)


def test_css_degenerate_orders():
    z = np.random.default_rng(1).normal(3, 2, 200)
    null = SarimaOrder()
    assert css_objective(np.array([z.mean()]), z, null) == pytest.approx(
        np.sum((z - z.mean()) ** 2), rel=1e-12)
    assert css_objective(np.array([0.0]), z, null) == pytest.approx(np.sum(z ** 2), rel=1e-12)
    # residuals are conditional on the first p observations
    ar = SarimaOrder(p=1)
    assert css_objective(np.zeros(2), z, ar) == pytest.approx(np.sum(z[1:] ** 2), rel=1e-12)


def test_css_prefers_true_phi():
    z = simulate_arma(500, phi=0.7, seed=3)
    o = SarimaOrder(p=1)
    assert css_objective(np.array([0.7, 0.0]), z, o) < css_objective(np.array([0.0, 0.0]), z, o)


def test_css_overflow_is_infinite():
    z = np.random.default_rng(2).normal(size=500) * 1e150
    assert css_objective(np.array([0.0, 0.0, 5.0, 0.0]), z, SarimaOrder(p=1, q=2)) == np.inf


def test_css_matches_direct_recursion():
    # (1,0,1)(1,0,1)_24 residuals written out term by term
    z = np.random.default_rng(8).normal(size=120)
    phi, theta, Phi, Theta, mu = 0.4, 0.3, 0.2, -0.25, 0.1
    w = z - mu
    e = np.zeros(z.size)
    for t in range(25, z.size):
        ar = phi * w[t - 1] + Phi * w[t - 24] - phi * Phi * w[t - 25]
        ma = theta * e[t - 1] + Theta * e[t - 24] + theta * Theta * e[t - 25]
        e[t] = w[t] - ar - ma
    o = SarimaOrder(p=1, q=1, P=1, Q=1)
    got = css_objective(np.array([phi, theta, Phi, Theta, mu]), z, o)
    assert got == pytest.approx(np.sum(e[24:] ** 2), rel=1e-10)


def test_fit_recovers_ar1():
    m = fit_sarima(simulate_arma(500, phi=0.7, seed=12), SarimaOrder(p=1))
    assert abs(m.ar_coeffs[0] - 0.7) < 0.1
    assert m.sigma2 > 0


def test_fit_recovers_ma1():
    m = fit_sarima(simulate_arma(500, theta=0.5, seed=12), SarimaOrder(q=1))
    assert abs(m.ma_coeffs[0] - 0.5) < 0.15


def test_white_noise_intercept():
    z = np.random.default_rng(6).normal(20, 3, 500)
    m = fit_sarima(z, SarimaOrder())
    assert abs(m.intercept - z.mean()) < 0.1


def test_fit_is_deterministic():
    z = simulate_arma(300, phi=0.5, theta=0.2, seed=2) + 30
    a, b = fit_sarima(z, SarimaOrder(1, 0, 1)), fit_sarima(z, SarimaOrder(1, 0, 1))
    assert a.params.tobytes() == b.params.tobytes()


def test_fit_too_short():
    with pytest.raises(InsufficientDataError):
        fit_sarima(np.ones(30), SarimaOrder(P=1))


def test_order_bounds_enforced():
    with pytest.raises(ValueError):
        SarimaOrder(p=7)
    with pytest.raises(ValueError):
        SarimaOrder(D=2)
    with pytest.raises(ValueError):
        OrderBounds(q=(0, 6))


def test_forecast_examples():
    mean = manual(SarimaOrder(), intercept=5.0)
    np.testing.assert_array_equal(forecast_sarima(mean, 3), [5, 5, 5])
    ar = manual(SarimaOrder(p=1), ar=(0.5,), w=(8,))
    np.testing.assert_allclose(forecast_sarima(ar, 3), [4, 2, 1], atol=1e-12)
    neg = manual(SarimaOrder(), intercept=-3.0)
    np.testing.assert_array_equal(forecast_sarima(neg, 2), [0, 0])
    with pytest.raises(StateError):
        forecast_sarima(SarimaModel(SarimaOrder(), (), (), (), (), 0, 1, 0, 0, 1), 2)
    with pytest.raises(InvalidHorizonError):
        forecast_sarima(mean, 0)


@given(st.lists(st.floats(0, 500), min_size=15, max_size=60))
@settings(max_examples=30, deadline=None)
def test_random_walk_forecast_is_flat(vals):
    m = fit_sarima(vals, SarimaOrder(d=1))
    assert np.all(forecast_sarima(m, 24) == vals[-1])


def test_seasonal_forecast_repeats_last_day():
    y = np.tile(np.random.default_rng(3).uniform(10, 50, 24), 5)
    m = fit_sarima(y, SarimaOrder(D=1))
    np.testing.assert_allclose(forecast_sarima(m, 24), y[-24:], atol=1e-9)


def test_differencing_choice():
    ar = simulate_arma(500, phi=0.7, seed=21) + 30
    assert choose_differencing(ar, OrderBounds())[0] == 0
    t = np.arange(500)
    trend = 0.5 * t + np.random.default_rng(0).normal(0, 2, 500)
    assert choose_differencing(trend, OrderBounds())[0] >= 1


def test_grid_search_on_ar1():
    y = simulate_arma(300, phi=0.7, seed=5) + 30
    res = grid_search(y, OrderBounds(P=(0, 0), Q=(0, 0), D=(0, 0)))
    assert res.best.order.d == 0 and res.best.order.p >= 1
    assert all(res.best.aic <= a for a in res.aic_table.values())
    assert res.evaluated == len(res.aic_table)


def test_grid_search_on_trend():
    t = np.arange(200)
    y = 0.5 * t + np.random.default_rng(1).normal(0, 2, 200)
    res = grid_search(y, OrderBounds(P=(0, 0), Q=(0, 0), D=(0, 0)))
    assert res.best.order.d >= 1


def test_grid_search_single_order():
    y = simulate_arma(200, phi=0.5, seed=2) + 30
    o = SarimaOrder(p=2, q=1)
    res = grid_search(y, OrderBounds.single(o))
    assert res.evaluated == 1 and res.best.order == o


def test_grid_search_seasonal_window():
    y = simulate_arma(120, phi=0.6, seed=9) + 20 + 8 * np.sin(2 * np.pi * np.arange(120) / 24)
    res = grid_search(y)
    assert all(res.best.aic <= a for a in res.aic_table.values())
    f = forecast_sarima(res.best, 24)
    assert f.shape == (24,) and np.all(np.isfinite(f)) and np.all(f >= 0)
