import numpy as np
import pytest

from aqforecast.series import TimeSeries


def simulate_arma(n, phi=0.0, theta=0.0, seed=0, burn=200, mean=0.0):
    """Plain-loop ARMA(1,1) simulator, independent of the estimation code."""
    rng = np.random.default_rng(seed)
    e = rng.normal(size=n + burn)
    x = np.zeros(n + burn)
    for t in range(1, n + burn):
        x[t] = phi * x[t - 1] + e[t] + theta * e[t - 1]
    return x[burn:] + mean


def as_series(values, start=0):
    return TimeSeries(start, np.asarray(values, dtype=float))


@pytest.fixture
def ar1_series():
    return simulate_arma(500, phi=0.7, seed=11)
