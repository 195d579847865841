import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from aqforecast.errors import EmptyInputError, ShapeError
from aqforecast.metrics import ErrorSummary, Stopwatch, mean_of, rmse


def test_rmse_examples():
    assert rmse([1, 2, 3], [1, 2, 3]).rmse == 0.0
    # sqrt((9 + 16) / 2) and sqrt(4 / 3), evaluated by hand
    assert rmse([0, 0], [3, 4]).rmse == pytest.approx(3.5355339059327378, abs=1e-12)
    assert rmse([1, 2, 3], [1, 2, 5]).rmse == pytest.approx(1.1547005383792515, abs=1e-12)
    assert rmse([0, 0], [3, 4]).n == 2


def test_rmse_errors():
    with pytest.raises(ShapeError):
        rmse([1, 2], [1])
    with pytest.raises(EmptyInputError):
        rmse([], [])


def test_mean_of():
    assert mean_of([ErrorSummary(2.0, 1), ErrorSummary(4.0, 1)]) == 3.0
    assert mean_of([ErrorSummary(5.0, 3)]) == 5.0
    assert mean_of([ErrorSummary(1.0, 1)] * 100) == 1.0
    with pytest.raises(EmptyInputError):
        mean_of([])


finite = st.floats(-1e6, 1e6)
pairs = st.lists(st.tuples(finite, finite), min_size=1, max_size=50)


@given(pairs, st.floats(-100, 100), st.randoms())
def test_rmse_properties(data, c, rnd):
    p, a = map(np.array, zip(*data))
    base = rmse(p, a).rmse
    assert base >= 0
    assert rmse(p, p).rmse == 0
    assert rmse(c * p, c * a).rmse == pytest.approx(abs(c) * base, rel=1e-9, abs=1e-6)
    order = list(range(len(p)))
    rnd.shuffle(order)
    assert rmse(p[order], a[order]).rmse == pytest.approx(base, rel=1e-12, abs=1e-9)


def test_stopwatch_rounds_to_milliseconds():
    sw = Stopwatch()
    with sw.running():
        pass
    assert sw.elapsed >= 0 and math.isclose(sw.elapsed * 1000, round(sw.elapsed * 1000))
