import numpy as np
from hypothesis import given, settings, strategies as st

from aqforecast.synth import SynthSpec, generate


def test_noiseless_formula():
    spec = SynthSpec(hours=500, noise_sd=0, ar_coeff=0, seed=3)
    t = np.arange(500)
    want = np.maximum(30 + 12 * np.sin(2 * np.pi * t / 24) + 6 * np.sin(2 * np.pi * t / 168), 0)
    np.testing.assert_allclose(generate(spec).values, want, rtol=0, atol=1e-12)


def test_same_seed_same_series():
    a, b = generate(SynthSpec(hours=1000, seed=5)), generate(SynthSpec(hours=1000, seed=5))
    assert a.values.tobytes() == b.values.tobytes() and a.start == b.start
    assert generate(SynthSpec(hours=1000, seed=6)).values.tobytes() != a.values.tobytes()


def test_missing_rate_concentrates():
    s = generate(SynthSpec(hours=10_000, missing_rate=0.1, seed=1))
    assert abs(s.n_missing / 10_000 - 0.1) < 0.01


def test_noiseless_mean_is_base():
    s = generate(SynthSpec(hours=10_080, noise_sd=0, ar_coeff=0))
    assert abs(s.values.mean() - 30) < 0.1


@given(st.integers(1, 400), st.floats(0, 100), st.floats(0, 50), st.floats(0, 50),
       st.floats(-0.99, 0.99), st.floats(0, 20), st.floats(0, 0.99), st.integers(0, 2**63 - 1))
@settings(max_examples=60, deadline=None)
def test_output_is_a_valid_series(hours, base, d_amp, w_amp, ar, sd, miss, seed):
    s = generate(SynthSpec(hours, base, d_amp, w_amp, ar, sd, miss, seed))
    assert len(s) == hours
    present = s.values[~np.isnan(s.values)]
    assert np.all(np.isfinite(present)) and np.all(present >= 0)
