"""Acceptance criteria, one test per criterion.

Each test prints a single ``CRITERION n: PASS|FAIL`` line (shown even
without ``-s``) before asserting.
"""

import csv
import time

import numpy as np
import pytest
from scipy.stats import spearmanr

from aqforecast.cli import main
from aqforecast.es import GRID, EsKind, EsVariant, fit_es, forecast_es, initial_state, sse_grid
from aqforecast.harness import (
    ES_CANDIDATES,
    SARIMA_CANDIDATES,
    EsMethod,
    LstmMethod,
    RollingSpec,
    SarimaMethod,
    best_of,
    compare_methods,
    read_sweep_csv,
    rolling_evaluate,
    sweep_training_interval,
    write_sweep_csv,
)
from aqforecast.lstm import NetworkConfig, NetworkKind, SupervisedBatch, gradient_check, init_weights
from aqforecast.lstm import LstmHyperParams, LstmModel
from aqforecast.metrics import rmse
from aqforecast.sarima import (
    SarimaOrder,
    difference,
    fit_sarima,
    forecast_sarima,
    grid_search,
    undifference,
)
from aqforecast.series import TimeSeries, window_at
from aqforecast.synth import SynthSpec, generate
from conftest import simulate_arma


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {number}: {'PASS' if ok else 'FAIL'} - {detail}")
        assert ok, detail
    return emit


def test_criterion_1_sarima_oracle_recovery(verdict):
    coeffs, slowest = [], 0.0
    for seed in range(20):
        y = simulate_arma(500, phi=0.7, seed=1000 + seed)
        t0 = time.perf_counter()
        m = fit_sarima(y, SarimaOrder(p=1))
        slowest = max(slowest, time.perf_counter() - t0)
        coeffs.append(m.ar_coeffs[0])
    coeffs = np.array(coeffs)
    ok = (abs(coeffs.mean() - 0.7) <= 0.05 and np.all(np.abs(coeffs - 0.7) <= 0.15)
          and slowest < 5.0)
    verdict(1, ok, f"mean phi {coeffs.mean():.4f}, range [{coeffs.min():.3f}, {coeffs.max():.3f}], "
                   f"slowest fit {slowest:.3f}s")


def test_criterion_2_differencing_round_trip(verdict):
    rng = np.random.default_rng(2024)
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(1000):
        d, D = int(rng.integers(0, 3)), int(rng.integers(0, 2))
        r = d + 24 * D
        x = rng.normal(0, rng.uniform(0.1, 100), r + int(rng.integers(1, 120)))
        back = undifference(difference(x, d, D), x[:r], d, D)
        worst = max(worst, float(np.max(np.abs(back - x[r:]))))
    elapsed = time.perf_counter() - t0
    verdict(2, worst <= 1e-9 and elapsed < 1.0, f"max error {worst:.2e}, {elapsed:.3f}s for 1000 cases")


def test_criterion_3_gradient_check(verdict):
    t0 = time.perf_counter()
    errors = {}
    for i, kind in enumerate(NetworkKind):
        cfg = NetworkConfig(kind)
        rng = np.random.default_rng(300 + i)
        model = LstmModel(cfg, init_weights(cfg, 2, rng), (0.0, 1.0), LstmHyperParams(window_len=4))
        batch = SupervisedBatch(rng.random((6, 4)), rng.random(6))
        errors[kind.value] = gradient_check(model, batch)
    elapsed = time.perf_counter() - t0
    ok = max(errors.values()) < 1e-4 and elapsed < 30.0
    detail = ", ".join(f"{k} {v:.1e}" for k, v in errors.items())
    verdict(3, ok, f"{detail}; {elapsed:.2f}s")


@pytest.fixture(scope="module")
def headline():
    """The default three-way comparison on the default synthetic series."""
    series = generate(SynthSpec())
    t0 = time.perf_counter()
    result = compare_methods(series, [EsMethod(), SarimaMethod(), LstmMethod()],
                             RollingSpec(window_count=48, seed=42))
    return result, time.perf_counter() - t0


@pytest.mark.slow
def test_criterion_4_rmse_grows_with_horizon(verdict, headline):
    result, elapsed = headline
    parts, grows, ranked = [], True, True
    for r in result.reports:
        h = sorted(r.per_horizon_rmse)
        v = [r.per_horizon_rmse[k] for k in h]
        rho = spearmanr(h, v).statistic
        grows = grows and v[-1] > v[0]
        ranked = ranked and rho > 0.8
        parts.append(f"{r.method} h1 {v[0]:.3f} h24 {v[-1]:.3f} rho {rho:.3f}")
    fast = elapsed < 30 * 60
    checks = f"h24>h1 {'ok' if grows else 'no'}, rho>0.8 {'ok' if ranked else 'no'}, " \
             f"runtime {elapsed:.0f}s {'ok' if fast else 'no'}"
    verdict(4, grows and ranked and fast, checks + "; " + "; ".join(parts))


@pytest.mark.slow
def test_criterion_5_lstm_is_slower(verdict, headline):
    result, _ = headline
    t = {r.method: r.mean_total_seconds for r in result.reports}
    ratios = {m: t["LSTM"] / t[m] for m in ("ES", "SARIMA")}
    ok = all(v >= 10 for v in ratios.values())
    verdict(5, ok, ", ".join(f"{m} {t[m]:.3f}s" for m in t)
            + "; LSTM/ES {ES:.0f}x, LSTM/SARIMA {SARIMA:.0f}x".format(**ratios))


@pytest.mark.slow
def test_criterion_6_sweep_argmin(verdict, tmp_path):
    series = generate(SynthSpec())
    reports = [
        sweep_training_interval(series, EsMethod(), ES_CANDIDATES, RollingSpec(window_count=48)),
        sweep_training_interval(series, SarimaMethod(), SARIMA_CANDIDATES, RollingSpec(window_count=4)),
    ]
    path = tmp_path / "sweep.csv"
    write_sweep_csv(reports, path)
    table = read_sweep_csv(path)
    ok = True
    parts = []
    for rep in reports:
        rows = table[rep.method]
        ok = ok and tuple(rows) == tuple(rep.rows) and best_of(rows) == rep.best_train_len
        parts.append(f"{rep.method} best {rep.best_train_len} h (csv argmin {best_of(rows)})")
    ok = ok and tuple(table["ES"]) == ES_CANDIDATES and tuple(table["SARIMA"]) == SARIMA_CANDIDATES
    verdict(6, ok, "; ".join(parts))


def test_criterion_7_single_window_equivalence(verdict):
    series = generate(SynthSpec(hours=2000))
    origin = series.end - 24
    checks = {}
    train, actual = window_at(series, origin, 96, 24)
    es_pred = forecast_es(fit_es(train, EsVariant()), 24)
    r = rolling_evaluate(series, EsMethod(), RollingSpec(train_len=96, window_count=1))
    checks["ES"] = (r.windows[0].predictions.tobytes() == es_pred.tobytes()
                    and r.mean_rmse == rmse(es_pred, actual.values).rmse)

    train, actual = window_at(series, origin, 120, 24)
    best = grid_search(train, SarimaMethod().bounds).best
    sa_pred = forecast_sarima(best, 24)
    r = rolling_evaluate(series, SarimaMethod(), RollingSpec(train_len=120, window_count=1))
    checks["SARIMA"] = (r.windows[0].predictions.tobytes() == sa_pred.tobytes()
                        and r.mean_rmse == rmse(sa_pred, actual.values).rmse)
    verdict(7, all(checks.values()), ", ".join(f"{k} {'bit-exact' if v else 'differs'}"
                                               for k, v in checks.items()))


@pytest.mark.slow
def test_criterion_8_parallel_determinism(verdict, tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text("""
[synth]
hours = 1200
[rolling]
windows = 8
[lstm]
window_len = 6
train_size = 400
validation_hours = 48
epochs_max = 4
""")
    outputs = {}
    for jobs in (1, 8):
        for rep in range(3):
            out = tmp_path / f"j{jobs}_r{rep}"
            code = main(["compare", "--config", str(cfg), "--jobs", str(jobs), "--out-dir", str(out)])
            assert code == 0
            outputs[(jobs, rep)] = ((out / "report.csv").read_bytes(),
                                    (out / "horizon_rmse.csv").read_bytes())
    distinct = set(outputs.values())
    n_rows = len(list(csv.reader(outputs[(1, 0)][0].decode().splitlines()))) - 1
    verdict(8, len(distinct) == 1 and n_rows == 72,
            f"{len(outputs)} runs, {len(distinct)} distinct output set(s), {n_rows} report rows")


def test_criterion_9_es_optimality(verdict):
    rng = np.random.default_rng(909)
    hw = EsVariant(EsKind.HOLT_WINTERS)
    combos = np.array(np.meshgrid(GRID, GRID, GRID, indexing="ij")).reshape(3, -1)
    worst = -np.inf
    for _ in range(50):
        n = int(rng.integers(48, 200))
        t = np.arange(n)
        y = (rng.uniform(5, 80) + rng.uniform(0, 20) * np.sin(2 * np.pi * t / 24 + rng.uniform(0, 6))
             + rng.normal(0, rng.uniform(0.1, 10), n))
        m = fit_es(TimeSeries(0, y), hw)
        probes = sse_grid(y, hw, *combos, initial_state(y, hw))
        assert probes.size == 11 ** 3
        worst = max(worst, (m.train_sse - probes.min()) / probes.min())
    y = rng.uniform(0, 100, 40)
    last = forecast_es(fit_es(TimeSeries(0, y), EsVariant(EsKind.SIMPLE), {"alpha": 1.0}), 1)[0]
    ok = worst <= 0.0 and last == y[-1]
    verdict(9, ok, f"max relative excess over best grid probe {worst:.2e}; "
                   f"alpha=1 forecast {'equals' if last == y[-1] else 'differs from'} last value")
