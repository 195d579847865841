"""Rolling-origin evaluation, training-interval sweeps and method comparison.

Window origins are anchored at the end of the series: the last window's
actuals end on the final observation and earlier origins step back by
``stride``.  Origins therefore depend only on (series, horizon, stride,
window_count), so methods with different training lengths are scored on
exactly the same actuals.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EmptyInputError, InsufficientDataError
from .es import EsVariant, fit_es, forecast_es
from .lstm import LstmHyperParams, NetworkConfig, forecast_lstm, train
from .metrics import mean_of, rmse
from .sarima import OrderBounds, SarimaOrder, fit_sarima, forecast_sarima, grid_search
from .series import TimeSeries, window_at

ES_CANDIDATES = (48, 72, 96, 120, 144, 168, 196)
SARIMA_CANDIDATES = (72, 96, 120, 144, 168, 196, 220)
SWEEP_HORIZON = 24


@dataclass(frozen=True)
class RollingSpec:
    train_len: int = 96
    horizon: int = 24
    stride: int = 1
    window_count: int = 48
    seed: int = 42

    def __post_init__(self):
        if self.train_len < 1:
            raise ValueError("train_len must be >= 1")
        if not 1 <= self.horizon <= 24:
            raise ValueError("horizon must lie in 1..24")
        if self.stride < 1 or self.window_count < 1:
            raise ValueError("stride and window_count must be >= 1")


# --------------------------------------------------------------------------
# methods

@dataclass(frozen=True)
class EsMethod:
    variant: EsVariant = EsVariant()
    fixed: tuple[tuple[str, float], ...] = ()
    default_train_len: int = 96
    name: str = "ES"
    refit: bool = True

    def build(self, train: TimeSeries, seed: int):
        return fit_es(train, self.variant, dict(self.fixed))

    def predict(self, model, history: TimeSeries, horizon: int) -> np.ndarray:
        return forecast_es(model, horizon)


@dataclass(frozen=True)
class SarimaMethod:
    bounds: OrderBounds = OrderBounds()
    order: SarimaOrder | None = None
    default_train_len: int = 120
    name: str = "SARIMA"
    refit: bool = True

    def build(self, train: TimeSeries, seed: int):
        if self.order is not None:
            return fit_sarima(train, self.order)
        return grid_search(train, self.bounds).best

    def predict(self, model, history: TimeSeries, horizon: int) -> np.ndarray:
        return forecast_sarima(model, horizon)


@dataclass(frozen=True)
class LstmMethod:
    """LSTM; by default trained once at the first origin and slid across windows."""

    config: NetworkConfig = NetworkConfig()
    hyper: LstmHyperParams = LstmHyperParams()
    retrain: bool = False
    name: str = "LSTM"

    @property
    def default_train_len(self) -> int:
        return self.hyper.train_size

    @property
    def refit(self) -> bool:
        return self.retrain

    def build(self, train_: TimeSeries, seed: int):
        return train(train_, self.config, replace(self.hyper, seed=seed))

    def predict(self, model, history: TimeSeries, horizon: int) -> np.ndarray:
        return forecast_lstm(model, history, horizon)


def default_method(name: str):
    key = name.strip().lower()
    if key == "es":
        return EsMethod()
    if key in ("arima", "sarima"):
        return SarimaMethod()
    if key == "lstm":
        return LstmMethod()
    raise ValueError(f"unknown method {name!r}")


def default_candidates(method) -> tuple[int, ...]:
    if method.name == "ES":
        return ES_CANDIDATES
    if method.name == "SARIMA":
        return SARIMA_CANDIDATES
    raise ValueError(f"no default training-interval candidates for {method.name}")


# --------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class WindowResult:
    origin: int
    predictions: np.ndarray
    actuals: np.ndarray
    build_seconds: float
    predict_seconds: float


@dataclass(frozen=True)
class RollingReport:
    method: str
    per_horizon_rmse: dict[int, float]
    mean_rmse: float
    mean_build_seconds: float
    mean_predict_seconds: float
    window_count: int
    builds: int
    train_len: int
    origins: tuple[int, ...]
    windows: tuple[WindowResult, ...] = field(default=(), compare=False, repr=False)

    @property
    def mean_total_seconds(self) -> float:
        return self.mean_build_seconds + self.mean_predict_seconds


@dataclass(frozen=True)
class SweepReport:
    method: str
    rows: dict[int, float]
    best_train_len: int


@dataclass(frozen=True)
class Comparison:
    reports: tuple[RollingReport, ...]

    @property
    def table(self) -> list[tuple[str, int, float, float, float]]:
        """Rows ``(method, horizon, rmse, build_s, predict_s)``, one per method and horizon."""
        rows = []
        for r in self.reports:
            for h, v in sorted(r.per_horizon_rmse.items()):
                rows.append((r.method, h, v, r.mean_build_seconds, r.mean_predict_seconds))
        return rows


# --------------------------------------------------------------------------
# evaluation

def derive_seed(master: int, origin: int) -> int:
    """Per-window seed that depends only on (master seed, origin)."""
    state = np.random.SeedSequence([master % 2**63, origin % 2**63]).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


def window_origins(series: TimeSeries, horizon: int, stride: int, window_count: int) -> list[int]:
    last = series.end - horizon
    return [last - stride * k for k in range(window_count - 1, -1, -1)]


def _check_feasible(series: TimeSeries, origins: Sequence[int], train_len: int) -> None:
    if not series.is_gap_free():
        raise ValueError("rolling evaluation needs a gap-free series; interpolate first")
    if origins[0] - train_len < series.start:
        raise InsufficientDataError(
            f"{len(origins)} windows with train_len {train_len} need "
            f"{series.end - origins[0] + train_len} hours, series has {len(series)}"
        )


def _run_window(method, series: TimeSeries, origin: int, train_len: int, horizon: int,
                seed: int, model=None) -> WindowResult:
    train_, actual = window_at(series, origin, train_len, horizon)
    build = 0.0
    if model is None:
        t0 = time.perf_counter()
        model = method.build(train_, derive_seed(seed, origin))
        build = time.perf_counter() - t0
    t0 = time.perf_counter()
    pred = np.asarray(method.predict(model, train_, horizon), dtype=np.float64)
    predict = time.perf_counter() - t0
    return WindowResult(origin, pred, np.array(actual.values), build, predict)


def _run_chunk(args) -> list[WindowResult]:
    method, series, origins, train_len, horizon, seed = args
    return [_run_window(method, series, o, train_len, horizon, seed) for o in origins]


def _summarize(method_name: str, results: Sequence[WindowResult], train_len: int,
               horizon: int, builds: int, build_total: float) -> RollingReport:
    per_h = {}
    for h in range(horizon):
        per_h[h + 1] = mean_of(rmse([w.predictions[h]], [w.actuals[h]]) for w in results)
    overall = mean_of(rmse(w.predictions, w.actuals) for w in results)
    return RollingReport(
        method=method_name,
        per_horizon_rmse=per_h,
        mean_rmse=overall,
        mean_build_seconds=build_total / builds,
        mean_predict_seconds=sum(w.predict_seconds for w in results) / len(results),
        window_count=len(results),
        builds=builds,
        train_len=train_len,
        origins=tuple(w.origin for w in results),
        windows=tuple(results),
    )


def rolling_evaluate(series: TimeSeries, method, spec: RollingSpec = RollingSpec(),
                     jobs: int = 1, origins: Sequence[int] | None = None) -> RollingReport:
    """Slide the forecast origin, rebuild, forecast ``spec.horizon`` steps, score.

    Per-horizon RMSE is computed inside each window and then averaged over
    windows.  Windows run in ``jobs`` worker processes when ``jobs > 1``;
    results are gathered in origin order so the report does not depend on
    scheduling.
    """
    if origins is None:
        origins = window_origins(series, spec.horizon, spec.stride, spec.window_count)
    origins = list(origins)
    _check_feasible(series, origins, spec.train_len)
    args = (method, series, spec.train_len, spec.horizon, spec.seed)

    if not method.refit:
        first, _ = window_at(series, origins[0], spec.train_len, spec.horizon)
        t0 = time.perf_counter()
        model = method.build(first, derive_seed(spec.seed, origins[0]))
        build_total = time.perf_counter() - t0
        results = [_run_window(method, series, o, spec.train_len, spec.horizon, spec.seed, model)
                   for o in origins]
        return _summarize(method.name, results, spec.train_len, spec.horizon, 1, build_total)

    if jobs > 1 and len(origins) > 1:
        chunks = [origins[i::jobs] for i in range(min(jobs, len(origins)))]
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(_run_chunk, [(method, series, c) + args[2:] for c in chunks]))
        results = sorted((w for part in parts for w in part), key=lambda w: w.origin)
    else:
        results = _run_chunk((method, series, origins) + args[2:])
    build_total = sum(w.build_seconds for w in results)
    return _summarize(method.name, results, spec.train_len, spec.horizon, len(results), build_total)


def best_of(rows: Mapping[int, float]) -> int:
    """Argmin over training lengths; ties go to the shorter length."""
    return min(rows, key=lambda k: (rows[k], k))


def sweep_training_interval(series: TimeSeries, method, candidate_lens: Iterable[int] | None = None,
                            spec: RollingSpec = RollingSpec(), jobs: int = 1) -> SweepReport:
    lens = list(default_candidates(method) if candidate_lens is None else candidate_lens)
    if not lens:
        raise EmptyInputError("no candidate training lengths")
    rows = {}
    for n in lens:
        s = replace(spec, train_len=n, horizon=SWEEP_HORIZON)
        rows[n] = rolling_evaluate(series, method, s, jobs=jobs).mean_rmse
    return SweepReport(method.name, rows, best_of(rows))


def compare_methods(series: TimeSeries, methods: Sequence, spec: RollingSpec = RollingSpec(),
                    train_lens: Mapping[str, int] | None = None, jobs: int = 1) -> Comparison:
    """Evaluate every method on one shared set of window origins."""
    if not methods:
        raise EmptyInputError("no methods to compare")
    train_lens = dict(train_lens or {})
    origins = window_origins(series, spec.horizon, spec.stride, spec.window_count)
    reports = []
    for m in methods:
        n = train_lens.get(m.name, getattr(m, "default_train_len", spec.train_len))
        reports.append(rolling_evaluate(series, m, replace(spec, train_len=n), jobs, origins))
    assert all(r.origins == reports[0].origins for r in reports)
    return Comparison(tuple(reports))


# --------------------------------------------------------------------------
# serialization

def _g(x: float) -> str:
    return f"{x:.6g}"


def write_report_csv(comparison: Comparison, path, timings: bool = True) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "horizon", "rmse", "build_s", "predict_s"])
        for method, h, v, b, p in comparison.table:
            w.writerow([method, h, _g(v), f"{b:.3f}" if timings else "",
                        f"{p:.3f}" if timings else ""])


def write_plot_csv(comparison: Comparison, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "horizon", "rmse"])
        for method, h, v, _, _ in comparison.table:
            w.writerow([method, h, _g(v)])


def write_sweep_csv(sweeps: Iterable[SweepReport], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "train_len", "rmse"])
        for s in sweeps:
            for n, v in s.rows.items():
                w.writerow([s.method, n, _g(v)])


def read_sweep_csv(path) -> dict[str, dict[int, float]]:
    out: dict[str, dict[int, float]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.setdefault(row["method"], {})[int(row["train_len"])] = float(row["rmse"])
    return out
