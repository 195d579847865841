"""Exponential smoothing: simple, Holt linear trend, additive Holt-Winters.

Smoothing weights are chosen by minimizing the one-step-ahead in-sample
SSE: an exhaustive 0.1-step grid over the free weights, then Nelder-Mead
started from the best grid point.
"""

from __future__ import annotations

import enum
import itertools
import time
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.optimize import minimize

from .errors import InsufficientDataError, InvalidHorizonError
from .series import TimeSeries

GRID = np.round(np.linspace(0.0, 1.0, 11), 10)
NM_XATOL = 1e-6
NM_MAXITER = 500


class EsKind(str, enum.Enum):
    SIMPLE = "simple"
    HOLT = "holt"
    HOLT_WINTERS = "hw"


@dataclass(frozen=True)
class EsVariant:
    kind: EsKind = EsKind.HOLT_WINTERS
    season_length: int = 24

    def __post_init__(self):
        object.__setattr__(self, "kind", EsKind(self.kind))
        if self.season_length < 1:
            raise ValueError("season_length must be positive")
        if self.kind is EsKind.HOLT_WINTERS and self.season_length != 24:
            raise ValueError("Holt-Winters uses a 24 hour season")

    @property
    def weights(self) -> tuple[str, ...]:
        return {
            EsKind.SIMPLE: ("alpha",),
            EsKind.HOLT: ("alpha", "beta"),
            EsKind.HOLT_WINTERS: ("alpha", "beta", "gamma"),
        }[self.kind]

    @property
    def min_length(self) -> int:
        if self.kind is EsKind.HOLT_WINTERS:
            return 2 * self.season_length
        return 2 if self.kind is EsKind.SIMPLE else 3


@dataclass(frozen=True)
class EsParams:
    alpha: float
    beta: float = 0.0
    gamma: float = 0.0
    initial_level: float = 0.0
    initial_trend: float = 0.0
    initial_season: tuple[float, ...] = ()


@dataclass(frozen=True)
class EsModel:
    variant: EsVariant
    params: EsParams
    level: float
    trend: float
    season: tuple[float, ...]
    n_obs: int
    train_sse: float
    grid_seconds: float = 0.0
    refine_seconds: float = 0.0
    probes: int = field(default=0, compare=False)

    @property
    def final_state(self) -> tuple[float, float, tuple[float, ...]]:
        return self.level, self.trend, self.season


def initial_state(y: np.ndarray, variant: EsVariant) -> tuple[float, float, np.ndarray]:
    """Level from the first season's mean, trend from first differences,
    season from the first season's (mean-centred) hourly deviations."""
    m = variant.season_length
    head = y[: min(m, y.size)]
    level = float(head.mean())
    trend = 0.0
    season = np.zeros(m)
    if variant.kind is not EsKind.SIMPLE:
        # one full period of differences cancels an additive season
        trend = float(np.diff(y[: min(m + 1, y.size)]).mean())
    if variant.kind is EsKind.HOLT_WINTERS:
        season = y[:m] - level
    return level, trend, season


def sse_grid(
    y: np.ndarray,
    variant: EsVariant,
    alpha: np.ndarray,
    beta: np.ndarray,
    gamma: np.ndarray,
    init: tuple[float, float, np.ndarray],
) -> np.ndarray:
    """One-step SSE for many weight triples at once (vectorized over triples)."""
    k = alpha.size
    level = np.full(k, init[0])
    trend = np.full(k, init[1])
    season = np.tile(np.asarray(init[2], dtype=np.float64), (k, 1))
    m = variant.season_length
    sse = np.zeros(k)
    kind = variant.kind
    for t in range(y.size):
        yt = y[t]
        if kind is EsKind.SIMPLE:
            e = yt - level
            level = level + alpha * e
        elif kind is EsKind.HOLT:
            f = level + trend
            e = yt - f
            new_level = f + alpha * e
            trend = trend + beta * (new_level - level - trend)
            level = new_level
        else:
            j = t % m
            f = level + trend + season[:, j]
            e = yt - f
            new_level = level + trend + alpha * e
            season[:, j] = season[:, j] + gamma * e
            trend = trend + beta * (new_level - level - trend)
            level = new_level
        sse += e * e
    return sse


def _run(y, variant: EsVariant, alpha, beta, gamma, init):
    """Scalar recurrence; returns (sse, level, trend, season list)."""
    level, trend = float(init[0]), float(init[1])
    season = [float(v) for v in init[2]]
    m = variant.season_length
    kind = variant.kind
    sse = 0.0
    for t, yt in enumerate(y.tolist()):
        if kind is EsKind.SIMPLE:
            e = yt - level
            level = level + alpha * e
        elif kind is EsKind.HOLT:
            f = level + trend
            e = yt - f
            new_level = f + alpha * e
            trend = trend + beta * (new_level - level - trend)
            level = new_level
        else:
            j = t % m
            f = level + trend + season[j]
            e = yt - f
            new_level = level + trend + alpha * e
            season[j] = season[j] + gamma * e
            trend = trend + beta * (new_level - level - trend)
            level = new_level
        sse += e * e
    return sse, level, trend, season


def sse_at(y: np.ndarray, variant: EsVariant, params: EsParams) -> float:
    init = (params.initial_level, params.initial_trend,
            np.asarray(params.initial_season or np.zeros(variant.season_length)))
    return _run(np.asarray(y, dtype=np.float64), variant,
                params.alpha, params.beta, params.gamma, init)[0]


def fit_es(
    train: TimeSeries,
    variant: EsVariant = EsVariant(),
    fixed: Mapping[str, float] | None = None,
) -> EsModel:
    """Fit smoothing weights by grid search plus Nelder-Mead refinement.

    ``fixed`` pins any of ``alpha``, ``beta``, ``gamma``, ``initial_level``
    or ``initial_trend``; pinned weights are excluded from the search.
    """
    y = np.asarray(train.values, dtype=np.float64)
    if np.isnan(y).any():
        raise ValueError("fit_es needs a gap-free series")
    if y.size < variant.min_length:
        raise InsufficientDataError(
            f"{variant.kind.value} needs at least {variant.min_length} points, got {y.size}"
        )
    fixed = dict(fixed or {})
    unknown = set(fixed) - {"alpha", "beta", "gamma", "initial_level", "initial_trend"}
    if unknown:
        raise ValueError(f"cannot fix {sorted(unknown)}")
    level0, trend0, season0 = initial_state(y, variant)
    level0 = float(fixed.get("initial_level", level0))
    trend0 = float(fixed.get("initial_trend", trend0))
    init = (level0, trend0, season0)

    weights = {"alpha": 0.0, "beta": 0.0, "gamma": 0.0}
    weights.update({k: float(v) for k, v in fixed.items() if k in weights})
    free = [w for w in variant.weights if w not in fixed]

    t0 = time.perf_counter()
    probes = 1
    if free:
        combos = np.array(list(itertools.product(GRID, repeat=len(free))))
        cols = {w: np.full(len(combos), weights[w]) for w in weights}
        for i, w in enumerate(free):
            cols[w] = combos[:, i]
        sse = sse_grid(y, variant, cols["alpha"], cols["beta"], cols["gamma"], init)
        best = int(np.argmin(sse))
        for i, w in enumerate(free):
            weights[w] = float(combos[best, i])
        probes = len(combos)
    t1 = time.perf_counter()

    def objective(x):
        w = dict(weights)
        for i, name in enumerate(free):
            w[name] = min(1.0, max(0.0, float(x[i])))
        return _run(y, variant, w["alpha"], w["beta"], w["gamma"], init)[0]

    best_sse = _run(y, variant, weights["alpha"], weights["beta"], weights["gamma"], init)[0]
    if free:
        x0 = np.array([weights[w] for w in free])
        simplex = [x0]
        for i in range(len(free)):
            v = x0.copy()
            v[i] += 0.05 if v[i] <= 0.5 else -0.05
            simplex.append(v)
        res = minimize(
            objective, x0, method="Nelder-Mead",
            options={"initial_simplex": np.array(simplex), "xatol": NM_XATOL,
                     "fatol": np.inf, "maxiter": NM_MAXITER},
        )
        if res.fun < best_sse:
            for i, w in enumerate(free):
                weights[w] = min(1.0, max(0.0, float(res.x[i])))
    sse, level, trend, season = _run(
        y, variant, weights["alpha"], weights["beta"], weights["gamma"], init
    )
    t2 = time.perf_counter()

    params = EsParams(
        alpha=weights["alpha"],
        beta=weights["beta"] if "beta" in variant.weights else 0.0,
        gamma=weights["gamma"] if "gamma" in variant.weights else 0.0,
        initial_level=level0,
        initial_trend=trend0 if variant.kind is not EsKind.SIMPLE else 0.0,
        initial_season=tuple(float(v) for v in season0)
        if variant.kind is EsKind.HOLT_WINTERS else (),
    )
    return EsModel(
        variant=variant,
        params=params,
        level=level,
        trend=trend if variant.kind is not EsKind.SIMPLE else 0.0,
        season=tuple(season) if variant.kind is EsKind.HOLT_WINTERS else (),
        n_obs=int(y.size),
        train_sse=float(sse),
        grid_seconds=t1 - t0,
        refine_seconds=t2 - t1,
        probes=probes,
    )


def forecast_es(model: EsModel, horizon: int) -> np.ndarray:
    if horizon < 1:
        raise InvalidHorizonError(f"horizon must be >= 1, got {horizon}")
    h = np.arange(1, horizon + 1, dtype=np.float64)
    kind = model.variant.kind
    if kind is EsKind.SIMPLE:
        out = np.full(horizon, model.level)
    elif kind is EsKind.HOLT:
        out = model.level + h * model.trend
    else:
        m = model.variant.season_length
        idx = (model.n_obs - 1 + np.arange(1, horizon + 1)) % m
        out = model.level + h * model.trend + np.asarray(model.season)[idx]
    return np.maximum(out, 0.0)
