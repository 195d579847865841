"""Seasonal ARIMA (p,d,q)(P,D,Q)_24 estimated by conditional sum of squares.

Polynomial conventions::

    phi(B)  = 1 - phi_1 B - ... - phi_p B^p          (AR)
    theta(B) = 1 + theta_1 B + ... + theta_q B^q     (MA)

and the seasonal polynomials likewise in ``B^s``.  With ``w = z - mu`` on the
differenced scale, residuals solve ``theta(B) Theta(B^s) e = phi(B) Phi(B^s) w``
with pre-sample residuals fixed at zero.  The mean ``mu`` is estimated only
when no differencing is applied; otherwise it is held at zero.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter

from .errors import (
    InsufficientDataError,
    InvalidHorizonError,
    NoModelError,
    StateError,
    StationarityError,
)
from .series import TimeSeries

SEASON = 24
TABLE3 = {"p": (0, 6), "d": (0, 2), "q": (0, 5), "P": (0, 3), "D": (0, 1), "Q": (0, 2)}
KPSS_CRITICAL_5PCT = 0.463
MIN_EXTRA_OBS = 10
SIGMA2_FLOOR = 1e-12


@dataclass(frozen=True, order=True)
class SarimaOrder:
    p: int = 0
    d: int = 0
    q: int = 0
    P: int = 0
    D: int = 0
    Q: int = 0
    s: int = SEASON

    def __post_init__(self):
        if self.s != SEASON:
            raise ValueError(f"seasonal period is fixed at {SEASON}")
        for name, (lo, hi) in TABLE3.items():
            v = getattr(self, name)
            if not lo <= v <= hi:
                raise ValueError(f"{name}={v} outside [{lo}, {hi}]")

    @property
    def n_coeffs(self) -> int:
        return self.p + self.q + self.P + self.Q

    @property
    def has_mean(self) -> bool:
        return self.d + self.D == 0

    @property
    def n_estimated(self) -> int:
        return self.n_coeffs + int(self.has_mean)

    @property
    def min_diff_length(self) -> int:
        return MIN_EXTRA_OBS + self.p + self.q + (self.P + self.Q) * self.s

    def __str__(self) -> str:
        return f"({self.p},{self.d},{self.q})({self.P},{self.D},{self.Q})[{self.s}]"


@dataclass(frozen=True)
class OrderBounds:
    """Inclusive (min, max) per order component; defaults are the Table 3 box."""

    p: tuple[int, int] = TABLE3["p"]
    d: tuple[int, int] = TABLE3["d"]
    q: tuple[int, int] = TABLE3["q"]
    P: tuple[int, int] = TABLE3["P"]
    D: tuple[int, int] = TABLE3["D"]
    Q: tuple[int, int] = TABLE3["Q"]

    def __post_init__(self):
        for name, (lo, hi) in TABLE3.items():
            a, b = getattr(self, name)
            if not lo <= a <= b <= hi:
                raise ValueError(f"bounds for {name} must satisfy {lo} <= min <= max <= {hi}")

    @classmethod
    def single(cls, order: SarimaOrder) -> "OrderBounds":
        return cls(**{k: (getattr(order, k),) * 2 for k in TABLE3})

    def clip(self, name: str, v: int) -> int:
        lo, hi = getattr(self, name)
        return min(hi, max(lo, v))


@dataclass(frozen=True)
class SarimaModel:
    order: SarimaOrder
    ar_coeffs: tuple[float, ...]
    ma_coeffs: tuple[float, ...]
    sar_coeffs: tuple[float, ...]
    sma_coeffs: tuple[float, ...]
    intercept: float
    sigma2: float
    css: float
    aic: float
    n_residuals: int
    train_tail: dict | None = field(default=None, compare=False, repr=False)

    @property
    def params(self) -> np.ndarray:
        return np.array(self.ar_coeffs + self.ma_coeffs + self.sar_coeffs
                        + self.sma_coeffs + (self.intercept,))


@dataclass(frozen=True)
class GridSearchResult:
    best: SarimaModel
    evaluated: int
    failed: int
    elapsed_seconds: float
    aic_table: dict = field(default_factory=dict, compare=False, repr=False)


# --------------------------------------------------------------------------
# differencing

def _diff_poly(d: int, D: int, s: int) -> np.ndarray:
    poly = np.array([1.0])
    for _ in range(d):
        poly = np.convolve(poly, [1.0, -1.0])
    seasonal = np.zeros(s + 1)
    seasonal[0], seasonal[s] = 1.0, -1.0
    for _ in range(D):
        poly = np.convolve(poly, seasonal)
    return poly


def difference(x: Sequence[float], d: int, D: int = 0, s: int = SEASON) -> np.ndarray:
    """Apply ``(1-B)^d (1-B^s)^D``; the output is ``d + D*s`` shorter."""
    x = np.asarray(x, dtype=np.float64)
    if d < 0 or D < 0:
        raise ValueError("difference orders must be non-negative")
    if x.size <= d + D * s:
        raise InsufficientDataError(f"length {x.size} too short for d={d}, D={D}, s={s}")
    for _ in range(D):
        x = x[s:] - x[:-s]
    for _ in range(d):
        x = x[1:] - x[:-1]
    return x


def undifference(
    forecast_diffs: Sequence[float], history: Sequence[float], d: int, D: int = 0, s: int = SEASON
) -> np.ndarray:
    """Invert :func:`difference` given the original series' trailing values."""
    z = np.asarray(forecast_diffs, dtype=np.float64)
    r = d + D * s
    hist = np.asarray(history, dtype=np.float64)
    if hist.size < r:
        raise InsufficientDataError(f"need {r} history values to undifference, got {hist.size}")
    if r == 0 or z.size == 0:
        return z.copy()
    # x_t = z_t - sum_{k>=1} delta_k x_{t-k}
    neg = -_diff_poly(d, D, s)[1:]
    buf = list(hist[hist.size - r:])
    out = np.empty(z.size)
    for i, zt in enumerate(z):
        # neg[k-1] multiplies x_{t-k}, so walk the buffer newest first
        v = zt + float(np.dot(neg, buf[::-1]))
        out[i] = v
        buf.append(v)
        del buf[0]
    return out


# --------------------------------------------------------------------------
# estimation

def _split_params(params: np.ndarray, order: SarimaOrder):
    p, q, P, Q = order.p, order.q, order.P, order.Q
    i = 0
    ar = params[i:i + p]; i += p
    ma = params[i:i + q]; i += q
    sar = params[i:i + P]; i += P
    sma = params[i:i + Q]; i += Q
    return ar, ma, sar, sma, params[i]


def _polys(ar, ma, sar, sma, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Full AR and MA lag polynomials (coefficient of B^k at index k)."""
    a = np.concatenate(([1.0], -np.asarray(ar, dtype=np.float64)))
    c = np.concatenate(([1.0], np.asarray(ma, dtype=np.float64)))
    if len(sar):
        sa = np.zeros(len(sar) * s + 1)
        sa[0] = 1.0
        sa[s::s] = -np.asarray(sar)
        a = np.convolve(a, sa)
    if len(sma):
        sc = np.zeros(len(sma) * s + 1)
        sc[0] = 1.0
        sc[s::s] = np.asarray(sma)
        c = np.convolve(c, sc)
    return a, c


def _residuals(params: np.ndarray, z: np.ndarray, order: SarimaOrder) -> np.ndarray:
    ar, ma, sar, sma, mu = _split_params(np.asarray(params, dtype=np.float64), order)
    a, c = _polys(ar, ma, sar, sma, order.s)
    t0 = a.size - 1
    w = z - mu
    u = np.convolve(w, a)[t0:z.size]
    return lfilter([1.0], c, u)


def css_objective(params: np.ndarray, z: np.ndarray, order: SarimaOrder) -> float:
    """Conditional sum of squared residuals; ``inf`` when anything overflows."""
    params = np.asarray(params, dtype=np.float64)
    if params.size != order.n_coeffs + 1:
        raise ValueError(f"expected {order.n_coeffs + 1} parameters, got {params.size}")
    with np.errstate(all="ignore"):
        e = _residuals(params, np.asarray(z, dtype=np.float64), order)
        val = float(np.dot(e, e))
    return val if math.isfinite(val) else math.inf


def _is_stationary(coeffs: Sequence[float]) -> bool:
    if len(coeffs) == 0:
        return True
    # roots of 1 - c1 z - ... - ck z^k must lie outside the unit circle
    poly = np.concatenate((-np.asarray(coeffs)[::-1], [1.0]))
    roots = np.roots(poly)
    return bool(np.all(np.abs(roots) > 1.0))


def fit_sarima(train: TimeSeries | Sequence[float], order: SarimaOrder) -> SarimaModel:
    """CSS fit by Nelder-Mead from zero coefficients."""
    y = np.asarray(train.values if isinstance(train, TimeSeries) else train, dtype=np.float64)
    if np.isnan(y).any():
        raise ValueError("fit_sarima needs a gap-free series")
    z = difference(y, order.d, order.D, order.s)
    if z.size < order.min_diff_length:
        raise InsufficientDataError(
            f"order {order} needs {order.min_diff_length} differenced points, have {z.size}"
        )
    k = order.n_coeffs
    mu0 = float(z.mean()) if order.has_mean else 0.0
    scale = float(z.std()) or 1.0

    if order.has_mean:
        def objective(x):
            return css_objective(x, z, order)
        x0 = np.zeros(k + 1)
        x0[-1] = mu0
        steps = np.full(k + 1, 0.1)
        steps[-1] = 0.1 * scale
    else:
        def objective(x):
            return css_objective(np.append(x, 0.0), z, order)
        x0 = np.zeros(k)
        steps = np.full(k, 0.1)

    if x0.size:
        simplex = np.vstack([x0, x0 + np.diag(steps)])
        res = minimize(
            objective, x0, method="Nelder-Mead",
            options={"initial_simplex": simplex, "xatol": 1e-6,
                     "fatol": 1e-10 * max(1.0, objective(x0)),
                     "maxiter": 400 * x0.size + 400, "maxfev": 600 * x0.size + 600,
                     "adaptive": x0.size > 4},
        )
        x = res.x if res.fun <= objective(x0) else x0
    else:
        x = x0
    params = x if order.has_mean else np.append(x, 0.0)
    css = css_objective(params, z, order)
    if not math.isfinite(css):
        raise StationarityError(f"order {order}: CSS diverged")
    ar, ma, sar, sma, mu = _split_params(params, order)
    if not (_is_stationary(ar) and _is_stationary(sar)):
        raise StationarityError(f"order {order}: fitted AR polynomial is not stationary")

    with np.errstate(all="ignore"):
        e = _residuals(params, z, order)
    n_res = e.size
    sigma2 = max(css / n_res, SIGMA2_FLOOR)
    aic = z.size * math.log(sigma2) + 2.0 * (order.n_estimated + 1)

    a, c = _polys(ar, ma, sar, sma, order.s)
    r = order.d + order.D * order.s
    tail = {
        "w": (z - mu)[z.size - (a.size - 1):] if a.size > 1 else np.empty(0),
        "e": e[e.size - (c.size - 1):] if c.size > 1 else np.empty(0),
        "x": y[y.size - r:] if r else np.empty(0),
    }
    if tail["e"].size < c.size - 1:
        tail["e"] = np.concatenate((np.zeros(c.size - 1 - tail["e"].size), tail["e"]))
    return SarimaModel(
        order=order,
        ar_coeffs=tuple(map(float, ar)),
        ma_coeffs=tuple(map(float, ma)),
        sar_coeffs=tuple(map(float, sar)),
        sma_coeffs=tuple(map(float, sma)),
        intercept=float(mu),
        sigma2=float(sigma2),
        css=float(css),
        aic=float(aic),
        n_residuals=int(n_res),
        train_tail=tail,
    )


def forecast_sarima(model: SarimaModel, horizon: int) -> np.ndarray:
    """Multi-step forecast with future innovations set to zero."""
    if horizon < 1:
        raise InvalidHorizonError(f"horizon must be >= 1, got {horizon}")
    tail = model.train_tail
    if not tail:
        raise StateError("model carries no training tail")
    o = model.order
    a, c = _polys(model.ar_coeffs, model.ma_coeffs, model.sar_coeffs, model.sma_coeffs, o.s)
    ra, rc = a.size - 1, c.size - 1
    w = list(tail["w"])
    e = list(tail["e"])
    if len(w) < ra or len(e) < rc or len(tail["x"]) < o.d + o.D * o.s:
        raise StateError("training tail is too short for this order")
    out = np.empty(horizon)
    for h in range(horizon):
        v = 0.0
        for k in range(1, ra + 1):
            v -= a[k] * w[-k]
        for k in range(1, rc + 1):
            v += c[k] * e[-k]
        w.append(v)
        e.append(0.0)
        out[h] = v
    z = out + model.intercept
    x = undifference(z, tail["x"], o.d, o.D, o.s)
    return np.maximum(x, 0.0)


# --------------------------------------------------------------------------
# order selection

def kpss_statistic(x: np.ndarray, lags: int | None = None) -> float:
    """Level-stationarity KPSS statistic with a Bartlett long-run variance."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    r = x - x.mean()
    partial = np.cumsum(r)
    if lags is None:
        lags = int(math.floor(12.0 * (n / 100.0) ** 0.25))
    lags = min(lags, n - 1)
    lrv = float(np.dot(r, r)) / n
    for j in range(1, lags + 1):
        lrv += 2.0 * (1.0 - j / (lags + 1.0)) * float(np.dot(r[j:], r[:-j])) / n
    if lrv <= 0.0:
        return 0.0
    return float(np.dot(partial, partial)) / (n * n * lrv)


def choose_differencing(y: np.ndarray, bounds: OrderBounds, s: int = SEASON) -> tuple[int, int]:
    """Pick ``(d, D)``.

    ``D`` minimizes the variance of the seasonally differenced series.  ``d``
    is the smallest order whose differenced series passes a KPSS level test
    at 5%; raw variance reduction alone would also difference strongly
    autocorrelated stationary series.
    """
    y = np.asarray(y, dtype=np.float64)
    best_D, best_var = bounds.D[0], math.inf
    for D in range(bounds.D[0], bounds.D[1] + 1):
        if y.size - D * s < MIN_EXTRA_OBS:
            break
        v = float(np.var(difference(y, 0, D, s)))
        if v < best_var - 1e-12 * max(1.0, best_var):
            best_D, best_var = D, v
    base = difference(y, 0, best_D, s) if best_D else y
    chosen_d = bounds.d[1]
    for d in range(bounds.d[0], bounds.d[1] + 1):
        if base.size - d < MIN_EXTRA_OBS:
            chosen_d = max(bounds.d[0], d - 1)
            break
        z = difference(base, d, 0, s) if d else base
        if np.ptp(z) == 0.0 or kpss_statistic(z) < KPSS_CRITICAL_5PCT:
            chosen_d = d
            break
    return chosen_d, best_D


def _rank(model: SarimaModel) -> tuple:
    o = model.order
    return (model.aic, o.n_estimated, (o.p, o.q, o.P, o.Q))


def grid_search(
    train: TimeSeries | Sequence[float],
    bounds: OrderBounds = OrderBounds(),
    max_steps: int = 100,
) -> GridSearchResult:
    """Stepwise AIC search inside ``bounds`` with differencing fixed up front.

    Starts from (1,d,1)(1,D,1) clipped to the bounds (and from the null
    model, in case the start cannot be fitted), evaluates every +-1
    neighbour in p, q, P and Q, moves to the best improving neighbour and
    stops when none improves.
    """
    t0 = time.perf_counter()
    y = np.asarray(train.values if isinstance(train, TimeSeries) else train, dtype=np.float64)
    d, D = choose_differencing(y, bounds)
    fitted: dict[SarimaOrder, SarimaModel | None] = {}

    def evaluate(orders: Iterable[SarimaOrder]) -> list[SarimaModel]:
        out = []
        for o in orders:
            if o not in fitted:
                try:
                    fitted[o] = fit_sarima(y, o)
                except (InsufficientDataError, StationarityError):
                    fitted[o] = None
            if fitted[o] is not None:
                out.append(fitted[o])
        return out

    def make(p, q, P, Q):
        return SarimaOrder(bounds.clip("p", p), d, bounds.clip("q", q),
                           bounds.clip("P", P), D, bounds.clip("Q", Q))

    start = [make(1, 1, 1, 1), make(0, 0, 0, 0)]
    cands = evaluate(dict.fromkeys(start))
    if not cands:
        raise NoModelError("no starting order could be fitted")
    current = min(cands, key=_rank)
    for _ in range(max_steps):
        o = current.order
        neighbours = []
        for name in ("p", "q", "P", "Q"):
            for step in (-1, 1):
                vals = {"p": o.p, "q": o.q, "P": o.P, "Q": o.Q}
                vals[name] += step
                lo, hi = getattr(bounds, name)
                if lo <= vals[name] <= hi:
                    neighbours.append(make(**vals))
        better = [m for m in evaluate(neighbours) if _rank(m) < _rank(current)]
        if not better:
            break
        current = min(better, key=_rank)

    models = [m for m in fitted.values() if m is not None]
    return GridSearchResult(
        best=current,
        evaluated=len(models),
        failed=sum(m is None for m in fitted.values()),
        elapsed_seconds=time.perf_counter() - t0,
        aic_table={m.order: m.aic for m in models},
    )
