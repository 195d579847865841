"""LSTM forecaster written against numpy: forward pass, BPTT, Adam, early stopping.

Four topologies share one layer implementation:

* ``simple``         one LSTM layer, last hidden state -> linear head
* ``stacked``        two LSTM layers, the first returning its full sequence
* ``bidirectional``  forward and backward layers, final states concatenated
* ``encoder_decoder`` encoder over the window; a one-step decoder starts from
  the encoder state and reads the encoder's last hidden state as input

Gate blocks in the fused weight matrices are ordered ``i, f, o, g``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateScaleError,
    DivergenceError,
    InsufficientDataError,
    InvalidHorizonError,
    ShapeError,
)
from .series import TimeSeries

CHECKPOINT_VERSION = 1


class NetworkKind(str, enum.Enum):
    SIMPLE = "simple"
    STACKED = "stacked"
    BIDIRECTIONAL = "bidirectional"
    ENCODER_DECODER = "encoder_decoder"


# layer names in forward order; the head reads the last hidden state(s)
_LAYERS = {
    NetworkKind.SIMPLE: ("lstm",),
    NetworkKind.STACKED: ("lstm1", "lstm2"),
    NetworkKind.BIDIRECTIONAL: ("fwd", "bwd"),
    NetworkKind.ENCODER_DECODER: ("enc", "dec"),
}
# layers whose initial state is carried between batches in stateful mode
_STATEFUL = {
    NetworkKind.SIMPLE: ("lstm",),
    NetworkKind.STACKED: ("lstm1", "lstm2"),
    NetworkKind.BIDIRECTIONAL: ("fwd", "bwd"),
    NetworkKind.ENCODER_DECODER: ("enc",),
}


@dataclass(frozen=True)
class NetworkConfig:
    kind: NetworkKind = NetworkKind.SIMPLE

    def __post_init__(self):
        object.__setattr__(self, "kind", NetworkKind(self.kind))

    @property
    def layers(self) -> tuple[str, ...]:
        return _LAYERS[self.kind]


@dataclass(frozen=True)
class LstmHyperParams:
    epochs_max: int = 800
    patience_fraction: float = 0.1
    validation_hours: int = 72
    dropout: float = 0.1
    recurrent_dropout: float = 0.3
    batch_size: int = 12
    stateful: bool = True
    units_coefficient: float = 3
    train_size: int = 8000
    window_len: int = 24
    learning_rate: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        for name in ("dropout", "recurrent_dropout", "patience_fraction"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.batch_size < 1 or self.window_len < 1 or self.epochs_max < 1:
            raise ValueError("batch_size, window_len and epochs_max must be >= 1")
        if self.validation_hours < 1 or self.train_size < 1:
            raise ValueError("validation_hours and train_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.units < 1:
            raise ValueError("hidden units must be >= 1")

    @property
    def units(self) -> int:
        return int(round(self.units_coefficient * self.window_len))

    @property
    def patience(self) -> int:
        return max(1, int(round(self.patience_fraction * self.epochs_max)))


@dataclass
class SupervisedBatch:
    inputs: np.ndarray   # (batch, window_len)
    targets: np.ndarray  # (batch,)

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=np.float64))
        self.targets = np.asarray(self.targets, dtype=np.float64).reshape(-1)
        if self.inputs.shape[0] != self.targets.size:
            raise ShapeError(f"{self.inputs.shape[0]} inputs vs {self.targets.size} targets")

    def __len__(self) -> int:
        return self.targets.size


@dataclass
class LstmModel:
    config: NetworkConfig
    weights: dict[str, np.ndarray]
    normalization: tuple[float, float]
    hyper: LstmHyperParams
    trained_epochs: int = 0
    best_val_loss: float = math.inf
    val_history: list[float] = field(default_factory=list, repr=False)
    # stateful models: final (h, c) rows of the last batch_size training
    # windows, and the hour index of the first target after them
    carry: dict[str, tuple[np.ndarray, np.ndarray]] | None = field(default=None, repr=False)
    carry_end: int | None = None

    def normalize(self, v):
        lo, hi = self.normalization
        return (np.asarray(v, dtype=np.float64) - lo) / (hi - lo)

    def denormalize(self, v):
        lo, hi = self.normalization
        return np.asarray(v, dtype=np.float64) * (hi - lo) + lo

    def predict(self, inputs: np.ndarray) -> np.ndarray:
        """One-step predictions on normalized windows ``(batch, window_len)``."""
        y, _, _ = forward(self.weights, self.config, np.atleast_2d(inputs))
        return y


# --------------------------------------------------------------------------
# data framing

def scale_bounds(values: np.ndarray) -> tuple[float, float]:
    lo, hi = float(np.min(values)), float(np.max(values))
    if not hi > lo:
        raise DegenerateScaleError("min-max scaling of a constant series")
    return lo, hi


def windows(values: np.ndarray, window_len: int, step: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Raw sliding windows: inputs ``values[i:i+w]`` and targets ``values[i+w]``."""
    values = np.asarray(values, dtype=np.float64)
    if values.size <= window_len:
        raise InsufficientDataError(f"need more than {window_len} points, got {values.size}")
    starts = np.arange(0, values.size - window_len, step)
    idx = starts[:, None] + np.arange(window_len)[None, :]
    return values[idx], values[starts + window_len]


def make_supervised(
    series: TimeSeries | np.ndarray,
    window_len: int,
    step: int = 1,
    batch_size: int | None = None,
    bounds: tuple[float, float] | None = None,
) -> list[SupervisedBatch]:
    """Chronological min-max normalized windows, optionally chunked into batches."""
    values = np.asarray(series.values if isinstance(series, TimeSeries) else series, dtype=np.float64)
    if np.isnan(values).any():
        raise ValueError("make_supervised needs a gap-free series")
    x, y = windows(values, window_len, step)
    lo, hi = bounds if bounds is not None else scale_bounds(values)
    x, y = (x - lo) / (hi - lo), (y - lo) / (hi - lo)
    if batch_size is None:
        return [SupervisedBatch(x, y)]
    return [SupervisedBatch(x[i:i + batch_size], y[i:i + batch_size])
            for i in range(0, len(y), batch_size)]


# --------------------------------------------------------------------------
# parameters

def _sigmoid(a):
    return 0.5 * (1.0 + np.tanh(0.5 * a))


def _glorot(rng, fan_in, fan_out):
    lim = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-lim, lim, (fan_in, fan_out))


def _orthogonal(rng, rows, cols):
    a = rng.normal(size=(max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    return q if rows >= cols else q.T


def layer_input_dims(config: NetworkConfig, units: int, input_dim: int = 1) -> dict[str, int]:
    kind = config.kind
    if kind is NetworkKind.STACKED:
        return {"lstm1": input_dim, "lstm2": units}
    if kind is NetworkKind.ENCODER_DECODER:
        return {"enc": input_dim, "dec": units}
    return {name: input_dim for name in config.layers}


def head_dim(config: NetworkConfig, units: int) -> int:
    return 2 * units if config.kind is NetworkKind.BIDIRECTIONAL else units


def init_weights(config: NetworkConfig, units: int, rng: np.random.Generator,
                 input_dim: int = 1) -> dict[str, np.ndarray]:
    """Glorot-uniform kernels, orthogonal recurrent kernels, forget bias 1."""
    w: dict[str, np.ndarray] = {}
    for name, n_in in layer_input_dims(config, units, input_dim).items():
        w[f"{name}.Wx"] = _glorot(rng, n_in, 4 * units)
        w[f"{name}.Wh"] = np.hstack([_orthogonal(rng, units, units) for _ in range(4)])
        b = np.zeros(4 * units)
        b[units:2 * units] = 1.0
        w[f"{name}.b"] = b
    w["head.W"] = _glorot(rng, head_dim(config, units), 1)
    w["head.b"] = np.zeros(1)
    return w


def param_names(weights: dict[str, np.ndarray]) -> list[str]:
    return sorted(weights)


# --------------------------------------------------------------------------
# forward / backward

def lstm_cell_forward(x, h_prev, c_prev, Wx, Wh, b):
    """One LSTM step for a batch; returns ``(h, c)``."""
    x, h_prev, c_prev = (np.atleast_2d(np.asarray(a, dtype=np.float64)) for a in (x, h_prev, c_prev))
    Wx, Wh, b = (np.asarray(a, dtype=np.float64) for a in (Wx, Wh, b))
    units = h_prev.shape[1]
    if (Wx.shape != (x.shape[1], 4 * units) or Wh.shape != (units, 4 * units)
            or b.shape != (4 * units,) or c_prev.shape != h_prev.shape
            or x.shape[0] != h_prev.shape[0]):
        raise ShapeError("inconsistent LSTM cell shapes")
    return _step(x, h_prev, c_prev, Wx, Wh, b)


def _step(x, h_prev, c_prev, Wx, Wh, b):
    u = h_prev.shape[1]
    a = x @ Wx + h_prev @ Wh + b
    i, f, o = np.split(_sigmoid(a[:, :3 * u]), 3, axis=1)
    g = np.tanh(a[:, 3 * u:])
    c = f * c_prev + i * g
    return o * np.tanh(c), c


def _layer_forward(w, name, X, h0, c0, mx=None, mh=None):
    """Run layer ``name`` over ``X`` of shape (T, B, I)."""
    Wx, Wh, b = w[f"{name}.Wx"], w[f"{name}.Wh"], w[f"{name}.b"]
    T, B = X.shape[0], X.shape[1]
    u = Wh.shape[0]
    Xm = X if mx is None else X * mx
    ZX = Xm @ Wx + b
    Hs = np.empty((T, B, u))
    HP = np.empty((T, B, u))
    G = np.empty((T, B, 4 * u))
    C = np.empty((T + 1, B, u))
    TC = np.empty((T, B, u))
    C[0] = c0
    h = h0
    for t in range(T):
        hp = h if mh is None else h * mh
        HP[t] = hp
        a = ZX[t] + hp @ Wh
        gt = G[t]
        gt[:, :3 * u] = _sigmoid(a[:, :3 * u])
        gt[:, 3 * u:] = np.tanh(a[:, 3 * u:])
        C[t + 1] = gt[:, u:2 * u] * C[t] + gt[:, :u] * gt[:, 3 * u:]
        TC[t] = np.tanh(C[t + 1])
        h = gt[:, 2 * u:3 * u] * TC[t]
        Hs[t] = h
    return Hs, h, C[T], (name, Xm, HP, G, C, TC, mx, mh)


def _layer_backward(w, grads, cache, dHs, dcT=None):
    """Accumulate parameter gradients; return ``(dX, dh0, dc0)``."""
    name, Xm, HP, G, C, TC, mx, mh = cache
    Wx, Wh = w[f"{name}.Wx"], w[f"{name}.Wh"]
    T, B, u = HP.shape
    DA = np.empty((T, B, 4 * u))
    dh_next = np.zeros((B, u))
    dc_next = np.zeros((B, u)) if dcT is None else dcT.copy()
    WhT = Wh.T
    for t in range(T - 1, -1, -1):
        gt, tc = G[t], TC[t]
        i, f, o, g = gt[:, :u], gt[:, u:2 * u], gt[:, 2 * u:3 * u], gt[:, 3 * u:]
        dh = dHs[t] + dh_next
        dc = dc_next + dh * o * (1.0 - tc * tc)
        da = DA[t]
        da[:, :u] = dc * g * i * (1.0 - i)
        da[:, u:2 * u] = dc * C[t] * f * (1.0 - f)
        da[:, 2 * u:3 * u] = dh * tc * o * (1.0 - o)
        da[:, 3 * u:] = dc * i * (1.0 - g * g)
        dhp = da @ WhT
        dh_next = dhp if mh is None else dhp * mh
        dc_next = dc * f
    flat = DA.reshape(T * B, 4 * u)
    dWx = Xm.reshape(T * B, -1).T @ flat
    dWh = HP.reshape(T * B, u).T @ flat
    db = flat.sum(axis=0)
    dX = DA @ Wx.T
    if mx is not None:
        dX *= mx
    for key, val in ((".Wx", dWx), (".Wh", dWh), (".b", db)):
        grads[name + key] = grads.get(name + key, 0.0) + val
    return dX, dh_next, dc_next


def _zero_state(batch, units):
    return np.zeros((batch, units)), np.zeros((batch, units))


def forward(w, config: NetworkConfig, inputs: np.ndarray,
            state: dict | None = None, masks: dict | None = None):
    """Predict from normalized windows ``(B, T)``.

    Returns ``(yhat, cache, final_states)``; ``final_states`` maps each
    stateful layer to its ``(h, c)`` after the window.
    """
    X = np.asarray(inputs, dtype=np.float64).T[:, :, None]  # (T, B, 1)
    B = X.shape[1]
    units = w[f"{config.layers[0]}.Wh"].shape[0]
    state = state or {}
    masks = masks or {}

    def init(name):
        return state.get(name) or _zero_state(B, units)

    def run(name, seq, h0c0=None):
        h0, c0 = h0c0 if h0c0 is not None else init(name)
        mx, mh = masks.get(name, (None, None))
        return _layer_forward(w, name, seq, h0, c0, mx, mh)

    kind = config.kind
    caches = {}
    finals = {}
    if kind is NetworkKind.SIMPLE:
        _, h, c, caches["lstm"] = run("lstm", X)
        finals["lstm"] = (h, c)
        feat = h
    elif kind is NetworkKind.STACKED:
        H1, h1, c1, caches["lstm1"] = run("lstm1", X)
        _, h, c, caches["lstm2"] = run("lstm2", H1)
        finals["lstm1"], finals["lstm2"] = (h1, c1), (h, c)
        feat = h
    elif kind is NetworkKind.BIDIRECTIONAL:
        _, hf, cf, caches["fwd"] = run("fwd", X)
        _, hb, cb, caches["bwd"] = run("bwd", X[::-1])
        finals["fwd"], finals["bwd"] = (hf, cf), (hb, cb)
        feat = np.concatenate((hf, hb), axis=1)
    else:
        _, he, ce, caches["enc"] = run("enc", X)
        _, h, _, caches["dec"] = run("dec", he[None], (he, ce))
        finals["enc"] = (he, ce)
        feat = h
    yhat = (feat @ w["head.W"])[:, 0] + w["head.b"][0]
    return yhat, (caches, feat), finals


def backward(w, config: NetworkConfig, cache, dy: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of ``sum(dy * yhat)`` with respect to every weight."""
    caches, feat = cache
    dy = np.asarray(dy, dtype=np.float64).reshape(-1, 1)
    grads: dict[str, np.ndarray] = {"head.W": feat.T @ dy, "head.b": dy.sum(axis=0)}
    dfeat = dy @ w["head.W"].T
    units = w[f"{config.layers[0]}.Wh"].shape[0]

    def last_only(name, d_last):
        T = caches[name][2].shape[0]
        dHs = np.zeros((T, d_last.shape[0], units))
        dHs[-1] = d_last
        return dHs

    kind = config.kind
    if kind is NetworkKind.SIMPLE:
        _layer_backward(w, grads, caches["lstm"], last_only("lstm", dfeat))
    elif kind is NetworkKind.STACKED:
        dH1, _, _ = _layer_backward(w, grads, caches["lstm2"], last_only("lstm2", dfeat))
        _layer_backward(w, grads, caches["lstm1"], dH1)
    elif kind is NetworkKind.BIDIRECTIONAL:
        _layer_backward(w, grads, caches["fwd"], last_only("fwd", dfeat[:, :units]))
        _layer_backward(w, grads, caches["bwd"], last_only("bwd", dfeat[:, units:]))
    else:
        dXd, dh0, dc0 = _layer_backward(w, grads, caches["dec"], last_only("dec", dfeat))
        _layer_backward(w, grads, caches["enc"], last_only("enc", dXd[0] + dh0), dcT=dc0)
    return grads


def mse_loss(w, config, batch: SupervisedBatch, state=None, masks=None):
    yhat, cache, finals = forward(w, config, batch.inputs, state, masks)
    r = yhat - batch.targets
    return float(np.mean(r * r)), r, cache, finals


def loss_and_grads(w, config, batch: SupervisedBatch, state=None, masks=None):
    loss, r, cache, finals = mse_loss(w, config, batch, state, masks)
    grads = backward(w, config, cache, 2.0 * r / r.size)
    return loss, grads, finals


def gradient_check(model: LstmModel | dict, batch: SupervisedBatch,
                   config: NetworkConfig | None = None, eps: float = 1e-5) -> float:
    """Max relative error between BPTT and central-difference gradients.

    Dropout is off and every layer starts from a zero state.
    """
    if isinstance(model, LstmModel):
        w, config = model.weights, model.config
    else:
        w = model
    w = {k: np.array(v, dtype=np.float64) for k, v in w.items()}
    _, grads, _ = loss_and_grads(w, config, batch)
    worst = 0.0
    for name in param_names(w):
        arr = w[name]
        analytic = np.asarray(grads[name]).reshape(arr.shape)
        flat = arr.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + eps
            up = mse_loss(w, config, batch)[0]
            flat[j] = orig - eps
            down = mse_loss(w, config, batch)[0]
            flat[j] = orig
            numeric = (up - down) / (2.0 * eps)
            a = analytic.reshape(-1)[j]
            rel = abs(a - numeric) / max(1e-8, abs(a) + abs(numeric))
            worst = max(worst, rel)
    return worst


# --------------------------------------------------------------------------
# stateful chains

def continue_chain(w, config: NetworkConfig, x: np.ndarray, tail: dict):
    """Run consecutive windows ``x`` as stateful batches after ``tail``.

    ``tail`` holds the final states of the preceding ``B`` windows, oldest
    first, so window ``j`` starts from the state window ``j - B`` ended in,
    which is exactly what row-wise carry does during training.  Returns the
    predictions and the updated tail.
    """
    B = next(iter(tail.values()))[0].shape[0]
    x = np.atleast_2d(x)
    preds = np.empty(x.shape[0])
    for s in range(0, x.shape[0], B):
        k = min(B, x.shape[0] - s)
        state = {n: (h[:k], c[:k]) for n, (h, c) in tail.items()}
        yhat, _, finals = forward(w, config, x[s:s + k], state)
        preds[s:s + k] = yhat
        tail = {n: (np.concatenate((h[k:], finals[n][0])), np.concatenate((c[k:], finals[n][1])))
                for n, (h, c) in tail.items()}
    return preds, tail


def _pad_rows(state: dict, rows: int) -> dict:
    """Left-pad carried states with zero rows (windows before the first batch)."""
    out = {}
    for n, (h, c) in state.items():
        k = rows - h.shape[0]
        out[n] = (np.vstack((np.zeros((k, h.shape[1])), h)) if k > 0 else h,
                  np.vstack((np.zeros((k, c.shape[1])), c)) if k > 0 else c)
    return out


# --------------------------------------------------------------------------
# training

class _Adam:
    def __init__(self, weights, lr, beta1=0.9, beta2=0.999, eps=1e-7):
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in weights.items()}
        self.v = {k: np.zeros_like(v) for k, v in weights.items()}
        self.t = 0

    def step(self, weights, grads):
        self.t += 1
        lr_t = self.lr * math.sqrt(1.0 - self.b2 ** self.t) / (1.0 - self.b1 ** self.t)
        for k, g in grads.items():
            m, v = self.m[k], self.v[k]
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * (g * g)
            weights[k] -= lr_t * m / (np.sqrt(v) + self.eps)


def _masks(config, hyper, units, batch, rng) -> dict:
    if hyper.dropout == 0 and hyper.recurrent_dropout == 0:
        return {}
    dims = layer_input_dims(config, units)
    out = {}
    for name in config.layers:
        mx = mh = None
        if hyper.dropout > 0:
            keep = 1.0 - hyper.dropout
            mx = (rng.random((batch, dims[name])) < keep) / keep
        if hyper.recurrent_dropout > 0:
            keep = 1.0 - hyper.recurrent_dropout
            mh = (rng.random((batch, units)) < keep) / keep
        out[name] = (mx, mh)
    return out


def train(series: TimeSeries | np.ndarray, config: NetworkConfig = NetworkConfig(),
          hyper: LstmHyperParams = LstmHyperParams(), progress=None) -> LstmModel:
    """Fit on the last ``hyper.train_size`` points of ``series``.

    The final ``validation_hours`` targets are held out; training stops once
    validation MSE has not improved for ``hyper.patience`` epochs and the
    best weights are restored.
    """
    values = np.asarray(series.values if isinstance(series, TimeSeries) else series, dtype=np.float64)
    if np.isnan(values).any():
        raise ValueError("train needs a gap-free series")
    values = values[-hyper.train_size:]
    w_len, n_val = hyper.window_len, hyper.validation_hours
    if values.size < w_len + n_val + 1:
        raise InsufficientDataError(
            f"need at least {w_len + n_val + 1} points for window {w_len} and "
            f"{n_val} validation hours, got {values.size}"
        )
    bounds = scale_bounds(values)
    norm = (values - bounds[0]) / (bounds[1] - bounds[0])
    x_all, y_all = windows(norm, w_len)
    n_train = x_all.shape[0] - n_val
    val = SupervisedBatch(x_all[n_train:], y_all[n_train:])
    bs = hyper.batch_size
    # stateful batches must be full; drop the oldest samples that do not fit
    drop = n_train % bs if n_train >= bs else 0
    x_tr, y_tr = x_all[drop:n_train], y_all[drop:n_train]
    if x_tr.shape[0] == 0:
        raise InsufficientDataError("no training windows before the validation block")
    batches = [SupervisedBatch(x_tr[i:i + bs], y_tr[i:i + bs]) for i in range(0, len(y_tr), bs)]

    rng = np.random.default_rng(np.random.SeedSequence(hyper.seed))
    units = hyper.units
    w = init_weights(config, units, rng)
    opt = _Adam(w, hyper.learning_rate)
    best = math.inf
    best_w = {k: v.copy() for k, v in w.items()}
    best_tail = None
    since_best = 0
    history = []
    epochs = 0
    for epoch in range(hyper.epochs_max):
        state = None
        for batch in batches:
            masks = _masks(config, hyper, units, len(batch), rng)
            if state is not None and next(iter(state.values()))[0].shape[0] != len(batch):
                state = None
            loss, grads, finals = loss_and_grads(w, config, batch, state, masks)
            if not math.isfinite(loss):
                raise DivergenceError(f"training loss became {loss} in epoch {epoch + 1}")
            opt.step(w, grads)
            state = {k: finals[k] for k in _STATEFUL[config.kind]} if hyper.stateful else None
        epochs = epoch + 1
        tail = None
        if hyper.stateful:
            # validation windows follow the training windows in the same chain
            preds, tail = continue_chain(w, config, val.inputs, _pad_rows(state, bs))
            r = preds - val.targets
            val_loss = float(np.mean(r * r))
        else:
            val_loss = mse_loss(w, config, val)[0]
        if not math.isfinite(val_loss):
            raise DivergenceError(f"validation loss became {val_loss} in epoch {epochs}")
        history.append(val_loss)
        if progress is not None:
            progress(epochs, val_loss)
        if val_loss < best:
            best = val_loss
            best_w = {k: v.copy() for k, v in w.items()}
            best_tail = tail
            since_best = 0
        else:
            since_best += 1
            if since_best >= hyper.patience:
                break
    end = series.end if isinstance(series, TimeSeries) and best_tail is not None else None
    return LstmModel(config, best_w, bounds, hyper, epochs, best, history,
                     best_tail if end is not None else None, end)


def _chain_from(model: LstmModel, recent) -> dict | None:
    """Carried states for the window ending at ``recent.end``, if derivable.

    A stateful model extends its training chain over the observations that
    followed training; this needs ``recent`` to be a series covering the
    hours from ``carry_end - window_len`` on.
    """
    if model.carry is None or model.carry_end is None or not isinstance(recent, TimeSeries):
        return None
    w_len = model.hyper.window_len
    first = model.carry_end - w_len
    if recent.start > first or recent.end < model.carry_end:
        return None
    tail = model.carry
    if recent.end > model.carry_end:
        seen = model.normalize(recent.between(first, recent.end).values)
        x, _ = windows(seen, w_len)
        _, tail = continue_chain(model.weights, model.config, x, tail)
    return tail


def forecast_lstm(model: LstmModel, recent: TimeSeries | np.ndarray, horizon: int) -> np.ndarray:
    """Recursive multi-step forecast from the last ``window_len`` observations.

    Stateful models continue their training state chain when ``recent`` is
    a series that reaches back to the end of training; otherwise every
    window starts from a zero state.
    """
    if horizon < 1:
        raise InvalidHorizonError(f"horizon must be >= 1, got {horizon}")
    values = np.asarray(recent.values if isinstance(recent, TimeSeries) else recent, dtype=np.float64)
    w_len = model.hyper.window_len
    if values.size < w_len:
        raise InsufficientDataError(f"need {w_len} recent values, got {values.size}")
    tail = _chain_from(model, recent)
    window = list(model.normalize(values[-w_len:]))
    out = np.empty(horizon)
    for h in range(horizon):
        if tail is None:
            nxt = float(model.predict(np.array([window]))[0])
        else:
            pred, tail = continue_chain(model.weights, model.config, np.array([window]), tail)
            nxt = float(pred[0])
        out[h] = nxt
        window = window[1:] + [nxt]
    return np.maximum(model.denormalize(out), 0.0)


# --------------------------------------------------------------------------
# checkpoints

def save_model(model: LstmModel, path: str | Path) -> None:
    """Write an ``.npz`` checkpoint: JSON metadata plus one array per weight."""
    meta = {
        "version": CHECKPOINT_VERSION,
        "kind": model.config.kind.value,
        "hyper": asdict(model.hyper),
        "normalization": [float(v) for v in model.normalization],
        "trained_epochs": model.trained_epochs,
        "best_val_loss": model.best_val_loss,
        "val_history": list(model.val_history),
    }
    arrays = {f"w/{k}": v for k, v in model.weights.items()}
    if model.carry is not None:
        meta["carry_end"] = model.carry_end
        for k, (h, c) in model.carry.items():
            arrays[f"carry/{k}/h"], arrays[f"carry/{k}/c"] = h, c
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.array(json.dumps(meta)), **arrays)


def load_model(path: str | Path) -> LstmModel:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta.get('version')}")
        weights = {k[2:]: np.array(data[k]) for k in data.files if k.startswith("w/")}
        carry = None
        if meta.get("carry_end") is not None:
            names = sorted({k.split("/")[1] for k in data.files if k.startswith("carry/")})
            carry = {n: (np.array(data[f"carry/{n}/h"]), np.array(data[f"carry/{n}/c"]))
                     for n in names}
    return LstmModel(
        config=NetworkConfig(meta["kind"]),
        weights=weights,
        normalization=tuple(meta["normalization"]),
        hyper=LstmHyperParams(**meta["hyper"]),
        trained_epochs=meta["trained_epochs"],
        best_val_loss=meta["best_val_loss"],
        val_history=meta["val_history"],
        carry=carry,
        carry_end=meta.get("carry_end"),
    )
