"""RMSE and wall-clock accounting."""

from __future__ import annotations

import math
import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyInputError, ShapeError


@dataclass(frozen=True)
class ErrorSummary:
    rmse: float
    n: int


@dataclass(frozen=True)
class TimingRecord:
    build_seconds: float = 0.0
    predict_seconds: float = 0.0

    @property
    def total_seconds(self) -> float:
        return self.build_seconds + self.predict_seconds


def rmse(predicted: Sequence[float], actual: Sequence[float]) -> ErrorSummary:
    p = np.asarray(predicted, dtype=np.float64).reshape(-1)
    a = np.asarray(actual, dtype=np.float64).reshape(-1)
    if p.size != a.size:
        raise ShapeError(f"predicted has {p.size} values, actual has {a.size}")
    if p.size == 0:
        raise EmptyInputError("rmse of empty sequences")
    if not (np.isfinite(p).all() and np.isfinite(a).all()):
        raise ValueError("rmse inputs must be finite")
    diff = a - p
    return ErrorSummary(float(np.sqrt(np.dot(diff, diff) / diff.size)), int(diff.size))


def mean_of(errors: Iterable[ErrorSummary]) -> float:
    """Plain average of the ``rmse`` fields (not a pooled RMSE)."""
    vals = [e.rmse for e in errors]
    if not vals:
        raise EmptyInputError("mean of no errors")
    return math.fsum(vals) / len(vals)


class Stopwatch:
    """Monotonic timer; ``elapsed`` is rounded to whole milliseconds."""

    def __init__(self):
        self._start = None
        self.elapsed = 0.0

    @contextmanager
    def running(self):
        self._start = time.perf_counter()
        try:
            yield self
        finally:
            self.elapsed = round(time.perf_counter() - self._start, 3)
