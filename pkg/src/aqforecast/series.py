"""Hourly univariate series: ingestion, gap repair, splitting and windows.

Timestamps are integer epoch hours (UTC).  Missing observations are kept on
the grid as NaN; a present value is always finite.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import IO, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import (
    EmptyInputError,
    InsufficientDataError,
    ParseError,
    WindowOutOfRangeError,
)

log = logging.getLogger(__name__)

VALID_RANGE = (0.0, 2000.0)
MAX_SPAN_HOURS = 10_000_000


class SeriesPoint(NamedTuple):
    timestamp: int
    value: float | None


@dataclass(frozen=True)
class TimeSeries:
    """Uniform hourly series starting at epoch hour ``start``.

    ``values`` holds NaN for missing hours.  The array is copied and made
    read-only on construction.
    """

    start: int
    values: np.ndarray
    name: str = "PM2.5"

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if v.size < 1:
            raise EmptyInputError("a series needs at least one point")
        if np.isinf(v).any():
            raise ValueError("infinite values are not allowed; use NaN for missing")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "start", int(self.start))

    def __len__(self) -> int:
        return self.values.size

    @property
    def end(self) -> int:
        """Exclusive end hour."""
        return self.start + len(self)

    @property
    def hours(self) -> np.ndarray:
        return np.arange(self.start, self.end, dtype=np.int64)

    @property
    def n_missing(self) -> int:
        return int(np.isnan(self.values).sum())

    def is_gap_free(self) -> bool:
        return self.n_missing == 0

    def points(self) -> Iterator[SeriesPoint]:
        for h, v in zip(range(self.start, self.end), self.values):
            yield SeriesPoint(h, None if math.isnan(v) else float(v))

    def between(self, first_hour: int, stop_hour: int) -> "TimeSeries":
        """Sub-series covering ``[first_hour, stop_hour)``."""
        if first_hour < self.start or stop_hour > self.end or stop_hour <= first_hour:
            raise WindowOutOfRangeError(
                f"[{first_hour}, {stop_hour}) not inside [{self.start}, {self.end})"
            )
        i, j = first_hour - self.start, stop_hour - self.start
        return TimeSeries(first_hour, self.values[i:j], self.name)

    @classmethod
    def from_points(cls, points: Sequence[SeriesPoint], name: str = "PM2.5") -> "TimeSeries":
        hours = [p.timestamp for p in points]
        if not hours:
            raise EmptyInputError("no points")
        if any(b - a != 1 for a, b in zip(hours, hours[1:])):
            raise ValueError("points must be consecutive hours")
        vals = [np.nan if p.value is None else p.value for p in points]
        return cls(hours[0], np.asarray(vals, dtype=np.float64), name)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    test_hours: int = 24

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.test_hours < 1:
            raise ValueError("test_hours must be positive")


# --------------------------------------------------------------------------
# ingestion

def _parse_hour(text: str) -> int:
    text = text.strip()
    if not text:
        raise ValueError("empty timestamp")
    if text.lstrip("+-").isdigit():
        seconds = int(text)
    else:
        iso = text[:-1] + "+00:00" if text[-1] in "Zz" else text
        dt = datetime.fromisoformat(iso)
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        delta = dt - datetime(1970, 1, 1, tzinfo=timezone.utc)
        if delta.microseconds:
            raise ParseError(f"sub-hourly timestamp {text!r}")
        seconds = delta.days * 86400 + delta.seconds
    hour, rem = divmod(seconds, 3600)
    if rem:
        raise ParseError(f"sub-hourly timestamp {text!r}")
    return hour


def _parse_value(text: str) -> float:
    text = text.strip()
    if not text:
        return math.nan
    try:
        v = float(text)
    except ValueError:
        return math.nan
    lo, hi = VALID_RANGE
    if not math.isfinite(v) or v < lo or v > hi:
        return math.nan
    return v


def ingest_csv(
    raw: bytes | str | IO,
    columns: tuple[str, str] | str = ("timestamp", "value"),
    name: str = "PM2.5",
) -> TimeSeries:
    """Parse a ``timestamp,value`` CSV into a regular hourly series.

    Rows whose timestamp cannot be read are skipped.  Values outside
    ``VALID_RANGE`` or unreadable values become missing.  Duplicate hours
    are averaged over their present values; hours absent from the file but
    inside the observed span are inserted as missing.
    """
    if isinstance(columns, str):
        columns = tuple(c.strip() for c in columns.split(","))
        if len(columns) != 2:
            raise ValueError("column spec must name a timestamp and a value column")
    if hasattr(raw, "read"):
        raw = raw.read()
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc}") from None
    raw = raw.lstrip("\ufeff")

    reader = csv.reader(io.StringIO(raw, newline=""))
    header = next(reader, None)
    while header is not None and not any(c.strip() for c in header):
        header = next(reader, None)
    if header is None:
        raise EmptyInputError("input is empty")
    header = [c.strip() for c in header]
    ts_col, val_col = columns
    try:
        ti, vi = header.index(ts_col), header.index(val_col)
    except ValueError:
        raise ParseError(f"header {header!r} lacks columns {ts_col!r} and {val_col!r}") from None

    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    seen: set[int] = set()
    skipped = 0
    for row in reader:
        if len(row) <= max(ti, vi):
            if any(c.strip() for c in row):
                skipped += 1
            continue
        try:
            hour = _parse_hour(row[ti])
        except ParseError:
            raise
        except (ValueError, OverflowError):
            skipped += 1
            continue
        seen.add(hour)
        v = _parse_value(row[vi])
        if not math.isnan(v):
            sums[hour] = sums.get(hour, 0.0) + v
            counts[hour] = counts.get(hour, 0) + 1
    if skipped:
        log.warning("skipped %d unreadable rows", skipped)
    if not seen:
        raise EmptyInputError("no parseable rows")

    first, last = min(seen), max(seen)
    if last - first + 1 > MAX_SPAN_HOURS:
        raise ParseError(f"time span of {last - first + 1} hours is implausibly large")
    values = np.full(last - first + 1, np.nan)
    for hour, total in sums.items():
        values[hour - first] = total / counts[hour]
    return TimeSeries(first, values, name)


def format_hour(hour: int) -> str:
    """ISO-8601 UTC text; falls back to epoch seconds outside the calendar range."""
    try:
        return datetime.fromtimestamp(hour * 3600, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    except (OverflowError, OSError, ValueError):
        return str(hour * 3600)


def write_csv(series: TimeSeries, stream: IO[str]) -> None:
    """Write ``series`` as ``timestamp,value``; floats use shortest round-trip repr."""
    stream.write("timestamp,value\n")
    for p in series.points():
        stream.write(f"{format_hour(p.timestamp)},{'' if p.value is None else repr(p.value)}\n")


def to_csv_text(series: TimeSeries) -> str:
    buf = io.StringIO()
    write_csv(series, buf)
    return buf.getvalue()


# --------------------------------------------------------------------------
# repair, split, windows

def interpolate_missing(s: TimeSeries) -> TimeSeries:
    """Fill gaps linearly between neighbours; flat extension at the ends."""
    v = s.values
    present = ~np.isnan(v)
    if present.sum() < 2:
        raise InsufficientDataError("interpolation needs at least two present values")
    if present.all():
        return s
    idx = np.arange(v.size)
    filled = np.interp(idx, idx[present], v[present])
    filled[present] = v[present]
    return TimeSeries(s.start, filled, s.name)


def split(
    s: TimeSeries, spec: SplitSpec = SplitSpec(), train_len: int | None = None
) -> tuple[TimeSeries, TimeSeries]:
    """Return ``(train, test)`` where test is the final ``spec.test_hours`` points.

    ``train_len`` fixes the training block; otherwise it is
    ``floor(train_fraction * len(s))`` capped by what precedes the test block.
    """
    n, h = len(s), spec.test_hours
    if n < h + 1:
        raise InsufficientDataError(f"series of length {n} cannot hold {h} test hours plus training")
    available = n - h
    if train_len is None:
        train_len = min(available, max(1, int(spec.train_fraction * n)))
    elif train_len < 1 or train_len > available:
        raise InsufficientDataError(f"train_len {train_len} outside 1..{available}")
    origin = s.end - h
    return s.between(origin - train_len, origin), s.between(origin, s.end)


def window_at(
    s: TimeSeries, origin: int, train_len: int, horizon: int
) -> tuple[TimeSeries, TimeSeries]:
    """Training block ``[origin-train_len, origin)`` and actuals ``[origin, origin+horizon)``."""
    if train_len < 1 or horizon < 1:
        raise WindowOutOfRangeError("train_len and horizon must be positive")
    if origin - train_len < s.start or origin + horizon > s.end:
        raise WindowOutOfRangeError(
            f"window [{origin - train_len}, {origin + horizon}) not inside [{s.start}, {s.end})"
        )
    return s.between(origin - train_len, origin), s.between(origin, origin + horizon)
