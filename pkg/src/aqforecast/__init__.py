"""Short-term air-quality forecasting with exponential smoothing, SARIMA and LSTM."""

from .errors import ForecastError
from .series import SplitSpec, TimeSeries, ingest_csv, interpolate_missing, split, window_at

__version__ = "0.1.0"

__all__ = [
    "ForecastError",
    "SplitSpec",
    "TimeSeries",
    "ingest_csv",
    "interpolate_missing",
    "split",
    "window_at",
]
