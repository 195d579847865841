"""Synthetic PM2.5-like hourly series: diurnal and weekly cycles plus AR(1) noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import TimeSeries

# 2018-01-01T00:00Z in epoch hours
DEFAULT_START = 420_768


@dataclass(frozen=True)
class SynthSpec:
    hours: int = 20_000
    base: float = 30.0
    diurnal_amp: float = 12.0
    weekly_amp: float = 6.0
    ar_coeff: float = 0.8
    noise_sd: float = 4.0
    missing_rate: float = 0.0
    seed: int = 42
    start: int = DEFAULT_START

    def __post_init__(self):
        if self.hours < 1:
            raise ValueError("hours must be >= 1")
        if not -1.0 < self.ar_coeff < 1.0:
            raise ValueError("ar_coeff must lie in (-1, 1)")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be non-negative")
        if not 0.0 <= self.missing_rate < 1.0:
            raise ValueError("missing_rate must lie in [0, 1)")


def generate(spec: SynthSpec = SynthSpec()) -> TimeSeries:
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    t = np.arange(spec.hours, dtype=np.float64)
    shocks = rng.normal(0.0, spec.noise_sd, spec.hours) if spec.noise_sd > 0 else np.zeros(spec.hours)
    noise = np.empty(spec.hours)
    prev = 0.0
    for i, eps in enumerate(shocks):
        prev = spec.ar_coeff * prev + eps
        noise[i] = prev
    values = (spec.base
              + spec.diurnal_amp * np.sin(2 * np.pi * t / 24.0)
              + spec.weekly_amp * np.sin(2 * np.pi * t / 168.0)
              + noise)
    values = np.maximum(values, 0.0)
    if spec.missing_rate > 0:
        values[rng.random(spec.hours) < spec.missing_rate] = np.nan
    return TimeSeries(spec.start, values, "PM2.5")
