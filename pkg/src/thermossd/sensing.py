"""Sensor models: the drive's SMART temperature sensor and an FPGA ring
oscillator whose count rate falls linearly as the die warms up.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .thermal import Environment, ThermalState

DEFAULT_TEMP_SIGMA_C = 0.3
# Per-sample RO count noise. Tuned so that, with mean-of-150 decisions and
# the default channel thresholds, the ring-oscillator channel runs about ten
# accuracy points behind the direct SSD sensor at a 300 s read delay.
DEFAULT_RO_SIGMA_COUNTS = 1050.0
RO_SAMPLES_PER_BATCH = 150


def round_half_up(x: float) -> int:
    """Round to the nearest integer, halves away from the colder side."""
    return int(np.floor(x + 0.5))


@dataclass(frozen=True)
class RoSensorModel:
    """Linear count-vs-temperature model for one ring-oscillator instance."""

    count_at_ref: float = 40_000.0
    ref_temp_c: float = 58.0
    slope_counts_per_c: float = 100.0
    noise_sigma_counts: float = DEFAULT_RO_SIGMA_COUNTS
    window_s: float = 0.1

    def __post_init__(self) -> None:
        if self.count_at_ref <= 0.0:
            raise ValueError("count_at_ref must be positive")
        if self.slope_counts_per_c <= 0.0:
            raise ValueError("slope_counts_per_c must be positive")
        if self.noise_sigma_counts < 0.0:
            raise ValueError("noise_sigma_counts must be non-negative")
        if self.window_s <= 0.0:
            raise ValueError("window_s must be positive")
        if self.expected_count_unchecked(100.0) <= 0.0:
            raise ValueError("count model goes non-positive inside [0, 100] C")

    def expected_count_unchecked(self, temp_c: float) -> float:
        return self.count_at_ref - self.slope_counts_per_c * (temp_c - self.ref_temp_c)


def expected_count(model: RoSensorModel, temp_c: float) -> float:
    """Noise-free mean count at a die temperature in the supported range."""
    if not 0.0 <= temp_c <= 100.0:
        raise ValueError(f"temp_c={temp_c} outside supported range [0, 100]")
    return model.expected_count_unchecked(temp_c)


def read_ssd_temp(state: ThermalState, rng: np.random.Generator,
                  noise_sigma_c: float = DEFAULT_TEMP_SIGMA_C) -> int:
    """One SMART temperature poll: true temperature, noise, integer rounding."""
    if noise_sigma_c < 0.0:
        raise ValueError("noise_sigma_c must be non-negative")
    return round_half_up(state.t_ssd_c + noise_sigma_c * rng.standard_normal())


def read_fpga_temp(state: ThermalState, rng: np.random.Generator,
                   noise_sigma_c: float = DEFAULT_TEMP_SIGMA_C) -> int:
    """One FPGA die-temperature poll (same quantization as the SSD sensor)."""
    if noise_sigma_c < 0.0:
        raise ValueError("noise_sigma_c must be non-negative")
    return round_half_up(state.t_fpga_c + noise_sigma_c * rng.standard_normal())


@dataclass(frozen=True, eq=False)
class RoMeasurement:
    """One batch of RO counts with its summary statistics.

    ``stddev`` is the population spread of this batch (ddof=0).
    """

    counts: np.ndarray
    taken_at_s: float
    mean: float
    stddev: float

    def to_rows(self) -> list[tuple[float, int, float]]:
        """(clock_s, sample_index, count) rows for CSV export."""
        return [(self.taken_at_s, i, float(c)) for i, c in enumerate(self.counts)]


def sample_ro(model: RoSensorModel, state: ThermalState, rng: np.random.Generator,
              n: int = RO_SAMPLES_PER_BATCH) -> RoMeasurement:
    """Take ``n`` consecutive RO count windows at the current FPGA temperature.

    Does not advance the simulation clock; use :func:`measurement_duration_s`
    if the caller wants to account for the sampling time explicitly.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    mean = expected_count(model, state.t_fpga_c)
    counts = mean + model.noise_sigma_counts * rng.standard_normal(n)
    return RoMeasurement(
        counts=counts,
        taken_at_s=state.clock_s,
        mean=float(counts.mean()),
        stddev=float(counts.std()),
    )


def measurement_duration_s(model: RoSensorModel, n: int = RO_SAMPLES_PER_BATCH) -> float:
    """Wall-clock seconds one RO batch occupies."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return n * model.window_s


@dataclass(frozen=True)
class BaselineStats:
    """Receiver-side reference point measured on an idle device."""

    n: int
    ssd_temp_mean_c: float
    fpga_temp_mean_c: float
    ro_count_mean: float
    ro_count_stddev: float

    def mean_for(self, sensor: str) -> float:
        if sensor == "ssd_temp":
            return self.ssd_temp_mean_c
        if sensor == "fpga_temp":
            return self.fpga_temp_mean_c
        if sensor == "ro_counts":
            return self.ro_count_mean
        raise ValueError(f"unknown sensor kind: {sensor!r}")


def calibrate_baseline(model: RoSensorModel, env: Environment, rng: np.random.Generator,
                       n: int = RO_SAMPLES_PER_BATCH,
                       temp_sigma_c: float = DEFAULT_TEMP_SIGMA_C) -> BaselineStats:
    """Measure the idle device ``n`` times per sensor.

    Draw order is fixed (SSD polls, FPGA polls, one RO batch) so a given seed
    always yields the same statistics. ``ro_count_stddev`` is the sample
    estimate (ddof=1), which is what a receiver sizing its threshold wants.
    """
    if n < 2:
        raise ValueError("n must be at least 2 to estimate a spread")
    state = ThermalState.at_baseline(env)
    ssd = np.array([read_ssd_temp(state, rng, temp_sigma_c) for _ in range(n)], dtype=float)
    fpga = np.array([read_fpga_temp(state, rng, temp_sigma_c) for _ in range(n)], dtype=float)
    batch = sample_ro(model, state, rng, n)
    return BaselineStats(
        n=n,
        ssd_temp_mean_c=float(ssd.mean()),
        fpga_temp_mean_c=float(fpga.mean()),
        ro_count_mean=batch.mean,
        ro_count_stddev=float(batch.counts.std(ddof=1)),
    )
