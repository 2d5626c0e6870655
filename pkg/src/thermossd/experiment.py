"""Deterministic experiment harnesses and result emission.

Every runner takes a resolved :class:`~thermossd.config.ExperimentConfig`
and returns a :class:`ResultTable` (or a richer result exposing one). All
randomness flows from the config's master seed through named SHA-256-derived
streams, so a given config produces byte-identical output files on every
run, on every machine, regardless of evaluation order.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import kernels, protocol, thermal
from . import timeline as tl
from .config import ExperimentConfig
from .protocol import ChannelConfig
from .sensing import expected_count, read_fpga_temp, read_ssd_temp, sample_ro
from .thermal import ThermalState


def derive_rng(master_seed: int, *tags) -> np.random.Generator:
    """A named, reproducible random stream.

    Tags are hashed individually (SHA-256, first 8 bytes) into the seed
    sequence, so streams are independent of each other and of the order in
    which an experiment visits its grid.
    """
    entropy = [int(master_seed) & (2 ** 64 - 1)]
    for tag in tags:
        digest = hashlib.sha256(str(tag).encode("utf-8")).digest()
        entropy.append(int.from_bytes(digest[:8], "big"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def trial_inputs(master_seed: int, sensor: str, trials: int,
                 draws: int) -> tuple[np.ndarray, np.ndarray]:
    """Pre-draw the random bit and measurement noise for each trial.

    Per-trial streams are keyed by (seed, sensor, trial) only — *not* by the
    swept delay — so the same noise is reused across the sweep axis (common
    random numbers). That makes accuracy exactly non-increasing in delay
    trial-for-trial, instead of merely in expectation. The draw order inside
    a trial (bit, then noise) mirrors protocol.transmit on a one-bit message.
    """
    bits = np.empty(trials, dtype=np.int8)
    noise = np.empty((trials, draws), dtype=np.float64)
    for index in range(trials):
        rng = derive_rng(master_seed, "channel-trial", sensor, index)
        bits[index] = rng.integers(0, 2)
        noise[index] = rng.standard_normal(draws)
    return bits, noise


# ---------------------------------------------------------------------------
# result containers and (de)serialization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResultTable:
    """A named table with ordered metadata, ready to emit."""

    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    metadata: tuple[tuple[str, object], ...]


def emit(table: ResultTable, directory: str | Path, fmt: str) -> Path:
    """Write ``table`` under ``directory`` and return the file path.

    CSV files carry metadata as leading ``# key=value`` comment lines; JSON
    files carry it as an object. Output is deterministic: no timestamps, no
    machine paths, floats via their shortest round-trippable form.
    """
    if fmt not in ("csv", "json"):
        raise ValueError("fmt must be 'csv' or 'json'")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{table.name}.{fmt}"
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            for key, value in table.metadata:
                fh.write(f"# {key}={value}\n")
            writer = csv.writer(fh)
            writer.writerow(table.columns)
            for row in table.rows:
                writer.writerow(["" if value is None else value for value in row])
    else:
        payload = {
            "name": table.name,
            "metadata": {key: value for key, value in table.metadata},
            "columns": list(table.columns),
            "rows": [list(row) for row in table.rows],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return path


def _coerce(cell: str):
    if cell == "":
        return None
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def parse_table(path: str | Path) -> ResultTable:
    """Read back a file written by :func:`emit`.

    Metadata values come back as strings; numeric cells come back as int or
    float so a CSV emit/parse round trip preserves row values exactly.
    """
    path = Path(path)
    if path.suffix == ".json":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        return ResultTable(
            name=payload["name"],
            columns=tuple(payload["columns"]),
            rows=tuple(tuple(row) for row in payload["rows"]),
            metadata=tuple(sorted(payload["metadata"].items())),
        )
    metadata: list[tuple[str, object]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        rows: list[tuple] = []
        columns: tuple[str, ...] | None = None
        for record in csv.reader(_strip_comments(fh, metadata)):
            if columns is None:
                columns = tuple(record)
            else:
                rows.append(tuple(_coerce(cell) for cell in record))
    if columns is None:
        raise ValueError(f"{path}: no header row")
    return ResultTable(name=path.stem, columns=columns,
                       rows=tuple(rows), metadata=tuple(metadata))


def _strip_comments(fh, metadata: list):
    for line in fh:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            metadata.append((key.strip(), value))
        else:
            yield line


# ---------------------------------------------------------------------------
# sweep runners
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepPoint:
    sensor: str
    delay_s: float
    trials: int
    errors: int
    accuracy: float
    std_error: float
    analytic_error: float


@dataclass(frozen=True)
class TwoUserPoint:
    sensor: str
    extra_wait_s: float
    effective_delay_s: float
    trials: int
    errors: int
    accuracy: float
    std_error: float
    analytic_error: float


@dataclass(frozen=True)
class SweepResult:
    points: tuple
    master_seed: int
    config_hash: str
    trials: int


def _sigma_for(cfg: ExperimentConfig, sensor: str) -> float:
    return cfg.ssd_noise_sigma_c if sensor == "ssd_temp" else cfg.fpga_noise_sigma_c


def channel_for(cfg: ExperimentConfig, sensor: str) -> ChannelConfig:
    """The channel the sweeps exercise for one sensor kind."""
    return protocol.default_channel_config(
        sensor, cfg.env,
        threshold_delta=cfg.threshold_deltas.get(sensor),
        encoding=cfg.encoding,
        heat_profile=cfg.heat_profile,
        inter_bit_idle_s=cfg.inter_bit_idle_s,
        ro_model=cfg.ro_model,
        ro_samples=cfg.ro_samples,
        ssd_noise_sigma_c=cfg.ssd_noise_sigma_c,
        fpga_noise_sigma_c=cfg.fpga_noise_sigma_c,
    )


def _count_errors(cfg: ExperimentConfig, channel: ChannelConfig, delay_s: float,
                  bits: np.ndarray, noise: np.ndarray) -> int:
    """Monte Carlo errors for one grid point, via the kernel fast path."""
    v0, v1 = protocol.expected_sensor_values(channel, cfg.env, delay_s)
    threshold = protocol.calibrate_threshold(
        protocol.baseline_sensor_value(channel, cfg.env), channel)
    if channel.sensor == "ro_counts":
        decisions, _ = kernels.ro_trials(
            bits, noise, v0, v1, channel.ro_model.noise_sigma_counts, threshold)
    else:
        decisions, _ = kernels.temp_trials(
            bits, noise, v0, v1, _sigma_for(cfg, channel.sensor), threshold)
    return int(np.count_nonzero(decisions != bits))


def run_accuracy_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Single-tenant sweep: per-sensor decode accuracy across read delays.

    Each trial transmits one bit from a cold start. Reported ``std_error``
    is the binomial standard error of the accuracy estimate; the analytic
    error column is the closed-form oracle for the same grid point.
    """
    points: list[SweepPoint] = []
    for sensor in cfg.sensors:
        channel = channel_for(cfg, sensor)
        draws = cfg.ro_samples if sensor == "ro_counts" else 1
        bits, noise = trial_inputs(cfg.master_seed, sensor, cfg.trials, draws)
        for delay in cfg.delays_s:
            errors = _count_errors(cfg, channel, delay, bits, noise)
            accuracy = 1.0 - errors / cfg.trials
            std_error = math.sqrt(accuracy * (1.0 - accuracy) / cfg.trials)
            analytic = protocol.analytic_bit_error(channel, cfg.env, delay)
            points.append(SweepPoint(sensor, float(delay), cfg.trials, errors,
                                     accuracy, std_error, analytic))
    return SweepResult(tuple(points), cfg.master_seed, cfg.config_hash, cfg.trials)


def run_two_user_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Two-tenant sweep: decode accuracy across receiver extra-wait values.

    The effective read delay of each point is the timeline gap between
    stress end and measurement start (tenant switch + VM setup + bitstream
    load + extra wait); trial noise is shared across the axis, so longer
    waits can only lose trials, never win them back.
    """
    base = replace(cfg.timeline, users=2, extra_wait_s=0.0, n_disks=1)
    points: list[TwoUserPoint] = []
    for sensor in cfg.sensors:
        channel = channel_for(cfg, sensor)
        draws = cfg.ro_samples if sensor == "ro_counts" else 1
        bits, noise = trial_inputs(cfg.master_seed, sensor, cfg.trials, draws)
        for extra in cfg.extra_wait_grid_s:
            scenario = replace(base, extra_wait_s=float(extra))
            delay = tl.effective_thermal_delay_s(scenario)
            errors = _count_errors(cfg, channel, delay, bits, noise)
            accuracy = 1.0 - errors / cfg.trials
            std_error = math.sqrt(accuracy * (1.0 - accuracy) / cfg.trials)
            analytic = protocol.analytic_bit_error(channel, cfg.env, delay)
            points.append(TwoUserPoint(sensor, float(extra), delay, cfg.trials,
                                       errors, accuracy, std_error, analytic))
    return SweepResult(tuple(points), cfg.master_seed, cfg.config_hash, cfg.trials)


def sweep_table(result: SweepResult, name: str = "accuracy_sweep") -> ResultTable:
    columns = ("sensor", "delay_s", "trials", "errors", "accuracy",
               "std_error", "analytic_error_probability")
    rows = tuple((p.sensor, p.delay_s, p.trials, p.errors, p.accuracy,
                  p.std_error, p.analytic_error) for p in result.points)
    return ResultTable(name, columns, rows, _meta(name, result.config_hash,
                                                  result.master_seed,
                                                  trials=result.trials))


def two_user_table(result: SweepResult, name: str = "two_user_sweep") -> ResultTable:
    columns = ("sensor", "extra_wait_s", "effective_delay_s", "trials", "errors",
               "accuracy", "std_error", "analytic_error_probability")
    rows = tuple((p.sensor, p.extra_wait_s, p.effective_delay_s, p.trials,
                  p.errors, p.accuracy, p.std_error, p.analytic_error)
                 for p in result.points)
    return ResultTable(name, columns, rows, _meta(name, result.config_hash,
                                                  result.master_seed,
                                                  trials=result.trials))


def _meta(experiment: str, config_hash: str, master_seed: int,
          **extra) -> tuple[tuple[str, object], ...]:
    items: list[tuple[str, object]] = [
        ("experiment", experiment),
        ("config_hash", config_hash),
        ("master_seed", master_seed),
    ]
    items.extend(sorted(extra.items()))
    return tuple(items)


# ---------------------------------------------------------------------------
# tables and curves
# ---------------------------------------------------------------------------

def run_bandwidth_table(cfg: ExperimentConfig) -> ResultTable:
    """Raw channel bandwidth vs total per-bit time, one and two tenants.

    Bandwidth cells carry six-decimal presentation rounding (halves up);
    totals are exact.
    """
    rows = []
    for vm_setup in cfg.vm_setup_grid_s:
        one = replace(cfg.timeline, users=1, vm_setup_s=float(vm_setup),
                      extra_wait_s=0.0, n_disks=1)
        two = replace(one, users=2)
        rows.append((
            tl.total_time_s(one),
            tl.round_bandwidth(tl.bandwidth_bits_per_s(one)),
            tl.total_time_s(two),
            tl.round_bandwidth(tl.bandwidth_bits_per_s(two)),
        ))
    columns = ("total_1user_s", "bandwidth_1user_bps",
               "total_2user_s", "bandwidth_2user_bps")
    return ResultTable("bandwidth_table", columns, tuple(rows),
                       _meta("bandwidth_table", cfg.config_hash, cfg.master_seed))


def run_disk_scaling(cfg: ExperimentConfig) -> ResultTable:
    """Bandwidth vs number of devices driven in parallel (exact, unrounded)."""
    base = replace(cfg.timeline, users=1, extra_wait_s=0.0, n_disks=1)
    rows = []
    for n_disks in cfg.disk_counts:
        scenario = replace(base, n_disks=int(n_disks))
        rows.append((int(n_disks), tl.total_time_s(scenario),
                     tl.bandwidth_bits_per_s(scenario)))
    columns = ("n_disks", "total_time_s", "bandwidth_bps")
    return ResultTable("disk_scaling", columns, tuple(rows),
                       _meta("disk_scaling", cfg.config_hash, cfg.master_seed))


def run_cooling_curve(cfg: ExperimentConfig) -> ResultTable:
    """Heat the device to the target excess, then record the cool-down.

    The heat-up is a single full-power stress of exactly the duration that
    lands the SSD die at ``ambient + target_excess``; the cool-down is then
    sampled on the configured cadences. Rows carry both the noisy sensor
    readings and the noise-free model values; RO cells are empty off the RO
    cadence.
    """
    env = cfg.env
    heatup_s = -env.heat_tau_ssd_s * math.log(
        1.0 - cfg.cooling_target_excess_c / env.max_excess_c)
    state = thermal.step(ThermalState.at_baseline(env), env, heatup_s, 1.0,
                         tau_ssd_s=env.heat_tau_ssd_s)
    state = ThermalState(state.t_ssd_c, state.t_fpga_c, 0.0)  # clock = cooling time
    rng = derive_rng(cfg.master_seed, "cooling-curve", env.name)
    ro_every = round(cfg.ro_interval_s / cfg.temp_interval_s)
    steps = int(round(cfg.cooling_duration_s / cfg.temp_interval_s))
    rows = []
    for index in range(steps + 1):
        ssd_read = read_ssd_temp(state, rng, cfg.ssd_noise_sigma_c)
        fpga_read = read_fpga_temp(state, rng, cfg.fpga_noise_sigma_c)
        if index % ro_every == 0:
            ro_noisy = sample_ro(cfg.ro_model, state, rng, cfg.ro_samples).mean
            ro_model = expected_count(cfg.ro_model, state.t_fpga_c)
        else:
            ro_noisy = None
            ro_model = None
        rows.append((state.clock_s, ssd_read, fpga_read, ro_noisy,
                     state.t_ssd_c, state.t_fpga_c, ro_model))
        state = thermal.cool(state, env, cfg.temp_interval_s)
    columns = ("clock_s", "ssd_temp_read_c", "fpga_temp_read_c", "ro_count_mean",
               "ssd_temp_model_c", "fpga_temp_model_c", "ro_count_model")
    name = f"cooling_curve_{env.name.replace('-', '_')}"
    metadata = _meta(name, cfg.config_hash, cfg.master_seed,
                     environment=env.name, heatup_s=heatup_s)
    return ResultTable(name, columns, tuple(rows), metadata)


def run_calibration(cfg: ExperimentConfig) -> ResultTable:
    """Per-sensor thresholds plus the analytic channel curve they imply."""
    rows = []
    for sensor in cfg.sensors:
        channel = channel_for(cfg, sensor)
        baseline = protocol.baseline_sensor_value(channel, cfg.env)
        threshold = protocol.calibrate_threshold(baseline, channel)
        for delay in cfg.delays_s:
            separation = protocol.channel_separation(channel, cfg.env, delay)
            analytic = protocol.analytic_bit_error(channel, cfg.env, delay)
            rows.append((sensor, float(delay), baseline, channel.threshold_delta,
                         threshold, separation, analytic))
    columns = ("sensor", "delay_s", "baseline", "threshold_delta", "threshold",
               "separation", "analytic_error_probability")
    return ResultTable("calibration", columns, tuple(rows),
                       _meta("calibration", cfg.config_hash, cfg.master_seed,
                             environment=cfg.env.name))
