"""On-off keyed signaling over the thermal coupling.

A sender encodes 1 as a full stress run and 0 as an equally long idle; the
receiver waits a fixed delay, reads one sensor, and compares against a
threshold placed a fixed delta away from the idle baseline. The module also
carries the closed-form analytics (expected sensor values, separation, and
raw bit-error probability) that the Monte Carlo sweeps are checked against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import thermal, workload
from .sensing import (
    DEFAULT_TEMP_SIGMA_C,
    RO_SAMPLES_PER_BATCH,
    BaselineStats,
    RoSensorModel,
    expected_count,
    read_fpga_temp,
    read_ssd_temp,
    sample_ro,
)
from .thermal import Environment, ThermalState
from .workload import StressProfile

SENSORS = ("ssd_temp", "fpga_temp", "ro_counts")
ENCODINGS = ("ook", "manchester")

# Thresholds sit half the noiseless separation at this delay away from the
# baseline. Anchoring at the far edge of the reliable window (rather than at
# the shortest delay) keeps the threshold below the separation everywhere the
# channel is meant to operate, so a noiseless transmission decodes exactly.
REFERENCE_DELAY_S = 240.0

DEFAULT_HEAT_RUNTIME_S = 300
DEFAULT_DELAY_S = 60.0
DEFAULT_INTER_BIT_IDLE_S = 900.0


def _default_heat_profile() -> StressProfile:
    return StressProfile(runtime_s=DEFAULT_HEAT_RUNTIME_S)


@dataclass(frozen=True)
class ChannelConfig:
    """Everything both ends must agree on before transmitting."""

    threshold_delta: float
    sensor: str = "ssd_temp"
    encoding: str = "ook"
    heat_profile: StressProfile = field(default_factory=_default_heat_profile)
    delay_s: float = DEFAULT_DELAY_S
    inter_bit_idle_s: float = DEFAULT_INTER_BIT_IDLE_S
    ro_model: RoSensorModel = field(default_factory=RoSensorModel)
    ro_samples: int = RO_SAMPLES_PER_BATCH
    ssd_noise_sigma_c: float = DEFAULT_TEMP_SIGMA_C
    fpga_noise_sigma_c: float = DEFAULT_TEMP_SIGMA_C

    def __post_init__(self) -> None:
        if self.sensor not in SENSORS:
            raise ValueError(f"sensor must be one of {SENSORS}")
        if self.encoding not in ENCODINGS:
            raise ValueError(f"encoding must be one of {ENCODINGS}")
        if self.threshold_delta <= 0.0:
            raise ValueError("threshold_delta must be positive")
        if self.delay_s < 0.0:
            raise ValueError("delay_s must be non-negative")
        if self.inter_bit_idle_s < 0.0:
            raise ValueError("inter_bit_idle_s must be non-negative")
        if self.ro_samples < 1:
            raise ValueError("ro_samples must be at least 1")
        if self.ssd_noise_sigma_c < 0.0 or self.fpga_noise_sigma_c < 0.0:
            raise ValueError("sensor noise sigmas must be non-negative")
        workload.require_valid(self.heat_profile)


@dataclass(frozen=True)
class SenderAction:
    """What the sender does for one wire symbol."""

    kind: str  # "stress" | "idle"
    duration_s: float
    profile: StressProfile | None


@dataclass(frozen=True)
class BitTrace:
    """Receiver-side record of one transmitted wire symbol."""

    bit_index: int
    sent: int
    measured: float
    threshold: float
    decoded: int
    clock_s: float


def _check_bit(bit: int) -> int:
    if bit not in (0, 1):
        raise ValueError(f"bits must be 0 or 1, got {bit!r}")
    return int(bit)


def encode_bit(bit: int, config: ChannelConfig) -> SenderAction:
    """Map one wire symbol to a sender action of fixed duration."""
    if _check_bit(bit) == 1:
        return SenderAction("stress", float(config.heat_profile.runtime_s),
                            config.heat_profile)
    return SenderAction("idle", float(config.heat_profile.runtime_s), None)


def manchester_encode(bits: list[int]) -> list[int]:
    """Expand each bit into the symbol pair (b, 1-b)."""
    out: list[int] = []
    for bit in bits:
        b = _check_bit(bit)
        out.extend((b, 1 - b))
    return out


def manchester_decode(symbols: list[int]) -> list[int | None]:
    """Collapse symbol pairs back to bits; invalid pairs become None erasures."""
    if len(symbols) % 2:
        raise ValueError("manchester stream must have even length")
    out: list[int | None] = []
    for a, b in zip(symbols[::2], symbols[1::2]):
        out.append(_check_bit(a) if _check_bit(a) != _check_bit(b) else None)
    return out


def baseline_sensor_value(config: ChannelConfig, env: Environment) -> float:
    """Noise-free sensor reading on an idle device, in sensor units."""
    if config.sensor == "ssd_temp":
        return env.ambient_ssd_c
    if config.sensor == "fpga_temp":
        return env.ambient_fpga_c
    return expected_count(config.ro_model, env.ambient_fpga_c)


def calibrate_threshold(baseline: BaselineStats | float, config: ChannelConfig) -> float:
    """Place the decision threshold ``threshold_delta`` away from baseline.

    Temperature sensors read hotter for 1, so the threshold sits above the
    baseline; RO counts drop as the die warms, so it sits below.
    """
    if isinstance(baseline, BaselineStats):
        base = baseline.mean_for(config.sensor)
    else:
        base = float(baseline)
    if config.sensor == "ro_counts":
        return base - config.threshold_delta
    return base + config.threshold_delta


def decide_bit(measured: float, threshold: float, sensor: str) -> int:
    """Threshold decision; ties decode as 1."""
    if sensor not in SENSORS:
        raise ValueError(f"sensor must be one of {SENSORS}")
    if sensor == "ro_counts":
        return 1 if measured <= threshold else 0
    return 1 if measured >= threshold else 0


def _measure(state: ThermalState, config: ChannelConfig, rng: np.random.Generator) -> float:
    if config.sensor == "ssd_temp":
        return float(read_ssd_temp(state, rng, config.ssd_noise_sigma_c))
    if config.sensor == "fpga_temp":
        return float(read_fpga_temp(state, rng, config.fpga_noise_sigma_c))
    return sample_ro(config.ro_model, state, rng, config.ro_samples).mean


def transmit(
    bits: list[int],
    config: ChannelConfig,
    env: Environment,
    rng: np.random.Generator,
    baseline: BaselineStats | float | None = None,
) -> list[BitTrace]:
    """Send a wire-symbol sequence end to end and return per-symbol traces.

    The device starts at the idle baseline. For each symbol the sender
    stresses or idles for the profile runtime, the receiver waits
    ``delay_s`` and takes one reading, and (between symbols) the device
    idles ``inter_bit_idle_s`` so residual heat from the previous symbol
    does not masquerade as the next one.

    ``baseline`` defaults to the analytic idle reading; pass measured
    :class:`BaselineStats` to emulate a receiver that calibrated itself.
    """
    symbols = [_check_bit(b) for b in bits]
    if not symbols:
        raise ValueError("bit sequence must not be empty")
    base = baseline if baseline is not None else baseline_sensor_value(config, env)
    threshold = calibrate_threshold(base, config)

    state = ThermalState.at_baseline(env)
    traces: list[BitTrace] = []
    for index, bit in enumerate(symbols):
        action = encode_bit(bit, config)
        if action.kind == "stress":
            state = workload.run_stress(state, env, action.profile)
        else:
            state = thermal.cool(state, env, action.duration_s)
        state = thermal.cool(state, env, config.delay_s)
        measured = _measure(state, config, rng)
        decoded = decide_bit(measured, threshold, config.sensor)
        traces.append(BitTrace(index, bit, measured, threshold, decoded, state.clock_s))
        if index + 1 < len(symbols):
            state = thermal.cool(state, env, config.inter_bit_idle_s)
    return traces


def send_message(
    bits: list[int],
    config: ChannelConfig,
    env: Environment,
    rng: np.random.Generator,
    baseline: BaselineStats | float | None = None,
) -> tuple[list[BitTrace], list[int | None]]:
    """Encode, transmit, and decode a logical message.

    Returns the wire-level traces and the decoded logical bits (with None
    erasures where a manchester pair was invalid).
    """
    logical = [_check_bit(b) for b in bits]
    wire = manchester_encode(logical) if config.encoding == "manchester" else logical
    traces = transmit(wire, config, env, rng, baseline)
    symbols = [t.decoded for t in traces]
    if config.encoding == "manchester":
        return traces, manchester_decode(symbols)
    return traces, list(symbols)


def traces_to_rows(traces: list[BitTrace]) -> tuple[tuple[str, ...], list[tuple]]:
    """CSV-ready (columns, rows) for a trace list."""
    columns = ("bit_index", "sent", "measured", "threshold", "decoded", "clock_s")
    rows = [(t.bit_index, t.sent, t.measured, t.threshold, t.decoded, t.clock_s)
            for t in traces]
    return columns, rows


# ---------------------------------------------------------------------------
# closed-form analytics
# ---------------------------------------------------------------------------

def _gaussian_tail(x: float) -> float:
    """P(Z > x) for standard normal Z."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def error_probability(separation: float, sigma: float, threshold_offset: float = 0.0) -> float:
    """Raw bit error rate for equiprobable bits over a Gaussian channel.

    ``separation`` is the distance between the two noiseless symbol means (in
    the direction that favors 1), ``threshold_offset`` the threshold's
    displacement from their midpoint toward the 1 side, and ``sigma`` the
    noise on one decision statistic. At sigma=0 the step-function limit is
    returned, so a zero-separation midpoint threshold still yields 0.5.
    """
    if sigma < 0.0:
        raise ValueError("sigma must be non-negative")
    margins = (0.5 * separation + threshold_offset, 0.5 * separation - threshold_offset)
    if sigma == 0.0:
        def tail(m: float) -> float:
            return 0.0 if m > 0.0 else (0.5 if m == 0.0 else 1.0)
        return 0.5 * (tail(margins[0]) + tail(margins[1]))
    return 0.5 * (_gaussian_tail(margins[0] / sigma) + _gaussian_tail(margins[1] / sigma))


def expected_sensor_values(config: ChannelConfig, env: Environment,
                           delay_s: float | None = None) -> tuple[float, float]:
    """Noise-free sensor means (value for 0, value for 1) for one cold-start bit."""
    delay = config.delay_s if delay_s is None else float(delay_s)
    if delay < 0.0:
        raise ValueError("delay_s must be non-negative")
    v0 = baseline_sensor_value(config, env)
    state = ThermalState.at_baseline(env)
    state = workload.run_stress(state, env, config.heat_profile)
    state = thermal.cool(state, env, delay)
    if config.sensor == "ssd_temp":
        v1 = state.t_ssd_c
    elif config.sensor == "fpga_temp":
        v1 = state.t_fpga_c
    else:
        v1 = expected_count(config.ro_model, state.t_fpga_c)
    return v0, v1


def channel_separation(config: ChannelConfig, env: Environment,
                       delay_s: float | None = None) -> float:
    """Magnitude of the noiseless sensor swing between 0 and 1."""
    v0, v1 = expected_sensor_values(config, env, delay_s)
    return abs(v1 - v0)


def analytic_bit_error(config: ChannelConfig, env: Environment,
                       delay_s: float | None = None,
                       baseline: BaselineStats | float | None = None) -> float:
    """Exact raw bit error rate of the threshold receiver for one bit.

    Accounts for integer quantization of the temperature sensors: an integer
    reading passes a threshold T exactly when the pre-rounding value reaches
    ceil(T) - 0.5, so that is the effective cut the Gaussian noise sees.
    """
    base = baseline if baseline is not None else baseline_sensor_value(config, env)
    threshold = calibrate_threshold(base, config)
    v0, v1 = expected_sensor_values(config, env, delay_s)
    if config.sensor == "ro_counts":
        sigma = config.ro_model.noise_sigma_counts / math.sqrt(config.ro_samples)
        separation = v0 - v1
        offset = 0.5 * (v0 + v1) - threshold
    else:
        sigma = (config.ssd_noise_sigma_c if config.sensor == "ssd_temp"
                 else config.fpga_noise_sigma_c)
        cut = math.ceil(threshold) - 0.5
        separation = v1 - v0
        offset = cut - 0.5 * (v0 + v1)
    return error_probability(separation, sigma, offset)


def default_threshold_delta(sensor: str, env: Environment, *,
                            heat_profile: StressProfile | None = None,
                            ro_model: RoSensorModel | None = None,
                            reference_delay_s: float = REFERENCE_DELAY_S) -> float:
    """Half the noiseless separation at the reference delay."""
    probe = ChannelConfig(
        threshold_delta=1.0,  # placeholder; separation does not depend on it
        sensor=sensor,
        heat_profile=heat_profile if heat_profile is not None else _default_heat_profile(),
        ro_model=ro_model if ro_model is not None else RoSensorModel(),
    )
    return 0.5 * channel_separation(probe, env, reference_delay_s)


def default_channel_config(sensor: str, env: Environment, **overrides) -> ChannelConfig:
    """A ready-to-use config with the threshold calibrated for ``env``."""
    delta = overrides.pop("threshold_delta", None)
    if delta is None:
        delta = default_threshold_delta(
            sensor, env,
            heat_profile=overrides.get("heat_profile"),
            ro_model=overrides.get("ro_model"),
        )
    return ChannelConfig(threshold_delta=delta, sensor=sensor, **overrides)
