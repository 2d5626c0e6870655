"""thermossd: deterministic thermal-coupling simulator and covert-channel
protocol library for SSD+FPGA computational storage devices."""
from __future__ import annotations

from .config import ConfigError, ExperimentConfig, default_config, load_config
from .protocol import (
    BitTrace,
    ChannelConfig,
    analytic_bit_error,
    calibrate_threshold,
    channel_separation,
    decide_bit,
    default_channel_config,
    default_threshold_delta,
    encode_bit,
    error_probability,
    expected_sensor_values,
    manchester_decode,
    manchester_encode,
    send_message,
    transmit,
)
from .sensing import (
    BaselineStats,
    RoMeasurement,
    RoSensorModel,
    calibrate_baseline,
    expected_count,
    read_fpga_temp,
    read_ssd_temp,
    round_half_up,
    sample_ro,
)
from .thermal import (
    PRESETS,
    Environment,
    ThermalState,
    cool,
    step,
    time_to_within,
)
from .timeline import (
    PhaseEvent,
    TimelineScenario,
    bandwidth_bits_per_s,
    build_timeline,
    effective_thermal_delay_s,
    round_bandwidth,
    total_time_s,
)
from .workload import (
    StressProfile,
    from_fio_job,
    heat_power,
    run_stress,
    to_fio_job,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "BaselineStats", "BitTrace", "ChannelConfig", "ConfigError", "Environment",
    "ExperimentConfig", "PhaseEvent", "PRESETS", "RoMeasurement", "RoSensorModel",
    "StressProfile", "ThermalState", "TimelineScenario", "analytic_bit_error",
    "bandwidth_bits_per_s", "build_timeline", "calibrate_baseline",
    "calibrate_threshold", "channel_separation", "cool", "decide_bit",
    "default_channel_config", "default_config", "default_threshold_delta",
    "effective_thermal_delay_s", "encode_bit", "error_probability",
    "expected_count", "expected_sensor_values", "from_fio_job", "heat_power",
    "load_config", "manchester_decode", "manchester_encode", "read_fpga_temp",
    "read_ssd_temp", "round_bandwidth", "round_half_up", "run_stress",
    "sample_ro", "send_message", "step", "time_to_within", "to_fio_job",
    "total_time_s", "transmit", "validate",
]
