"""TOML experiment configuration: parsing, schema validation, canonical hash.

A config file selects an environment preset (optionally overriding its
fields), the sensor models, the channel settings, the sweep grids, and the
Monte Carlo parameters. Every run's outputs embed a SHA-256 hash of the
fully resolved configuration so results can be traced back to their inputs.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

try:
    import tomllib  # Python 3.11+
except ModuleNotFoundError:  # pragma: no cover - 3.10 fallback
    import tomli as tomllib

from . import protocol, workload
from .sensing import DEFAULT_TEMP_SIGMA_C, RO_SAMPLES_PER_BATCH, RoSensorModel
from .thermal import PRESETS, Environment
from .timeline import TimelineScenario
from .workload import StressProfile

CONFIG_VERSION = 1


class ConfigError(ValueError):
    """A config file failed schema or range validation."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved inputs for every experiment runner."""

    env: Environment = PRESETS["university"]
    ssd_noise_sigma_c: float = DEFAULT_TEMP_SIGMA_C
    fpga_noise_sigma_c: float = DEFAULT_TEMP_SIGMA_C
    ro_model: RoSensorModel = field(default_factory=RoSensorModel)
    ro_samples: int = RO_SAMPLES_PER_BATCH
    heat_profile: StressProfile = field(
        default_factory=lambda: StressProfile(runtime_s=protocol.DEFAULT_HEAT_RUNTIME_S))
    encoding: str = "ook"
    inter_bit_idle_s: float = protocol.DEFAULT_INTER_BIT_IDLE_S
    threshold_deltas: dict[str, float] = field(default_factory=dict)
    sensors: tuple[str, ...] = ("ssd_temp", "ro_counts")
    delays_s: tuple[float, ...] = (60.0, 120.0, 180.0, 240.0, 300.0, 360.0)
    vm_setup_grid_s: tuple[float, ...] = (60.0, 120.0, 180.0, 240.0, 300.0, 360.0)
    extra_wait_grid_s: tuple[float, ...] = (0.0, 30.0, 60.0)
    disk_counts: tuple[int, ...] = (1, 2, 4, 8)
    timeline: TimelineScenario = field(default_factory=TimelineScenario)
    cooling_target_excess_c: float = 10.0
    cooling_duration_s: float = 600.0
    temp_interval_s: float = 15.0
    ro_interval_s: float = 30.0
    trials: int = 500
    master_seed: int = 0
    out_dir: str = "results"
    out_format: str = "csv"
    config_hash: str = field(init=False, default="")

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ConfigError("monte_carlo.trials must be at least 1")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigError("monte_carlo.master_seed must fit in 64 bits")
        if self.out_format not in ("csv", "json"):
            raise ConfigError("output.format must be 'csv' or 'json'")
        if not self.sensors:
            raise ConfigError("grid.sensors must not be empty")
        for sensor in self.sensors:
            if sensor not in protocol.SENSORS:
                raise ConfigError(f"grid.sensors: unknown sensor {sensor!r}")
        for name in ("delays_s", "vm_setup_grid_s", "extra_wait_grid_s"):
            values = getattr(self, name)
            if not values:
                raise ConfigError(f"grid.{name} must not be empty")
            if any(v < 0 for v in values):
                raise ConfigError(f"grid.{name} entries must be non-negative")
        if not self.disk_counts or any(n < 1 for n in self.disk_counts):
            raise ConfigError("grid.disk_counts entries must be positive")
        if self.encoding not in protocol.ENCODINGS:
            raise ConfigError(f"channel.encoding must be one of {protocol.ENCODINGS}")
        if self.inter_bit_idle_s < 0:
            raise ConfigError("channel.inter_bit_idle_s must be non-negative")
        if self.ro_samples < 1:
            raise ConfigError("sensor.ro.samples_per_batch must be at least 1")
        if self.ssd_noise_sigma_c < 0 or self.fpga_noise_sigma_c < 0:
            raise ConfigError("sensor noise sigmas must be non-negative")
        for sensor, delta in self.threshold_deltas.items():
            if sensor not in protocol.SENSORS:
                raise ConfigError(f"channel.threshold_delta: unknown sensor {sensor!r}")
            if delta <= 0:
                raise ConfigError("channel.threshold_delta values must be positive")
        message = workload.validate(self.heat_profile)
        if message is not None:
            raise ConfigError(f"channel.heat_profile: {message}")
        if not 0 < self.cooling_target_excess_c < self.env.max_excess_c:
            raise ConfigError(
                "cooling.target_excess_c must lie strictly between 0 and the "
                f"environment's max_excess_c ({self.env.max_excess_c})")
        if self.cooling_duration_s <= 0 or self.temp_interval_s <= 0:
            raise ConfigError("cooling durations must be positive")
        ratio = self.ro_interval_s / self.temp_interval_s
        if self.ro_interval_s <= 0 or abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigError(
                "cooling.ro_interval_s must be a positive multiple of temp_interval_s")
        object.__setattr__(self, "config_hash", _hash_config(self))


def canonical_dict(cfg: ExperimentConfig) -> dict:
    """The result-determining config fields as plain data.

    Output location and syntax are presentation choices, so they stay out of
    the hash: rerunning the same experiment into a different directory must
    produce files identical down to the recorded config_hash.
    """
    data = asdict(cfg)
    data.pop("config_hash")
    data.pop("out_dir")
    data.pop("out_format")
    return data


def _hash_config(cfg: ExperimentConfig) -> str:
    blob = json.dumps(canonical_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def default_config(preset: str = "university") -> ExperimentConfig:
    if preset not in PRESETS:
        raise ConfigError(f"unknown environment preset {preset!r}; "
                          f"choose from {sorted(PRESETS)}")
    return ExperimentConfig(env=PRESETS[preset])


# ---------------------------------------------------------------------------
# TOML parsing
# ---------------------------------------------------------------------------

_MISSING = object()


def _typed(value, kind: str, path: str):
    if kind == "int":
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif kind == "float":
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif kind == "str":
        ok = isinstance(value, str)
    elif kind == "bool":
        ok = isinstance(value, bool)
    else:  # pragma: no cover - programmer error
        raise AssertionError(kind)
    if not ok:
        raise ConfigError(f"{path}: expected {kind}, got {type(value).__name__}")
    return float(value) if kind == "float" else value


def _take(table: dict, key: str, kind: str, default, path: str):
    if key not in table:
        return default
    return _typed(table.pop(key), kind, f"{path}.{key}")


def _take_list(table: dict, key: str, kind: str, default, path: str) -> tuple:
    if key not in table:
        return default
    raw = table.pop(key)
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{path}.{key}: expected a non-empty list")
    return tuple(_typed(v, kind, f"{path}.{key}[{i}]") for i, v in enumerate(raw))


def _section(data: dict, name: str) -> dict:
    raw = data.pop(name, {})
    if not isinstance(raw, dict):
        raise ConfigError(f"[{name}] must be a table")
    return dict(raw)


def _reject_unknown(table: dict, path: str) -> None:
    if table:
        raise ConfigError(f"unknown key {path}.{sorted(table)[0]}")


def parse_config(data: dict, source: str = "<dict>") -> ExperimentConfig:
    """Validate a parsed TOML document and resolve it against the defaults."""
    data = dict(data)
    version = data.pop("config_version", _MISSING)
    if version is _MISSING:
        raise ConfigError(f"{source}: config_version is required")
    if version != CONFIG_VERSION:
        raise ConfigError(f"{source}: unsupported config_version {version!r} "
                          f"(this build reads version {CONFIG_VERSION})")

    env_tbl = _section(data, "environment")
    preset = _take(env_tbl, "preset", "str", "university", "environment")
    if preset not in PRESETS:
        raise ConfigError(f"environment.preset: unknown preset {preset!r}; "
                          f"choose from {sorted(PRESETS)}")
    env = PRESETS[preset]
    env_overrides = {}
    for fname in ("ambient_ssd_c", "ambient_fpga_c", "tau_ssd_s", "tau_fpga_s",
                  "heat_tau_ssd_s", "coupling", "max_excess_c"):
        value = _take(env_tbl, fname, "float", _MISSING, "environment")
        if value is not _MISSING:
            env_overrides[fname] = value
    _reject_unknown(env_tbl, "environment")
    try:
        env = replace(env, **env_overrides) if env_overrides else env
    except ValueError as exc:
        raise ConfigError(f"environment: {exc}") from None

    defaults = ExperimentConfig(env=env)

    sensor_tbl = _section(data, "sensor")
    ro_tbl = _section(sensor_tbl, "ro")
    ssd_sigma = _take(sensor_tbl, "ssd_noise_sigma_c", "float",
                      defaults.ssd_noise_sigma_c, "sensor")
    fpga_sigma = _take(sensor_tbl, "fpga_noise_sigma_c", "float",
                       defaults.fpga_noise_sigma_c, "sensor")
    _reject_unknown(sensor_tbl, "sensor")
    ro_defaults = defaults.ro_model
    ro_kwargs = {
        "count_at_ref": _take(ro_tbl, "count_at_ref", "float",
                              ro_defaults.count_at_ref, "sensor.ro"),
        "ref_temp_c": _take(ro_tbl, "ref_temp_c", "float",
                            ro_defaults.ref_temp_c, "sensor.ro"),
        "slope_counts_per_c": _take(ro_tbl, "slope_counts_per_c", "float",
                                    ro_defaults.slope_counts_per_c, "sensor.ro"),
        "noise_sigma_counts": _take(ro_tbl, "noise_sigma_counts", "float",
                                    ro_defaults.noise_sigma_counts, "sensor.ro"),
        "window_s": _take(ro_tbl, "window_s", "float", ro_defaults.window_s, "sensor.ro"),
    }
    ro_samples = _take(ro_tbl, "samples_per_batch", "int", defaults.ro_samples, "sensor.ro")
    _reject_unknown(ro_tbl, "sensor.ro")
    try:
        ro_model = RoSensorModel(**ro_kwargs)
    except ValueError as exc:
        raise ConfigError(f"sensor.ro: {exc}") from None

    channel_tbl = _section(data, "channel")
    profile_tbl = _section(channel_tbl, "heat_profile")
    delta_tbl = _section(channel_tbl, "threshold_delta")
    encoding = _take(channel_tbl, "encoding", "str", defaults.encoding, "channel")
    inter_bit = _take(channel_tbl, "inter_bit_idle_s", "float",
                      defaults.inter_bit_idle_s, "channel")
    _reject_unknown(channel_tbl, "channel")
    thresholds = {key: _typed(value, "float", f"channel.threshold_delta.{key}")
                  for key, value in delta_tbl.items()}
    base_profile = defaults.heat_profile
    profile_kwargs = {
        "numjobs": _take(profile_tbl, "numjobs", "int", base_profile.numjobs,
                         "channel.heat_profile"),
        "size_gb": _take(profile_tbl, "size_gb", "int", base_profile.size_gb,
                         "channel.heat_profile"),
        "runtime_s": _take(profile_tbl, "runtime_s", "int", base_profile.runtime_s,
                           "channel.heat_profile"),
        "ioengine": _take(profile_tbl, "ioengine", "str", base_profile.ioengine,
                          "channel.heat_profile"),
        "rw": _take(profile_tbl, "rw", "str", base_profile.rw, "channel.heat_profile"),
        "bs_kb": _take(profile_tbl, "bs_kb", "int", base_profile.bs_kb,
                       "channel.heat_profile"),
        "iodepth": _take(profile_tbl, "iodepth", "int", base_profile.iodepth,
                         "channel.heat_profile"),
        "time_based": _take(profile_tbl, "time_based", "bool", base_profile.time_based,
                            "channel.heat_profile"),
        "end_fsync": _take(profile_tbl, "end_fsync", "bool", base_profile.end_fsync,
                           "channel.heat_profile"),
    }
    _reject_unknown(profile_tbl, "channel.heat_profile")
    heat_profile = StressProfile(**profile_kwargs)

    grid_tbl = _section(data, "grid")
    sensors = tuple(_take_list(grid_tbl, "sensors", "str", defaults.sensors, "grid"))
    delays = _take_list(grid_tbl, "delays_s", "float", defaults.delays_s, "grid")
    vm_grid = _take_list(grid_tbl, "vm_setup_s", "float", defaults.vm_setup_grid_s, "grid")
    extra_grid = _take_list(grid_tbl, "extra_wait_s", "float",
                            defaults.extra_wait_grid_s, "grid")
    disks = _take_list(grid_tbl, "disk_counts", "int", defaults.disk_counts, "grid")
    _reject_unknown(grid_tbl, "grid")

    tl_tbl = _section(data, "timeline")
    tl_defaults = defaults.timeline
    try:
        scenario = TimelineScenario(
            users=1,
            ssd_heatup_s=_take(tl_tbl, "ssd_heatup_s", "float",
                               tl_defaults.ssd_heatup_s, "timeline"),
            user_switch_s=_take(tl_tbl, "user_switch_s", "float",
                                tl_defaults.user_switch_s, "timeline"),
            vm_setup_s=_take(tl_tbl, "vm_setup_s", "float",
                             tl_defaults.vm_setup_s, "timeline"),
            bitstream_load_s=_take(tl_tbl, "bitstream_load_s", "float",
                                   tl_defaults.bitstream_load_s, "timeline"),
            measurement_s=_take(tl_tbl, "measurement_s", "float",
                                tl_defaults.measurement_s, "timeline"),
        )
    except ValueError as exc:
        raise ConfigError(f"timeline: {exc}") from None
    _reject_unknown(tl_tbl, "timeline")

    cool_tbl = _section(data, "cooling")
    target = _take(cool_tbl, "target_excess_c", "float",
                   defaults.cooling_target_excess_c, "cooling")
    duration = _take(cool_tbl, "duration_s", "float",
                     defaults.cooling_duration_s, "cooling")
    temp_int = _take(cool_tbl, "temp_interval_s", "float",
                     defaults.temp_interval_s, "cooling")
    ro_int = _take(cool_tbl, "ro_interval_s", "float", defaults.ro_interval_s, "cooling")
    _reject_unknown(cool_tbl, "cooling")

    mc_tbl = _section(data, "monte_carlo")
    trials = _take(mc_tbl, "trials", "int", defaults.trials, "monte_carlo")
    seed = _take(mc_tbl, "master_seed", "int", defaults.master_seed, "monte_carlo")
    _reject_unknown(mc_tbl, "monte_carlo")

    out_tbl = _section(data, "output")
    out_dir = _take(out_tbl, "directory", "str", defaults.out_dir, "output")
    out_format = _take(out_tbl, "format", "str", defaults.out_format, "output")
    _reject_unknown(out_tbl, "output")

    if data:
        raise ConfigError(f"{source}: unknown top-level key {sorted(data)[0]!r}")

    return ExperimentConfig(
        env=env,
        ssd_noise_sigma_c=ssd_sigma,
        fpga_noise_sigma_c=fpga_sigma,
        ro_model=ro_model,
        ro_samples=ro_samples,
        heat_profile=heat_profile,
        encoding=encoding,
        inter_bit_idle_s=inter_bit,
        threshold_deltas=thresholds,
        sensors=sensors,
        delays_s=delays,
        vm_setup_grid_s=vm_grid,
        extra_wait_grid_s=extra_grid,
        disk_counts=disks,
        timeline=scenario,
        cooling_target_excess_c=target,
        cooling_duration_s=duration,
        temp_interval_s=temp_int,
        ro_interval_s=ro_int,
        trials=trials,
        master_seed=seed,
        out_dir=out_dir,
        out_format=out_format,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a TOML config file."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from None
    return parse_config(data, source=str(path))


def with_cli_overrides(cfg: ExperimentConfig, *, seed: int | None = None,
                       out_dir: str | None = None, out_format: str | None = None,
                       env_name: str | None = None) -> ExperimentConfig:
    """Apply command-line overrides; --env selects a pristine preset."""
    changes: dict = {}
    if seed is not None:
        changes["master_seed"] = seed
    if out_dir is not None:
        changes["out_dir"] = str(out_dir)
    if out_format is not None:
        changes["out_format"] = out_format
    if env_name is not None:
        if env_name not in PRESETS:
            raise ConfigError(f"unknown environment preset {env_name!r}; "
                              f"choose from {sorted(PRESETS)}")
        changes["env"] = PRESETS[env_name]
    return replace(cfg, **changes) if changes else cfg
