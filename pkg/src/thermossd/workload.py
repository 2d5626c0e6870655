"""Synthetic write-stress profiles and their thermal drive level.

A profile mirrors the knobs of an fio job file. Only knob combinations that
were exercised on hardware are accepted; anything else is rejected rather
than extrapolated. The drive level peaks at 4 parallel jobs writing 8 GB
files and falls off with the squared distance in doubling steps from that
point — more jobs or bigger files just thrash the controller without pushing
more sustained heat into the die.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .thermal import Environment, ThermalState, step

TESTED_NUMJOBS = (1, 2, 4, 8, 16, 32, 64)
TESTED_SIZES_GB = (1, 2, 4, 8, 16, 32, 64, 128)
TESTED_RUNTIMES_S = (60, 70, 80, 120, 240, 300)

PEAK_NUMJOBS = 4
PEAK_SIZE_GB = 8
_FALLOFF = 0.15  # heat-power loss per squared doubling step away from the peak


@dataclass(frozen=True)
class StressProfile:
    """One synthetic write-stress job."""

    numjobs: int = 4
    size_gb: int = 8
    runtime_s: int = 60
    ioengine: str = "posixaio"
    rw: str = "randwrite"
    bs_kb: int = 64
    iodepth: int = 16
    time_based: bool = True
    end_fsync: bool = True


def validate(profile: StressProfile) -> str | None:
    """Return a message naming the first offending field, or None if valid."""
    if profile.numjobs not in TESTED_NUMJOBS:
        return f"numjobs={profile.numjobs} outside tested set {TESTED_NUMJOBS}"
    if profile.size_gb not in TESTED_SIZES_GB:
        return f"size_gb={profile.size_gb} outside tested set {TESTED_SIZES_GB}"
    if profile.runtime_s not in TESTED_RUNTIMES_S:
        return f"runtime_s={profile.runtime_s} outside tested set {TESTED_RUNTIMES_S}"
    if profile.ioengine != "posixaio":
        return f"ioengine={profile.ioengine!r} unsupported (only 'posixaio' was tested)"
    if profile.rw != "randwrite":
        return f"rw={profile.rw!r} unsupported (only 'randwrite' heats the controller)"
    if profile.bs_kb != 64:
        return f"bs_kb={profile.bs_kb} unsupported (tested block size is 64 KB)"
    if profile.iodepth != 16:
        return f"iodepth={profile.iodepth} unsupported (tested depth is 16)"
    if profile.time_based is not True:
        return "time_based must be set; sized runs end too early to heat the die"
    if profile.end_fsync is not True:
        return "end_fsync must be set; buffered tails distort the heating window"
    return None


def require_valid(profile: StressProfile) -> None:
    message = validate(profile)
    if message is not None:
        raise ValueError(message)


def heat_power(profile: StressProfile) -> float:
    """Normalized thermal drive in (0, 1]; 1.0 at the 4-job/8 GB peak."""
    require_valid(profile)
    dn = math.log2(profile.numjobs) - math.log2(PEAK_NUMJOBS)
    ds = math.log2(profile.size_gb) - math.log2(PEAK_SIZE_GB)
    return 1.0 / (1.0 + _FALLOFF * (dn * dn + ds * ds))


def run_stress(state: ThermalState, env: Environment, profile: StressProfile) -> ThermalState:
    """Apply ``profile`` for its full runtime and return the heated state."""
    require_valid(profile)
    return step(state, env, float(profile.runtime_s), heat_power(profile),
                tau_ssd_s=env.heat_tau_ssd_s)


def to_fio_job(profile: StressProfile, name: str = "stress") -> str:
    """Serialize to fio job-file syntax."""
    require_valid(profile)
    lines = [
        f"[{name}]",
        f"ioengine={profile.ioengine}",
        f"rw={profile.rw}",
        f"bs={profile.bs_kb}k",
        f"size={profile.size_gb}G",
        f"numjobs={profile.numjobs}",
        f"iodepth={profile.iodepth}",
        f"runtime={profile.runtime_s}",
    ]
    if profile.time_based:
        lines.append("time_based")
    if profile.end_fsync:
        lines.append("end_fsync=1")
    return "\n".join(lines) + "\n"


_TRUE_WORDS = {"1", "true", "yes", "on"}


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw, 10)
    except ValueError:
        raise ValueError(f"fio job: bad integer for {key}: {raw!r}") from None


def _parse_scaled(key: str, raw: str, unit_bytes: int) -> int:
    """Parse fio size syntax like 8G / 8192M / 65536 into multiples of unit_bytes.

    Bare numbers are bytes, per fio convention.
    """
    text = raw.strip()
    suffixes = {"k": 1 << 10, "m": 1 << 20, "g": 1 << 30, "t": 1 << 40}
    scale = 1
    if text and text[-1].lower() in suffixes:
        scale = suffixes[text[-1].lower()]
        text = text[:-1]
    value = _parse_int(key, text) * scale
    if value % unit_bytes:
        raise ValueError(f"fio job: {key}={raw!r} is not a whole number of units")
    return value // unit_bytes


def from_fio_job(text: str) -> StressProfile:
    """Parse fio job-file syntax back into a profile.

    Tolerant on purpose: section headers and comments are skipped, bare keys
    are treated as boolean flags, size suffixes are normalized, and unknown
    keys are ignored so jobs written for real fio still load.
    """
    values: dict[str, object] = {}
    for raw_line in text.splitlines():
        line = raw_line.strip()
        if not line or line.startswith(("#", ";")) or line.startswith("["):
            continue
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key == "numjobs":
            values["numjobs"] = _parse_int(key, raw)
        elif key == "size":
            values["size_gb"] = _parse_scaled(key, raw, 1 << 30)
        elif key == "runtime":
            values["runtime_s"] = _parse_int(key, raw)
        elif key == "ioengine":
            values["ioengine"] = raw
        elif key == "rw":
            values["rw"] = raw
        elif key == "bs":
            values["bs_kb"] = _parse_scaled(key, raw, 1 << 10)
        elif key == "iodepth":
            values["iodepth"] = _parse_int(key, raw)
        elif key == "time_based":
            values["time_based"] = raw == "" or raw.lower() in _TRUE_WORDS
        elif key == "end_fsync":
            values["end_fsync"] = raw == "" or raw.lower() in _TRUE_WORDS
        # anything else is a real fio knob we don't model; skip it
    known = {f.name for f in fields(StressProfile)}
    assert set(values) <= known
    return StressProfile(**values)  # type: ignore[arg-type]
