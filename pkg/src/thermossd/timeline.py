"""Wall-clock accounting for covert transmission on shared rented hardware.

One bit costs the sender a heat-up plus, in the two-tenant case, a release
and re-rent handoff before the receiver's VM and bitstream come up and it
can measure. Channel bandwidth is bits per total wall-clock second, scaled
by how many devices are driven in parallel.
"""
from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal


@dataclass(frozen=True)
class TimelineScenario:
    """Durations of the phases that make up one transmitted bit."""

    users: int = 1
    ssd_heatup_s: float = 300.0
    user_switch_s: float = 35.0
    vm_setup_s: float = 60.0
    bitstream_load_s: float = 5.0
    extra_wait_s: float = 0.0
    measurement_s: float = 60.0
    n_disks: int = 1

    def __post_init__(self) -> None:
        if self.users not in (1, 2):
            raise ValueError("users must be 1 (same tenant) or 2 (sender + receiver)")
        if self.n_disks < 1:
            raise ValueError("n_disks must be at least 1")
        for name in ("ssd_heatup_s", "user_switch_s", "vm_setup_s",
                     "bitstream_load_s", "extra_wait_s", "measurement_s"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class PhaseEvent:
    phase: str
    actor: str
    start_s: float
    duration_s: float

    @property
    def end_s(self) -> float:
        return self.start_s + self.duration_s


def build_timeline(scenario: TimelineScenario) -> list[PhaseEvent]:
    """All phases of one bit, contiguous from t=0, in execution order.

    Zero-duration phases are kept so exported timelines always have the same
    shape for a given user count.
    """
    phases: list[tuple[str, str, float]] = [("ssd_heatup", "sender", scenario.ssd_heatup_s)]
    if scenario.users == 2:
        phases.append(("vm_release", "sender", 0.0))
        phases.append(("user_switch", "platform", scenario.user_switch_s))
    phases.extend([
        ("vm_setup", "receiver", scenario.vm_setup_s),
        ("bitstream_load", "receiver", scenario.bitstream_load_s),
        ("extra_wait", "receiver", scenario.extra_wait_s),
        ("measure", "receiver", scenario.measurement_s),
    ])
    events: list[PhaseEvent] = []
    clock = 0.0
    for phase, actor, duration in phases:
        events.append(PhaseEvent(phase, actor, clock, duration))
        clock += duration
    return events


def total_time_s(scenario: TimelineScenario) -> float:
    """Wall-clock seconds from heat-up start to measurement end."""
    return build_timeline(scenario)[-1].end_s


def effective_thermal_delay_s(scenario: TimelineScenario) -> float:
    """Seconds the die cools between stress end and measurement start.

    This is the delay the receiver's sensor actually sees, i.e. the value to
    feed a channel config's ``delay_s``.
    """
    events = {e.phase: e for e in build_timeline(scenario)}
    return events["measure"].start_s - events["ssd_heatup"].end_s


def bandwidth_bits_per_s(scenario: TimelineScenario) -> float:
    """Raw channel bandwidth: one bit per timeline, n_disks in parallel.

    Unrounded, so driving n devices scales a single-device run by exactly n.
    Presentation rounding belongs to :func:`round_bandwidth`.
    """
    total = total_time_s(scenario)
    if total <= 0.0:
        raise ValueError("timeline has zero duration")
    return scenario.n_disks / total


def round_bandwidth(value: float) -> float:
    """Six-decimal presentation rounding, halves up (0.0015625 -> 0.001563)."""
    return float(Decimal(repr(value)).quantize(Decimal("0.000001"), ROUND_HALF_UP))


def events_to_rows(events: list[PhaseEvent]) -> tuple[tuple[str, ...], list[tuple]]:
    """CSV-ready (columns, rows) for a timeline."""
    columns = ("phase", "actor", "start_s", "duration_s")
    return columns, [(e.phase, e.actor, e.start_s, e.duration_s) for e in events]
