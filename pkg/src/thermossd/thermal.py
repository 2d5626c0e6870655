"""Two-node lumped thermal model of a computational storage device.

The SSD controller die is driven directly by write load; the FPGA die sits in
the same package and couples to the SSD through a fixed fraction of its
excess temperature. Both nodes relax exponentially toward their targets, so
the state update has a closed form and a simulation step is *exact* for any
step size: advancing by ``dt`` once equals advancing by ``dt/n`` n times.

Temperatures are in degrees Celsius, times in seconds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Environment:
    """Thermal operating point of one deployment site.

    ``tau_ssd_s`` governs passive cool-down; ``heat_tau_ssd_s`` governs the
    (much faster) rise under write stress. ``max_excess_c`` is the SSD's
    steady-state rise over ambient at full stress, and ``coupling`` is the
    fraction of SSD excess that reaches the FPGA die at equilibrium.
    """

    name: str
    ambient_ssd_c: float
    ambient_fpga_c: float
    tau_ssd_s: float = 260.0
    tau_fpga_s: float = 8.0
    heat_tau_ssd_s: float = 52.0
    coupling: float = 0.6
    max_excess_c: float = 12.0

    def __post_init__(self) -> None:
        for name in ("tau_ssd_s", "tau_fpga_s", "heat_tau_ssd_s"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.coupling <= 1.0:
            raise ValueError("coupling must lie in [0, 1]")
        if not 10.0 <= self.ambient_ssd_c <= 90.0:
            raise ValueError("ambient_ssd_c outside plausible range [10, 90]")
        if not 10.0 <= self.ambient_fpga_c <= 90.0:
            raise ValueError("ambient_fpga_c outside plausible range [10, 90]")
        if self.max_excess_c <= 0.0:
            raise ValueError("max_excess_c must be positive")


UNIVERSITY = Environment(
    name="university",
    ambient_ssd_c=63.0,
    ambient_fpga_c=58.0,
    heat_tau_ssd_s=52.0,
    max_excess_c=12.0,
)

# Cloud hosts run cooler and their chassis airflow carries more of the stress
# heat away, so the die heats more slowly and tops out a little lower.
PUBLIC_CLOUD = Environment(
    name="public-cloud",
    ambient_ssd_c=50.0,
    ambient_fpga_c=45.0,
    heat_tau_ssd_s=104.0,
    max_excess_c=11.0,
)

PRESETS: dict[str, Environment] = {
    "university": UNIVERSITY,
    "public-cloud": PUBLIC_CLOUD,
}


@dataclass(frozen=True)
class ThermalState:
    """Instantaneous die temperatures plus the simulation clock."""

    t_ssd_c: float
    t_fpga_c: float
    clock_s: float = 0.0

    @classmethod
    def at_baseline(cls, env: Environment) -> "ThermalState":
        """Idle equilibrium for ``env`` with the clock at zero."""
        return cls(env.ambient_ssd_c, env.ambient_fpga_c, 0.0)


def step(
    state: ThermalState,
    env: Environment,
    dt_s: float,
    heat_power: float,
    *,
    tau_ssd_s: float | None = None,
) -> ThermalState:
    """Advance the model by ``dt_s`` seconds under a constant drive level.

    ``heat_power`` in [0, 1] scales the SSD's stress target between ambient
    and ambient + ``max_excess_c``. The SSD node relaxes exponentially toward
    that target; the FPGA node chases ``ambient_fpga + coupling * ssd_excess``
    with its own time constant. Because the system is linear and the drive is
    constant over the step, both trajectories are integrated exactly:

        s(dt) = S + (s0 - S) * exp(-dt/tau_s)
        f(dt) = F + K * exp(-dt/tau_s) + (f0 - F - K) * exp(-dt/tau_f)

    with S, F the node targets and K = coupling * (s0 - S) * tau_s /
    (tau_s - tau_f) the cross term (confluent form when the constants
    coincide). ``tau_ssd_s`` overrides the SSD time constant for the step;
    heating paths pass ``env.heat_tau_ssd_s``.
    """
    if dt_s < 0.0:
        raise ValueError("dt_s must be non-negative")
    if not 0.0 <= heat_power <= 1.0:
        raise ValueError("heat_power must lie in [0, 1]")
    tau_s = env.tau_ssd_s if tau_ssd_s is None else tau_ssd_s
    if tau_s <= 0.0:
        raise ValueError("tau_ssd_s must be positive")
    tau_f = env.tau_fpga_s

    target_s = env.ambient_ssd_c + heat_power * env.max_excess_c
    target_f = env.ambient_fpga_c + env.coupling * heat_power * env.max_excess_c
    lead = state.t_ssd_c - target_s
    decay_s = math.exp(-dt_s / tau_s)
    decay_f = math.exp(-dt_s / tau_f)

    t_ssd = target_s + lead * decay_s
    if abs(tau_s - tau_f) < 1e-9 * tau_s:
        cross = env.coupling * lead * (dt_s / tau_s) * decay_f
        t_fpga = target_f + (state.t_fpga_c - target_f) * decay_f + cross
    else:
        gain = env.coupling * lead * tau_s / (tau_s - tau_f)
        t_fpga = target_f + gain * decay_s + (state.t_fpga_c - target_f - gain) * decay_f

    return ThermalState(t_ssd, t_fpga, state.clock_s + dt_s)


def cool(state: ThermalState, env: Environment, duration_s: float) -> ThermalState:
    """Let the device idle for ``duration_s`` seconds."""
    return step(state, env, duration_s, 0.0)


def time_to_within(state: ThermalState, env: Environment, epsilon_c: float = 1.0) -> float:
    """Seconds of idling until the SSD die is within ``epsilon_c`` of ambient.

    Analytic inverse of the cooling exponential; returns 0 when the state is
    already inside the band.
    """
    if epsilon_c <= 0.0:
        raise ValueError("epsilon_c must be positive")
    excess = abs(state.t_ssd_c - env.ambient_ssd_c)
    if excess <= epsilon_c:
        return 0.0
    return env.tau_ssd_s * math.log(excess / epsilon_c)
