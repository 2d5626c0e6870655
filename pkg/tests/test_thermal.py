"""Tests for the two-node thermal model."""
import math

import pytest

from thermossd import thermal
from thermossd.thermal import Environment, ThermalState, cool, step, time_to_within


def test_presets_exist():
    """Both deployment presets are registered with their idle baselines."""
    assert set(thermal.PRESETS) == {"university", "public-cloud"}
    univ = thermal.PRESETS["university"]
    cloud = thermal.PRESETS["public-cloud"]
    assert (univ.ambient_ssd_c, univ.ambient_fpga_c) == (63.0, 58.0)
    assert (cloud.ambient_ssd_c, cloud.ambient_fpga_c) == (50.0, 45.0)
    assert cloud.heat_tau_ssd_s == 2 * univ.heat_tau_ssd_s


def test_baseline_is_fixed_point(univ):
    """Idling at the baseline changes nothing but the clock."""
    state = ThermalState.at_baseline(univ)
    later = cool(state, univ, 1234.5)
    assert later.t_ssd_c == pytest.approx(univ.ambient_ssd_c, abs=1e-12)
    assert later.t_fpga_c == pytest.approx(univ.ambient_fpga_c, abs=1e-12)
    assert later.clock_s == 1234.5


def test_cool_one_time_constant(univ):
    """+10 C excess decays to +10/e after exactly tau seconds."""
    state = ThermalState(univ.ambient_ssd_c + 10.0, univ.ambient_fpga_c, 0.0)
    later = cool(state, univ, univ.tau_ssd_s)
    assert later.t_ssd_c == pytest.approx(63.0 + 10.0 / math.e, rel=1e-12)


def test_step_is_exact_for_any_step_size(univ):
    """One long step equals many short ones, heating and cooling alike."""
    for power in (1.0, 0.0, 0.37):
        one = step(ThermalState.at_baseline(univ), univ, 300.0, power)
        state = ThermalState.at_baseline(univ)
        for _ in range(30):
            state = step(state, univ, 10.0, power)
        assert state.t_ssd_c == pytest.approx(one.t_ssd_c, abs=1e-9)
        assert state.t_fpga_c == pytest.approx(one.t_fpga_c, abs=1e-9)
        assert state.clock_s == pytest.approx(one.clock_s, abs=1e-9)


def test_step_zero_duration_is_identity(univ):
    state = ThermalState(70.0, 61.0, 5.0)
    same = step(state, univ, 0.0, 1.0)
    assert same.t_ssd_c == state.t_ssd_c
    assert same.t_fpga_c == state.t_fpga_c
    assert same.clock_s == state.clock_s


def test_cooling_is_strictly_monotone(univ):
    """Above baseline with no drive, the SSD die only ever gets colder."""
    state = ThermalState(univ.ambient_ssd_c + 10.0, univ.ambient_fpga_c + 6.0, 0.0)
    previous = state.t_ssd_c
    for _ in range(40):
        state = cool(state, univ, 15.0)
        assert state.t_ssd_c < previous
        previous = state.t_ssd_c


def test_never_cools_below_ambient(univ):
    state = ThermalState(univ.ambient_ssd_c + 12.0, univ.ambient_fpga_c + 7.0, 0.0)
    state = cool(state, univ, 1e6)
    assert state.t_ssd_c >= univ.ambient_ssd_c - 1e-9
    assert state.t_fpga_c >= univ.ambient_fpga_c - 1e-9


def test_bounded_response(univ):
    """Full drive approaches ambient + max_excess and never overshoots it."""
    state = ThermalState.at_baseline(univ)
    for _ in range(120):
        state = step(state, univ, 60.0, 1.0)
        assert state.t_ssd_c <= univ.ambient_ssd_c + univ.max_excess_c + 1e-9
    assert state.t_ssd_c == pytest.approx(univ.ambient_ssd_c + univ.max_excess_c, abs=1e-6)


def test_fpga_tracks_ssd(univ):
    """The FPGA equilibrium rises with SSD excess by the coupling fraction."""
    heated = step(ThermalState.at_baseline(univ), univ, 1e6, 1.0)
    expected = univ.ambient_fpga_c + univ.coupling * univ.max_excess_c
    assert heated.t_fpga_c == pytest.approx(expected, abs=1e-6)


def test_zero_coupling_isolates_fpga():
    env = Environment(name="isolated", ambient_ssd_c=63.0, ambient_fpga_c=58.0,
                      coupling=0.0)
    state = ThermalState(env.ambient_ssd_c + 12.0, env.ambient_fpga_c, 0.0)
    for dt in (10.0, 100.0, 1000.0):
        state = step(state, env, dt, 1.0)
        assert state.t_fpga_c == pytest.approx(env.ambient_fpga_c, abs=1e-9)


def test_confluent_time_constants_keep_semigroup():
    """The tau_ssd == tau_fpga special case still composes exactly."""
    env = Environment(name="confluent", ambient_ssd_c=60.0, ambient_fpga_c=55.0,
                      tau_ssd_s=100.0, tau_fpga_s=100.0)
    start = ThermalState(70.0, 56.0, 0.0)
    one = step(start, env, 100.0, 0.0)
    two = step(step(start, env, 50.0, 0.0), env, 50.0, 0.0)
    assert one.t_ssd_c == pytest.approx(two.t_ssd_c, abs=1e-9)
    assert one.t_fpga_c == pytest.approx(two.t_fpga_c, abs=1e-9)


def test_heating_tau_override_is_faster(univ):
    """The stress-time constant heats far faster than the cooling one would."""
    base = ThermalState.at_baseline(univ)
    fast = step(base, univ, 60.0, 1.0, tau_ssd_s=univ.heat_tau_ssd_s)
    slow = step(base, univ, 60.0, 1.0)
    assert fast.t_ssd_c > slow.t_ssd_c + 5.0


def test_time_to_within(univ):
    state = ThermalState(univ.ambient_ssd_c + 10.0, univ.ambient_fpga_c, 0.0)
    assert time_to_within(state, univ, 1.0) == pytest.approx(
        univ.tau_ssd_s * math.log(10.0), rel=1e-12)
    # already inside the band
    near = ThermalState(univ.ambient_ssd_c + 0.5, univ.ambient_fpga_c, 0.0)
    assert time_to_within(near, univ, 1.0) == 0.0
    # the prediction is consistent with actually cooling that long
    landed = cool(state, univ, time_to_within(state, univ, 1.0))
    assert landed.t_ssd_c - univ.ambient_ssd_c == pytest.approx(1.0, rel=1e-9)


def test_time_to_within_rejects_bad_epsilon(univ):
    state = ThermalState.at_baseline(univ)
    with pytest.raises(ValueError):
        time_to_within(state, univ, 0.0)


def test_step_validation(univ):
    state = ThermalState.at_baseline(univ)
    with pytest.raises(ValueError):
        step(state, univ, -1.0, 0.0)
    with pytest.raises(ValueError):
        step(state, univ, 1.0, 1.5)
    with pytest.raises(ValueError):
        step(state, univ, 1.0, -0.1)
    with pytest.raises(ValueError):
        step(state, univ, 1.0, 0.5, tau_ssd_s=0.0)


@pytest.mark.parametrize("kwargs", [
    {"tau_ssd_s": 0.0},
    {"tau_fpga_s": -1.0},
    {"coupling": 1.5},
    {"coupling": -0.1},
    {"ambient_ssd_c": 5.0},
    {"ambient_fpga_c": 95.0},
    {"max_excess_c": 0.0},
])
def test_environment_validation(kwargs):
    base = dict(name="bad", ambient_ssd_c=63.0, ambient_fpga_c=58.0)
    base.update(kwargs)
    with pytest.raises(ValueError):
        Environment(**base)
