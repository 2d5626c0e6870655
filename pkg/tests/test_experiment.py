"""Tests for experiment runners, seeding discipline, and result emission."""
from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from thermossd.config import default_config
from thermossd.experiment import (
    ResultTable,
    channel_for,
    derive_rng,
    emit,
    parse_table,
    run_accuracy_sweep,
    run_bandwidth_table,
    run_calibration,
    run_cooling_curve,
    run_disk_scaling,
    run_two_user_sweep,
    sweep_table,
    trial_inputs,
    two_user_table,
)
from thermossd.protocol import transmit


def small_config(preset: str = "university", **kw):
    base = default_config(preset)
    return dataclasses.replace(base, trials=kw.pop("trials", 200), **kw)


# --- random stream discipline -------------------------------------------------

def test_derive_rng_is_stable_and_tag_sensitive():
    a = derive_rng(0, "alpha", 3).standard_normal(4)
    b = derive_rng(0, "alpha", 3).standard_normal(4)
    c = derive_rng(0, "alpha", 4).standard_normal(4)
    d = derive_rng(1, "alpha", 3).standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_trial_inputs_shape_and_determinism():
    bits, noise = trial_inputs(0, "ro_counts", 32, 150)
    again, noise2 = trial_inputs(0, "ro_counts", 32, 150)
    assert bits.shape == (32,) and noise.shape == (32, 150)
    assert set(np.unique(bits)) <= {0, 1}
    assert np.array_equal(bits, again) and np.array_equal(noise, noise2)
    other, _ = trial_inputs(0, "ssd_temp", 32, 1)
    assert not np.array_equal(bits, other)


def test_trial_streams_extend_not_reshuffle():
    """Trial i's stream does not depend on how many trials are drawn."""
    bits500, noise500 = trial_inputs(0, "ssd_temp", 50, 1)
    bits1000, noise1000 = trial_inputs(0, "ssd_temp", 100, 1)
    assert np.array_equal(bits500, bits1000[:50])
    assert np.array_equal(noise500, noise1000[:50])


@pytest.mark.parametrize("sensor,delay", [
    ("ssd_temp", 60.0), ("ssd_temp", 300.0),
    ("ro_counts", 60.0), ("ro_counts", 300.0),
])
def test_kernel_trials_match_full_transmit(univ, sensor, delay):
    """The vectorized fast path reproduces object-level transmits draw for draw."""
    cfg = small_config(trials=64)
    channel = dataclasses.replace(channel_for(cfg, sensor), delay_s=delay)
    draws = cfg.ro_samples if sensor == "ro_counts" else 1
    bits, noise = trial_inputs(cfg.master_seed, sensor, 64, draws)

    from thermossd import kernels, protocol

    v0, v1 = protocol.expected_sensor_values(channel, univ, delay)
    threshold = protocol.calibrate_threshold(
        protocol.baseline_sensor_value(channel, univ), channel)
    if sensor == "ro_counts":
        decisions, measured = kernels.ro_trials(
            bits, noise, v0, v1, channel.ro_model.noise_sigma_counts, threshold)
    else:
        decisions, measured = kernels.temp_trials(
            bits, noise, v0, v1, channel.ssd_noise_sigma_c, threshold)

    for i in range(64):
        rng = derive_rng(cfg.master_seed, "channel-trial", sensor, i)
        bit = int(rng.integers(0, 2))
        assert bit == bits[i]  # same stream position as trial_inputs
        trace = transmit([bit], channel, univ, rng)[0]
        assert trace.decoded == int(decisions[i])
        assert trace.measured == pytest.approx(measured[i], abs=1e-9)


# --- sweep runners --------------------------------------------------------------

def test_accuracy_sweep_is_deterministic():
    cfg = small_config()
    assert run_accuracy_sweep(cfg) == run_accuracy_sweep(cfg)


def test_accuracy_sweep_point_fields():
    cfg = small_config(trials=100)
    result = run_accuracy_sweep(cfg)
    assert len(result.points) == len(cfg.sensors) * len(cfg.delays_s)
    assert result.config_hash == cfg.config_hash
    for p in result.points:
        assert p.trials == 100
        assert p.accuracy == pytest.approx(1.0 - p.errors / 100)
        assert 0.0 <= p.analytic_error <= 0.5


def test_accuracy_never_improves_with_delay():
    """Shared per-trial noise makes accuracy exactly monotone along the sweep."""
    cfg = small_config(trials=400)
    result = run_accuracy_sweep(cfg)
    for sensor in cfg.sensors:
        errors = [p.errors for p in result.points if p.sensor == sensor]
        assert errors == sorted(errors)


def test_sweep_is_invariant_to_delay_order():
    cfg = small_config(delays_s=(60.0, 120.0, 300.0))
    shuffled = dataclasses.replace(cfg, delays_s=(300.0, 60.0, 120.0))
    want = {(p.sensor, p.delay_s): p.errors for p in run_accuracy_sweep(cfg).points}
    got = {(p.sensor, p.delay_s): p.errors for p in run_accuracy_sweep(shuffled).points}
    assert want == got


def test_more_trials_extend_the_same_experiment():
    cfg = small_config(trials=120)
    bigger = dataclasses.replace(cfg, trials=240)
    small_errors = {(p.sensor, p.delay_s): p.errors
                    for p in run_accuracy_sweep(cfg).points}
    big_errors = {(p.sensor, p.delay_s): p.errors
                  for p in run_accuracy_sweep(bigger).points}
    for key, small in small_errors.items():
        assert small <= big_errors[key] <= small + 120


def test_two_user_zero_wait_equals_one_user_at_same_delay():
    """extra_wait=0 lands on delay 100 s; the one-user sweep must agree exactly."""
    cfg = small_config("public-cloud", sensors=("ro_counts",),
                       delays_s=(100.0,), extra_wait_grid_s=(0.0, 30.0, 60.0))
    two = run_two_user_sweep(cfg)
    one = run_accuracy_sweep(cfg)
    zero_wait = next(p for p in two.points if p.extra_wait_s == 0.0)
    assert zero_wait.effective_delay_s == 100.0
    assert zero_wait.errors == one.points[0].errors


def test_two_user_accuracy_never_improves_with_wait():
    cfg = small_config("public-cloud", trials=400)
    result = run_two_user_sweep(cfg)
    for sensor in cfg.sensors:
        errors = [p.errors for p in result.points if p.sensor == sensor]
        assert errors == sorted(errors)
    delays = [p.effective_delay_s for p in result.points if p.sensor == sensor]
    assert delays == [100.0, 130.0, 160.0]


# --- emission and parsing ---------------------------------------------------------

def synthetic_table() -> ResultTable:
    return ResultTable(
        name="synthetic",
        columns=("count", "ratio", "note", "label"),
        rows=((1, 2.5, None, "x"), (-3, 0.001, None, "y z")),
        metadata=(("experiment", "synthetic"), ("config_hash", "abc123"),
                  ("master_seed", 7)),
    )


def test_csv_roundtrip_preserves_values(tmp_path):
    path = emit(synthetic_table(), tmp_path, "csv")
    assert path.name == "synthetic.csv"
    back = parse_table(path)
    assert back.columns == ("count", "ratio", "note", "label")
    assert back.rows == ((1, 2.5, None, "x"), (-3, 0.001, None, "y z"))
    assert dict(back.metadata)["config_hash"] == "abc123"
    assert dict(back.metadata)["master_seed"] == "7"  # metadata stays text


def test_json_roundtrip_preserves_values(tmp_path):
    path = emit(synthetic_table(), tmp_path, "json")
    back = parse_table(path)
    assert back.name == "synthetic"
    assert back.columns == ("count", "ratio", "note", "label")
    assert back.rows == ((1, 2.5, None, "x"), (-3, 0.001, None, "y z"))
    assert dict(back.metadata) == {"experiment": "synthetic",
                                   "config_hash": "abc123", "master_seed": 7}


def test_emit_is_byte_deterministic(tmp_path):
    table = sweep_table(run_accuracy_sweep(small_config(trials=50)))
    a = emit(table, tmp_path / "a", "csv")
    b = emit(table, tmp_path / "b", "csv")
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes().startswith(b"# experiment=accuracy_sweep\n")


def test_emit_rejects_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        emit(synthetic_table(), tmp_path, "xml")


def test_empty_table_roundtrip(tmp_path):
    empty = ResultTable("empty", ("a", "b"), (), (("experiment", "empty"),))
    back = parse_table(emit(empty, tmp_path, "csv"))
    assert back.columns == ("a", "b") and back.rows == ()


def test_sweep_tables_have_expected_columns():
    cfg = small_config(trials=50, delays_s=(60.0,), extra_wait_grid_s=(0.0,))
    sweep = sweep_table(run_accuracy_sweep(cfg))
    assert sweep.columns == ("sensor", "delay_s", "trials", "errors", "accuracy",
                             "std_error", "analytic_error_probability")
    assert dict(sweep.metadata)["config_hash"] == cfg.config_hash
    two = two_user_table(run_two_user_sweep(cfg))
    assert two.columns[:3] == ("sensor", "extra_wait_s", "effective_delay_s")


# --- tables and curves --------------------------------------------------------------

def test_bandwidth_table_golden_values():
    table = run_bandwidth_table(default_config())
    assert [row[0] for row in table.rows] == [425.0, 485.0, 545.0, 605.0, 665.0, 725.0]
    assert [row[1] for row in table.rows] == [0.002353, 0.002062, 0.001835,
                                              0.001653, 0.001504, 0.001379]
    assert [row[2] for row in table.rows] == [460.0, 520.0, 580.0, 640.0, 700.0, 760.0]
    assert [row[3] for row in table.rows] == [0.002174, 0.001923, 0.001724,
                                              0.001563, 0.001429, 0.001316]


def test_disk_scaling_is_exact():
    table = run_disk_scaling(default_config())
    base = table.rows[0][2]
    for row in table.rows:
        n, total, bandwidth = row
        assert total == 425.0
        assert bandwidth == n * base  # no rounding on this table


def test_cooling_curve_shape_and_physics():
    cfg = default_config()
    table = run_cooling_curve(cfg)
    assert table.name == "cooling_curve_university"
    assert len(table.rows) == 41  # 600 s at 15 s cadence, fencepost included
    clocks = [row[0] for row in table.rows]
    assert clocks[0] == 0.0 and clocks[-1] == 600.0

    first = table.rows[0]
    ambient = cfg.env.ambient_ssd_c
    assert abs(first[1] - (ambient + 10.0)) <= 1.0  # starts at target excess
    assert abs(table.rows[-1][4] - ambient) < 1.0  # model decays back down

    ssd_reads = [row[1] for row in table.rows]
    assert all(nxt <= prev + 1 for prev, nxt in zip(ssd_reads, ssd_reads[1:]))

    ro_models = [row[6] for row in table.rows if row[6] is not None]
    assert len(ro_models) == 21  # every other sample, both endpoints
    assert all(a < b for a, b in zip(ro_models, ro_models[1:]))
    assert all(row[3] is None for i, row in enumerate(table.rows) if i % 2 == 1)

    ro_reads = [row[3] for row in table.rows if row[3] is not None]
    assert ro_reads[-1] - ro_reads[0] > 300.0  # counts recover as the die cools


def test_cooling_heatup_tracks_environment():
    univ_meta = dict(run_cooling_curve(default_config()).metadata)
    cloud_meta = dict(run_cooling_curve(default_config("public-cloud")).metadata)
    assert cloud_meta["environment"] == "public-cloud"
    assert cloud_meta["heatup_s"] > univ_meta["heatup_s"]  # gentler heating


def test_calibration_table():
    cfg = default_config()
    table = run_calibration(cfg)
    assert len(table.rows) == len(cfg.sensors) * len(cfg.delays_s)
    for row in table.rows:
        sensor, _, baseline, delta, threshold, separation, analytic = row
        assert delta > 0 and separation > 0
        assert 0.0 <= analytic <= 0.5
        if sensor == "ro_counts":
            assert threshold == baseline - delta
        else:
            assert threshold == baseline + delta
