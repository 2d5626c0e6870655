"""Tests for the vectorized trial kernels and backend selection."""
from __future__ import annotations

import numpy as np
import pytest

from thermossd import kernels
from thermossd.kernels import (
    HAVE_NUMBA,
    active_backend,
    numba_requested,
    ro_trials,
    temp_trials,
)


def test_backend_reports_known_name():
    assert active_backend() in ("numba", "numpy")


def test_env_flag_forces_numpy(monkeypatch):
    monkeypatch.setenv(kernels.ENV_FLAG, "1")
    assert not numba_requested()
    assert active_backend() == "numpy"
    monkeypatch.setenv(kernels.ENV_FLAG, "off")  # unrecognized word: stays on
    assert numba_requested()
    monkeypatch.delenv(kernels.ENV_FLAG)
    assert numba_requested()


def test_temp_trials_matches_numpy_reference(monkeypatch):
    rng = np.random.default_rng(5)
    bits = rng.integers(0, 2, size=4096).astype(np.int8)
    noise = rng.standard_normal((4096, 1))
    args = (bits, noise, 63.0, 68.2, 0.3, 65.5)
    want_dec, want_meas = kernels._temp_trials_numpy(*args)
    got_dec, got_meas = temp_trials(*args)
    assert np.array_equal(got_dec, want_dec)
    assert np.allclose(got_meas, want_meas)
    monkeypatch.setenv(kernels.ENV_FLAG, "true")
    numpy_dec, numpy_meas = temp_trials(*args)
    assert np.array_equal(numpy_dec, want_dec)
    assert np.allclose(numpy_meas, want_meas)


def test_ro_trials_matches_numpy_reference(monkeypatch):
    rng = np.random.default_rng(6)
    bits = rng.integers(0, 2, size=5000).astype(np.int8)
    noise = rng.standard_normal((5000, 150))
    args = (bits, noise, 39_500.0, 39_200.0, 1050.0, 39_352.9)
    want_dec, want_meas = kernels._ro_trials_numpy(*args)
    got_dec, got_meas = ro_trials(*args)
    assert np.array_equal(got_dec, want_dec)
    assert np.allclose(got_meas, want_meas)
    monkeypatch.setenv(kernels.ENV_FLAG, "yes")
    numpy_dec, _ = ro_trials(*args)
    assert np.array_equal(numpy_dec, want_dec)


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
def test_backends_agree_bit_for_bit():
    rng = np.random.default_rng(7)
    bits = rng.integers(0, 2, size=2000).astype(np.int8)
    ro_noise = rng.standard_normal((2000, 150))
    t_noise = rng.standard_normal((2000, 1))
    nb_dec, nb_meas = kernels._ro_trials_numba(bits, ro_noise, 39_500.0,
                                               39_250.0, 1050.0, 39_352.9)
    np_dec, np_meas = kernels._ro_trials_numpy(bits, ro_noise, 39_500.0,
                                               39_250.0, 1050.0, 39_352.9)
    assert np.array_equal(nb_dec, np_dec)
    assert np.allclose(nb_meas, np_meas, rtol=1e-12)
    nb_dec, nb_meas = kernels._temp_trials_numba(bits, t_noise, 63.0, 67.0, 0.3, 65.0)
    np_dec, np_meas = kernels._temp_trials_numpy(bits, t_noise, 63.0, 67.0, 0.3, 65.0)
    assert np.array_equal(nb_dec, np_dec)
    assert np.array_equal(nb_meas, np_meas)


def test_input_validation():
    bits = np.zeros(4, dtype=np.int8)
    with pytest.raises(ValueError):
        temp_trials(bits, np.zeros((3, 1)), 0.0, 1.0, 0.1, 0.5)
    with pytest.raises(ValueError):
        temp_trials(bits, np.zeros(4), 0.0, 1.0, 0.1, 0.5)
    with pytest.raises(ValueError):
        ro_trials(bits, np.zeros((4, 0)), 0.0, 1.0, 0.1, 0.5)


def test_decisions_are_binary_int8():
    rng = np.random.default_rng(8)
    bits = rng.integers(0, 2, size=256).astype(np.int8)
    dec, _ = temp_trials(bits, rng.standard_normal((256, 1)), 63.0, 67.0, 0.3, 65.0)
    assert dec.dtype == np.int8
    assert set(np.unique(dec)) <= {0, 1}


def test_exact_tie_decodes_one():
    """Threshold ties resolve to 1 on both sensor kinds."""
    bits = np.array([1], dtype=np.int8)
    noise = np.zeros((1, 1))
    dec, meas = temp_trials(bits, noise, 63.0, 65.0, 0.0, 65.0)
    assert meas[0] == 65.0 and dec[0] == 1
    dec, meas = ro_trials(bits, noise, 40_000.0, 39_850.0, 0.0, 39_850.0)
    assert meas[0] == 39_850.0 and dec[0] == 1
