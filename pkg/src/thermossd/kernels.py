"""Vectorized single-bit trial decisions — the Monte Carlo hot path.

Two interchangeable backends: numba-jitted loops when numba is importable
(and not switched off via the THERMOSSD_NO_NUMBA environment variable),
otherwise pure numpy. Both consume pre-drawn standard-normal noise in the
same order as :func:`thermossd.protocol.transmit`, so a kernel trial and an
object-level transmit with the same generator state decide identically.
"""
from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via THERMOSSD_NO_NUMBA instead
    njit = None
    HAVE_NUMBA = False

ENV_FLAG = "THERMOSSD_NO_NUMBA"
_OFF_WORDS = {"1", "true", "yes", "on"}


def numba_requested() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() not in _OFF_WORDS


def active_backend() -> str:
    """Which implementation a kernel call would dispatch to right now."""
    return "numba" if (HAVE_NUMBA and numba_requested()) else "numpy"


def _check_inputs(bits: np.ndarray, noise: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    bits = np.ascontiguousarray(bits, dtype=np.int8)
    noise = np.ascontiguousarray(noise, dtype=np.float64)
    if bits.ndim != 1 or noise.ndim != 2 or noise.shape[0] != bits.shape[0]:
        raise ValueError("expected bits (n,) and noise (n, draws)")
    if noise.shape[1] < 1:
        raise ValueError("need at least one noise draw per trial")
    return bits, noise


def _temp_trials_numpy(bits, noise, v0, v1, sigma, threshold):
    raw = np.where(bits == 1, v1, v0) + sigma * noise[:, 0]
    measured = np.floor(raw + 0.5)  # integer sensor, halves round up
    return (measured >= threshold).astype(np.int8), measured


def _ro_trials_numpy(bits, noise, c0, c1, sigma, threshold):
    base = np.where(bits == 1, c1, c0)
    samples = base[:, None] + sigma * noise
    measured = samples.mean(axis=1)
    return (measured <= threshold).astype(np.int8), measured


if HAVE_NUMBA:

    @njit(cache=True)
    def _temp_trials_numba(bits, noise, v0, v1, sigma, threshold):  # pragma: no cover
        n = bits.shape[0]
        decisions = np.empty(n, np.int8)
        measured = np.empty(n, np.float64)
        for i in range(n):
            value = v1 if bits[i] == 1 else v0
            m = math.floor(value + sigma * noise[i, 0] + 0.5)
            measured[i] = m
            decisions[i] = 1 if m >= threshold else 0
        return decisions, measured

    @njit(cache=True)
    def _ro_trials_numba(bits, noise, c0, c1, sigma, threshold):  # pragma: no cover
        n, k = noise.shape
        decisions = np.empty(n, np.int8)
        measured = np.empty(n, np.float64)
        for i in range(n):
            center = c1 if bits[i] == 1 else c0
            acc = 0.0
            for j in range(k):
                acc += center + sigma * noise[i, j]
            m = acc / k
            measured[i] = m
            decisions[i] = 1 if m <= threshold else 0
        return decisions, measured


def temp_trials(bits: np.ndarray, noise: np.ndarray, v0: float, v1: float,
                sigma: float, threshold: float) -> tuple[np.ndarray, np.ndarray]:
    """Decide n independent temperature-sensor trials.

    Trial i reads ``(v1 if bits[i] else v0) + sigma * noise[i, 0]``, rounds to
    the integer sensor grid, and decodes 1 iff the reading reaches
    ``threshold``. Returns (decisions, measured).
    """
    bits, noise = _check_inputs(bits, noise)
    if active_backend() == "numba":
        return _temp_trials_numba(bits, noise, float(v0), float(v1),
                                  float(sigma), float(threshold))
    return _temp_trials_numpy(bits, noise, float(v0), float(v1),
                              float(sigma), float(threshold))


def ro_trials(bits: np.ndarray, noise: np.ndarray, c0: float, c1: float,
              sigma: float, threshold: float) -> tuple[np.ndarray, np.ndarray]:
    """Decide n independent ring-oscillator trials.

    Trial i averages ``noise.shape[1]`` noisy counts around ``c1`` (bit 1) or
    ``c0`` (bit 0) and decodes 1 iff the mean is at or below ``threshold``
    (counts fall as the die warms). Returns (decisions, measured means).
    """
    bits, noise = _check_inputs(bits, noise)
    if active_backend() == "numba":
        return _ro_trials_numba(bits, noise, float(c0), float(c1),
                                float(sigma), float(threshold))
    return _ro_trials_numpy(bits, noise, float(c0), float(c1),
                            float(sigma), float(threshold))
