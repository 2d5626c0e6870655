"""Compare the numba and numpy trial kernels on realistic workloads.

Usage: python3 benchmarks/bench_kernels.py [--ro-trials N] [--temp-trials N]

Times the ring-oscillator kernel (the actual sweep hot path: N trials x 150
noise draws each) and the temperature kernel (1 draw per trial, so much
larger N) on both backends, verifies they agree decision-for-decision, and
prints a timing table. The numba rows disappear when numba is not installed.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from thermossd import kernels


def time_call(func, *args, repeats: int = 5) -> float:
    """Best-of-N wall time in seconds, after one untimed warmup call."""
    func(*args)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        func(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_case(name, numpy_func, numba_func, args, repeats):
    t_numpy = time_call(numpy_func, *args, repeats=repeats)
    print(f"{name:<28} numpy  {t_numpy * 1e3:9.2f} ms")
    if numba_func is None:
        return
    dec_np, meas_np = numpy_func(*args)
    dec_nb, meas_nb = numba_func(*args)
    if not np.array_equal(dec_np, dec_nb):
        raise SystemExit(f"{name}: backends disagree on decisions")
    if not np.allclose(meas_np, meas_nb, rtol=1e-12, atol=1e-9):
        raise SystemExit(f"{name}: backends disagree on measured values")
    t_numba = time_call(numba_func, *args, repeats=repeats)
    speedup = t_numpy / t_numba if t_numba > 0 else float("inf")
    print(f"{name:<28} numba  {t_numba * 1e3:9.2f} ms   ({speedup:.1f}x, agrees)")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--ro-trials", type=int, default=50_000)
    parser.add_argument("--temp-trials", type=int, default=2_000_000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    print(f"numba available: {kernels.HAVE_NUMBA}")
    rng = np.random.default_rng(0)

    ro_bits = rng.integers(0, 2, size=args.ro_trials).astype(np.int8)
    ro_noise = rng.standard_normal((args.ro_trials, 150))
    ro_args = (ro_bits, ro_noise, 40_000.0, 39_766.4, 1050.0, 39_852.9)

    temp_bits = rng.integers(0, 2, size=args.temp_trials).astype(np.int8)
    temp_noise = rng.standard_normal((args.temp_trials, 1))
    temp_args = (temp_bits, temp_noise, 63.0, 66.8, 0.3, 65.4)

    numba_ro = kernels._ro_trials_numba if kernels.HAVE_NUMBA else None
    numba_temp = kernels._temp_trials_numba if kernels.HAVE_NUMBA else None
    bench_case(f"ro_trials    n={args.ro_trials}", kernels._ro_trials_numpy,
               numba_ro, ro_args, args.repeats)
    bench_case(f"temp_trials  n={args.temp_trials}", kernels._temp_trials_numpy,
               numba_temp, temp_args, args.repeats)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
