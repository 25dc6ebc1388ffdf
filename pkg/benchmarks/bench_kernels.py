"""Compare the compiled kernels against the pure numpy fallback.

Run twice to see both paths:

    python3 benchmarks/bench_kernels.py
    SPRIDENT_NO_NUMBA=1 python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from sprident._kernels import (USE_NUMBA, _polyval_batch_py, _simulate_py,
                               polyval_batch, simulate_kernel)


def time_fn(fn, args, repeats=5):
    fn(*args)  # warm up (includes jit compilation when numba is active)
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_simulate(rng):
    n, length = 8, 200_000
    A = 0.3 * rng.standard_normal((n, n)) / np.sqrt(n)
    B = rng.standard_normal((n, 1))
    C = rng.standard_normal((1, n))
    D = rng.standard_normal((1, 1))
    u = rng.standard_normal((length, 1))
    wp = np.zeros((length, n))
    wm = np.zeros((length, 1))
    x0 = np.zeros(n)
    args = (A, B, C, D, u, wp, wm, x0)
    return time_fn(simulate_kernel, args), time_fn(_simulate_py, args)


def bench_polyval(rng):
    coeffs = (rng.standard_normal((64, 33)) + 0j)
    z = np.exp(1j * rng.uniform(0, np.pi, 20_000))
    args = (coeffs, z)
    return time_fn(polyval_batch, args), time_fn(_polyval_batch_py, args)


def main():
    rng = np.random.default_rng(0)
    print(f"selected path: {'numba' if USE_NUMBA else 'pure numpy'}")
    for name, (sel, py) in (("simulate", bench_simulate(rng)),
                            ("polyval_batch", bench_polyval(rng))):
        speedup = py / sel
        print(f"{name:14s} selected {sel * 1e3:8.2f} ms   "
              f"pure numpy {py * 1e3:8.2f} ms   speedup x{speedup:.1f}")


if __name__ == "__main__":
    main()
