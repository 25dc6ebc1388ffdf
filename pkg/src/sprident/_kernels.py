"""Numeric kernels with optional numba acceleration.

The hot inner loops (state-space time stepping and batched complex
polynomial evaluation) are compiled with numba when it is available.
Set the environment variable ``SPRIDENT_NO_NUMBA=1`` to force the pure
numpy fallback path; ``benchmarks/bench_kernels.py`` compares the two.
"""

import os

import numpy as np


def _numba_enabled():
    if os.environ.get("SPRIDENT_NO_NUMBA", "0") not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
        return True
    except ImportError:
        return False


USE_NUMBA = _numba_enabled()


def _simulate_py(A, B, C, D, u, wp, wm, x0):
    l = u.shape[0]
    r = C.shape[0]
    y = np.empty((l, r))
    x = x0.copy()
    for k in range(l):
        y[k] = C @ x + D @ u[k] + wm[k]
        x = A @ x + B @ u[k] + wp[k]
    return y


def _polyval_batch_py(coeffs, z):
    # coeffs: (n_poly, deg+1) descending powers, zero padded on the left
    acc = np.zeros((coeffs.shape[0], z.shape[0]), dtype=np.complex128)
    for j in range(coeffs.shape[1]):
        acc = acc * z + coeffs[:, j:j + 1]
    return acc


if USE_NUMBA:
    from numba import njit

    @njit(cache=True)
    def _simulate_nb(A, B, C, D, u, wp, wm, x0):
        l = u.shape[0]
        r = C.shape[0]
        y = np.empty((l, r))
        x = x0.copy()
        for k in range(l):
            y[k] = C @ x + D @ u[k] + wm[k]
            x = A @ x + B @ u[k] + wp[k]
        return y

    @njit(cache=True)
    def _polyval_batch_nb(coeffs, z):
        n_poly, n_coef = coeffs.shape
        out = np.zeros((n_poly, z.shape[0]), dtype=np.complex128)
        for i in range(n_poly):
            for n in range(z.shape[0]):
                acc = 0.0 + 0.0j
                for j in range(n_coef):
                    acc = acc * z[n] + coeffs[i, j]
                out[i, n] = acc
        return out

    simulate_kernel = _simulate_nb
    polyval_batch = _polyval_batch_nb
else:
    simulate_kernel = _simulate_py
    polyval_batch = _polyval_batch_py
