"""Discrete-time LTI foundations.

Rational transfer functions (coefficients in descending powers of q),
state-space models, frequency-response evaluation, stability / positive
realness checks on a frequency grid, and time-domain simulation.
"""

from dataclasses import dataclass

import numpy as np
import scipy.signal

from . import _kernels
from .errors import EvaluationError, NumericalError

# Schur check: strict inequality needs a floating-point margin
SCHUR_TOL = 1e-9


def _as_coeffs(c):
    a = np.atleast_1d(np.asarray(c, dtype=float))
    if a.ndim != 1:
        raise ValueError("coefficient list must be one-dimensional")
    return a


@dataclass(frozen=True)
class RationalTf:
    """SISO rational transfer function in the forward shift operator q.

    ``num`` and ``den`` hold real coefficients in descending powers of q,
    e.g. ``den=[1, 0.4, 0.5]`` is q^2 + 0.4 q + 0.5. The function must be
    proper: deg(num) <= deg(den).
    """

    num: np.ndarray
    den: np.ndarray
    ts: float = 1.0

    def __post_init__(self):
        num = _as_coeffs(self.num)
        den = _as_coeffs(self.den)
        if den.size == 0 or den[0] == 0.0:
            raise ValueError("denominator must be non-empty with nonzero leading coefficient")
        num = np.trim_zeros(num, "f")
        if num.size == 0:
            num = np.zeros(1)
        if num.size > den.size:
            raise ValueError("transfer function must be proper (deg num <= deg den)")
        if not self.ts > 0:
            raise ValueError("sampling period must be positive")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "ts", float(self.ts))

    @property
    def relative_degree(self):
        return (self.den.size - 1) - (self.num.size - 1)


@dataclass(frozen=True)
class StateSpaceModel:
    """Discrete-time state-space model (A, B, C, D) with optional observer gain K."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    K: np.ndarray = None
    ts: float = 1.0

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError("A must be square")
        if B.shape[0] != n:
            raise ValueError("B row count must match A")
        if C.shape[1] != n:
            raise ValueError("C column count must match A")
        if D.shape != (C.shape[0], B.shape[1]):
            raise ValueError("D must be r x m")
        K = self.K
        if K is not None:
            K = np.atleast_2d(np.asarray(K, dtype=float))
            if K.shape != (n, C.shape[0]):
                raise ValueError("K must be n x r")
            eig = np.linalg.eigvals(A - K @ C)
            if np.max(np.abs(eig)) >= 1.0:
                raise ValueError("A - K C must be Schur")
        if not self.ts > 0:
            raise ValueError("sampling period must be positive")
        for name, val in (("A", A), ("B", B), ("C", C), ("D", D), ("K", K)):
            object.__setattr__(self, name, val)
        object.__setattr__(self, "ts", float(self.ts))

    @property
    def order(self):
        return self.A.shape[0]

    @property
    def n_inputs(self):
        return self.B.shape[1]

    @property
    def n_outputs(self):
        return self.C.shape[0]


@dataclass(frozen=True)
class FrequencyResponse:
    """Complex response samples on a strictly increasing grid in [0, pi/ts] rad/s."""

    omegas: np.ndarray
    values: np.ndarray
    ts: float = 1.0

    def __post_init__(self):
        omegas = np.atleast_1d(np.asarray(self.omegas, dtype=float))
        values = np.atleast_1d(np.asarray(self.values, dtype=complex))
        if omegas.size != values.size:
            raise ValueError("omegas and values must have the same length")
        if omegas.size == 0:
            raise ValueError("frequency response must contain at least one sample")
        if np.any(np.diff(omegas) <= 0):
            raise ValueError("omegas must be strictly increasing")
        if not self.ts > 0:
            raise ValueError("sampling period must be positive")
        nyq = np.pi / self.ts
        if omegas[0] < 0 or omegas[-1] > nyq * (1 + 1e-12):
            raise ValueError("omegas must lie in [0, pi/ts]")
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "ts", float(self.ts))


def eval_freq(tf, omegas):
    """Evaluate ``tf`` at q = exp(j w ts) for each frequency in ``omegas`` (rad/s)."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    z = np.exp(1j * omegas * tf.ts)
    coeffs = np.vstack([
        np.pad(tf.num, (tf.den.size - tf.num.size, 0)),
        tf.den,
    ]).astype(complex)
    vals = _kernels.polyval_batch(coeffs, z)
    den_vals = vals[1]
    threshold = 1e3 * np.finfo(float).eps * np.sum(np.abs(tf.den))
    bad = np.abs(den_vals) < threshold
    if np.any(bad):
        w = omegas[np.argmax(bad)]
        raise EvaluationError(f"denominator vanishes on the unit circle near omega={w:.6g} rad/s")
    return vals[0] / den_vals


def poly_roots(coeffs):
    """Roots of a polynomial (descending coefficients) via the companion matrix."""
    c = np.trim_zeros(_as_coeffs(coeffs), "f")
    if c.size <= 1:
        return np.array([], dtype=complex)
    try:
        return np.roots(c)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"root finding did not converge: {exc}") from exc


def is_schur(tf, tol=SCHUR_TOL):
    """Whether all poles lie strictly inside the unit circle; also returns the poles."""
    roots = poly_roots(tf.den)
    return bool(np.all(np.abs(roots) < 1.0 - tol)), roots


def spr_margin(tf, omegas):
    """Real part of the frequency response per grid point and its minimum.

    Real coefficients make Re even in omega, so a grid in [0, pi/ts]
    covers the whole unit circle.
    """
    re = np.real(eval_freq(tf, omegas))
    return re, float(np.min(re))


def ss_to_markov(ss, count):
    """Impulse-response matrices [D, CB, CAB, CA^2 B, ...] of length ``count``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    out = [ss.D.copy()]
    An_B = ss.B.copy()
    for _ in range(count - 1):
        out.append(ss.C @ An_B)
        An_B = ss.A @ An_B
    return out


def _as_input(seq, width, length, name):
    if seq is None:
        return np.zeros((length, width))
    arr = np.asarray(seq, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape != (length, width):
        raise ValueError(f"{name} must have shape ({length}, {width}), got {arr.shape}")
    return arr


def simulate(ss, u, wp=None, wm=None, x0=None):
    """Run the state recursion x+ = Ax + Bu + wp, y = Cx + Du + wm.

    Noise sequences are explicit inputs; pass None for noise-free runs.
    Returns y with one row per time step (1-D for single-output models
    when u was given 1-D).
    """
    u_arr = np.asarray(u, dtype=float)
    squeeze = u_arr.ndim == 1 and ss.n_outputs == 1
    l = u_arr.shape[0]
    u2 = _as_input(u, ss.n_inputs, l, "u")
    wp2 = _as_input(wp, ss.order, l, "wp")
    wm2 = _as_input(wm, ss.n_outputs, l, "wm")
    x = np.zeros(ss.order) if x0 is None else np.asarray(x0, dtype=float).reshape(ss.order)
    y = _kernels.simulate_kernel(ss.A, ss.B, ss.C, ss.D, u2, wp2, wm2, x)
    return y[:, 0] if squeeze else y


def ss_poles(ss):
    """Eigenvalues of A, sorted by (modulus, angle) for determinism."""
    try:
        eig = np.linalg.eigvals(ss.A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue computation failed: {exc}") from exc
    order = np.lexsort((np.angle(eig), np.abs(eig)))
    return eig[order]


def sort_poles(poles):
    """Sort an arbitrary pole list the same way as ss_poles."""
    p = np.asarray(poles, dtype=complex)
    return p[np.lexsort((np.angle(p), np.abs(p)))]


def ss_freq_response(ss, omegas):
    """C (zI - A)^-1 B + D on the grid, z = exp(j w ts). SISO returns a 1-D array."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    n = ss.order
    out = np.empty((omegas.size, ss.n_outputs, ss.n_inputs), dtype=complex)
    for i, w in enumerate(omegas):
        z = np.exp(1j * w * ss.ts)
        out[i] = ss.C @ np.linalg.solve(z * np.eye(n) - ss.A, ss.B) + ss.D
    if ss.n_outputs == 1 and ss.n_inputs == 1:
        return out[:, 0, 0]
    return out


def ss_to_tf(ss):
    """Convert a SISO state-space model to a RationalTf."""
    if ss.n_inputs != 1 or ss.n_outputs != 1:
        raise ValueError("ss_to_tf supports SISO models only")
    num, den = scipy.signal.ss2tf(ss.A, ss.B, ss.C, ss.D)
    return RationalTf(num[0], den, ss.ts)


def gaussian_sequence(length, width=1, sigma=1.0, seed=0):
    """Seeded zero-mean Gaussian noise, shape (length, width)."""
    rng = np.random.default_rng(seed)
    return sigma * rng.standard_normal((length, width))
