"""Observer-based Markov parameter estimation and state-space realization.

From input/output records, the observer predictor form is regressed by
least squares to obtain the observer Markov parameters. Block Hankel
matrices of those parameters are factored by SVD to realize the predictor
matrices (F, L, C), from which the system matrices and the observer gain
are recovered.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .lti import StateSpaceModel

RANK_RTOL = 1e-10  # relative rank tolerance for the least-squares pseudo-inverse
SV_RTOL_DEFAULT = 1e-6  # relative singular-value cutoff when no order is given
DECAY_WEIGHT = 10.0  # per-block penalty ratio for the rank-deficient tie-break


@dataclass(frozen=True)
class OkidConfig:
    """Settings for the identification pipeline.

    Exactly one of ``sv_threshold`` (relative cutoff in (0, 1)) and
    ``order`` (explicit model order) is honored per run: ``order`` wins
    when set. Hankel shape defaults to rows = cols = floor(p/2).
    """

    p_window: int = 20
    hankel_rows: int = None
    hankel_cols: int = None
    sv_threshold: float = SV_RTOL_DEFAULT
    order: int = None

    def __post_init__(self):
        if self.p_window < 1:
            raise ValueError("observer window p must be >= 1")
        if self.order is None and not 0 < self.sv_threshold < 1:
            raise ValueError("sv_threshold must lie in (0, 1)")

    def hankel_shape(self):
        rows = self.hankel_rows if self.hankel_rows is not None else self.p_window // 2
        cols = self.hankel_cols if self.hankel_cols is not None else self.p_window // 2
        return rows, cols


@dataclass(frozen=True)
class ObserverMarkov:
    """Observer Markov parameters: the feedthrough block and the C F^k L blocks."""

    d_block: np.ndarray          # r x m
    cfl_blocks: tuple            # p blocks, each r x (m+r)
    rank: int = None
    rank_deficient: bool = False

    def __post_init__(self):
        object.__setattr__(self, "cfl_blocks", tuple(np.atleast_2d(b) for b in self.cfl_blocks))
        object.__setattr__(self, "d_block", np.atleast_2d(self.d_block))
        widths = {b.shape for b in self.cfl_blocks}
        if len(widths) > 1:
            raise ValueError("all C F^k L blocks must share one shape")

    @property
    def p(self):
        return len(self.cfl_blocks)


@dataclass(frozen=True)
class EraRealization:
    """Realized predictor matrices plus the SVD diagnostics."""

    F: np.ndarray
    C: np.ndarray
    H: np.ndarray
    G: np.ndarray
    singular_values: np.ndarray
    retained_order: int

    def __post_init__(self):
        sv = np.asarray(self.singular_values, dtype=float)
        if np.any(np.diff(sv) > 1e-12 * sv[0]):
            raise ValueError("singular values must be non-increasing")
        if self.retained_order > sv.size:
            raise ValueError("retained order exceeds number of singular values")
        object.__setattr__(self, "singular_values", sv)

    @property
    def L(self):
        return np.hstack([self.H, self.G])


def _as_2d_signal(x, name):
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 1-D or 2-D sequence")
    return arr


def build_regression(u, y, p):
    """Stack outputs and regressors for the observer least squares.

    Returns (Y, V) where Y has columns y(p) .. y(l-1) and V has columns
    nu(k) = [u(k); nu_x(k-1); ...; nu_x(k-p)] with nu_x(k) = [u(k); y(k)].
    """
    u = _as_2d_signal(u, "u")
    y = _as_2d_signal(y, "y")
    l = u.shape[0]
    if y.shape[0] != l:
        raise ValueError("u and y must have the same length")
    if l <= p:
        raise ValueError(f"need more than p={p} samples, got {l}")
    m, r = u.shape[1], y.shape[1]
    Y = y[p:].T
    n_cols = l - p
    V = np.zeros((m + p * (m + r), n_cols))
    V[:m] = u[p:].T
    nu_x = np.hstack([u, y]).T  # (m+r) x l
    for i in range(1, p + 1):
        V[m + (i - 1) * (m + r): m + i * (m + r)] = nu_x[:, p - i:l - i]
    return Y, V


def _block_structure(n_z, r):
    # infer m from n_z = m + p (m + r)
    candidates = [m for m in range(1, n_z + 1) if (n_z - m) % (m + r) == 0]
    if not candidates:
        raise ValueError("column count of V is inconsistent with the block structure")
    m = candidates[0]
    return m, (n_z - m) // (m + r)


def estimate_markov(Y, V, rank_rtol=RANK_RTOL, decay_weight=DECAY_WEIGHT):
    """Least-squares estimate of the observer Markov parameters from Y ~ Phi V.

    Noise-free data leaves V structurally rank deficient (past outputs are
    deterministic functions of past inputs), so the plain minimum-norm
    solution smears into invalid observer sequences. When rank deficiency
    is detected, the tie-break re-solves with block column weights growing
    geometrically (``decay_weight`` per block), which selects the exact-fit
    solution with the fastest-decaying blocks -- a realizable deadbeat-like
    observer. Full-rank (noisy) regressions are unaffected.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    V = np.atleast_2d(np.asarray(V, dtype=float))
    r = Y.shape[0]
    n_z = V.shape[0]
    m, p = _block_structure(n_z, r)
    phi, _, rank, _ = np.linalg.lstsq(V.T, Y.T, rcond=rank_rtol)
    phi = phi.T
    deficient = rank < n_z
    if deficient:
        warnings.warn(
            f"regressor matrix is rank deficient ({rank}/{n_z}); "
            "decay-weighted minimum-norm solution returned", stacklevel=2)
        width = m + r
        d = np.ones(n_z)
        for k in range(p):
            d[m + k * width: m + (k + 1) * width] = decay_weight ** k
        psi, _, rank, _ = np.linalg.lstsq((V / d[:, None]).T, Y.T, rcond=rank_rtol)
        phi = psi.T / d[None, :]
    width = m + r
    blocks = [phi[:, m + k * width: m + (k + 1) * width] for k in range(p)]
    return ObserverMarkov(phi[:, :m], blocks, rank=int(rank), rank_deficient=bool(deficient))


def build_hankels(markov, rows, cols):
    """Block Hankel matrices H0 (blocks k = i+j) and H1 (blocks k = i+j+1)."""
    blocks = markov.cfl_blocks
    needed = rows + cols  # H1 reaches block index rows+cols-1
    if needed > len(blocks):
        raise ValueError(
            f"Hankel shape {rows}x{cols} needs {needed} blocks but only "
            f"{len(blocks)} are available; increase the observer window p")
    H0 = np.block([[blocks[i + j] for j in range(cols)] for i in range(rows)])
    H1 = np.block([[blocks[i + j + 1] for j in range(cols)] for i in range(rows)])
    return H0, H1


def _select_order(sv, sv_threshold, order):
    if order is not None:
        if not 1 <= order <= sv.size:
            raise ValueError(f"explicit order {order} outside [1, {sv.size}]")
        return order
    keep = int(np.sum(sv >= sv_threshold * sv[0]))
    if keep == 0:
        raise NumericalError("all singular values fall below the threshold")
    return keep


def era(H0, H1, sv_threshold=SV_RTOL_DEFAULT, order=None, n_outputs=1, block_width=2):
    """Realize (F, L, C) from the Hankel pair by SVD truncation.

    ``n_outputs`` is the block row height r and ``block_width`` the block
    column width m + r; they fix how C and L are sliced out of the
    observability and controllability factors.
    """
    H0 = np.atleast_2d(np.asarray(H0, dtype=float))
    H1 = np.atleast_2d(np.asarray(H1, dtype=float))
    if H0.shape != H1.shape:
        raise ValueError("H0 and H1 must have the same shape")
    try:
        U, sv, Vt = np.linalg.svd(H0, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD of the Hankel matrix failed: {exc}") from exc
    n = _select_order(sv, sv_threshold, order)
    if sv[n - 1] <= 0:
        raise NumericalError("retained singular value is zero; reduce the order")
    s_half = np.sqrt(sv[:n])
    obs = U[:, :n] * s_half            # observability factor
    ctrl = (s_half[:, None]) * Vt[:n]  # controllability factor
    F = (U[:, :n].T @ H1 @ Vt[:n].T) / np.outer(s_half, s_half)
    C = obs[:n_outputs, :]
    L = ctrl[:, :block_width]
    m = block_width - n_outputs
    return EraRealization(F, C, L[:, :m], L[:, m:], sv, n)


def recover_system(realization, d_block, ts=1.0):
    """Undo the observer feedback: A = F + G C, B = H + G D, K = G."""
    F, C, H, G = realization.F, realization.C, realization.H, realization.G
    D = np.atleast_2d(np.asarray(d_block, dtype=float))
    A = F + G @ C
    B = H + G @ D
    eig = np.linalg.eigvals(F)
    if np.max(np.abs(eig)) >= 1.0:
        warnings.warn("recovered observer matrix A - K C is not Schur", stacklevel=2)
        return StateSpaceModel(A, B, C, D, K=None, ts=ts)
    return StateSpaceModel(A, B, C, D, K=G, ts=ts)


@dataclass(frozen=True)
class OkidDiagnostics:
    singular_values: np.ndarray
    retained_order: int
    ls_residual: float
    regression_rank: int
    rank_deficient: bool


def okid_era_pipeline(u, y, cfg=None, ts=1.0):
    """End-to-end identification: regression, realization, recovery.

    Returns (StateSpaceModel, OkidDiagnostics).
    """
    cfg = cfg or OkidConfig()
    Y, V = build_regression(u, y, cfg.p_window)
    markov = estimate_markov(Y, V)
    phi = np.hstack([markov.d_block] + list(markov.cfl_blocks))
    residual = float(np.linalg.norm(Y - phi @ V))
    rows, cols = cfg.hankel_shape()
    H0, H1 = build_hankels(markov, rows, cols)
    r = markov.d_block.shape[0]
    width = markov.cfl_blocks[0].shape[1]
    real = era(H0, H1, sv_threshold=cfg.sv_threshold, order=cfg.order,
               n_outputs=r, block_width=width)
    model = recover_system(real, markov.d_block, ts=ts)
    diag = OkidDiagnostics(real.singular_values, real.retained_order,
                           residual, markov.rank, markov.rank_deficient)
    return model, diag
