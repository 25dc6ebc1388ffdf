"""Constrained frequency-response fitting.

The coefficients of the basis expansion are found by a convex quadratic
program: least-squares match to the measured response, subject to one
linear inequality per constraint frequency keeping the real part of the
fit at or above a tolerance (either absolutely or relative to the data).
Solved by a dense primal active-set method with a KKT certificate.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .errors import InfeasibleError, NumericalError
from .gobf import combine, eval_basis

MODE_ABSOLUTE = "absolute"
MODE_RATIO = "ratio"


@dataclass(frozen=True)
class SprFitConfig:
    epsilon: float = 1e-3
    weights: np.ndarray = None
    mode: str = MODE_ABSOLUTE
    constraint_grid: np.ndarray = None  # defaults to the data grid

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.mode not in (MODE_ABSOLUTE, MODE_RATIO):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if np.any(w < 0):
                raise ValueError("weights must be non-negative")
            object.__setattr__(self, "weights", w)
        if self.constraint_grid is not None:
            object.__setattr__(self, "constraint_grid",
                               np.asarray(self.constraint_grid, dtype=float))


@dataclass(frozen=True)
class QpProblem:
    """min 0.5 theta' P theta + q' theta  s.t.  C theta <= d."""

    P: np.ndarray
    q: np.ndarray
    C: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.P, dtype=float))
        scale = max(1.0, float(np.linalg.norm(P)))
        if np.max(np.abs(P - P.T)) >= 1e-12 * scale:
            raise ValueError("P must be symmetric")
        if np.min(np.linalg.eigvalsh(P)) < -1e-10 * scale:
            raise ValueError("P must be positive semidefinite")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        object.__setattr__(self, "C", np.atleast_2d(np.asarray(self.C, dtype=float)))
        object.__setattr__(self, "d", np.asarray(self.d, dtype=float))

    @property
    def n(self):
        return self.P.shape[0]

    @property
    def n_constraints(self):
        return 0 if self.C.size == 0 else self.C.shape[0]

    def objective(self, theta):
        return float(0.5 * theta @ self.P @ theta + self.q @ theta)


@dataclass(frozen=True)
class SprFitResult:
    theta: np.ndarray
    fitted_tf: object
    objective: float
    min_real_part: float
    dense_min_real_part: float
    kkt: dict
    active_set: tuple
    multipliers: np.ndarray


def assemble_qp(data, basis_matrix, cfg, constraint_matrix=None, constraint_values=None):
    """Build the QP from response data and the basis evaluated on the grids.

    ``basis_matrix`` is (n_filters, n_freqs) aligned with ``data.omegas``.
    ``constraint_matrix``/``constraint_values`` give the basis and data on
    the constraint grid; both default to the fit grid.
    """
    B = np.atleast_2d(np.asarray(basis_matrix, dtype=complex))
    g = data.values
    if B.shape[1] != g.size:
        raise ValueError("basis matrix columns must align with the data grid")
    w = cfg.weights if cfg.weights is not None else np.ones(g.size)
    if w.size != g.size:
        raise ValueError("weights length must match the data")
    sw = np.sqrt(w)
    M = np.vstack([(B.real * sw).T, (B.imag * sw).T])
    v = np.concatenate([g.real * sw, g.imag * sw])
    P = 2.0 * M.T @ M
    q = -2.0 * M.T @ v

    Bc = B if constraint_matrix is None else np.atleast_2d(np.asarray(constraint_matrix, dtype=complex))
    if cfg.mode == MODE_RATIO:
        gc = g if constraint_values is None else np.asarray(constraint_values, dtype=complex)
        if gc.size != Bc.shape[1]:
            raise ValueError("constraint values must align with the constraint grid")
        small = np.abs(gc) < 1e3 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(gc))))
        if np.any(small):
            idx = int(np.argmax(small))
            raise ValueError(f"ratio constraint divides by near-zero data at grid index {idx}")
        rows = np.real(Bc / gc)
    else:
        rows = Bc.real
    C = -rows.T
    d = np.full(C.shape[0], -cfg.epsilon)
    return QpProblem(P, q, C, d)


def _ridge(P):
    n = P.shape[0]
    eigs = np.linalg.eigvalsh(P)
    if eigs[0] > 1e-10 * max(1.0, eigs[-1]):
        return P
    return P + (1e-10 * np.trace(P) / n) * np.eye(n)


def _phase1(C, d):
    """Find a strictly feasible point by maximizing the minimum slack (LP)."""
    n_con, n = C.shape
    # variables (theta, s): minimize -s  s.t.  C theta + s <= d, s <= 1
    A_ub = np.hstack([C, np.ones((n_con, 1))])
    c = np.zeros(n + 1)
    c[-1] = -1.0
    bounds = [(None, None)] * n + [(None, 1.0)]
    res = scipy.optimize.linprog(c, A_ub=A_ub, b_ub=d, bounds=bounds, method="highs")
    if res.status != 0:
        raise NumericalError(f"phase-1 feasibility LP failed: {res.message}")
    s = res.x[-1]
    if s <= 0:
        raise InfeasibleError(
            f"constraints are infeasible: best achievable slack is {s:.3e}",
            evidence={"max_min_slack": float(s),
                      "dual": np.asarray(res.ineqlin.marginals)})
    return res.x[:n]


def solve_qp(qp, tol=1e-9, max_iter=None):
    """Primal active-set solver for a PSD QP with inequality constraints.

    Returns (theta, multipliers, diagnostics). Multipliers are reported
    for the full constraint set (zero off the active set) and satisfy the
    stationarity condition P theta + q + C' lambda = 0.
    """
    P = _ridge(qp.P)
    q = qp.q
    n = qp.n
    n_con = qp.n_constraints
    lam = np.zeros(n_con)

    if n_con == 0:
        theta = np.linalg.solve(P, -q)
        diag = {"iterations": 0, "active_set": ()}
        return theta, lam, diag

    C, d = qp.C, qp.d
    scale = max(1.0, float(np.linalg.norm(q)), float(np.linalg.norm(P)))

    x = np.linalg.solve(P, -q)
    if np.max(C @ x - d) > tol * scale:
        x = _phase1(C, d)
    working = []

    if max_iter is None:
        max_iter = 100 * (n + 1) + n_con
    for it in range(max_iter):
        g = P @ x + q
        k = len(working)
        Cw = C[working]
        kkt = np.zeros((n + k, n + k))
        kkt[:n, :n] = P
        kkt[:n, n:] = Cw.T
        kkt[n:, :n] = Cw
        rhs = np.concatenate([-g, np.zeros(k)])
        try:
            sol = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
        p = sol[:n]
        lam_w = sol[n:]
        if np.linalg.norm(p) <= tol * max(1.0, np.linalg.norm(x)):
            if k == 0 or np.min(lam_w) >= -tol * scale:
                lam = np.zeros(n_con)
                lam[working] = np.maximum(lam_w, 0.0)
                diag = {"iterations": it, "active_set": tuple(sorted(working))}
                return x, lam, diag
            working.pop(int(np.argmin(lam_w)))
            continue
        # ratio test against constraints not in the working set
        mask = np.ones(n_con, dtype=bool)
        mask[working] = False
        Cp = C[mask] @ p
        slack = d[mask] - C[mask] @ x
        blocking = Cp > tol
        alpha = 1.0
        block_idx = None
        if np.any(blocking):
            ratios = slack[blocking] / Cp[blocking]
            j = int(np.argmin(ratios))
            if ratios[j] < alpha:
                alpha = max(ratios[j], 0.0)
                block_idx = np.flatnonzero(mask)[np.flatnonzero(blocking)[j]]
        x = x + alpha * p
        if block_idx is not None:
            working.append(int(block_idx))
        elif alpha == 1.0:
            # unblocked full step lands exactly on the working-set
            # minimizer, so the multipliers from this solve are final
            if k == 0 or np.min(lam_w) >= -tol * scale:
                lam = np.zeros(n_con)
                lam[working] = np.maximum(lam_w, 0.0)
                diag = {"iterations": it, "active_set": tuple(sorted(working))}
                return x, lam, diag
            working.pop(int(np.argmin(lam_w)))
    raise NumericalError("active-set solver did not converge", best_iterate=x)


def check_kkt(qp, theta, multipliers):
    """Stationarity, primal/dual feasibility and complementarity residuals."""
    theta = np.asarray(theta, dtype=float)
    lam = np.zeros(qp.n_constraints) if multipliers is None else np.asarray(multipliers, dtype=float)
    grad = qp.P @ theta + qp.q
    if qp.n_constraints:
        grad = grad + qp.C.T @ lam
        slack = qp.C @ theta - qp.d
        primal = float(np.max(slack))
        dual = float(-np.min(lam)) if lam.size else 0.0
        comp = float(np.max(np.abs(lam * slack)))
    else:
        primal = dual = comp = 0.0
    return {
        "stationarity": float(np.linalg.norm(grad)),
        "primal_feasibility": max(primal, 0.0),
        "dual_feasibility": max(dual, 0.0),
        "complementarity": comp,
    }


def fit_spr(data, basis, cfg=None, verify_grid_mult=4):
    """Fit the basis expansion to frequency-response data under the SPR constraints.

    The constraints are enforced on the constraint grid only; as a
    diagnostic the fitted real part is re-checked on a ``verify_grid_mult``
    times denser uniform grid and a warning is emitted on violation.
    """
    cfg = cfg or SprFitConfig()
    B = eval_basis(basis, data.omegas)
    con_grid = cfg.constraint_grid if cfg.constraint_grid is not None else data.omegas
    if cfg.constraint_grid is not None:
        Bc = eval_basis(basis, con_grid)
        gc = None
        if cfg.mode == MODE_RATIO:
            gc = np.interp(con_grid, data.omegas, data.values)
        qp = assemble_qp(data, B, cfg, constraint_matrix=Bc, constraint_values=gc)
    else:
        Bc = B
        qp = assemble_qp(data, B, cfg)
    theta, lam, diag = solve_qp(qp)
    kkt = check_kkt(qp, theta, lam)
    fitted = combine(theta, basis)

    re_con = np.real(theta @ Bc)
    min_re = float(np.min(re_con))
    nyq = np.pi / data.ts
    dense = np.linspace(0.0, nyq, verify_grid_mult * con_grid.size)
    re_dense = np.real(theta @ eval_basis(basis, dense))
    dense_min = float(np.min(re_dense))
    if dense_min < cfg.epsilon - 1e-6:
        w_bad = dense[int(np.argmin(re_dense))]
        warnings.warn(
            f"fitted real part dips to {dense_min:.3e} between constraint "
            f"samples (omega={w_bad:.6g} rad/s)", stacklevel=2)

    resid = theta @ B - data.values
    w = cfg.weights if cfg.weights is not None else np.ones(data.values.size)
    objective = float(np.sum(w * np.abs(resid) ** 2))
    active = tuple(i for i in diag["active_set"]
                   if abs(qp.C[i] @ theta - qp.d[i]) <= 1e-7 * max(1.0, abs(qp.d[i])))
    return SprFitResult(theta=theta, fitted_tf=fitted, objective=objective,
                        min_real_part=min_re, dense_min_real_part=dense_min,
                        kkt=kkt, active_set=active, multipliers=lam)
