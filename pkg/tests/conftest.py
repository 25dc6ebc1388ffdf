import sys
from pathlib import Path

import numpy as np
import pytest
import scipy.linalg

from sprident import StateSpaceModel

sys.path.insert(0, str(Path(__file__).parent))


def random_stable_siso(rng, max_order=4, radius=(0.3, 0.9), min_hsv_ratio=0.01):
    """Random stable SISO model with all Hankel singular values within
    ``min_hsv_ratio`` of the largest, so every mode is genuinely
    observable and controllable."""
    n = int(rng.integers(1, max_order + 1))
    while True:
        A = rng.standard_normal((n, n))
        rho = np.max(np.abs(np.linalg.eigvals(A)))
        A = A * (rng.uniform(*radius) / max(1e-9, rho))
        B = rng.standard_normal((n, 1))
        C = rng.standard_normal((1, n))
        D = rng.standard_normal((1, 1))
        Wo = scipy.linalg.solve_discrete_lyapunov(A.T, C.T @ C)
        Wc = scipy.linalg.solve_discrete_lyapunov(A, B @ B.T)
        hsv = np.sqrt(np.abs(np.linalg.eigvals(Wo @ Wc)))
        if np.min(hsv) > min_hsv_ratio * np.max(hsv):
            return StateSpaceModel(A, B, C, D)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
