import warnings

import numpy as np
import pytest

from sprident import (EraRealization, ObserverMarkov, OkidConfig,
                      StateSpaceModel, build_hankels, build_regression, era,
                      estimate_markov, okid_era_pipeline, recover_system,
                      simulate, ss_poles, ss_to_markov)
from sprident.errors import NumericalError
from conftest import random_stable_siso


def observer_markov_from(F, L, C, D, p):
    blocks = []
    Fk = np.eye(F.shape[0])
    for _ in range(p):
        blocks.append(C @ Fk @ L)
        Fk = F @ Fk
    return ObserverMarkov(D, blocks)


class TestBuildRegression:
    def test_constant_signals(self):
        Y, V = build_regression(np.ones(4), np.ones(4), p=2)
        assert V.shape == (5, 2)
        assert np.allclose(V[0], 1.0)
        assert np.allclose(V[1:], 1.0)
        assert np.allclose(Y, 1.0)

    def test_siso_dimensions(self):
        u = np.arange(100.0)
        Y, V = build_regression(u, u, p=10)
        assert Y.shape == (1, 90)
        assert V.shape == (21, 90)

    def test_insufficient_data(self):
        with pytest.raises(ValueError, match="samples"):
            build_regression(np.ones(5), np.ones(5), p=5)

    def test_noise_free_data_fits_exactly(self, rng):
        # with p large, some parameter matrix reproduces the data exactly
        ss = random_stable_siso(rng, max_order=2)
        u = rng.standard_normal(400)
        y = simulate(ss, u)
        Y, V = build_regression(u, y, p=20)
        phi, *_ = np.linalg.lstsq(V.T, Y.T, rcond=None)
        assert np.linalg.norm(Y - phi.T @ V) < 1e-8


class TestEstimateMarkov:
    def test_recovers_full_rank_exactly(self, rng):
        p, m, r = 4, 1, 1
        n_z = m + p * (m + r)
        phi_true = rng.standard_normal((r, n_z))
        V = rng.standard_normal((n_z, 50))
        mk = estimate_markov(phi_true @ V, V)
        rebuilt = np.hstack([mk.d_block] + list(mk.cfl_blocks))
        assert np.max(np.abs(rebuilt - phi_true)) < 1e-10
        assert not mk.rank_deficient

    def test_identity_regressor(self):
        Y = np.arange(9.0).reshape(1, 9)
        mk = estimate_markov(Y, np.eye(9))
        rebuilt = np.hstack([mk.d_block] + list(mk.cfl_blocks))
        assert np.allclose(rebuilt, Y)

    def test_rank_deficiency_warns(self, rng):
        p, n_z = 4, 9
        V = rng.standard_normal((n_z, 50))
        V[-1] = V[0]  # duplicate row
        phi_true = rng.standard_normal((1, n_z))
        with pytest.warns(UserWarning, match="rank deficient"):
            estimate_markov(phi_true @ V, V)

    def test_noise_free_markov_parameters(self, rng):
        ss = random_stable_siso(rng, max_order=2)
        u = rng.standard_normal(2000)
        y = simulate(ss, u)
        Y, V = build_regression(u, y, p=20)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            mk = estimate_markov(Y, V)
            H0, H1 = build_hankels(mk, 10, 10)
            real = era(H0, H1, order=ss.order)
            model = recover_system(real, mk.d_block)
        got = np.array([m[0, 0] for m in ss_to_markov(model, 10)])
        want = np.array([m[0, 0] for m in ss_to_markov(ss, 10)])
        assert np.max(np.abs(got - want)) < 1e-6

    def test_least_squares_optimality(self, rng):
        # perturbing the estimate in any direction cannot reduce the residual
        V = rng.standard_normal((5, 40))
        Y = rng.standard_normal((1, 40))
        mk = estimate_markov(Y, V)
        phi = np.hstack([mk.d_block] + list(mk.cfl_blocks))
        base = np.linalg.norm(Y - phi @ V)
        for _ in range(20):
            delta = 1e-6 * rng.standard_normal(phi.shape)
            assert np.linalg.norm(Y - (phi + delta) @ V) >= base - 1e-12


class TestBuildHankels:
    def test_structure(self):
        blocks = [np.array([[float(k)]]) for k in range(4)]
        mk = ObserverMarkov(np.zeros((1, 1)), blocks)
        H0, H1 = build_hankels(mk, 2, 2)
        assert np.allclose(H0, [[0, 1], [1, 2]])
        assert np.allclose(H1, [[1, 2], [2, 3]])

    def test_rank_one_scalar_chain(self):
        blocks = [np.array([[0.5 ** k]]) for k in range(4)]
        mk = ObserverMarkov(np.zeros((1, 1)), blocks)
        H0, _ = build_hankels(mk, 2, 2)
        assert np.allclose(H0, [[1, 0.5], [0.5, 0.25]])
        assert np.linalg.matrix_rank(H0) == 1

    def test_single_block(self):
        blocks = [np.array([[float(k)]]) for k in range(2)]
        mk = ObserverMarkov(np.zeros((1, 1)), blocks)
        H0, H1 = build_hankels(mk, 1, 1)
        assert H0[0, 0] == 0 and H1[0, 0] == 1

    def test_insufficient_blocks(self):
        blocks = [np.zeros((1, 2))] * 3
        mk = ObserverMarkov(np.zeros((1, 1)), blocks)
        with pytest.raises(ValueError, match="observer window"):
            build_hankels(mk, 2, 2)

    def test_shift_property(self, rng):
        blocks = [rng.standard_normal((1, 2)) for _ in range(12)]
        mk = ObserverMarkov(np.zeros((1, 1)), blocks)
        H0, H1 = build_hankels(mk, 5, 6)
        H0_shifted, _ = build_hankels(ObserverMarkov(np.zeros((1, 1)), blocks[1:]), 5, 6)
        assert np.allclose(H1, H0_shifted)


class TestEra:
    def test_round_trip_order_two(self, rng):
        F = np.array([[0.4, 0.3], [-0.3, 0.4]])
        L = rng.standard_normal((2, 2))
        C = rng.standard_normal((1, 2))
        mk = observer_markov_from(F, L, C, np.zeros((1, 1)), 21)
        H0, H1 = build_hankels(mk, 10, 10)
        real = era(H0, H1, order=2)
        assert np.allclose(sorted(np.linalg.eigvals(real.F), key=lambda z: z.imag),
                           sorted(np.linalg.eigvals(F), key=lambda z: z.imag), atol=1e-6)
        got = observer_markov_from(real.F, real.L, real.C, np.zeros((1, 1)), 21)
        for a, b in zip(got.cfl_blocks, mk.cfl_blocks):
            assert np.allclose(a, b, atol=1e-8)

    def test_rank_one_chain(self):
        blocks = [np.array([[0.5 ** k]]) for k in range(5)]
        mk = ObserverMarkov(np.zeros((1, 1)), blocks)
        H0, H1 = build_hankels(mk, 2, 2)
        real = era(H0, H1, sv_threshold=1e-6, n_outputs=1, block_width=1)
        assert real.retained_order == 1
        assert real.F[0, 0] == pytest.approx(0.5, abs=1e-10)

    def test_zero_shifted_hankel(self):
        H0 = np.eye(3)
        real = era(H0, np.zeros((3, 3)), order=3, block_width=1)
        assert np.allclose(real.F, 0.0)

    def test_all_below_threshold(self):
        H0 = 1e-300 * np.eye(2)
        with pytest.raises((NumericalError, ValueError)):
            era(np.zeros((2, 2)), np.zeros((2, 2)), sv_threshold=0.5)

    def test_singular_values_non_increasing(self, rng):
        blocks = [rng.standard_normal((1, 2)) for _ in range(8)]
        mk = ObserverMarkov(np.zeros((1, 1)), blocks)
        H0, H1 = build_hankels(mk, 4, 4)
        real = era(H0, H1, order=2)
        assert np.all(np.diff(real.singular_values) <= 1e-12)


class TestRecoverSystem:
    def test_no_observer(self):
        real = EraRealization(F=np.array([[0.3]]), C=np.array([[1.0]]),
                              H=np.array([[0.5]]), G=np.array([[0.0]]),
                              singular_values=np.array([1.0]), retained_order=1)
        model = recover_system(real, np.array([[1.0]]))
        assert model.A[0, 0] == pytest.approx(0.3)
        assert model.B[0, 0] == pytest.approx(0.5)

    def test_scalar_arithmetic(self):
        real = EraRealization(F=np.array([[0.3]]), C=np.array([[1.0]]),
                              H=np.array([[0.5]]), G=np.array([[0.2]]),
                              singular_values=np.array([1.0]), retained_order=1)
        model = recover_system(real, np.array([[1.0]]))
        assert model.A[0, 0] == pytest.approx(0.5)
        assert model.B[0, 0] == pytest.approx(0.7)
        assert model.K[0, 0] == pytest.approx(0.2)

    def test_end_to_end_reference_plant(self, rng):
        A = np.array([[0.0, 1.0], [-0.5, -0.4]])
        ss = StateSpaceModel(A, [[0.0], [1.0]], [[1.0, 0.0]], [[1.0]])
        u = rng.standard_normal(2000)
        y = simulate(ss, u)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            model, _ = okid_era_pipeline(u, y, OkidConfig(p_window=30, order=2))
        assert np.max(np.abs(ss_poles(model) - ss_poles(ss))) < 1e-4


class TestPipeline:
    def test_noise_free_three_state(self, rng):
        ss = random_stable_siso(rng, max_order=3)
        u = rng.standard_normal(2000)
        y = simulate(ss, u)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            model, diag = okid_era_pipeline(u, y, OkidConfig(p_window=30, order=ss.order))
        assert np.max(np.abs(ss_poles(model) - ss_poles(ss))) < 1e-3
        assert diag.ls_residual < 1e-6

    def test_noisy_data(self, rng):
        A = np.array([[0.0, 1.0], [-0.5, -0.4]])
        ss = StateSpaceModel(A, [[0.0], [1.0]], [[1.0, 0.0]], [[0.5]])
        u = rng.standard_normal(2000)
        y = simulate(ss, u)
        y = y + np.std(y) * 0.01 * rng.standard_normal(y.shape)  # ~40 dB SNR
        model, _ = okid_era_pipeline(u, y, OkidConfig(p_window=30, order=2))
        assert np.max(np.abs(ss_poles(model) - ss_poles(ss))) < 5e-2

    def test_zero_output(self):
        u = np.random.default_rng(0).standard_normal(300)
        with pytest.raises((NumericalError, ValueError)):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                okid_era_pipeline(u, np.zeros(300), OkidConfig(p_window=10))

    def test_similarity_invariance(self, rng):
        base = random_stable_siso(rng, max_order=3)
        T = rng.standard_normal((base.order, base.order))
        while abs(np.linalg.det(T)) < 1e-2:
            T = rng.standard_normal((base.order, base.order))
        sim = StateSpaceModel(np.linalg.solve(T, base.A @ T), np.linalg.solve(T, base.B),
                              base.C @ T, base.D)
        u = rng.standard_normal(2000)
        poles = []
        for ss in (base, sim):
            y = simulate(ss, u)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                model, _ = okid_era_pipeline(u, y, OkidConfig(p_window=30, order=base.order))
            poles.append(ss_poles(model))
        assert np.max(np.abs(poles[0] - poles[1])) < 1e-6
