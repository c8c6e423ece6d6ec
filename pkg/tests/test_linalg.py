import numpy as np
import pytest

from hdcca.errors import DimensionError, RankDeficient, RegimeWarning, ZeroVector
from hdcca.linalg import (
    PopulationSpec,
    angle_between,
    canonical_bases,
    pca_spectrum,
    population_cca,
    sample_cca,
)


def brute_force_correlations(U, V):
    """Oracle: eigenvalues of (U U^T)^-1 U V^T (V V^T)^-1 V U^T by direct
    dense inversion, sorted descending."""
    gu = np.linalg.inv(U @ U.T)
    gv = np.linalg.inv(V @ V.T)
    mat = gu @ U @ V.T @ gv @ V @ U.T
    vals = np.linalg.eigvals(mat)
    assert np.max(np.abs(vals.imag)) < 1e-10
    return np.sort(vals.real)[::-1]


class TestSampleCca:
    def test_identical_inputs(self):
        rng = np.random.default_rng(1)
        U = rng.standard_normal((3, 20))
        res = sample_cca(U, U.copy())
        assert np.allclose(res.correlations_sq, 1.0, atol=1e-10)

    def test_orthogonal_row_spaces(self):
        S = 30
        U = np.zeros((3, S))
        V = np.zeros((4, S))
        U[np.arange(3), np.arange(3)] = 1.0
        V[np.arange(4), 10 + np.arange(4)] = 1.0
        res = sample_cca(U, V)
        assert np.allclose(res.correlations_sq, 0.0, atol=1e-12)

    @pytest.mark.parametrize("seed", range(12))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        K = rng.integers(2, 9)
        M = rng.integers(K, 9)
        S = int(rng.integers(K + M + 2, 41))
        U = rng.standard_normal((K, S))
        V = rng.standard_normal((M, S))
        res = sample_cca(U, V)
        oracle = brute_force_correlations(U, V)
        assert np.max(np.abs(res.correlations_sq - oracle)) < 1e-10

    def test_result_invariants(self):
        rng = np.random.default_rng(7)
        U = rng.standard_normal((4, 30))
        V = rng.standard_normal((6, 30))
        res = sample_cca(U, V)
        lam = res.correlations_sq
        assert np.all(np.diff(lam) <= 0)
        assert np.all((lam >= 0) & (lam <= 1))
        X, Y = res.left_variables, res.right_variables
        assert np.allclose(X @ X.T, np.eye(4), atol=1e-8)
        assert np.allclose(Y @ Y.T, np.eye(4), atol=1e-8)
        # <x_i, y_i>^2 recovers the correlations
        assert np.allclose(np.einsum("ij,ij->i", X, Y) ** 2, lam, atol=1e-8)
        # variables are the normalised projected weights
        for i in range(4):
            proj = U.T @ res.left_weights[i]
            assert np.allclose(proj / np.linalg.norm(proj), X[i], atol=1e-8)
            j = np.argmax(np.abs(res.left_weights[i]))
            assert res.left_weights[i, j] > 0

    def test_invariance_under_invertible_mixing(self):
        rng = np.random.default_rng(3)
        U = rng.standard_normal((5, 40))
        V = rng.standard_normal((7, 40))
        up = rng.standard_normal((5, 5))
        psi = rng.standard_normal((7, 7))
        base = sample_cca(U, V).correlations_sq
        mixed = sample_cca(up @ U, psi @ V).correlations_sq
        assert np.max(np.abs(base - mixed)) < 1e-9

    def test_invariance_under_sample_rotation(self):
        rng = np.random.default_rng(4)
        U = rng.standard_normal((4, 25))
        V = rng.standard_normal((6, 25))
        O, _ = np.linalg.qr(rng.standard_normal((25, 25)))
        a = sample_cca(U, V)
        b = sample_cca(U @ O, V @ O)
        assert np.max(np.abs(a.correlations_sq - b.correlations_sq)) < 1e-10
        # angle statistics carry over: measure against rotated references
        for i in range(4):
            ref = U[i]
            ang_a = angle_between(ref, a.left_variables[i]).degrees
            ang_b = angle_between(O.T @ ref, b.left_variables[i]).degrees
            assert ang_a == pytest.approx(ang_b, abs=1e-7)

    def test_exchange_symmetry(self):
        rng = np.random.default_rng(5)
        U = rng.standard_normal((4, 30))
        V = rng.standard_normal((6, 30))
        a = sample_cca(U, V)
        b = sample_cca(V, U)
        assert np.allclose(a.correlations_sq, b.correlations_sq, atol=1e-10)
        assert np.allclose(np.abs(a.left_variables), np.abs(b.right_variables), atol=1e-8)
        assert a.swapped is False and b.swapped is True

    def test_all_unit_when_rows_span_samples(self):
        rng = np.random.default_rng(6)
        U = rng.standard_normal((3, 10))
        V = rng.standard_normal((12, 10))
        with pytest.warns(RegimeWarning):
            res = sample_cca(U, V)
        assert np.all(res.correlations_sq > 1.0 - 1e-8)

    def test_forced_unit_count_on_overlap(self):
        # K + M > S > K, M forces exactly K + M - S unit correlations
        rng = np.random.default_rng(8)
        K, M, S = 6, 9, 12
        U = rng.standard_normal((K, S))
        V = rng.standard_normal((M, S))
        with pytest.warns(RegimeWarning):
            res = sample_cca(U, V)
        n_unit = int(np.sum(res.correlations_sq > 1.0 - 1e-8))
        assert n_unit == K + M - S
        assert res.correlations_sq[K + M - S] < 1.0 - 1e-6

    def test_rank_deficient_raises(self):
        rng = np.random.default_rng(9)
        U = rng.standard_normal((4, 30))
        U[3] = U[0] + U[1]
        V = rng.standard_normal((5, 30))
        with pytest.raises(RankDeficient):
            sample_cca(U, V)

    def test_demean_flag(self):
        rng = np.random.default_rng(10)
        U = rng.standard_normal((4, 50)) + 5.0
        V = rng.standard_normal((5, 50)) - 3.0
        res = sample_cca(U, V, demean=True)
        ref = sample_cca(
            U - U.mean(axis=1, keepdims=True), V - V.mean(axis=1, keepdims=True)
        )
        assert np.allclose(res.correlations_sq, ref.correlations_sq, atol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            sample_cca(np.zeros((3, 10)), np.zeros((4, 11)))


class TestPopulationCca:
    def test_single_signal_structure(self):
        spec = PopulationSpec.single_signal(5, 7, r=0.6)
        eig, left, right = population_cca(spec)
        assert eig[0] == pytest.approx(0.36, abs=1e-12)
        assert np.allclose(eig[1:], 0.0, atol=1e-12)
        assert np.allclose(np.abs(left[0]), np.eye(5)[0], atol=1e-10)
        assert np.allclose(np.abs(right[0]), np.eye(7)[0], atol=1e-10)

    def test_zero_cross_block(self):
        spec = PopulationSpec(np.eye(4), np.zeros((4, 6)), np.eye(6))
        eig, _, _ = population_cca(spec)
        assert np.allclose(eig, 0.0, atol=1e-14)

    def test_matches_large_sample_cca(self):
        rng = np.random.default_rng(11)
        K, M, S = 3, 4, 1_000_000
        A = rng.standard_normal((K, K))
        B = rng.standard_normal((M, M))
        cov_uu = A @ A.T + K * np.eye(K)
        cov_vv = B @ B.T + M * np.eye(M)
        cov_uv = 0.5 * rng.standard_normal((K, M))
        spec = PopulationSpec(cov_uu, cov_uv, cov_vv)
        assert spec.is_valid()
        eig = population_cca(spec).eigenvalues
        L = np.linalg.cholesky(spec.joint())
        W = L @ rng.standard_normal((K + M, S))
        sampled = sample_cca(W[:K], W[K:]).correlations_sq
        assert np.max(np.abs(eig - sampled)) < 2e-2

    def test_population_is_r_squared(self):
        # the single nonzero eigenvalue equals C_uv^2 / (C_uu C_vv)
        spec = PopulationSpec.single_signal(4, 5, r=0.8)
        c_uu = spec.cov_uu[0, 0]
        c_vv = spec.cov_vv[0, 0]
        c_uv = spec.cov_uv[0, 0]
        eig = population_cca(spec).eigenvalues
        assert eig[0] == pytest.approx(c_uv**2 / (c_uu * c_vv), abs=1e-14)


class TestCanonicalBases:
    def test_orthogonal_spaces(self):
        U = np.eye(3, 25)
        V = np.zeros((5, 25))
        V[np.arange(5), 10 + np.arange(5)] = 1.0
        basis = canonical_bases(U, V)
        assert np.allclose(basis.cosines, 0.0, atol=1e-12)
        assert np.allclose(basis.u_basis @ basis.u_basis.T, np.eye(3), atol=1e-10)
        assert np.allclose(basis.v_basis @ basis.v_basis.T, np.eye(5), atol=1e-10)

    def test_identical_spaces(self):
        rng = np.random.default_rng(12)
        U = rng.standard_normal((4, 30))
        basis = canonical_bases(U, U.copy())
        assert np.allclose(basis.cosines, 1.0, atol=1e-10)

    def test_scalar_product_table(self):
        rng = np.random.default_rng(13)
        U = rng.standard_normal((3, 25))
        V = rng.standard_normal((5, 25))
        basis = canonical_bases(U, V)
        cross = basis.u_basis @ basis.v_basis.T
        expected = np.zeros((3, 5))
        expected[np.arange(3), np.arange(3)] = basis.cosines
        assert np.max(np.abs(cross - expected)) < 1e-10
        assert np.max(np.abs(basis.u_basis @ basis.u_basis.T - np.eye(3))) < 1e-10
        assert np.max(np.abs(basis.v_basis @ basis.v_basis.T - np.eye(5))) < 1e-10
        # cosines match the CCA correlations on the same inputs
        lam = sample_cca(U, V).correlations_sq
        assert np.allclose(basis.cosines**2, lam, atol=1e-10)
        assert basis.padded_cosines.shape == (5,)
        assert np.all(basis.padded_cosines[3:] == 0.0)

    def test_requires_smaller_first(self):
        with pytest.raises(DimensionError):
            canonical_bases(np.eye(5, 20), np.eye(3, 20))


class TestPcaSpectrum:
    def test_rank_one(self):
        row = np.ones(50) / np.sqrt(50)
        X = np.vstack([row, row, row])
        eig = pca_spectrum(X)
        assert eig[0] == pytest.approx(3.0 / 50, abs=1e-12)
        assert np.allclose(eig[1:], 0.0, atol=1e-12)

    def test_marchenko_pastur_bulk(self):
        rng = np.random.default_rng(14)
        N, S = 100, 1000
        eig = pca_spectrum(rng.standard_normal((N, S)))
        gamma = N / S
        lo, hi = (1 - np.sqrt(gamma)) ** 2, (1 + np.sqrt(gamma)) ** 2
        assert eig.min() > lo - 0.05
        assert eig.max() < hi + 0.05

    def test_rotation_invariance(self):
        rng = np.random.default_rng(15)
        X = rng.standard_normal((6, 40))
        Q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
        assert np.max(np.abs(pca_spectrum(X) - pca_spectrum(Q @ X))) < 1e-10

    def test_demean(self):
        rng = np.random.default_rng(16)
        X = rng.standard_normal((5, 200)) + 10.0
        eig = pca_spectrum(X, demean=True)
        assert eig[0] < 5.0  # the mean direction is removed


class TestAngleBetween:
    def test_parallel(self):
        res = angle_between(np.array([1.0, 2.0, 3.0]), np.array([2.0, 4.0, 6.0]))
        assert res == pytest.approx((1.0, 0.0, 0.0), abs=1e-12)

    def test_orthogonal(self):
        res = angle_between(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        assert res.cos_sq == pytest.approx(0.0, abs=1e-14)
        assert res.degrees == pytest.approx(90.0)

    def test_hand_example(self):
        res = angle_between(np.array([1.0, 1.0, 0.0]), np.array([1.0, 0.0, 0.0]))
        assert res.sin_sq == pytest.approx(0.5, abs=1e-12)
        assert res.degrees == pytest.approx(45.0, abs=1e-10)

    def test_sign_invariance(self):
        rng = np.random.default_rng(17)
        x, y = rng.standard_normal(10), rng.standard_normal(10)
        assert angle_between(x, y).degrees == pytest.approx(
            angle_between(-x, y).degrees
        )

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            angle_between(np.zeros(5), np.ones(5))
