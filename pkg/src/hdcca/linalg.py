"""Numerically stable CCA, canonical subspace bases, PCA spectra, and angles.

Sample canonical correlations are defined through eigenvalues of
``(U U^T)^-1 U V^T (V V^T)^-1 V U^T``, but that expression squares condition
numbers.  Everything here goes through thin QR factorisations of the
transposed data followed by an SVD of the product of orthonormal bases, which
is algebraically equivalent and keeps full accuracy for the small
correlations as well.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    DimensionError,
    RankDeficient,
    RegimeWarning,
    SingularCovariance,
    ZeroVector,
)

_TIE_TOL = 1e-10


@dataclass
class CcaResult:
    """Sample CCA output.

    ``correlations_sq`` holds the squared correlations sorted descending.
    Row ``i`` of ``left_weights`` / ``right_weights`` holds the weight
    vectors, and the unit-norm canonical variables are the rows of
    ``left_variables`` / ``right_variables`` (so
    ``left_variables[i] = U^T left_weights[i]`` exactly).  ``swapped`` records
    that the first input had more rows than the second, which matters when
    mapping angle formulas that assume the left side is the smaller one.
    """

    correlations_sq: np.ndarray
    left_weights: np.ndarray
    right_weights: np.ndarray
    left_variables: np.ndarray
    right_variables: np.ndarray
    swapped: bool = False
    ties: bool = field(default=False)

    @property
    def n_correlations(self) -> int:
        return self.correlations_sq.shape[0]


def _orthonormal_rows(X, cond_limit, name):
    """QR of X^T; returns (Q with orthonormal columns, R) and rank-checks."""
    Q, R = np.linalg.qr(X.T)
    diag = np.abs(np.diag(R))
    if diag.min() == 0.0:
        raise RankDeficient(f"{name} has exactly collinear rows")
    # cond(R)^2 approximates the condition number of the Gram matrix X X^T
    cond = np.linalg.cond(R)
    if cond * cond > cond_limit:
        raise RankDeficient(
            f"{name} rows are numerically collinear "
            f"(Gram condition ~{cond * cond:.2e} > {cond_limit:.0e})"
        )
    return Q, R


def _fix_signs(weights, variables=None):
    """Make the largest-magnitude coordinate of each weight vector positive."""
    for i in range(weights.shape[0]):
        j = np.argmax(np.abs(weights[i]))
        if weights[i, j] < 0:
            weights[i] = -weights[i]
            if variables is not None:
                variables[i] = -variables[i]


def _solve_weights(R, B):
    """Weights solving ``R w = b`` per column; minimal-norm when R is wide."""
    if R.shape[0] == R.shape[1]:
        return np.linalg.solve(R, B)
    return np.linalg.lstsq(R, B, rcond=None)[0]


def sample_cca(U, V, *, demean: bool = False, cond_limit: float = 1e12) -> CcaResult:
    """Sample canonical correlations and variables between two row-data sets.

    Parameters
    ----------
    U, V : (K, S) and (M, S) arrays
        Variables in rows, samples in columns.
    demean : bool
        Subtract the per-row mean across samples first.  Off by default;
        ingestion paths de-mean at load time instead.
    cond_limit : float
        Maximum tolerated condition number of either Gram matrix.

    Returns
    -------
    CcaResult
        With ``min(K, M)`` correlations sorted descending.
    """
    U = np.atleast_2d(np.asarray(U, dtype=float))
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if U.shape[1] != V.shape[1]:
        raise DimensionError(
            f"sample counts differ: U has {U.shape[1]}, V has {V.shape[1]}"
        )
    if demean:
        U = U - U.mean(axis=1, keepdims=True)
        V = V - V.mean(axis=1, keepdims=True)
    K, S = U.shape
    M = V.shape[0]
    if S <= K + M:
        warnings.warn(
            f"S={S} <= K+M={K + M}: {max(K + M - S, 0)} correlations are "
            "forced to 1 and the remaining ones carry reduced information",
            RegimeWarning,
            stacklevel=2,
        )
    Qu, Ru = _orthonormal_rows(U, cond_limit, "U")
    Qv, Rv = _orthonormal_rows(V, cond_limit, "V")
    A, sigma, Bt = np.linalg.svd(Qu.T @ Qv, full_matrices=False)
    lam = np.clip(sigma**2, 0.0, 1.0)

    left_w = _solve_weights(Ru, A).T           # rows: weight vectors in R^K
    right_w = _solve_weights(Rv, Bt.T).T       # rows: weight vectors in R^M
    left_v = (Qu @ A).T                        # rows: unit canonical variables
    right_v = (Qv @ Bt.T).T
    _fix_signs(left_w, left_v)
    _fix_signs(right_w, right_v)

    ties = bool(np.any(np.abs(np.diff(lam)) < _TIE_TOL)) if lam.size > 1 else False
    return CcaResult(
        correlations_sq=lam,
        left_weights=left_w,
        right_weights=right_w,
        left_variables=left_v,
        right_variables=right_v,
        swapped=K > M,
        ties=ties,
    )


# ---------------------------------------------------------------------------
# Population CCA
# ---------------------------------------------------------------------------

@dataclass
class PopulationSpec:
    """Covariance blocks of a joint (K+M)-dimensional population.

    ``signal_left`` / ``signal_right`` / ``strengths`` optionally record the
    planted signal vectors and their squared correlations for reference.
    """

    cov_uu: np.ndarray
    cov_uv: np.ndarray
    cov_vv: np.ndarray
    signal_left: np.ndarray | None = None
    signal_right: np.ndarray | None = None
    strengths: tuple[float, ...] = ()

    def __post_init__(self):
        self.cov_uu = np.asarray(self.cov_uu, dtype=float)
        self.cov_uv = np.asarray(self.cov_uv, dtype=float)
        self.cov_vv = np.asarray(self.cov_vv, dtype=float)
        K, M = self.cov_uv.shape
        if self.cov_uu.shape != (K, K) or self.cov_vv.shape != (M, M):
            raise DimensionError("covariance block shapes are inconsistent")

    def joint(self) -> np.ndarray:
        top = np.hstack([self.cov_uu, self.cov_uv])
        bottom = np.hstack([self.cov_uv.T, self.cov_vv])
        return np.vstack([top, bottom])

    def is_valid(self, tol: float = 1e-10) -> bool:
        return bool(np.linalg.eigvalsh(self.joint()).min() > -tol)

    @classmethod
    def single_signal(cls, K: int, M: int, r: float) -> "PopulationSpec":
        """Only the first coordinates of the two vectors are correlated, with
        correlation ``r``; everything else is independent unit noise."""
        cov_uv = np.zeros((K, M))
        cov_uv[0, 0] = r
        return cls(np.eye(K), cov_uv, np.eye(M), strengths=(r * r,))


class PopulationCca(NamedTuple):
    eigenvalues: np.ndarray      # squared population correlations, descending
    left_vectors: np.ndarray     # rows: weight vectors in R^K
    right_vectors: np.ndarray    # rows: weight vectors in R^M


def population_cca(spec: PopulationSpec) -> PopulationCca:
    """Eigen-solve the population problem via Cholesky whitening.

    For a rank-1 cross block there is exactly one nonzero eigenvalue, the
    squared correlation of the planted signal pair.
    """
    try:
        Lu = np.linalg.cholesky(spec.cov_uu)
        Lv = np.linalg.cholesky(spec.cov_vv)
    except np.linalg.LinAlgError as exc:
        raise SingularCovariance(f"covariance block not positive definite: {exc}")
    T = np.linalg.solve(Lu, np.linalg.solve(Lv, spec.cov_uv.T).T)
    A, sigma, Bt = np.linalg.svd(T, full_matrices=False)
    left = np.linalg.solve(Lu.T, A).T
    right = np.linalg.solve(Lv.T, Bt.T).T
    _fix_signs(left)
    _fix_signs(right)
    return PopulationCca(sigma**2, left, right)


# ---------------------------------------------------------------------------
# Canonical bases of a subspace pair
# ---------------------------------------------------------------------------

@dataclass
class CanonicalBasis:
    """Orthonormal bases of two subspaces aligned pair-by-pair.

    Rows of ``u_basis`` span the smaller subspace, rows of ``v_basis`` the
    larger one, and ``<u_i, v_j> = cosines[i] * delta_ij`` (zero for
    ``j >= len(cosines)``).
    """

    u_basis: np.ndarray
    v_basis: np.ndarray
    cosines: np.ndarray

    @property
    def padded_cosines(self) -> np.ndarray:
        """Cosines extended with zeros to the dimension of the larger side."""
        extra = self.v_basis.shape[0] - self.cosines.shape[0]
        return np.concatenate([self.cosines, np.zeros(extra)])


def canonical_bases(U_sub, V_sub, *, cond_limit: float = 1e12) -> CanonicalBasis:
    """Aligned orthonormal bases for the row spaces of two matrices.

    Requires ``U_sub`` to have at most as many rows as ``V_sub``.  The cosines
    are the square roots of the correlations :func:`sample_cca` returns on the
    same inputs.
    """
    U_sub = np.atleast_2d(np.asarray(U_sub, dtype=float))
    V_sub = np.atleast_2d(np.asarray(V_sub, dtype=float))
    if U_sub.shape[0] > V_sub.shape[0]:
        raise DimensionError(
            "first argument must be the smaller subspace; swap the inputs"
        )
    if U_sub.shape[1] != V_sub.shape[1]:
        raise DimensionError("ambient dimensions differ")
    Qu, _ = _orthonormal_rows(U_sub, cond_limit, "U_sub")
    Qv, _ = _orthonormal_rows(V_sub, cond_limit, "V_sub")
    A, sigma, Bt = np.linalg.svd(Qu.T @ Qv)  # full: all of the larger side
    return CanonicalBasis(
        u_basis=(Qu @ A).T,
        v_basis=(Qv @ Bt.T).T,
        cosines=np.clip(sigma, 0.0, 1.0),
    )


# ---------------------------------------------------------------------------
# PCA spectrum and angles
# ---------------------------------------------------------------------------

def pca_spectrum(X, demean: bool = False) -> np.ndarray:
    """Descending eigenvalues of ``X X^T / S`` for an N x S data matrix."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if demean:
        X = X - X.mean(axis=1, keepdims=True)
    sigma = np.linalg.svd(X, compute_uv=False)
    eig = np.zeros(X.shape[0])
    eig[: sigma.shape[0]] = sigma**2 / X.shape[1]
    return eig


class AngleResult(NamedTuple):
    cos_sq: float
    sin_sq: float
    degrees: float


def angle_between(x, y) -> AngleResult:
    """Scale-invariant angle between two vectors, reported in [0, 90] degrees."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        raise ZeroVector("cannot measure an angle against a zero vector")
    c = abs(float(x @ y)) / (nx * ny)
    c = min(c, 1.0)
    cos_sq = c * c
    return AngleResult(cos_sq, 1.0 - cos_sq, float(np.degrees(np.arccos(c))))
