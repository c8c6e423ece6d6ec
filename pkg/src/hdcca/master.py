"""Exact finite-size secular equations for canonical correlations.

Given two subspaces in canonical position (orthonormal bases paired with
cosines ``c_1 >= c_2 >= ...``) and two extra vectors ``u*`` and ``v*``
adjoined to them, every squared canonical correlation ``z`` of the enlarged
pair of spaces solves one rational equation in the scalar products of
``u*``/``v*`` with the bases (``master_residual``).  The same data also
determines the overlap of each canonical variable with the adjoined vectors
(``master_vector_stats``), which is how estimation precision can be computed
without ever observing the true signal.

The module also carries the PCA analogue (one matrix, one distinguished row,
``pca_master``) and the large-dimension limits of the equations, where the
scalar-product table collapses to a resolvent-type sum ``G`` over the noise
correlations (``empirical_G``, ``asymptotic_r2``, ``asymptotic_cos2``).  With
``G`` replaced by the closed-form bulk transform the limits reduce to the
formulas in :mod:`hdcca.wachter`; that reduction is an identity and is tested
as one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import wachter
from .errors import (
    DegenerateQ,
    DenominatorVanishes,
    DimensionError,
    HdccaError,
    PoleProximity,
    RepeatedCosine,
    RepeatedSingular,
)
from .linalg import CanonicalBasis, canonical_bases

_DUP_TOL = 1e-12


@dataclass
class MasterInputs:
    """Scalar-product table for one adjoined pair of vectors.

    ``cosines`` may be given with length ``K-1`` (it is padded with zeros up
    to ``M-1``, the convention for the unpaired directions of the larger
    side) or with length ``M-1`` already padded.
    """

    cosines: np.ndarray
    uu_star: float
    vv_star: float
    uv_star: float
    u_star_u: np.ndarray   # <u*, u_i>, i < K
    u_star_v: np.ndarray   # <u*, v_j>, j < M
    v_star_u: np.ndarray   # <v*, u_i>, i < K
    v_star_v: np.ndarray   # <v*, v_j>, j < M

    def __post_init__(self):
        self.u_star_u = np.asarray(self.u_star_u, dtype=float)
        self.u_star_v = np.asarray(self.u_star_v, dtype=float)
        self.v_star_u = np.asarray(self.v_star_u, dtype=float)
        self.v_star_v = np.asarray(self.v_star_v, dtype=float)
        self.cosines = np.asarray(self.cosines, dtype=float)
        km1 = self.u_star_u.shape[0]
        mm1 = self.u_star_v.shape[0]
        if self.v_star_u.shape[0] != km1 or self.v_star_v.shape[0] != mm1:
            raise DimensionError("scalar-product lists have inconsistent lengths")
        if km1 > mm1:
            raise DimensionError("the u-side must be the smaller one (K <= M)")
        if self.cosines.shape[0] == km1:
            self.cosines = np.concatenate([self.cosines, np.zeros(mm1 - km1)])
        if self.cosines.shape[0] != mm1:
            raise DimensionError(
                f"cosines must have length {km1} or {mm1}, got {self.cosines.shape[0]}"
            )
        if np.any(np.diff(self.cosines) > _DUP_TOL):
            raise ValueError("cosines must be sorted in decreasing order")
        if np.any((self.cosines < -_DUP_TOL) | (self.cosines > 1.0 + _DUP_TOL)):
            raise ValueError("cosines must lie in [0, 1]")
        if np.any(self.cosines[km1:] != 0.0):
            raise ValueError("cosines beyond the smaller dimension must be zero")
        if self.uu_star <= 0 or self.vv_star <= 0:
            raise ValueError("squared lengths of the adjoined vectors must be positive")
        slack = 1.0 + 1e-8
        if self.uv_star**2 > self.uu_star * self.vv_star * slack:
            raise ValueError("<u*,v*> violates the Cauchy-Schwarz bound")
        for name, arr, bound in [
            ("u_star_u", self.u_star_u, self.uu_star),
            ("u_star_v", self.u_star_v, self.uu_star),
            ("v_star_u", self.v_star_u, self.vv_star),
            ("v_star_v", self.v_star_v, self.vv_star),
        ]:
            if np.any(arr**2 > bound * slack):
                raise ValueError(f"{name} violates the Cauchy-Schwarz bound")

    @property
    def K(self) -> int:
        return self.u_star_u.shape[0] + 1

    @property
    def M(self) -> int:
        return self.u_star_v.shape[0] + 1

    @classmethod
    def from_vectors(cls, u_star, v_star, basis: CanonicalBasis) -> "MasterInputs":
        u_star = np.asarray(u_star, dtype=float).ravel()
        v_star = np.asarray(v_star, dtype=float).ravel()
        return cls(
            cosines=basis.padded_cosines,
            uu_star=float(u_star @ u_star),
            vv_star=float(v_star @ v_star),
            uv_star=float(u_star @ v_star),
            u_star_u=basis.u_basis @ u_star,
            u_star_v=basis.v_basis @ u_star,
            v_star_u=basis.u_basis @ v_star,
            v_star_v=basis.v_basis @ v_star,
        )

    @classmethod
    def from_matrices(cls, u_star, v_star, U_sub, V_sub) -> "MasterInputs":
        """Convenience: canonical bases of the row spaces, then the table."""
        return cls.from_vectors(u_star, v_star, canonical_bases(U_sub, V_sub))

    def poles(self) -> np.ndarray:
        """Squared noise cosines where the secular terms blow up (descending)."""
        return self.cosines[: self.K - 1] ** 2


class _Terms(NamedTuple):
    t1: float
    u2: float   # z * T2, computed without the removable 1/z pole
    t3: float
    d_t1: float
    d_u2: float
    d_t3: float
    t1_scale: float


def _terms(inputs: MasterInputs, z: float) -> _Terms:
    """The three bracketed sums of the secular identity and their z-derivatives.

    Contributions from zero cosines (the unpaired directions of the larger
    side) are z-independent after the factors of z cancel, so they are folded
    in as constants; this keeps the evaluation finite at z = 0.
    """
    km1 = inputs.K - 1
    c = inputs.cosines
    c2 = c * c
    usu, usv = inputs.u_star_u, inputs.u_star_v
    vsu, vsv = inputs.v_star_u, inputs.v_star_v
    usu_pad = np.concatenate([usu, np.zeros(c.shape[0] - km1)])
    vsu_pad = np.concatenate([vsu, np.zeros(c.shape[0] - km1)])

    jm = c2 > 0.0
    cj, cj2 = c[jm], c2[jm]
    inv_j = 1.0 / (z - cj2)
    w_j = z * inv_j
    dinv_j = -inv_j * inv_j
    dw_j = inv_j * (1.0 - w_j)

    ci, ci2 = c[:km1], c2[:km1]
    inv_i = 1.0 / (z - ci2)
    w_i = z * inv_i
    dinv_i = -inv_i * inv_i
    dw_i = inv_i * (1.0 - w_i)

    # constants from the zero-cosine block
    const_t1 = -float(usv[~jm] @ vsv[~jm])
    const_u2 = float(usv[~jm] @ usv[~jm])
    const_t3 = float(vsv[~jm] @ vsv[~jm])

    t1_a = cj * usv[jm] * vsu_pad[jm]
    t1_b = usv[jm] * vsv[jm]
    t1_c = usu * (vsu - ci * vsv[:km1])
    t1 = (
        inputs.uv_star
        + float(t1_a @ inv_j)
        - float(t1_b @ w_j)
        + const_t1
        - float(t1_c @ w_i)
    )
    d_t1 = float(t1_a @ dinv_j) - float(t1_b @ dw_j) - float(t1_c @ dw_i)
    t1_scale = (
        abs(inputs.uv_star)
        + float(np.abs(t1_a * inv_j).sum())
        + float(np.abs(t1_b * w_j).sum())
        + abs(const_t1)
        + float(np.abs(t1_c * w_i).sum())
    )

    u2_a = usv[jm] ** 2 - 2.0 * cj * usv[jm] * usu_pad[jm]
    u2_b = usu * usu
    u2 = -z * inputs.uu_star + float(u2_a @ w_j) + const_u2 + z * float(u2_b @ w_i)
    d_u2 = -inputs.uu_star + float(u2_a @ dw_j) + float(u2_b @ (w_i + z * dw_i))

    t3_a = vsu * vsu - 2.0 * ci * vsu * vsv[:km1]
    t3_b = vsv[jm] ** 2
    t3 = -inputs.vv_star + float(t3_a @ inv_i) + float(t3_b @ w_j) + const_t3
    d_t3 = float(t3_a @ dinv_i) + float(t3_b @ dw_j)

    return _Terms(t1, u2, t3, d_t1, d_u2, d_t3, t1_scale)


def _guard_poles(inputs: MasterInputs, z: float, tol: float) -> None:
    poles = inputs.poles()
    if poles.size and np.min(np.abs(z - poles)) <= tol * (1.0 + abs(z)):
        raise PoleProximity(
            f"z={z} is within {tol * (1.0 + abs(z)):.2e} of a noise-cosine pole"
        )


def master_residual(z: float, inputs: MasterInputs, *, pole_tol: float = 1e-9) -> float:
    """Secular residual; zero exactly when z is a squared canonical
    correlation of the enlarged subspace pair."""
    _guard_poles(inputs, z, pole_tol)
    t = _terms(inputs, z)
    return t.t1 * t.t1 - t.u2 * t.t3


def _residual_and_deriv(inputs, z):
    t = _terms(inputs, z)
    val = t.t1 * t.t1 - t.u2 * t.t3
    dval = 2.0 * t.t1 * t.d_t1 - t.d_u2 * t.t3 - t.u2 * t.d_t3
    return val, dval


def _bisect(f, a, b, fa, fb, iters=200):
    for _ in range(iters):
        mid = 0.5 * (a + b)
        if mid == a or mid == b:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(fa):
            a, fa = mid, fm
        else:
            b, fb = mid, fm
    return 0.5 * (a + b)


def _newton_polish(inputs, z, lo, hi, steps=12):
    for _ in range(steps):
        val, dval = _residual_and_deriv(inputs, z)
        if dval == 0.0:
            break
        step = val / dval
        z_new = z - step
        if not (lo < z_new < hi):
            break
        if abs(z_new - z) <= 1e-15 * (1.0 + abs(z)):
            z = z_new
            break
        z = z_new
    return z


def _graded_mesh(lo, hi, n):
    """Chebyshev-style mesh on (lo, hi), clustered toward both endpoints."""
    s = (1.0 - np.cos(np.pi * (np.arange(1, n + 1) / (n + 1)))) / 2.0
    return lo + (hi - lo) * s


def _deflate_decoupled_pairs(inputs: MasterInputs):
    """Split off canonical noise pairs orthogonal to both adjoined vectors.

    Such a pair spans a block orthogonal to everything else, so its squared
    cosine stays an exact canonical correlation of the enlarged spaces and
    can be reported directly while the secular search runs on the reduced
    table.
    """
    km1 = inputs.K - 1
    tiny_u = 1e-24 * inputs.uu_star
    tiny_v = 1e-24 * inputs.vv_star
    decoupled = (
        (inputs.u_star_u**2 <= tiny_u)
        & (inputs.u_star_v[:km1] ** 2 <= tiny_u)
        & (inputs.v_star_u**2 <= tiny_v)
        & (inputs.v_star_v[:km1] ** 2 <= tiny_v)
    )
    if not np.any(decoupled):
        return inputs, []
    keep_i = ~decoupled
    keep_j = np.concatenate([keep_i, np.ones(inputs.M - inputs.K, dtype=bool)])
    reduced = MasterInputs(
        cosines=inputs.cosines[keep_j],
        uu_star=inputs.uu_star,
        vv_star=inputs.vv_star,
        uv_star=inputs.uv_star,
        u_star_u=inputs.u_star_u[keep_i],
        u_star_v=inputs.u_star_v[keep_j],
        v_star_u=inputs.v_star_u[keep_i],
        v_star_v=inputs.v_star_v[keep_j],
    )
    direct = (inputs.cosines[:km1][decoupled] ** 2).tolist()
    return reduced, direct


def master_roots(inputs: MasterInputs, *, max_mesh: int = 4096) -> np.ndarray:
    """All K squared canonical correlations of the enlarged pair, descending.

    Each open interval between consecutive noise poles can hold zero, one or
    two roots (adjoining u* and v* raises both subspace dimensions, so the
    spectra interlace only with gap two: ``z_i >= c_i^2 >= z_{i+2}``).  Roots
    are located by an adaptive sign scan per interval, bisection, and a
    safeguarded Newton polish on the rational residual.

    Degeneracies are handled directly under a RepeatedCosine warning: noise
    pairs fully decoupled from both adjoined vectors keep their squared
    cosine in the spectrum exactly, and a repeated cosine (within 1e-12) is
    itself taken as a root when the scan comes up short of the exact count.
    """
    K = inputs.K
    inputs, deflated = _deflate_decoupled_pairs(inputs)
    poles_all = np.sort(inputs.poles())[::-1]
    distinct: list[float] = []
    dup_roots: list[float] = []
    for p in poles_all:
        if distinct and abs(distinct[-1] - p) <= _DUP_TOL:
            dup_roots.append(float(p))
        else:
            distinct.append(float(p))
    if dup_roots:
        warnings.warn(
            f"{len(dup_roots)} repeated noise cosine(s); degenerate roots "
            "are handled directly",
            RepeatedCosine,
            stacklevel=2,
        )
    # interval list in descending z order: (p1, 1], (p2, p1), ..., [0, pr)
    uppers = [1.0] + distinct
    lowers = distinct + [0.0]

    def f(z):
        t = _terms(inputs, z)
        return t.t1 * t.t1 - t.u2 * t.t3

    roots: list[float] = []
    n_mesh = 32
    while True:
        roots.clear()
        for lo, hi in zip(lowers, uppers):
            width = hi - lo
            if width <= 4 * _DUP_TOL:
                continue
            pad = max(1e-11 * max(width, 1.0), 1e-14)
            a = lo + (pad if lo > 0.0 else 0.0)
            b = hi - (pad if hi < 1.0 else 0.0)
            grid = np.concatenate([[a], _graded_mesh(a, b, n_mesh), [b]])
            vals = np.array([f(g) for g in grid])
            ok = np.isfinite(vals)
            grid, vals = grid[ok], vals[ok]
            signs = np.sign(vals)
            for idx in np.nonzero(signs[:-1] * signs[1:] < 0)[0]:
                g0, g1 = grid[idx], grid[idx + 1]
                z = _bisect(f, g0, g1, vals[idx], vals[idx + 1])
                z = _newton_polish(inputs, z, g0, g1)
                roots.append(min(max(z, 0.0), 1.0))
            roots.extend(grid[vals == 0.0].tolist())
        # a removable pole can be crossed from both sides, producing the same
        # root twice: cluster the scan output at the method's resolution
        clustered: list[float] = []
        for r in sorted(roots):
            if clustered and abs(r - clustered[-1]) <= 1e-12 * (1.0 + r):
                continue
            clustered.append(r)
        merged = clustered + deflated
        # repeated cosines can pin roots exactly at the pole where no sign
        # change is visible; use them only to fill a shortfall
        for d in dup_roots:
            if len(merged) >= K:
                break
            if not any(abs(r - d) <= 1e-8 * (1.0 + d) for r in merged):
                merged.append(float(d))
        if len(merged) == K or n_mesh >= max_mesh:
            break
        n_mesh *= 4
    if len(merged) != K:
        raise HdccaError(
            f"root search found {len(merged)} of {K} expected roots; "
            "inputs may be degenerate"
        )
    return np.sort(np.array(merged))[::-1]


class VectorStats(NamedTuple):
    alpha0_sq: float
    beta0_sq: float
    cos_theta_x: float
    cos_theta_y: float


def _q_ratios(inputs: MasterInputs, z: float):
    t = _terms(inputs, z)
    if abs(t.t1) <= 1e-12 * max(t.t1_scale, 1e-300):
        raise DegenerateQ(
            f"vector-statistics denominator vanishes at z={z} "
            f"(|T1|={abs(t.t1):.2e} against scale {t.t1_scale:.2e})"
        )
    t2 = t.u2 / z
    return t2 / t.t1, t.t3 / t.t1


def master_vector_stats(
    z: float, inputs: MasterInputs, *, pole_tol: float = 1e-9
) -> VectorStats:
    """Squared signal loadings and |cosines| of the canonical variables at a
    verified root z against the adjoined vectors."""
    if z <= 0.0:
        raise PoleProximity("vector statistics need a strictly positive root")
    _guard_poles(inputs, z, pole_tol)
    q_a, q_b = _q_ratios(inputs, z)
    km1 = inputs.K - 1
    c = inputs.cosines
    ci = c[:km1]
    inv_i = 1.0 / (z - ci * ci)
    usu, vsu = inputs.u_star_u, inputs.v_star_u
    usv_i, vsv_i = inputs.u_star_v[:km1], inputs.v_star_v[:km1]

    d_vec = ci * usv_i - z * usu - z * q_a * (vsu - ci * vsv_i)
    inv_a0 = float(
        inputs.uu_star + 2.0 * (usu * d_vec) @ inv_i + (d_vec * d_vec) @ inv_i**2
    )
    num_x = float(inputs.uu_star + (usu * d_vec) @ inv_i)

    inv_j = 1.0 / (z - c * c)
    usv, vsv = inputs.u_star_v, inputs.v_star_v
    usu_pad = np.concatenate([usu, np.zeros(c.shape[0] - km1)])
    vsu_pad = np.concatenate([vsu, np.zeros(c.shape[0] - km1)])
    e_vec = -z * q_b * (usv - c * usu_pad) + c * vsu_pad - z * vsv
    inv_b0 = float(
        inputs.vv_star + 2.0 * (vsv * e_vec) @ inv_j + (e_vec * e_vec) @ inv_j**2
    )
    num_y = float(inputs.vv_star + (vsv * e_vec) @ inv_j)

    if inv_a0 <= 0.0 or inv_b0 <= 0.0:
        raise DegenerateQ("normalisation sum is not positive; z is not a clean root")
    alpha0_sq = 1.0 / inv_a0
    beta0_sq = 1.0 / inv_b0
    cos_x = abs(num_x) * np.sqrt(alpha0_sq / inputs.uu_star)
    cos_y = abs(num_y) * np.sqrt(beta0_sq / inputs.vv_star)
    return VectorStats(alpha0_sq, beta0_sq, float(cos_x), float(cos_y))


def master_vector_coeffs(z: float, inputs: MasterInputs, *, pole_tol: float = 1e-9):
    """Full coefficient vectors (alpha, beta) of the canonical pair at root z.

    alpha combines (u*, u_1, ..., u_{K-1}); beta combines
    (v*, v_1, ..., v_{M-1}).  Both give unit-norm canonical variables; the
    overall sign is fixed by alpha_0 > 0.
    """
    if z <= 0.0:
        raise PoleProximity("coefficients need a strictly positive root")
    _guard_poles(inputs, z, pole_tol)
    q_a, q_b = _q_ratios(inputs, z)
    stats = master_vector_stats(z, inputs, pole_tol=pole_tol)
    km1 = inputs.K - 1
    c = inputs.cosines
    ci = c[:km1]
    inv_i = 1.0 / (z - ci * ci)
    inv_j = 1.0 / (z - c * c)
    usu, vsu = inputs.u_star_u, inputs.v_star_u
    usv, vsv = inputs.u_star_v, inputs.v_star_v
    usu_pad = np.concatenate([usu, np.zeros(c.shape[0] - km1)])
    vsu_pad = np.concatenate([vsu, np.zeros(c.shape[0] - km1)])

    alpha0 = float(np.sqrt(stats.alpha0_sq))
    d_vec = ci * usv[:km1] - z * usu - z * q_a * (vsu - ci * vsv[:km1])
    alpha = np.concatenate([[alpha0], alpha0 * d_vec * inv_i])
    beta0 = -alpha0 * np.sqrt(z) * q_a
    e_vec = -z * q_b * (usv - c * usu_pad) + c * vsu_pad - z * vsv
    beta = np.concatenate([[beta0], beta0 * e_vec * inv_j])
    return alpha, beta


# ---------------------------------------------------------------------------
# PCA analogue: one matrix, one distinguished row
# ---------------------------------------------------------------------------

def pca_master(lambda_star: float, noise_singulars, overlaps):
    """Squared singular values of a matrix whose zeroth row has length
    ``lambda_star`` along unit direction u*, given the noise rows' singular
    values and the overlaps <u*, u_i> with their right singular vectors.

    Returns ``(a_roots, alpha0_sq)``, both descending in ``a``.  Poles with
    repeated singular values or zero overlap are degenerate: the pole itself
    is a root and its vector carries no signal component (alpha0_sq = 0).
    """
    lam = np.asarray(noise_singulars, dtype=float)
    w = np.asarray(overlaps, dtype=float)
    if lam.shape != w.shape:
        raise DimensionError("noise singular values and overlaps differ in length")
    if np.any(np.diff(lam) > _DUP_TOL):
        raise ValueError("noise singular values must be sorted in decreasing order")
    lam2 = lam * lam
    w2 = w * w
    ls2 = float(lambda_star) ** 2

    degenerate: list[float] = []
    active_l2: list[float] = []
    active_w2: list[float] = []
    n_rep = 0
    for i in range(lam2.shape[0]):
        if active_l2 and abs(active_l2[-1] - lam2[i]) <= _DUP_TOL:
            degenerate.append(lam2[i])
            active_w2[-1] += w2[i]
            n_rep += 1
        elif w2[i] <= 1e-30:
            degenerate.append(lam2[i])
        else:
            active_l2.append(float(lam2[i]))
            active_w2.append(float(w2[i]))
    if n_rep:
        warnings.warn(
            f"{n_rep} repeated noise singular value(s); reporting the "
            "degenerate root(s) directly",
            RepeatedSingular,
            stacklevel=2,
        )
    al2 = np.array(active_l2)
    aw2 = np.array(active_w2)

    def fval(a):
        return ls2 * (1.0 + float((al2 * aw2) @ (1.0 / (a - al2)))) - a

    roots: list[float] = []
    if al2.size == 0:
        roots.append(ls2)
    else:
        hi = max(al2[0], ls2) + 1.0
        while fval(hi) > 0.0:
            hi *= 2.0
        uppers = [hi] + list(al2)
        lowers = list(al2) + [0.0]
        for lo, hi_k in zip(lowers, uppers):
            width = hi_k - lo
            pad = 1e-12 * max(width, 1.0)
            a, b = lo + pad, hi_k - (pad if hi_k in al2 else 0.0)
            fa, fb = fval(a), fval(b)
            if fa == 0.0:
                roots.append(a)
                continue
            if fb == 0.0:
                roots.append(b)
                continue
            if np.sign(fa) == np.sign(fb):
                # no root in this slot (can happen only at the closed bottom
                # interval when f(0) > 0 and no crossing occurs)
                continue
            roots.append(_bisect(fval, a, b, fa, fb))

    a_roots = np.sort(np.array(roots + degenerate))[::-1]
    alpha0 = np.zeros_like(a_roots)
    for i, a in enumerate(a_roots):
        if degenerate and np.min(np.abs(np.array(degenerate) - a)) <= _DUP_TOL:
            alpha0[i] = 0.0
            continue
        s1 = float((al2 * aw2) @ (1.0 / (a - al2))) if al2.size else 0.0
        s2 = float((al2 * aw2) @ (1.0 / (a - al2) ** 2)) if al2.size else 0.0
        alpha0[i] = 1.0 / (1.0 + a * s2 / (1.0 + s1))
    return a_roots, alpha0


# ---------------------------------------------------------------------------
# Large-dimension limits: resolvent sums and the asymptotic relations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StieltjesEval:
    """A resolvent-type value G(z) with its analytic derivative."""

    z: float
    value: float
    derivative: float
    source: str = "empirical-c"


def empirical_G(
    z: float,
    values_sq,
    S: int,
    mode: str = "direct",
    shift: int = 2,
    *,
    pole_tol: float = 1e-6,
) -> StieltjesEval:
    """Resolvent sum ``(1/S) sum 1/(z - value)`` over squared correlations.

    ``mode="direct"`` sums over all supplied values (noise cosines squared).
    ``mode="shifted"`` implements the reuse of the observed spectrum: the
    supplied values are the full correlation list and the sum starts at the
    1-based index ``shift``, dropping the leading spike(s).
    """
    vals = np.asarray(values_sq, dtype=float).ravel()
    if mode == "shifted":
        if shift < 1:
            raise ValueError("shift is 1-based and must be >= 1")
        vals = vals[shift - 1:]
        source = "empirical-lambda-shifted"
    elif mode == "direct":
        source = "empirical-c"
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if vals.size == 0:
        raise PoleProximity("empty resolvent sum: no values remain below the spike")
    if np.min(np.abs(z - vals)) <= pole_tol:
        raise PoleProximity(
            f"z={z} is within {pole_tol} of an observed correlation"
        )
    diff = z - vals
    value = float(np.sum(1.0 / diff)) / S
    derivative = -float(np.sum(1.0 / diff**2)) / S
    return StieltjesEval(z=float(z), value=value, derivative=derivative, source=source)


def wachter_G(z: float, regime: wachter.AsymptoticRegime) -> StieltjesEval:
    """Closed-form bulk transform packaged as a StieltjesEval."""
    return StieltjesEval(
        z=float(z),
        value=wachter.wachter_stieltjes(z, regime),
        derivative=wachter.wachter_stieltjes_deriv(z, regime),
        source="wachter-closed-form",
    )


def r2_relation(lam: float, g_value: float, k_ratio: float, m_ratio: float) -> float:
    """Signal strength implied by an outlier at ``lam`` given G(lam).

    ``k_ratio`` and ``m_ratio`` are K/S and M/S (or their limits)."""
    den = 1.0 - m_ratio - lam * k_ratio - lam * (1.0 - lam) * g_value
    if abs(den) < 1e-14:
        raise DenominatorVanishes(f"relation denominator vanishes at lam={lam}")
    num_a = 1.0 - 2.0 * k_ratio - (m_ratio - k_ratio) / lam - (1.0 - lam) * g_value
    num_b = 1.0 - k_ratio - m_ratio - (1.0 - lam) * g_value
    return lam * num_a * num_b / (den * den)


def q_factors(lam: float, g_value: float, k_ratio: float, m_ratio: float):
    """The two ratio factors entering the cosine relations."""
    den = 1.0 - m_ratio - lam * k_ratio - lam * (1.0 - lam) * g_value
    if abs(den) < 1e-14:
        raise DenominatorVanishes(f"ratio denominator vanishes at lam={lam}")
    q_x = -(1.0 - 2.0 * k_ratio - (m_ratio - k_ratio) / lam - (1.0 - lam) * g_value) / den
    q_y = -(1.0 - k_ratio - m_ratio - (1.0 - lam) * g_value) / den
    return q_x, q_y


class Cos2Eval(NamedTuple):
    cos2_x: float
    cos2_y: float
    front_x: float   # squared-root factor of the x relation; 1 in the bulk limit
    front_y: float


def cos2_relation(
    lam: float,
    g_value: float,
    g_deriv: float,
    r_sq: float,
    k_ratio: float,
    m_ratio: float,
) -> Cos2Eval:
    """Squared cosines between estimated and true canonical variables."""
    if r_sq <= 0.0:
        raise DenominatorVanishes("r_sq must be positive for the cosine relations")
    k, m, g, gp = k_ratio, m_ratio, g_value, g_deriv
    q_x, q_y = q_factors(lam, g, k, m)

    front_x = 1.0 - k - lam * q_x * (k + (1.0 - lam) * g)
    den_x = (
        1.0
        - 2.0 * k
        - 2.0 * k * lam * q_x
        + g * (2.0 * lam - 1.0 + 2.0 * lam * (2.0 * lam - 1.0) * q_x + lam**2 / r_sq * q_x**2)
        + (lam**2 - lam) * gp * (1.0 + 2.0 * lam * q_x + lam / r_sq * q_x**2)
    )
    front_y = 1.0 - m - lam * q_y * (
        m + (1.0 - lam) * g + (1.0 - lam) / lam * (m - k)
    )
    den_y = (
        1.0
        - 2.0 * m
        - 2.0 * k * lam * q_y
        + (m - k) * (1.0 + q_y**2 / r_sq)
        + g * (2.0 * lam - 1.0 + 2.0 * lam * (2.0 * lam - 1.0) * q_y + lam**2 / r_sq * q_y**2)
        + (lam**2 - lam) * gp * (1.0 + 2.0 * lam * q_y + lam / r_sq * q_y**2)
    )
    if abs(den_x) < 1e-14 or abs(den_y) < 1e-14:
        raise DenominatorVanishes(f"cosine denominator vanishes at lam={lam}")
    return Cos2Eval(
        cos2_x=front_x * front_x / den_x,
        cos2_y=front_y * front_y / den_y,
        front_x=front_x,
        front_y=front_y,
    )


def asymptotic_r2(lam: float, G: StieltjesEval, K: int, M: int, S: int) -> float:
    """Signal strength from an outlier and an empirical (or closed-form) G."""
    return r2_relation(lam, G.value, K / S, M / S)


def asymptotic_cos2(
    lam: float, G: StieltjesEval, r_sq: float, K: int, M: int, S: int
) -> Cos2Eval:
    """Estimation-precision cosines from an outlier, G, and the strength."""
    return cos2_relation(lam, G.value, G.derivative, r_sq, K / S, M / S)
