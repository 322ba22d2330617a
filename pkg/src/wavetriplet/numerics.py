"""Dense-matrix kernels and the brute-force semigroup oracle.

Everything here works on small dense ``numpy`` arrays.  The matrix
exponential is a self-contained scaling-and-squaring implementation with a
Pade core so that the semigroup oracle does not share code with the
eigenvalue-based checks elsewhere in the package.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (AsymmetryError, IndefiniteWeightError, NonFiniteError,
                     NotSquareError, ValidationError)

__all__ = ['ABS_FLOOR', 'as_matrix', 'matrix_exponential', 'operator_norm',
           'is_psd', 'weighted_operator_norm', 'default_times',
           'ContractionReport', 'contraction_certificate', 'subspace_angles',
           'same_subspace', 'numerical_rank', 'null_space']

ABS_FLOOR = 1e-14

# Pade numerator coefficients b_0..b_m and the 1-norm bounds theta_m below
# which degree m reaches unit roundoff (Higham 2005, double precision).
_PADE = {
    3: (1.495585217958292e-2, (120., 60., 12., 1.)),
    5: (2.539398330063230e-1, (30240., 15120., 3360., 420., 30., 1.)),
    7: (9.504178996162932e-1, (17297280., 8648640., 1995840., 277200.,
                               25200., 1512., 56., 1.)),
    9: (2.097847961257068e0, (17643225600., 8821612800., 2075673600.,
                              302702400., 30270240., 2162160., 110880.,
                              3960., 90., 1.)),
}
_THETA13 = 5.371920351148152
_B13 = (64764752532480000., 32382376266240000., 7771770303897600.,
        1187353796428800., 129060195264000., 10559470521600.,
        670442572800., 33522128640., 1323241920., 40840800., 960960.,
        16380., 182., 1.)


def as_matrix(M, name='matrix', square=False):
    """Return ``M`` as a finite 2-D float array, raising on bad input."""
    A = np.array(M, dtype=float)
    if A.ndim == 1 and A.size == 0:
        A = A.reshape(0, 0)
    if A.ndim != 2:
        raise ValidationError('%s must be 2-D, got shape %s' % (name, A.shape))
    if not np.all(np.isfinite(A)):
        raise NonFiniteError('%s has non-finite entries' % name)
    if square and A.shape[0] != A.shape[1]:
        raise NotSquareError('%s must be square, got shape %s'
                             % (name, A.shape))
    return A


def _pade_uv(A, b, ident):
    m = len(b) - 1
    powers = [ident, A @ A]
    while 2 * len(powers) - 2 < m - 1:
        powers.append(powers[-1] @ powers[1])
    U = sum(b[2 * j + 1] * powers[j] for j in range(m // 2 + 1))
    V = sum(b[2 * j] * powers[j] for j in range(m // 2 + 1))
    return A @ U, V


def _pade13_uv(A, ident):
    b = _B13
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    return U, V


def matrix_exponential(A, t=1.0):
    """Compute ``exp(A t)`` by scaling and squaring.

    The Pade degree is picked from the 1-norm of ``A t``; when degree 13 is
    needed the matrix is first scaled by ``2**-s`` and the result squared
    ``s`` times.
    """
    A = as_matrix(A, 'A', square=True)
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise ValidationError('t must be a finite nonnegative scalar')
    n = A.shape[0]
    ident = np.eye(n)
    if n == 0:
        return ident
    At = A * t
    norm1 = np.linalg.norm(At, 1)
    if norm1 == 0.0:
        return ident
    for m in (3, 5, 7, 9):
        theta, b = _PADE[m]
        if norm1 <= theta:
            U, V = _pade_uv(At, b, ident)
            return np.linalg.solve(V - U, V + U)
    s = max(0, int(np.ceil(np.log2(norm1 / _THETA13))))
    U, V = _pade13_uv(At / 2.0 ** s, ident)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


def operator_norm(M):
    """Largest singular value of ``M`` (zero for empty matrices)."""
    M = as_matrix(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def is_psd(M, tol=1e-10):
    """True iff the symmetric matrix ``M`` is positive semidefinite.

    The smallest eigenvalue is compared against ``-tol * (1 + ||M||)``.
    Asymmetry beyond the same relative tolerance is an error, not a ``False``.
    """
    M = as_matrix(M, square=True)
    if M.size == 0:
        return True
    scale = 1.0 + operator_norm(M)
    if np.max(np.abs(M - M.T)) > max(tol * scale, ABS_FLOOR):
        raise AsymmetryError('matrix is not symmetric to within tolerance')
    lam_min = scipy.linalg.eigvalsh(0.5 * (M + M.T))[0]
    return bool(lam_min >= -tol * scale)


def _weight_factor(weight, n):
    W = as_matrix(weight, 'weight', square=True)
    if W.shape[0] != n:
        raise ValidationError('weight has shape %s, expected (%d, %d)'
                              % (W.shape, n, n))
    if n == 0:
        return W
    scale = max(operator_norm(W), ABS_FLOOR)
    if np.max(np.abs(W - W.T)) > 1e-10 * scale:
        raise IndefiniteWeightError('weight is not symmetric')
    try:
        # weight = R^T R with R upper triangular
        return scipy.linalg.cholesky(0.5 * (W + W.T), lower=False)
    except np.linalg.LinAlgError:
        raise IndefiniteWeightError('weight is not positive definite')


def weighted_operator_norm(M, weight):
    """Operator norm of ``M`` in the inner product ``<x, y> = y^T weight x``.

    With ``weight = R^T R`` this is the plain 2-norm of ``R M R^{-1}``.
    """
    M = as_matrix(M, square=True)
    R = _weight_factor(weight, M.shape[0])
    if M.size == 0:
        return 0.0
    RM = R @ M
    congruent = scipy.linalg.solve_triangular(R, RM.T, trans='T',
                                              lower=False).T
    return operator_norm(congruent)


def default_times():
    """Twenty log-spaced sample times in ``[1e-3, 10]``."""
    return np.logspace(-3, 1, 20)


@dataclass(frozen=True)
class ContractionReport:
    max_norm: float
    argmax_time: float
    passed: bool
    norms: tuple


def contraction_certificate(A, weight=None, times=None, threshold=1e-9):
    """Sample ``||exp(A t)||_weight`` and test it against ``1 + threshold``.

    ``t = 0`` is always included so an empty or degenerate sample still gives
    ``max_norm = 1`` for nonempty ``A``.
    """
    A = as_matrix(A, 'A', square=True)
    n = A.shape[0]
    if weight is None:
        weight = np.eye(n)
    R = _weight_factor(weight, n)
    if times is None:
        times = default_times()
    times = np.concatenate([[0.0], np.asarray(times, dtype=float).ravel()])
    if np.any(times < 0) or not np.all(np.isfinite(times)):
        raise ValidationError('sample times must be finite and nonnegative')
    if n == 0:
        return ContractionReport(0.0, 0.0, True, tuple(0.0 for _ in times))
    # exp of the congruent matrix equals the congruent exponential
    RA = R @ A
    Ac = scipy.linalg.solve_triangular(R, RA.T, trans='T', lower=False).T
    norms = [operator_norm(matrix_exponential(Ac, t)) for t in times]
    k = int(np.argmax(norms))
    return ContractionReport(float(norms[k]), float(times[k]),
                             bool(norms[k] <= 1.0 + threshold), tuple(norms))


def numerical_rank(M, tol=1e-10):
    """Rank with singular values below ``tol * sigma_max`` treated as zero."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] <= ABS_FLOOR:
        return 0
    return int(np.sum(s > tol * s[0]))


def null_space(M, tol=1e-10):
    """Orthonormal basis of the numerical kernel of ``M`` (columns)."""
    M = np.asarray(M, dtype=float)
    n = M.shape[1]
    if M.shape[0] == 0 or M.size == 0:
        return np.eye(n)
    U, s, Vt = np.linalg.svd(M, full_matrices=True)
    if s.size == 0 or s[0] <= ABS_FLOOR:
        return np.eye(n)
    r = int(np.sum(s > tol * s[0]))
    return Vt[r:].T.copy()


def _orthonormal(B):
    if B.shape[1] == 0:
        return B
    Q, _ = np.linalg.qr(B)
    return Q


def subspace_angles(A, B):
    """Principal angles (radians, ascending) between ``span A`` and ``span B``.

    Computed from the SVD of the cross-Gram of orthonormal bases; the sine
    form is used for small angles so tiny angles are resolved accurately.
    """
    QA = _orthonormal(np.asarray(A, dtype=float))
    QB = _orthonormal(np.asarray(B, dtype=float))
    if QA.shape[1] < QB.shape[1]:
        QA, QB = QB, QA
    if QB.shape[1] == 0:
        return np.zeros(0)
    resid = QB - QA @ (QA.T @ QB)
    sines = np.linalg.svd(resid, compute_uv=False)
    sines = np.clip(sines, 0.0, 1.0)
    return np.sort(np.arcsin(sines))


def same_subspace(A, B, tol=1e-8):
    """True iff the column spans of ``A`` and ``B`` coincide."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape[1] != B.shape[1]:
        return False
    if A.shape[1] == 0:
        return True
    return bool(np.max(subspace_angles(A, B)) <= tol)
