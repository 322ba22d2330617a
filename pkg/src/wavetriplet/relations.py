"""Finite-dimensional boundary relations ``C`` in ``B x B`` with ``B = R^m``.

A relation is stored as a basis matrix of shape ``(2m, k)`` whose columns
``[f; e]`` span ``C``.  Pairs are real, so the dissipativity form
``Re <f, e>`` is the plain dot product ``f . e``.

The Cayley correspondence pairs a maximal dissipative relation with the
contraction ``V : e - f -> e + f``; conversely a contraction ``V`` gives back
``C = ker [I + V, I - V]``.
"""
from __future__ import annotations

import numpy as np

from .errors import (NotContractionError, NotMaximalDissipativeError,
                     NumericalError, RankDeficientError, ValidationError)
from .numerics import (as_matrix, is_psd, null_space, numerical_rank,
                       operator_norm, same_subspace)

__all__ = ['BoundaryRelation', 'kernel_relation', 'is_dissipative',
           'is_skew_symmetric_relation', 'is_maximal_dissipative',
           'flip_orthogonal_complement', 'relation_to_contraction',
           'contraction_to_relation', 'relations_equal']

RANK_TOL = 1e-10


class BoundaryRelation:
    """Subspace of ``R^m x R^m`` given by a full-column-rank basis.

    ``basis[:m]`` holds the first components (``F``) and ``basis[m:]`` the
    second components (``E``).  An empty ``(2m, 0)`` basis is the zero
    relation.
    """

    def __init__(self, basis, m=None):
        basis = np.array(basis, dtype=float)
        if basis.ndim == 1:
            basis = basis.reshape(-1, 1)
        if m is None:
            if basis.shape[0] % 2:
                raise ValidationError('basis must have an even number of rows')
            m = basis.shape[0] // 2
        if basis.shape[0] != 2 * m:
            raise ValidationError('basis has %d rows, expected 2m = %d'
                                  % (basis.shape[0], 2 * m))
        basis = as_matrix(basis, 'basis') if basis.size else basis
        k = basis.shape[1]
        if k > 2 * m or numerical_rank(basis, RANK_TOL) != k:
            raise RankDeficientError('relation basis is not of full column '
                                     'rank')
        basis.setflags(write=False)
        self._basis = basis
        self._m = int(m)
        self._q = None

    @property
    def m(self):
        return self._m

    @property
    def basis(self):
        return self._basis

    @property
    def dim(self):
        return self._basis.shape[1]

    @property
    def F(self):
        return self._basis[:self._m]

    @property
    def E(self):
        return self._basis[self._m:]

    def orthonormal_basis(self):
        if self._q is None:
            if self.dim:
                q, _ = np.linalg.qr(self._basis)
            else:
                q = self._basis
            q.setflags(write=False)
            self._q = q
        return self._q

    def form(self):
        """Symmetric matrix ``F^T E + E^T F`` on orthonormal coordinates."""
        Q = self.orthonormal_basis()
        F, E = Q[:self._m], Q[self._m:]
        return F.T @ E + E.T @ F

    def __repr__(self):
        return 'BoundaryRelation(m=%d, dim=%d)' % (self._m, self.dim)


def kernel_relation(W1, W2, tol=RANK_TOL):
    """The relation ``ker [W1 W2]``."""
    W1 = as_matrix(W1, 'W1')
    W2 = as_matrix(W2, 'W2')
    if W1.shape != W2.shape:
        raise ValidationError('W1 and W2 must have the same shape')
    m = W1.shape[1]
    return BoundaryRelation(null_space(np.hstack([W1, W2]), tol), m)


def is_dissipative(C, tol=1e-10):
    """``f . e <= 0`` for every pair in ``C``."""
    if C.dim == 0:
        return True
    return is_psd(-C.form(), tol)


def is_skew_symmetric_relation(C, tol=1e-10):
    """``f . e = 0`` for every pair in ``C``."""
    if C.dim == 0:
        return True
    return bool(operator_norm(C.form()) <= tol * 2.0)


def is_maximal_dissipative(C, tol=1e-10):
    # nonpositive subspaces of the (m, m)-signature form have dim <= m
    return C.dim == C.m and is_dissipative(C, tol)


def flip_orthogonal_complement(C):
    """Basis of ``[[0, I], [I, 0]] C^perp``."""
    m = C.m
    if C.dim == 0:
        perp = np.eye(2 * m)
    else:
        _, s, Vt = np.linalg.svd(C.basis.T, full_matrices=True)
        r = int(np.sum(s > RANK_TOL * s[0]))
        perp = Vt[r:].T
    return BoundaryRelation(np.vstack([perp[m:], perp[:m]]), m)


def relation_to_contraction(C, tol=1e-10):
    """Contraction ``V`` with ``V (e - f) = e + f`` on ``C``."""
    if not is_maximal_dissipative(C, tol):
        raise NotMaximalDissipativeError(
            'relation is not maximal dissipative; V would not be defined on '
            'all of the boundary space')
    m = C.m
    if m == 0:
        return np.zeros((0, 0))
    Q = C.orthonormal_basis()
    F, E = Q[:m], Q[m:]
    D, S = E - F, E + F
    V = np.linalg.solve(D.T, S.T).T
    resid = np.max(np.abs(V @ D - S))
    if resid > 1e-10 * max(1.0, np.max(np.abs(Q))) * 10:
        raise NumericalError('Cayley solve residual %.3e too large' % resid)
    return V


def contraction_to_relation(V, tol=1e-9):
    """``ker [I + V, I - V]`` for a contraction ``V``.

    The kernel is spanned by the columns of ``[V - I; V + I]``, which has
    singular values in ``[sqrt 2, 2]`` for any contraction.
    """
    V = as_matrix(V, 'V', square=True)
    norm = operator_norm(V)
    if norm > 1.0 + tol:
        raise NotContractionError('||V|| = %.12g exceeds 1 + %g'
                                  % (norm, tol))
    ident = np.eye(V.shape[0])
    return BoundaryRelation(np.vstack([V - ident, V + ident]), V.shape[0])


def relations_equal(C1, C2, tol=1e-8):
    """Subspace equality via principal angles."""
    if C1.m != C2.m:
        return False
    return same_subspace(C1.basis, C2.basis, tol)
