"""Generation criteria for boundary conditions ``W1 B1 x + W2 B2 x = 0``.

A condition is given by two ``k x m`` matrices.  :func:`classify_generator`
decides from the matrices alone whether the restricted operator generates a
contraction semigroup or a unitary group, and :func:`certify_against_oracle`
checks that decision against exponentials of an assembled discrete model.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (DimensionMismatchError, RangeConditionError,
                     SolverResidualError, SumNotInjectiveError,
                     ValidationError)
from .numerics import (ABS_FLOOR, as_matrix, contraction_certificate, is_psd,
                       operator_norm)
from .relations import (is_dissipative, is_skew_symmetric_relation,
                        kernel_relation)
from .triplet import restricted_basis, restrict_generator

__all__ = ['Generation', 'BoundaryConditionSpec', 'GenerationVerdict',
           'OracleReport', 'symmetrized_product', 'sum_is_injective',
           'check_range_condition', 'build_contraction_V',
           'classify_generator', 'certify_against_oracle']

TOL = 1e-10


class Generation(str, enum.Enum):
    NOT_DISSIPATIVE = 'not_dissipative'
    CONTRACTION_SEMIGROUP = 'contraction_semigroup'
    UNITARY_GROUP = 'unitary_group'
    RANGE_CONDITION_FAILS = 'range_condition_fails'

    def __str__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class BoundaryConditionSpec:
    """The pair ``(W1, W2)`` acting on ``B x B`` with values in ``R^k``."""
    W1: np.ndarray
    W2: np.ndarray

    def __post_init__(self):
        W1 = as_matrix(self.W1, 'W1')
        W2 = as_matrix(self.W2, 'W2')
        if W1.shape != W2.shape:
            raise ValidationError('W1 %s and W2 %s must have the same shape'
                                  % (W1.shape, W2.shape))
        W1.setflags(write=False)
        W2.setflags(write=False)
        object.__setattr__(self, 'W1', W1)
        object.__setattr__(self, 'W2', W2)

    @property
    def k(self):
        return self.W1.shape[0]

    @property
    def m(self):
        return self.W1.shape[1]

    @classmethod
    def from_contraction(cls, V, G=None):
        """Spec ``G [I + V, I - V]`` whose kernel is the Cayley image of V."""
        V = as_matrix(V, 'V', square=True)
        ident = np.eye(V.shape[0])
        G = ident if G is None else as_matrix(G, 'G')
        return cls(G @ (ident + V), G @ (ident - V))

    def transformed(self, G):
        G = as_matrix(G, 'G')
        return BoundaryConditionSpec(G @ self.W1, G @ self.W2)


@dataclass(frozen=True, eq=False)
class GenerationVerdict:
    classification: Generation
    sum_injective: bool
    symmetrized_psd: bool
    symmetrized_zero: bool
    kernel_skew: bool
    kernel_dissipative: bool
    range_condition: bool
    V: np.ndarray | None
    v_norm: float | None
    v_contractive: bool | None
    diagnostics: str

    @property
    def generates_contractions(self):
        return self.classification in (Generation.CONTRACTION_SEMIGROUP,
                                       Generation.UNITARY_GROUP)

    def as_dict(self):
        return {
            'classification': self.classification.value,
            'sum_injective': self.sum_injective,
            'symmetrized_psd': self.symmetrized_psd,
            'symmetrized_zero': self.symmetrized_zero,
            'kernel_skew': self.kernel_skew,
            'kernel_dissipative': self.kernel_dissipative,
            'range_condition': self.range_condition,
            'v_norm': self.v_norm,
            'v_contractive': self.v_contractive,
            'diagnostics': self.diagnostics,
        }


def _spec(spec):
    if isinstance(spec, BoundaryConditionSpec):
        return spec
    W1, W2 = spec
    return BoundaryConditionSpec(W1, W2)


def symmetrized_product(spec):
    """``W1 W2^T + W2 W1^T``."""
    spec = _spec(spec)
    P = spec.W1 @ spec.W2.T
    return P + P.T


def _scale(spec):
    return max(operator_norm(spec.W1), operator_norm(spec.W2), ABS_FLOOR)


def _rank(M, threshold):
    if M.size == 0:
        return 0
    return int(np.sum(np.linalg.svd(M, compute_uv=False) > threshold))


def sum_is_injective(spec, tol=TOL):
    """``W1 + W2`` has full column rank (relative singular-value test)."""
    spec = _spec(spec)
    if spec.m == 0:
        return True
    if spec.k < spec.m:
        return False
    s = np.linalg.svd(spec.W1 + spec.W2, compute_uv=False)
    return bool(s[0] > ABS_FLOOR and s[-1] >= tol * s[0])


def check_range_condition(spec, tol=TOL):
    """``ran(W1 - W2)`` is contained in ``ran(W1 + W2)``."""
    spec = _spec(spec)
    S = spec.W1 + spec.W2
    D = spec.W1 - spec.W2
    threshold = tol * _scale(spec)
    return _rank(S, threshold) == _rank(np.hstack([S, D]), threshold)


def build_contraction_V(spec, tol=TOL):
    """Unique ``V`` with ``(W1 + W2) V = W1 - W2``."""
    spec = _spec(spec)
    if not sum_is_injective(spec, tol):
        raise SumNotInjectiveError('W1 + W2 is not injective')
    if not check_range_condition(spec, tol):
        raise RangeConditionError('ran(W1 - W2) is not contained in '
                                  'ran(W1 + W2)')
    S = spec.W1 + spec.W2
    D = spec.W1 - spec.W2
    if spec.m == 0:
        return np.zeros((0, 0))
    Q, R = scipy.linalg.qr(S, mode='economic')
    V = scipy.linalg.solve_triangular(R, Q.T @ D)
    resid = operator_norm(S @ V - D)
    scale = max(operator_norm(D), operator_norm(S) * operator_norm(V),
                ABS_FLOOR)
    # backward-stable solve: allow a few ulps per entry on top of tol
    if resid > max(tol, 1e3 * np.finfo(float).eps * spec.m) * scale:
        raise SolverResidualError('residual %.3e of (W1 + W2) V = W1 - W2'
                                  % resid)
    return V


def classify_generator(spec, tol=TOL):
    """Decide contraction / unitary generation from ``(W1, W2)`` alone."""
    spec = _spec(spec)
    sym = symmetrized_product(spec)
    sym_scale = max(_scale(spec) ** 2, ABS_FLOOR)
    sym_psd = is_psd(sym, tol) if sym.size else True
    sym_zero = bool(sym.size == 0
                    or np.max(np.abs(sym)) <= tol * (1.0 + sym_scale))
    injective = sum_is_injective(spec, tol)
    ranged = check_range_condition(spec, tol)
    C = kernel_relation(spec.W1, spec.W2, tol)
    ker_diss = is_dissipative(C, tol)
    ker_skew = is_skew_symmetric_relation(C, tol)
    notes = []

    V = v_norm = v_contr = None
    if not ranged:
        cls = Generation.RANGE_CONDITION_FAILS
        notes.append('range condition fails, so the injectivity criterion '
                     'does not apply')
        notes.append('kernel relation has dimension %d of %d and is %s'
                     % (C.dim, spec.m,
                        'dissipative' if ker_diss else 'not dissipative'))
    else:
        if injective:
            V = build_contraction_V(spec, tol)
            v_norm = operator_norm(V)
            v_contr = bool(v_norm <= 1.0 + 1e-8)
            if v_contr != sym_psd:
                notes.append('inconsistency: ||V|| = %.12g but symmetrized '
                             'product psd = %s' % (v_norm, sym_psd))
        if not ker_diss:
            cls = Generation.NOT_DISSIPATIVE
            notes.append('kernel relation contains pairs with f.e > 0')
        elif injective and sym_psd:
            if ker_skew and sym_zero:
                cls = Generation.UNITARY_GROUP
            else:
                cls = Generation.CONTRACTION_SEMIGROUP
        else:
            # dissipative kernel that is not maximal: no semigroup
            cls = Generation.NOT_DISSIPATIVE
            notes.append('kernel relation is dissipative but not maximal '
                         '(dimension %d of %d)' % (C.dim, spec.m))
        if injective and sym_psd and not ker_diss:
            notes.append('inconsistency: injective sum with psd symmetrized '
                         'product but non-dissipative kernel')
    return GenerationVerdict(cls, injective, sym_psd, sym_zero, ker_skew,
                             ker_diss, ranged, V, v_norm, v_contr,
                             '; '.join(notes))


@dataclass(frozen=True, eq=False)
class OracleReport:
    verdict: GenerationVerdict
    verdict_agrees: bool
    max_norm: float
    min_norm: float
    oracle_passed: bool
    dimension: int

    def as_dict(self):
        out = self.verdict.as_dict()
        out.update(verdict_agrees=self.verdict_agrees,
                   oracle_max_norm=self.max_norm,
                   oracle_min_norm=self.min_norm,
                   oracle_passed=self.oracle_passed,
                   restricted_dimension=self.dimension)
        return out


def certify_against_oracle(spec, triplet, H, times=None, tol=TOL):
    """Compare the verdict with sampled norms of ``exp(A t)``.

    ``A`` is the generator restricted to ``ker(W1 B1 + W2 B2)``.  The oracle
    passes when every sampled norm is at most ``1 + 1e-9``.  Verdicts of
    contraction or unitary type must pass; unitary verdicts additionally need
    every norm within ``1e-8`` of one.  When the range condition fails the
    oracle is compared with dissipativity of the kernel relation.
    """
    spec = _spec(spec)
    if spec.m != triplet.n_boundary:
        raise DimensionMismatchError(
            'spec acts on R^%d, triplet boundary space is R^%d'
            % (spec.m, triplet.n_boundary))
    verdict = classify_generator(spec, tol)
    A = restrict_generator(triplet, H, spec)
    Z, _, _, gram = restricted_basis(triplet, H, spec)
    weight = Z.T @ (gram[:, None] * Z)
    weight = 0.5 * (weight + weight.T)
    report = contraction_certificate(A, weight if A.size else None, times)
    norms = np.array(report.norms) if A.size else np.ones(1)
    if verdict.classification is Generation.RANGE_CONDITION_FAILS:
        expected = verdict.kernel_dissipative
    elif not verdict.generates_contractions and verdict.kernel_dissipative:
        # over-determined condition: a dissipative but smaller domain
        expected = True
    else:
        expected = verdict.generates_contractions
    agrees = report.passed == expected
    if verdict.classification is Generation.UNITARY_GROUP and A.size:
        agrees = agrees and bool(np.max(np.abs(norms - 1.0)) <= 1e-8)
    return OracleReport(verdict, bool(agrees), report.max_norm,
                        float(np.min(norms)), report.passed, A.shape[0])
