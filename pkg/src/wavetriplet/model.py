"""Damped, boundary-controlled wave equation on a discrete triplet.

The state is ``x = (g, f)``: momentum ``g`` at cell centres and strain ``f``
on the faces that carry a genuine unknown.  Faces on gamma1 and gamma2 are
eliminated; their normal stress is either prescribed (gamma2, the input
``u``) or given by the impedance law ``stress = -Qb v`` (gamma1).  Those
stresses enter the momentum equation through the columns of ``Div`` that
belong to the eliminated faces, so the model is an ODE

    x' = A x + B u,    y = C x + D u.

Energy is ``E(x) = x^T diag(M) H x`` without a factor one half, so that

    dE/dt = 2 <u, y>_2 - 2 <Qb v1, v1>_1 - 2 <Qi v, v>_cells

where ``<a, b>_k = a^T M b`` with the relevant diagonal weights.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (AccretivityError, DimensionMismatchError,
                     MaterialError, ValidationError)
from .numerics import as_matrix, is_psd, operator_norm
from .triplet import GAMMA1, GAMMA2, verify_green_identity

__all__ = ['Representation', 'MaterialField', 'HamiltonianOperator',
           'hamiltonian', 'DampingSpec', 'WaveBoundarySystem',
           'assemble_impedance_system', 'assemble_scattering_system',
           'external_cayley_signals', 'reconstruct_displacement']

SQRT2 = np.sqrt(2.0)


class Representation(str, enum.Enum):
    IMPEDANCE = 'impedance'
    SCATTERING = 'scattering'

    def __str__(self):
        return self.value


def _vector(values, n, name):
    v = np.asarray(values, dtype=float)
    if v.ndim == 0:
        v = np.full(n, float(v))
    if v.shape != (n,):
        raise DimensionMismatchError('%s has shape %s, expected (%d,)'
                                     % (name, v.shape, n))
    if not np.all(np.isfinite(v)):
        raise MaterialError('%s has non-finite entries' % name)
    return v


@dataclass(frozen=True, eq=False)
class MaterialField:
    """Density per cell and elasticity modulus per face."""
    rho: np.ndarray
    Tcoef: np.ndarray
    delta: float = 1e-12

    def __post_init__(self):
        rho = np.atleast_1d(np.asarray(self.rho, dtype=float))
        T = np.atleast_1d(np.asarray(self.Tcoef, dtype=float))
        delta = float(self.delta)
        if not delta > 0:
            raise MaterialError('delta must be positive, got %r' % delta)
        for name, v in (('rho', rho), ('Tcoef', T)):
            if not np.all(np.isfinite(v)):
                raise MaterialError('%s has non-finite entries' % name)
            if v.size and v.min() < delta:
                raise MaterialError('%s has minimum %.6g below delta = %.3g'
                                    % (name, v.min(), delta))
        rho.setflags(write=False)
        T.setflags(write=False)
        object.__setattr__(self, 'rho', rho)
        object.__setattr__(self, 'Tcoef', T)
        object.__setattr__(self, 'delta', delta)

    @classmethod
    def uniform(cls, triplet, rho=1.0, T=1.0, delta=1e-12):
        return cls(_vector(rho, triplet.n_cells, 'rho'),
                   _vector(T, triplet.n_faces, 'Tcoef'), delta)

    @classmethod
    def from_functions(cls, triplet, rho, T, delta=1e-12):
        """Sample callables at cell centres and face midpoints."""
        cx, fx = cell_centres(triplet), face_midpoints(triplet)
        return cls(np.array([rho(*p) for p in cx], dtype=float),
                   np.array([T(*p) for p in fx], dtype=float), delta)

    def wave_speed(self):
        """Upper bound for ``sqrt(T / rho)`` over the grid."""
        return float(np.sqrt(self.Tcoef.max() / self.rho.min()))


def cell_centres(triplet):
    geo = triplet.geometry
    if geo.dim == 1:
        (h,) = geo.h
        return [((i + 0.5) * h,) for i in range(geo.n_cells)]
    Nx, Ny = geo.cells
    hx, hy = geo.h
    return [((i + 0.5) * hx, (j + 0.5) * hy)
            for j in range(Ny) for i in range(Nx)]


def face_midpoints(triplet):
    geo = triplet.geometry
    if geo.dim == 1:
        (h,) = geo.h
        return [(i * h,) for i in range(geo.n_faces)]
    Nx, Ny = geo.cells
    hx, hy = geo.h
    pts = [(i * hx, (j + 0.5) * hy) for j in range(Ny) for i in range(Nx + 1)]
    pts += [((i + 0.5) * hx, j * hy) for j in range(Ny + 1) for i in range(Nx)]
    return pts


@dataclass(frozen=True, eq=False)
class HamiltonianOperator:
    """``H = diag(1 / rho, T)`` with the volume weights of the grid."""
    h_cell: np.ndarray
    h_face: np.ndarray
    m_cell: np.ndarray
    m_face: np.ndarray

    @property
    def diagonal(self):
        return np.concatenate([self.h_cell, self.h_face])

    @property
    def matrix(self):
        return np.diag(self.diagonal)

    @property
    def weight(self):
        """Diagonal of ``diag(M) H``, the energy Gram matrix."""
        return np.concatenate([self.m_cell * self.h_cell,
                               self.m_face * self.h_face])

    def energy(self, x):
        x = np.asarray(x, dtype=float)
        return float(x @ (self.weight * x))

    @property
    def coercivity(self):
        return float(self.diagonal.min())


def hamiltonian(triplet, material):
    if material.rho.shape != (triplet.n_cells,) or \
            material.Tcoef.shape != (triplet.n_faces,):
        raise DimensionMismatchError(
            'material has %d cells / %d faces, triplet has %d / %d'
            % (material.rho.size, material.Tcoef.size, triplet.n_cells,
               triplet.n_faces))
    H = HamiltonianOperator(1.0 / material.rho, material.Tcoef.copy(),
                            triplet.m_cell, triplet.m_face)
    for a in (H.h_cell, H.h_face):
        a.setflags(write=False)
    return H


def _accretive(Q, name, n):
    Q = as_matrix(Q, name, square=True)
    if Q.shape[0] != n:
        raise DimensionMismatchError('%s is %dx%d, expected %dx%d'
                                     % (name, Q.shape[0], Q.shape[0], n, n))
    if not is_psd(Q + Q.T, 1e-10):
        raise AccretivityError('%s must be bounded and accretive operators '
                               '(Q + Q^T >= 0); %s is not' % (name, name))
    Q.setflags(write=False)
    return Q


@dataclass(frozen=True, eq=False)
class DampingSpec:
    """Interior damping ``Qi`` on cells and boundary damping ``Qb`` on gamma1.

    Either matrix may be ``None`` (absent, i.e. zero).  Both act in the
    coordinates ``M^{1/2} v`` so accretivity is the plain ``Q + Q^T >= 0``.
    """
    Qi: np.ndarray | None = None
    Qb: np.ndarray | None = None

    def validated(self, n_cells, n_gamma1):
        Qi = None if self.Qi is None else _accretive(self.Qi, 'Qi', n_cells)
        Qb = None if self.Qb is None else _accretive(self.Qb, 'Qb', n_gamma1)
        return DampingSpec(Qi, Qb)

    @staticmethod
    def _skew(Q):
        return Q is None or bool(np.max(np.abs(Q + Q.T), initial=0.0)
                                 <= 1e-12 * (1.0 + operator_norm(Q)))

    @property
    def boundary_skew(self):
        return self._skew(self.Qb)

    @property
    def interior_skew(self):
        return self._skew(self.Qi)

    @property
    def conservative(self):
        return self.boundary_skew and self.interior_skew


@dataclass(frozen=True, eq=False)
class WaveBoundarySystem:
    """Assembled linear system ``x' = A x + B u, y = C x + D u``."""
    triplet: object
    material: MaterialField
    damping: DampingSpec
    H: HamiltonianOperator
    representation: Representation
    active_faces: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray
    J: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    C1: np.ndarray
    weight: np.ndarray
    m_gamma1: np.ndarray
    m_gamma2: np.ndarray
    extras: dict = field(default_factory=dict)

    @property
    def n_cells(self):
        return self.triplet.n_cells

    @property
    def state_dim(self):
        return self.A.shape[0]

    @property
    def n_inputs(self):
        return self.B.shape[1]

    @property
    def n_gamma1(self):
        return self.C1.shape[0]

    def split(self, x):
        x = np.asarray(x)
        return x[..., :self.n_cells], x[..., self.n_cells:]

    def energy(self, x):
        x = np.asarray(x, dtype=float)
        return float(x @ (self.weight * x))

    def velocity(self, x):
        return self.H.h_cell * np.asarray(x)[..., :self.n_cells]

    def output(self, x, u):
        return self.C @ x + self.D @ u

    def boundary_inner(self, a, b):
        """``<a, b>`` weighted by the gamma2 boundary measure."""
        return float(np.dot(self.m_gamma2 * a, b))

    def supply_rate(self, u, y):
        """Power supplied through gamma2 in this representation."""
        if self.representation is Representation.IMPEDANCE:
            return 2.0 * self.boundary_inner(u, y)
        return self.boundary_inner(u, u) - self.boundary_inner(y, y)

    def gamma1_dissipation(self, v1):
        """``2 <Qb v1, v1>`` with ``v1`` the gamma1 velocity trace."""
        Qb = self.damping.Qb
        if Qb is None or v1.size == 0:
            return 0.0
        w = np.sqrt(self.m_gamma1) * v1
        return float(2.0 * w @ (Qb @ w))

    def interior_dissipation(self, x):
        Qi = self.damping.Qi
        if Qi is None:
            return 0.0
        w = np.sqrt(self.H.m_cell) * self.velocity(x)
        return float(2.0 * w @ (Qi @ w))

    def state_from_fields(self, g, f):
        """Pack momentum and strain; ``f`` may cover all or active faces."""
        g = np.asarray(g, dtype=float)
        f = np.asarray(f, dtype=float)
        if g.shape != (self.n_cells,):
            raise DimensionMismatchError('g has shape %s, expected (%d,)'
                                         % (g.shape, self.n_cells))
        if f.shape == (self.triplet.n_faces,):
            f = f[self.active_faces]
        elif f.shape != (self.active_faces.size,):
            raise DimensionMismatchError(
                'f has shape %s, expected (%d,) or (%d,)'
                % (f.shape, self.triplet.n_faces, self.active_faces.size))
        return np.concatenate([g, f])

    def compatible_input(self, g, f_full):
        """Input value ``G x`` implied by a full-face initial state.

        In impedance form this is the outward normal stress on gamma2; in
        scattering form it is the Cayley combination with the velocity trace.
        """
        tp = self.triplet
        stress = tp.Tperp @ (self.material.Tcoef * np.asarray(f_full))
        s2 = stress[self.gamma2]
        if self.representation is Representation.IMPEDANCE:
            return s2
        y = tp.T0[self.gamma2] @ (self.H.h_cell * np.asarray(g))
        return (s2 + y) / SQRT2

    def manifest(self):
        tp = self.triplet
        return {
            'representation': self.representation.value,
            'dim': tp.geometry.dim,
            'cells': list(tp.geometry.cells),
            'extents': list(tp.geometry.extents),
            'state_dim': self.state_dim,
            'n_cells': self.n_cells,
            'n_active_faces': int(self.active_faces.size),
            'n_inputs': self.n_inputs,
            'n_gamma1': self.n_gamma1,
            'partition': tp.partition_summary(),
            'green_residual': verify_green_identity(tp, 10),
            'damping': {
                'Qi_present': self.damping.Qi is not None,
                'Qb_present': self.damping.Qb is not None,
                'accretive': True,
                'Qb_skew': self.damping.boundary_skew,
                'Qi_skew': self.damping.interior_skew,
                'conservative': self.damping.conservative,
            },
            'norms': {
                'A': operator_norm(self.A),
                'B': operator_norm(self.B),
                'C': operator_norm(self.C),
                'D': operator_norm(self.D),
                'J_skew_defect': skew_defect(self.J, self.weight_J()),
            },
            'material': {
                'rho_min': float(self.material.rho.min()),
                'rho_max': float(self.material.rho.max()),
                'T_min': float(self.material.Tcoef.min()),
                'T_max': float(self.material.Tcoef.max()),
            },
        }

    def weight_J(self):
        """Diagonal volume weights in which ``J`` is skew."""
        return np.concatenate([self.H.m_cell,
                               self.H.m_face[self.active_faces]])


def skew_defect(J, m):
    """``max |diag(m) J + J^T diag(m)|``."""
    MJ = m[:, None] * J
    return float(np.max(np.abs(MJ + MJ.T), initial=0.0))


def assemble_impedance_system(triplet, material, damping=None):
    """Impedance-form system: input is the gamma2 normal stress."""
    H = hamiltonian(triplet, material)
    g1 = triplet.dof_indices(GAMMA1)
    g2 = triplet.dof_indices(GAMMA2)
    damping = (damping or DampingSpec()).validated(triplet.n_cells, g1.size)
    nc = triplet.n_cells
    traced = {bf.face for bf in triplet.dofs}
    active = np.array([j for j in range(triplet.n_faces) if j not in traced],
                      dtype=int)
    na = active.size
    n = nc + na

    J = np.zeros((n, n))
    J[:nc, nc:] = triplet.Div[:, active]
    J[nc:, :nc] = triplet.Grad[active, :]
    hdiag = np.concatenate([H.h_cell, H.h_face[active]])
    weight = np.concatenate([H.m_cell, H.m_face[active]]) * hdiag

    normals = np.array([bf.normal for bf in triplet.dofs])
    faces = np.array([bf.face for bf in triplet.dofs], dtype=int)

    def input_map(idx):
        Bm = np.zeros((n, idx.size))
        if idx.size:
            Bm[:nc] = triplet.Div[:, faces[idx]] * normals[idx][None, :]
        return Bm

    def trace_map(idx):
        Cm = np.zeros((idx.size, n))
        if idx.size:
            Cm[:, :nc] = triplet.T0[idx] * H.h_cell[None, :]
        return Cm

    B2, C2 = input_map(g2), trace_map(g2)
    B1, C1 = input_map(g1), trace_map(g1)
    m_b = triplet.m_bdry
    A = J * hdiag[None, :]
    if damping.Qb is not None and g1.size:
        s = np.sqrt(m_b[g1])
        Qhat = damping.Qb * s[None, :] / s[:, None]
        A = A - B1 @ Qhat @ C1
    if damping.Qi is not None:
        s = np.sqrt(H.m_cell)
        Qhat = damping.Qi * s[None, :] / s[:, None]
        A[:nc, :nc] -= Qhat * H.h_cell[None, :]
    D = np.zeros((g2.size, g2.size))
    for a in (A, B2, C2, D, C1, J, weight, active, g1, g2):
        a.setflags(write=False)
    return WaveBoundarySystem(triplet, material, damping, H,
                              Representation.IMPEDANCE, active, g1, g2, J, A,
                              B2, C2, D, C1, weight, m_b[g1].copy(),
                              m_b[g2].copy(), {'B1': B1})


def external_cayley_signals(u, y):
    """``((u + y) / sqrt 2, (u - y) / sqrt 2)``; its own inverse."""
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=float)
    if u.shape != y.shape:
        raise DimensionMismatchError('u %s and y %s differ in shape'
                                     % (u.shape, y.shape))
    return (u + y) / SQRT2, (u - y) / SQRT2


def assemble_scattering_system(impedance):
    """Scattering form obtained by feeding back ``u = sqrt 2 u_s - y``."""
    if impedance.representation is not Representation.IMPEDANCE:
        raise ValidationError('expected a system in impedance representation')
    B2, C2 = impedance.B, impedance.C
    A = impedance.A - B2 @ C2
    B = SQRT2 * B2
    C = -SQRT2 * C2
    D = np.eye(B2.shape[1])
    for a in (A, B, C, D):
        a.setflags(write=False)
    return WaveBoundarySystem(
        impedance.triplet, impedance.material, impedance.damping, impedance.H,
        Representation.SCATTERING, impedance.active_faces, impedance.gamma1,
        impedance.gamma2, impedance.J, A, B, C, D, impedance.C1,
        impedance.weight, impedance.m_gamma1, impedance.m_gamma2,
        dict(impedance.extras))


def reconstruct_displacement(trace, z0, material):
    """Displacement at snapshot times from the momentum snapshots.

    ``z_{n+1} = z_n + (t_{n+1} - t_n) * (g_n + g_{n+1}) / (2 rho)``.  With a
    snapshot every step this is the midpoint rule of the integrator, and
    ``Grad z_n`` reproduces the strain on active faces up to rounding when
    ``Grad z0`` matches the initial strain.

    Returns ``(times, Z)`` with one row of ``Z`` per snapshot.
    """
    steps = getattr(trace, 'snapshot_steps', None)
    if steps is None or len(steps) == 0:
        raise ValidationError('trace has no state snapshots; rerun with '
                              'snapshot_every >= 1')
    if steps[0] != 0:
        raise ValidationError('the first snapshot must be the initial state')
    g = np.asarray(trace.snapshot_g, dtype=float)
    times = np.asarray(trace.times)[np.asarray(steps)]
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (g.shape[1],):
        raise DimensionMismatchError('z0 has shape %s, expected (%d,)'
                                     % (z0.shape, g.shape[1]))
    v = g / material.rho[None, :]
    Z = np.empty_like(v)
    Z[0] = z0
    for n in range(1, len(times)):
        Z[n] = Z[n - 1] + (times[n] - times[n - 1]) * 0.5 * (v[n] + v[n - 1])
    return times, Z
