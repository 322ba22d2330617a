"""Staggered (MAC) discretisation of ``div`` and ``grad`` with boundary traces.

Scalar quantities (momentum, velocity) live at cell centres and vector
quantities (strain, stress) on faces, one normal component per face.  The
builders return a :class:`DiscreteTriplet` whose matrices satisfy

    (Div f)^T M_cell g + f^T M_face (Grad g) = (Tperp f)^T M_bdry (T0 g)

for all ``f`` and ``g``.  Boundary faces labelled ``gamma0`` carry a
homogeneous Dirichlet condition inside ``Grad`` and have no trace rows;
faces labelled ``gamma1`` or ``gamma2`` each contribute one boundary degree of
freedom to ``T0`` and ``Tperp``.

Boundary-face weights are ``0.5 * (cell volume)`` and the matching
gradient entries ``2 * (1 / h)``.  Scaling by powers of two is exact in
binary floating point, so ``M_cell Div + Grad^T M_face`` vanishes bit-for-bit
on every column that is not a gamma1/gamma2 boundary face.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, PartitionError, ValidationError
from .numerics import null_space

__all__ = ['GAMMA0', 'GAMMA1', 'GAMMA2', 'LABELS', 'normalize_label',
           'BoundaryFace', 'DiscreteGeometry', 'DiscreteTriplet',
           'build_staggered_1d', 'build_staggered_2d',
           'verify_green_identity', 'duality_defect', 'gamma0_trace',
           'boundary_operators', 'restricted_basis', 'restrict_generator']

GAMMA0, GAMMA1, GAMMA2 = 'gamma0', 'gamma1', 'gamma2'
LABELS = (GAMMA0, GAMMA1, GAMMA2)

_ALIASES = {
    'gamma0': GAMMA0, 'gamma1': GAMMA1, 'gamma2': GAMMA2,
    'g0': GAMMA0, 'g1': GAMMA1, 'g2': GAMMA2,
    '0': GAMMA0, '1': GAMMA1, '2': GAMMA2,
    'Γ₀': GAMMA0, 'Γ₁': GAMMA1, 'Γ₂': GAMMA2,
    'Γ0': GAMMA0, 'Γ1': GAMMA1, 'Γ2': GAMMA2,
}

EDGES_1D = ('left', 'right')
EDGES_2D = ('left', 'right', 'bottom', 'top')


def normalize_label(label):
    key = str(label).strip()
    try:
        return _ALIASES[key.lower() if key.isascii() else key]
    except KeyError:
        raise PartitionError('unknown boundary label %r (expected one of %s)'
                             % (label, ', '.join(LABELS)))


@dataclass(frozen=True)
class BoundaryFace:
    face: int
    cell: int
    edge: str
    position: float
    normal: float
    weight: float
    spacing: float
    label: str


@dataclass(frozen=True)
class DiscreteGeometry:
    dim: int
    extents: tuple
    cells: tuple
    h: tuple
    boundary_faces: tuple
    n_cells: int
    n_faces: int

    @property
    def boundary_measure(self):
        return sum(bf.weight for bf in self.boundary_faces)

    def faces_with(self, *labels):
        return [bf for bf in self.boundary_faces if bf.label in labels]


@dataclass(frozen=True, eq=False)
class DiscreteTriplet:
    """Div/Grad pair with Dirichlet and normal traces on gamma1 u gamma2."""
    geometry: DiscreteGeometry
    Div: np.ndarray
    Grad: np.ndarray
    m_cell: np.ndarray
    m_face: np.ndarray
    T0: np.ndarray
    Tperp: np.ndarray
    m_bdry: np.ndarray
    dofs: tuple = field(default=())

    @property
    def M_cell(self):
        return np.diag(self.m_cell)

    @property
    def M_face(self):
        return np.diag(self.m_face)

    @property
    def M_bdry(self):
        return np.diag(self.m_bdry)

    @property
    def n_cells(self):
        return self.geometry.n_cells

    @property
    def n_faces(self):
        return self.geometry.n_faces

    @property
    def n_boundary(self):
        return len(self.dofs)

    @property
    def state_dim(self):
        return self.n_cells + self.n_faces

    def dof_indices(self, label):
        """Positions (rows of ``T0``) of boundary dofs carrying ``label``."""
        label = normalize_label(label)
        return np.array([k for k, bf in enumerate(self.dofs)
                         if bf.label == label], dtype=int)

    def partition_summary(self):
        counts = {lab: 0 for lab in LABELS}
        measure = {lab: 0.0 for lab in LABELS}
        for bf in self.geometry.boundary_faces:
            counts[bf.label] += 1
            measure[bf.label] += bf.weight
        return {'faces': counts, 'measure': measure}


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


def _normalize_partition(partition, edges, lengths):
    """Turn a partition description into ``edge -> [(start, stop, label)]``.

    Two spellings are accepted: ``{edge: label}`` (edge keys) or
    ``{label: [piece, ...]}`` (label keys), where a piece is an edge name or a
    mapping ``{'edge': e, 'from': a, 'to': b}``.  Overlaps and gaps are
    detected later, face by face.
    """
    if partition is None:
        raise PartitionError('a boundary partition is required')
    segments = {e: [] for e in edges}
    for key, value in dict(partition).items():
        if str(key) in edges:
            pieces = value if isinstance(value, (list, tuple)) else [value]
            for piece in pieces:
                if isinstance(piece, (list, tuple)) and len(piece) == 3:
                    a, b, lab = piece
                    segments[key].append((float(a), float(b),
                                          normalize_label(lab)))
                else:
                    segments[key].append((0.0, lengths[key],
                                          normalize_label(piece)))
            continue
        label = normalize_label(key)
        pieces = value if isinstance(value, (list, tuple)) else [value]
        for piece in pieces:
            if isinstance(piece, str):
                if piece not in edges:
                    raise PartitionError('unknown boundary piece %r' % piece)
                segments[piece].append((0.0, lengths[piece], label))
            elif isinstance(piece, dict):
                edge = piece.get('edge')
                if edge not in edges:
                    raise PartitionError('unknown boundary edge %r' % edge)
                a = float(piece.get('from', 0.0))
                b = float(piece.get('to', lengths[edge]))
                segments[edge].append((a, b, label))
            else:
                raise PartitionError('cannot interpret boundary piece %r'
                                     % (piece,))
    return segments


def _label_at(segments, edge, s, length=0.0):
    # segments are half-open [a, b), closed at the far end of the edge
    hits = [lab for a, b, lab in segments[edge]
            if a <= s and (s < b or (s == b and b >= length))]
    if not hits:
        raise PartitionError('boundary face on %s at %.6g is not labelled'
                             % (edge, s))
    if len(hits) > 1:
        raise PartitionError('boundary face on %s at %.6g carries '
                             'overlapping labels %s' % (edge, s, hits))
    return hits[0]


def _assemble(geometry, Div, Grad, m_cell, m_face):
    dofs = tuple(bf for bf in geometry.boundary_faces if bf.label != GAMMA0)
    nb = len(dofs)
    T0 = np.zeros((nb, geometry.n_cells))
    Tperp = np.zeros((nb, geometry.n_faces))
    m_bdry = np.zeros(nb)
    for k, bf in enumerate(dofs):
        T0[k, bf.cell] = 1.0
        Tperp[k, bf.face] = bf.normal
        m_bdry[k] = bf.weight
    _freeze(Div, Grad, m_cell, m_face, T0, Tperp, m_bdry)
    return DiscreteTriplet(geometry, Div, Grad, m_cell, m_face, T0, Tperp,
                           m_bdry, dofs)


def _boundary_face_rows(Grad, m_face, bf, vol):
    """Fill the Grad row and weight of one boundary face."""
    m_face[bf.face] = 0.5 * vol
    if bf.label == GAMMA0:
        # ghost value zero half a cell outside: (0 - g) * nu / (h / 2)
        Grad[bf.face, bf.cell] = -bf.normal * (2.0 * (1.0 / bf.spacing))


def build_staggered_1d(N, length=1.0, partition=None):
    """Staggered grid on ``[0, length]`` with ``N`` cells and ``N + 1`` faces.

    ``partition`` labels the two ends, e.g. ``{'left': 'gamma0',
    'right': 'gamma2'}``.
    """
    N = int(N)
    length = float(length)
    if N < 1:
        raise ValidationError('need at least one cell, got N = %d' % N)
    if not length > 0 or not np.isfinite(length):
        raise ValidationError('length must be positive, got %r' % length)
    if partition is None:
        partition = {'left': GAMMA0, 'right': GAMMA0}
    segments = _normalize_partition(partition, EDGES_1D,
                                    {'left': 0.0, 'right': 0.0})
    h = length / N
    inv_h = 1.0 / h
    Div = np.zeros((N, N + 1))
    Grad = np.zeros((N + 1, N))
    m_cell = np.full(N, h)
    m_face = np.full(N + 1, h)
    for i in range(N):
        Div[i, i] = -inv_h
        Div[i, i + 1] = inv_h
    for j in range(1, N):
        Grad[j, j] = inv_h
        Grad[j, j - 1] = -inv_h
    faces = []
    for edge, face, cell, normal in (('left', 0, 0, -1.0),
                                     ('right', N, N - 1, 1.0)):
        bf = BoundaryFace(face, cell, edge, 0.0, normal, 1.0, h,
                          _label_at(segments, edge, 0.0))
        _boundary_face_rows(Grad, m_face, bf, h)
        faces.append(bf)
    geometry = DiscreteGeometry(1, (length,), (N,), (h,), tuple(faces),
                                N, N + 1)
    return _assemble(geometry, Div, Grad, m_cell, m_face)


def build_staggered_2d(Nx, Ny, Lx=1.0, Ly=1.0, partition=None):
    """MAC grid on ``[0, Lx] x [0, Ly]``.

    Cell ``(i, j)`` has index ``j * Nx + i``.  Faces normal to x come first,
    ``(i, j) -> j * (Nx + 1) + i``, followed by faces normal to y,
    ``(i, j) -> (Nx + 1) * Ny + j * Nx + i``.

    ``partition`` maps the edges ``left``, ``right``, ``bottom``, ``top`` to a
    label or to a list of ``(start, stop, label)`` segments measured along the
    edge (bottom-to-top for vertical edges, left-to-right for horizontal
    ones).  A face belongs to the segment containing its midpoint; segments
    are half-open ``[start, stop)`` except at the far end of the edge.
    """
    Nx, Ny = int(Nx), int(Ny)
    Lx, Ly = float(Lx), float(Ly)
    if Nx < 1 or Ny < 1:
        raise ValidationError('need at least one cell per axis')
    if not (Lx > 0 and Ly > 0):
        raise ValidationError('extents must be positive')
    if partition is None:
        partition = {e: GAMMA0 for e in EDGES_2D}
    lengths = {'left': Ly, 'right': Ly, 'bottom': Lx, 'top': Lx}
    segments = _normalize_partition(partition, EDGES_2D, lengths)
    hx, hy = Lx / Nx, Ly / Ny
    inv_hx, inv_hy = 1.0 / hx, 1.0 / hy
    vol = hx * hy
    nc = Nx * Ny
    nxf = (Nx + 1) * Ny
    nf = nxf + Nx * (Ny + 1)

    def cell(i, j):
        return j * Nx + i

    def xface(i, j):
        return j * (Nx + 1) + i

    def yface(i, j):
        return nxf + j * Nx + i

    Div = np.zeros((nc, nf))
    Grad = np.zeros((nf, nc))
    m_cell = np.full(nc, vol)
    m_face = np.full(nf, vol)
    for j in range(Ny):
        for i in range(Nx):
            c = cell(i, j)
            Div[c, xface(i, j)] = -inv_hx
            Div[c, xface(i + 1, j)] = inv_hx
            Div[c, yface(i, j)] = -inv_hy
            Div[c, yface(i, j + 1)] = inv_hy
    for j in range(Ny):
        for i in range(1, Nx):
            Grad[xface(i, j), cell(i, j)] = inv_hx
            Grad[xface(i, j), cell(i - 1, j)] = -inv_hx
    for j in range(1, Ny):
        for i in range(Nx):
            Grad[yface(i, j), cell(i, j)] = inv_hy
            Grad[yface(i, j), cell(i, j - 1)] = -inv_hy

    def label(edge, s):
        return _label_at(segments, edge, s, lengths[edge])

    faces = []
    for j in range(Ny):
        s = (j + 0.5) * hy
        faces.append(BoundaryFace(xface(0, j), cell(0, j), 'left', s, -1.0,
                                  hy, hx, label('left', s)))
    for j in range(Ny):
        s = (j + 0.5) * hy
        faces.append(BoundaryFace(xface(Nx, j), cell(Nx - 1, j), 'right', s,
                                  1.0, hy, hx, label('right', s)))
    for i in range(Nx):
        s = (i + 0.5) * hx
        faces.append(BoundaryFace(yface(i, 0), cell(i, 0), 'bottom', s, -1.0,
                                  hx, hy, label('bottom', s)))
    for i in range(Nx):
        s = (i + 0.5) * hx
        faces.append(BoundaryFace(yface(i, Ny), cell(i, Ny - 1), 'top', s,
                                  1.0, hx, hy, label('top', s)))
    for bf in faces:
        _boundary_face_rows(Grad, m_face, bf, vol)
    geometry = DiscreteGeometry(2, (Lx, Ly), (Nx, Ny), (hx, hy), tuple(faces),
                                nc, nf)
    return _assemble(geometry, Div, Grad, m_cell, m_face)


def green_residual(triplet, f, g):
    """Absolute defect of the discrete Green identity for one pair."""
    lhs = (triplet.Div @ f) @ (triplet.m_cell * g) \
        + f @ (triplet.m_face * (triplet.Grad @ g))
    rhs = (triplet.Tperp @ f) @ (triplet.m_bdry * (triplet.T0 @ g))
    return abs(lhs - rhs)


def verify_green_identity(triplet, trials=100, seed=0):
    """Max over random pairs of ``|lhs - rhs| / (1 + ||f|| ||g||)``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(int(trials)):
        f = rng.standard_normal(triplet.n_faces)
        g = rng.standard_normal(triplet.n_cells)
        r = green_residual(triplet, f, g)
        worst = max(worst, r / (1.0 + np.linalg.norm(f) * np.linalg.norm(g)))
    return float(worst)


def duality_defect(triplet):
    """``max |M_cell Div + Grad^T M_face|`` on the zero-trace subspaces.

    Columns are restricted to faces without a gamma1/gamma2 trace (the
    kernel of ``Tperp``) and rows to cells without a Dirichlet trace (the
    kernel of ``T0``); on either restriction the defect is exactly zero.
    """
    D = triplet.m_cell[:, None] * triplet.Div \
        + triplet.Grad.T * triplet.m_face[None, :]
    traced_faces = {bf.face for bf in triplet.dofs}
    traced_cells = {bf.cell for bf in triplet.dofs}
    cols = [j for j in range(triplet.n_faces) if j not in traced_faces]
    rows = [i for i in range(triplet.n_cells) if i not in traced_cells]
    worst = 0.0
    if cols:
        worst = max(worst, float(np.max(np.abs(D[:, cols]))))
    if rows:
        worst = max(worst, float(np.max(np.abs(D[rows, :]))))
    return worst


def gamma0_trace(triplet, g):
    """Boundary values on gamma0 faces implied by the rows of ``Grad``.

    Each gamma0 row encodes ``(b - g_cell) * nu / (h / 2)`` with ``b`` the
    boundary value, so ``b = g_cell + nu * (h / 2) * (Grad g)_face``.
    """
    g = np.asarray(g, dtype=float)
    grad = triplet.Grad @ g
    out = [g[bf.cell] + bf.normal * (0.5 * bf.spacing) * grad[bf.face]
           for bf in triplet.geometry.boundary_faces if bf.label == GAMMA0]
    return np.array(out)


def boundary_operators(triplet, H):
    """Boundary maps ``(B1, B2)`` on the full (cells, faces) state.

    ``B1 x`` is the Dirichlet trace of the velocity ``H x`` and ``B2 x`` the
    normal trace of the stress, both scaled by ``sqrt(m_bdry)`` so that the
    boundary pairing is the Euclidean dot product on ``R^m``.
    """
    nc, nf = triplet.n_cells, triplet.n_faces
    w = np.sqrt(triplet.m_bdry)[:, None]
    B1 = np.hstack([w * triplet.T0 * np.asarray(H.h_cell)[None, :],
                    np.zeros((triplet.n_boundary, nf))])
    B2 = np.hstack([np.zeros((triplet.n_boundary, nc)),
                    w * triplet.Tperp * np.asarray(H.h_face)[None, :]])
    return B1, B2


def _full_operators(triplet, H):
    nc, nf = triplet.n_cells, triplet.n_faces
    h_cell = np.asarray(H.h_cell, dtype=float)
    h_face = np.asarray(H.h_face, dtype=float)
    if h_cell.shape != (nc,) or h_face.shape != (nf,):
        raise DimensionMismatchError('Hamiltonian does not match the triplet')
    S = np.block([[np.zeros((nc, nc)), triplet.Div],
                  [triplet.Grad, np.zeros((nf, nf))]])
    hdiag = np.concatenate([h_cell, h_face])
    # energy Gram: <x, y>_H = x^T diag(m * h) y
    gram = np.concatenate([triplet.m_cell, triplet.m_face]) * hdiag
    return S, hdiag, gram


def restricted_basis(triplet, H, spec):
    """H-orthonormal basis ``Z`` of ``{x : W1 B1 x + W2 B2 x = 0}``."""
    W1 = np.asarray(spec.W1, dtype=float)
    W2 = np.asarray(spec.W2, dtype=float)
    if W1.shape[1] != triplet.n_boundary or W2.shape != W1.shape:
        raise DimensionMismatchError(
            'boundary condition acts on R^%d but the triplet has %d boundary '
            'dofs' % (W1.shape[1], triplet.n_boundary))
    S, hdiag, gram = _full_operators(triplet, H)
    B1, B2 = boundary_operators(triplet, H)
    N0 = null_space(W1 @ B1 + W2 @ B2)
    if N0.shape[1] == 0:
        return N0, S, hdiag, gram
    G = N0.T @ (gram[:, None] * N0)
    L = np.linalg.cholesky(0.5 * (G + G.T))
    Z = np.linalg.solve(L, N0.T).T
    return Z, S, hdiag, gram


def restrict_generator(triplet, H, spec):
    """Representation of ``S H`` on the constrained subspace.

    The subspace is ``dom A = ker (W1 B1 + W2 B2)``; the returned matrix acts
    on coordinates with respect to an H-orthonormal basis of it, i.e. it is
    the H-orthogonal compression ``Z^T Gram S H Z``.
    """
    Z, S, hdiag, gram = restricted_basis(triplet, H, spec)
    if Z.shape[1] == 0:
        warnings.warn('boundary condition leaves an empty domain; returning '
                      'a 0x0 generator', RuntimeWarning, stacklevel=2)
        return np.zeros((0, 0))
    return Z.T @ (gram[:, None] * (S @ (hdiag[:, None] * Z)))
