import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavetriplet.certify import BoundaryConditionSpec
from wavetriplet.errors import PartitionError, ValidationError
from wavetriplet.model import MaterialField, hamiltonian
from wavetriplet.numerics import null_space, numerical_rank
from wavetriplet.triplet import (boundary_operators, build_staggered_1d,
                                 build_staggered_2d, duality_defect,
                                 gamma0_trace, green_residual,
                                 restrict_generator, verify_green_identity)

LABELS = ['gamma0', 'gamma1', 'gamma2']


def test_1d_shapes_and_single_cell():
    t = build_staggered_1d(1, 1.0, {'left': 'gamma2', 'right': 'gamma2'})
    assert t.Div.shape == (1, 2) and t.Grad.shape == (2, 1)
    assert t.n_boundary == 2
    # Grad rows of the gamma2 faces are empty; the boundary pairing carries
    # the whole identity
    assert np.all(t.Grad == 0)
    assert green_residual(t, np.array([0.3, -1.7]), np.array([2.5])) == 0.0


def test_1d_constants():
    t = build_staggered_1d(4, 1.0, {'left': 'gamma1', 'right': 'gamma2'})
    f, g = np.ones(5), np.ones(4)
    assert np.allclose(t.Div @ f, 0)
    assert t.Tperp @ f @ (t.m_bdry * (t.T0 @ g)) == pytest.approx(0.0)
    assert verify_green_identity(t, 20) <= 1e-13


def test_invalid_inputs():
    with pytest.raises(ValidationError):
        build_staggered_1d(0)
    with pytest.raises(ValidationError):
        build_staggered_1d(4, -1.0)
    with pytest.raises(ValidationError):
        build_staggered_2d(0, 3)
    with pytest.raises(PartitionError):
        build_staggered_1d(4, 1.0, {'left': 'gamma5', 'right': 'gamma0'})


def test_partition_overlap_and_gap():
    with pytest.raises(PartitionError):
        build_staggered_1d(4, 1.0, {'gamma0': ['left', 'right'],
                                    'gamma2': ['left']})
    with pytest.raises(PartitionError):
        build_staggered_1d(4, 1.0, {'gamma0': ['left']})
    with pytest.raises(PartitionError):
        build_staggered_2d(4, 4, 1, 1, {'gamma0': ['left', 'right', 'top'],
                                        'gamma1': [{'edge': 'bottom',
                                                    'from': 0.0,
                                                    'to': 0.5}]})


def test_2d_unit_square_single_cell():
    t = build_staggered_2d(1, 1, 1.0, 1.0,
                           {'left': 'gamma1', 'right': 'gamma2',
                            'bottom': 'gamma2', 'top': 'gamma1'})
    assert t.Tperp.shape == (4, 4)
    assert np.linalg.matrix_rank(t.Tperp) == 4
    assert verify_green_identity(t, 50) <= 1e-13


def test_2d_constant_fields_cancel():
    t = build_staggered_2d(8, 8, 1.0, 1.0, {e: 'gamma2' for e in
                                             ('left', 'right', 'bottom',
                                              'top')})
    f, g = np.ones(t.n_faces), np.ones(t.n_cells)
    vol = (t.Div @ f) @ (t.m_cell * g) + f @ (t.m_face * (t.Grad @ g))
    bdry = (t.Tperp @ f) @ (t.m_bdry * (t.T0 @ g))
    assert vol == pytest.approx(0.0, abs=1e-12)
    assert bdry == pytest.approx(0.0, abs=1e-12)


def test_2d_segments_and_label_form():
    part = {'gamma1': [{'edge': 'right', 'from': 0.0, 'to': 0.25}],
            'gamma2': ['top'],
            'gamma0': ['left', 'bottom',
                       {'edge': 'right', 'from': 0.25, 'to': 1.0}]}
    t = build_staggered_2d(8, 8, 1.0, 1.0, part)
    assert t.dof_indices('gamma1').size == 2
    assert t.dof_indices('gamma2').size == 8
    assert t.geometry.boundary_measure == pytest.approx(4.0)
    assert verify_green_identity(t, 50) <= 1e-13
    assert duality_defect(t) == 0.0


def test_2d_random_16x12():
    rng = np.random.default_rng(5)
    part = {e: LABELS[rng.integers(3)] for e in ('left', 'right', 'bottom',
                                                 'top')}
    t = build_staggered_2d(16, 12, 2.0, 1.5, part)
    assert verify_green_identity(t, 100, seed=1) <= 1e-13


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.sampled_from(LABELS), st.sampled_from(LABELS),
       st.floats(0.1, 10.0))
def test_1d_green_and_duality_all_partitions(N, left, right, length):
    t = build_staggered_1d(N, length, {'left': left, 'right': right})
    assert verify_green_identity(t, 10) <= 1e-13
    assert duality_defect(t) == 0.0
    assert numerical_rank(t.Tperp) == t.n_boundary


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 10), st.integers(1, 10),
       st.lists(st.sampled_from(LABELS), min_size=4, max_size=4))
def test_2d_green_and_duality_all_partitions(Nx, Ny, labels):
    part = dict(zip(('left', 'right', 'bottom', 'top'), labels))
    t = build_staggered_2d(Nx, Ny, 1.3, 0.7, part)
    assert verify_green_identity(t, 10) <= 1e-13
    assert duality_defect(t) == 0.0
    assert numerical_rank(t.Tperp) == t.n_boundary


def test_gamma0_values_vanish():
    t = build_staggered_2d(5, 4, 1.0, 1.0,
                           {'left': 'gamma0', 'right': 'gamma0',
                            'bottom': 'gamma2', 'top': 'gamma0'})
    g = np.random.default_rng(0).standard_normal(t.n_cells)
    b = gamma0_trace(t, g)
    assert b.size == 4 + 4 + 5
    assert np.max(np.abs(b)) <= 1e-14


def uniform_H(t, rng=None):
    if rng is None:
        return hamiltonian(t, MaterialField.uniform(t))
    return hamiltonian(t, MaterialField(rng.uniform(0.5, 2, t.n_cells),
                                        rng.uniform(0.5, 2, t.n_faces)))


def test_restrict_zero_stress_spec_is_skew():
    t = build_staggered_1d(4, 1.0, {'left': 'gamma2', 'right': 'gamma2'})
    spec = BoundaryConditionSpec(np.zeros((2, 2)), np.eye(2))
    A = restrict_generator(t, uniform_H(t), spec)
    assert np.max(np.abs(np.linalg.eigvals(A).real)) <= 1e-10
    assert np.allclose(A, -A.T, atol=1e-12)


def test_restrict_matched_damping_is_dissipative():
    t = build_staggered_1d(8, 1.0, {'left': 'gamma1', 'right': 'gamma2'})
    spec = BoundaryConditionSpec(np.eye(2), np.eye(2))
    A = restrict_generator(t, uniform_H(t), spec)
    assert np.max(np.linalg.eigvals(A).real) <= 1e-10
    assert np.max(np.linalg.eigvalsh(A + A.T)) <= 1e-10


def test_restrict_single_cell():
    t = build_staggered_1d(1, 1.0, {'left': 'gamma2', 'right': 'gamma2'})
    spec = BoundaryConditionSpec(np.zeros((2, 2)), np.eye(2))
    A = restrict_generator(t, uniform_H(t), spec)
    assert A.shape == (1, 1) and A[0, 0] == 0.0


def test_restrict_empty_domain_warns():
    t = build_staggered_1d(1, 1.0, {'left': 'gamma2', 'right': 'gamma2'})
    W = np.eye(2)
    spec = BoundaryConditionSpec(np.vstack([W, np.zeros((2, 2))]),
                                 np.vstack([np.zeros((2, 2)), W]))
    # B1 x = 0 pins the only cell and B2 x = 0 both faces
    with pytest.warns(RuntimeWarning):
        A = restrict_generator(t, uniform_H(t), spec)
    assert A.shape == (0, 0)


def test_minimal_operator_is_skew():
    rng = np.random.default_rng(3)
    t = build_staggered_2d(4, 3, 1.0, 1.0,
                           {'left': 'gamma1', 'right': 'gamma2',
                            'bottom': 'gamma0', 'top': 'gamma2'})
    H = uniform_H(t, rng)
    B1, B2 = boundary_operators(t, H)
    N = null_space(np.vstack([B1, B2]))
    S = np.block([[np.zeros((t.n_cells, t.n_cells)), t.Div],
                  [t.Grad, np.zeros((t.n_faces, t.n_faces))]])
    h = H.diagonal
    gram = H.weight
    SH = S * h[None, :]
    form = N.T @ (gram[:, None] * SH) @ N
    assert np.max(np.abs(form + form.T)) <= 1e-12 * np.abs(form).max()
