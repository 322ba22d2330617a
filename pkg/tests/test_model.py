import numpy as np
import pytest

from wavetriplet.errors import (AccretivityError, DimensionMismatchError,
                                MaterialError, ValidationError)
from wavetriplet.model import (DampingSpec, MaterialField, Representation,
                               assemble_impedance_system,
                               assemble_scattering_system,
                               external_cayley_signals, hamiltonian,
                               reconstruct_displacement, skew_defect)
from wavetriplet.simulate import (InitialState, SimulationConfig, simulate)
from wavetriplet.triplet import build_staggered_1d, build_staggered_2d


def string(N=16, left='gamma0', right='gamma0'):
    return build_staggered_1d(N, 1.0, {'left': left, 'right': right})


def test_material_validation():
    t = string(4)
    with pytest.raises(MaterialError):
        MaterialField.uniform(t, rho=0.0)
    with pytest.raises(MaterialError):
        MaterialField.uniform(t, T=1e-3, delta=1e-2)
    with pytest.raises(DimensionMismatchError):
        MaterialField.uniform(t, rho=np.ones(3))
    with pytest.raises(DimensionMismatchError):
        hamiltonian(t, MaterialField(np.ones(3), np.ones(5)))


def test_hamiltonian_energy():
    t = string(4)
    H = hamiltonian(t, MaterialField.uniform(t, rho=2.0, T=3.0))
    x = np.ones(t.state_dim)
    # cells: 4 * h / 2, faces: (3 * h + 2 * h / 2) * 3
    assert H.energy(x) == pytest.approx(0.5 + 3.0)
    assert H.coercivity == pytest.approx(0.5)


def test_damping_accretivity():
    with pytest.raises(AccretivityError, match='bounded and accretive'):
        DampingSpec(Qb=[[-1.0]]).validated(4, 1)
    with pytest.raises(DimensionMismatchError):
        DampingSpec(Qb=np.eye(2)).validated(4, 1)
    skew = DampingSpec(Qb=[[0.0, 2.0], [-2.0, 0.0]]).validated(4, 2)
    assert skew.boundary_skew and skew.conservative
    assert not DampingSpec(Qb=np.eye(1)).validated(4, 1).boundary_skew


def test_closed_system_structure():
    t = build_staggered_2d(6, 5, 1.0, 1.0)
    s = assemble_impedance_system(t, MaterialField.uniform(t, 2.0, 0.5))
    assert s.n_inputs == 0 and s.B.shape[1] == 0
    assert skew_defect(s.J, s.weight_J()) == 0.0
    # A is skew in the energy inner product
    WA = s.weight[:, None] * s.A
    assert np.max(np.abs(WA + WA.T)) <= 1e-13 * np.abs(WA).max()


def test_input_and_output_maps_are_dual():
    t = string(8, 'gamma2', 'gamma2')
    rng = np.random.default_rng(0)
    s = assemble_impedance_system(t, MaterialField(
        rng.uniform(0.5, 2, 8), rng.uniform(0.5, 2, 9)))
    # x^T W B u = <u, C x>_2
    x, u = rng.standard_normal(s.state_dim), rng.standard_normal(2)
    assert x @ (s.weight * (s.B @ u)) == pytest.approx(
        s.boundary_inner(u, s.C @ x), rel=1e-13)


def test_gamma1_dissipation_rate():
    t = string(8, 'gamma0', 'gamma1')
    s = assemble_impedance_system(t, MaterialField.uniform(t),
                                  DampingSpec(Qb=[[1.0]]))
    rng = np.random.default_rng(1)
    x = rng.standard_normal(s.state_dim)
    dE = 2 * x @ (s.weight * (s.A @ x))
    v1 = s.C1 @ x
    assert dE == pytest.approx(-2 * v1[0] ** 2, rel=1e-12)
    assert dE <= 0


def test_interior_damping_rate():
    t = string(6)
    Qi = np.diag(np.linspace(0.1, 1.0, 6))
    s = assemble_impedance_system(t, MaterialField.uniform(t, 2.0, 1.0),
                                  DampingSpec(Qi=Qi))
    x = np.random.default_rng(2).standard_normal(s.state_dim)
    dE = 2 * x @ (s.weight * (s.A @ x))
    assert dE == pytest.approx(-s.interior_dissipation(x), rel=1e-12)


def test_free_end_matches_zero_neumann():
    t2 = string(16, 'gamma0', 'gamma2')
    t1 = string(16, 'gamma0', 'gamma1')
    mat = MaterialField.uniform(t2)
    s2 = assemble_impedance_system(t2, mat)
    s1 = assemble_impedance_system(t1, mat)
    cfg = SimulationConfig(0.01, 1.0,
                           initial_state=InitialState('random', seed=4))
    a, b = simulate(s2, cfg), simulate(s1, cfg)
    assert np.max(np.abs(a.final_state - b.final_state)) <= 1e-12


def test_cayley_signals():
    r2 = np.sqrt(2.0)
    us, ys = external_cayley_signals([1.0], [1.0])
    assert us == pytest.approx([r2]) and ys == pytest.approx([0.0])
    us, ys = external_cayley_signals([1.0], [-1.0])
    assert us == pytest.approx([0.0]) and ys == pytest.approx([r2])
    rng = np.random.default_rng(0)
    u, y = rng.standard_normal(5), rng.standard_normal(5)
    us, ys = external_cayley_signals(u, y)
    assert us @ us + ys @ ys == pytest.approx(u @ u + y @ y)
    assert us @ us - ys @ ys == pytest.approx(2 * u @ y)
    back = external_cayley_signals(us, ys)
    assert np.allclose(back[0], u) and np.allclose(back[1], y)
    with pytest.raises(DimensionMismatchError):
        external_cayley_signals([1.0], [1.0, 2.0])


def test_scattering_requires_impedance():
    t = string(4, 'gamma0', 'gamma2')
    s = assemble_scattering_system(
        assemble_impedance_system(t, MaterialField.uniform(t)))
    assert s.representation is Representation.SCATTERING
    assert np.array_equal(s.D, np.eye(1))
    with pytest.raises(ValidationError):
        assemble_scattering_system(s)


def test_scattering_zero_state_zero_output():
    t = string(4, 'gamma0', 'gamma2')
    s = assemble_scattering_system(
        assemble_impedance_system(t, MaterialField.uniform(t)))
    assert np.all(s.output(np.zeros(s.state_dim), np.zeros(1)) == 0)


def test_manifest_fields():
    t = string(8, 'gamma1', 'gamma2')
    s = assemble_impedance_system(t, MaterialField.uniform(t),
                                  DampingSpec(Qb=[[0.5]]))
    m = s.manifest()
    assert m['state_dim'] == 8 + 7
    assert m['damping']['Qb_present'] and not m['damping']['Qb_skew']
    assert m['green_residual'] <= 1e-13


def run_with_snapshots(system, x_fields, dt=0.01, t_end=0.5):
    g0, f0 = x_fields
    cfg = SimulationConfig(dt, t_end, snapshot_every=1,
                           initial_state=InitialState('explicit', g0=g0,
                                                      f0=f0))
    return simulate(system, cfg)


def test_reconstruct_zero_momentum():
    t = string(8)
    mat = MaterialField.uniform(t)
    s = assemble_impedance_system(t, mat)
    tr = run_with_snapshots(s, (np.zeros(8), np.zeros(9)))
    z0 = np.linspace(0, 1, 8)
    _, Z = reconstruct_displacement(tr, z0, mat)
    assert np.all(Z == z0[None, :])


def test_reconstruct_rigid_motion_free_string():
    t = string(8, 'gamma2', 'gamma2')
    mat = MaterialField.uniform(t, rho=2.0)
    s = assemble_impedance_system(t, mat)
    vbar = 0.3
    tr = run_with_snapshots(s, (np.full(8, 2.0 * vbar), np.zeros(9)))
    z0 = np.arange(8.0)
    times, Z = reconstruct_displacement(tr, z0, mat)
    assert np.allclose(Z, z0[None, :] + vbar * times[:, None], atol=1e-13)


def test_reconstruct_matches_strain():
    t = string(16)
    rng = np.random.default_rng(3)
    mat = MaterialField(rng.uniform(0.5, 2, 16), rng.uniform(0.5, 2, 17))
    s = assemble_impedance_system(t, mat)
    z0 = np.sin(np.pi * (np.arange(16) + 0.5) / 16)
    f0 = t.Grad @ z0
    tr = run_with_snapshots(s, (np.zeros(16), f0))
    _, Z = reconstruct_displacement(tr, z0, mat)
    F = Z @ t.Grad[s.active_faces].T
    assert np.max(np.abs(F - tr.snapshot_f)) <= 1e-12


def test_reconstruct_needs_snapshots():
    t = string(4)
    mat = MaterialField.uniform(t)
    s = assemble_impedance_system(t, mat)
    tr = simulate(s, SimulationConfig(0.1, 0.2))
    with pytest.raises(ValidationError):
        reconstruct_displacement(tr, np.zeros(4), mat)
