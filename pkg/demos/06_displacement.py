# Recovering the displacement from the momentum.
#
# The simulated state holds momentum and strain. Integrating g / rho in
# time gives the displacement z, and Grad z should track the strain.
import numpy as np
import scipy.linalg

from wavetriplet import (InitialState, MaterialField, SimulationConfig,
                         assemble_impedance_system, build_staggered_1d,
                         matrix_exponential, reconstruct_displacement,
                         simulate)

tp = build_staggered_1d(32)
mat = MaterialField.uniform(tp)
s = assemble_impedance_system(tp, mat)

# lowest discrete standing wave
K = -(tp.Div * mat.Tcoef) @ tp.Grad
lam, modes = scipy.linalg.eigh(tp.m_cell[:, None] * K,
                               np.diag(tp.m_cell * mat.rho))
z0 = modes[:, 0] / np.max(np.abs(modes[:, 0]))
print('angular frequency %.6f (continuum pi = %.6f)' % (np.sqrt(lam[0]), np.pi))

f0 = tp.Grad @ z0
g0 = np.zeros(tp.n_cells)
T = 0.5
exact = matrix_exponential(s.A, T) @ s.state_from_fields(g0, f0)

prev = None
for dt in (0.02, 0.01, 0.005):
    cfg = SimulationConfig(dt=dt, t_end=T, snapshot_every=1,
                           initial_state=InitialState('explicit', g0=g0, f0=f0))
    _, Z = reconstruct_displacement(simulate(s, cfg), z0, mat)
    err = np.linalg.norm(tp.Grad[s.active_faces] @ Z[-1] - exact[tp.n_cells:])
    print('dt %.3f  error %.3e%s' % (dt, err, '' if prev is None
                                      else '  ratio %.3f' % (prev / err)))
    prev = err
