# Which boundary conditions W1 B1 + W2 B2 = 0 give a contraction semigroup?
#
# The verdict only looks at (W1, W2). The oracle assembles the restricted
# generator on a string and samples ||exp(A t)|| in the energy norm.
import numpy as np

from wavetriplet import (BoundaryConditionSpec, MaterialField,
                         build_staggered_1d, certify_against_oracle,
                         hamiltonian)

t = build_staggered_1d(16, 1.0, {'left': 'gamma0', 'right': 'gamma2'})
H = hamiltonian(t, MaterialField.uniform(t))

cases = {
    'zero stress':       ([[0.0]], [[1.0]]),
    'matched impedance': ([[1.0]], [[1.0]]),
    'stiff impedance':   ([[2.0]], [[1.0]]),
    'negative impedance': ([[-1.0]], [[1.0]]),
}
for name, (W1, W2) in cases.items():
    r = certify_against_oracle(BoundaryConditionSpec(W1, W2), t, H)
    v = r.verdict
    print('%-18s %-22s |V| = %-8s oracle max %.6f  agrees %s'
          % (name, v.classification.value,
             'n/a' if v.v_norm is None else '%.4f' % v.v_norm,
             r.max_norm, r.verdict_agrees))

# %% a two-dof boundary: every unitary V gives a group
t2 = build_staggered_1d(16, 1.0, {'left': 'gamma1', 'right': 'gamma2'})
rng = np.random.default_rng(4)
rho = rng.uniform(0.5, 2.0, t2.n_cells)
T = rng.uniform(0.5, 2.0, t2.n_faces)
H2 = hamiltonian(t2, MaterialField(rho, T))
theta = 0.7
V = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
spec = BoundaryConditionSpec.from_contraction(V, rng.standard_normal((2, 2)))
r = certify_against_oracle(spec, t2, H2)
print(r.verdict.classification.value, r.min_norm, r.max_norm)
