# Staggered grids and the discrete Green identity.
#
# Cells carry the scalar unknown, faces carry the vector unknown. The
# boundary faces are split into three parts: gamma0 (Dirichlet rows of
# Grad), gamma1 and gamma2 (trace dofs).
import numpy as np

from wavetriplet import build_staggered_1d, build_staggered_2d
from wavetriplet.triplet import (duality_defect, green_residual,
                                 verify_green_identity)

# %% a short string, gamma1 on the left and gamma2 on the right
t = build_staggered_1d(4, 1.0, {'left': 'gamma1', 'right': 'gamma2'})
print(t.partition_summary())
print('Div =\n', t.Div)
print('Grad =\n', t.Grad)

# %% one random pair by hand
rng = np.random.default_rng(0)
f = rng.standard_normal(t.n_faces)
g = rng.standard_normal(t.n_cells)
print('residual for one pair:', green_residual(t, f, g))

# %% a plate with a segmented edge
plate = build_staggered_2d(32, 32, 1.0, 1.0, {
    'gamma1': [{'edge': 'right', 'from': 0.0, 'to': 0.25}],
    'gamma2': ['top'],
    'gamma0': ['left', 'bottom', {'edge': 'right', 'from': 0.25, 'to': 1.0}],
})
print(plate.partition_summary())
print('worst normalized residual over 100 pairs:',
      verify_green_identity(plate, trials=100))

# the duality defect vanishes exactly away from the traced faces
print('duality defect:', duality_defect(plate))
