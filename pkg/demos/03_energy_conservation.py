# Closed string and closed plate: the midpoint rule keeps the energy.
import time

import numpy as np

from wavetriplet import (InitialState, MaterialField, SimulationConfig,
                         assemble_impedance_system, build_staggered_1d,
                         build_staggered_2d, simulate)
from wavetriplet.simulate import MidpointStepper

for tp in (build_staggered_1d(64), build_staggered_2d(16, 16)):
    s = assemble_impedance_system(tp, MaterialField.uniform(tp))
    cfg = SimulationConfig(dt=0.01, t_end=10.0,
                           initial_state=InitialState('random', seed=3))
    t0 = time.perf_counter()
    tr = simulate(s, cfg)
    E = tr.energy
    print('dim %d, %d steps in %.2f s' % (tp.geometry.dim, tr.n_steps,
                                          time.perf_counter() - t0))
    print('  max |E_n - E_0| / E_0 =', np.max(np.abs(E - E[0])) / E[0])

    # run backwards with -dt
    back = MidpointStepper(s, -cfg.dt)
    x = tr.final_state
    for _ in range(tr.n_steps):
        x = back.step(x)
    print('  reversal error =',
          np.linalg.norm(x - tr.initial_state) / np.linalg.norm(tr.initial_state))
