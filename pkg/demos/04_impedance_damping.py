# A driven string with a damper at the far end.
#
# The audit checks every step of
#   E_{n+1} - E_n = dt * (supply - dissipation)
# where both sides use the midpoint signals.
import numpy as np

from wavetriplet import (DampingSpec, InitialState, InputSignal,
                         MaterialField, SimulationConfig, Sinusoid,
                         assemble_impedance_system, audit_energy_balance,
                         build_staggered_1d, simulate)

tp = build_staggered_1d(32, 1.0, {'left': 'gamma2', 'right': 'gamma1'})
drive = InputSignal(((Sinusoid(1.0, 2.0),),), broadcast=True)
cfg = SimulationConfig(dt=0.005, t_end=3.0, input_signal=drive,
                       initial_state=InitialState('random', seed=1))

for q in (0.0, 0.5, 1.0, 4.0):
    s = assemble_impedance_system(tp, MaterialField.uniform(tp),
                                  DampingSpec(Qb=[[q]]))
    tr = simulate(s, cfg)
    a = audit_energy_balance(tr, s)
    print('Qb = %.1f  E_end %.4f  supplied %+.4f  dissipated %.4f  '
          'worst step %.1e  passed %s'
          % (q, tr.energy[-1], a.supplied, a.dissipated,
             a.per_step_max_residual / a.scale, a.passed))

# %% a damper with a negative coefficient is rejected up front
try:
    DampingSpec(Qb=[[-1.0]]).validated(tp.n_cells, 1)
except Exception as exc:
    print(type(exc).__name__ + ':', exc)
