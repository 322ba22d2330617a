# Scattering form of a damped plate and the conservative/dissipative split.
#
# Inputs and outputs are the incoming and outgoing waves
# (u + y)/sqrt 2 and (u - y)/sqrt 2 of the impedance form.
import numpy as np

from wavetriplet import (DampingSpec, GaussianPulse, InitialState,
                         InputSignal, MaterialField, SampledInput,
                         SimulationConfig, assemble_impedance_system,
                         assemble_scattering_system, audit_energy_balance,
                         build_staggered_2d, simulate)

tp = build_staggered_2d(8, 8, 1.0, 1.0, {
    'gamma1': [{'edge': 'right', 'from': 0.0, 'to': 0.25}],
    'gamma2': ['top'],
    'gamma0': ['left', 'bottom', {'edge': 'right', 'from': 0.25, 'to': 1.0}],
})
pulse = InputSignal(((GaussianPulse(1.0, 0.5, 0.1),),), broadcast=True)
cfg = SimulationConfig(dt=0.01, t_end=3.0, input_signal=pulse,
                       initial_state=InitialState('random', seed=2))

for name, Qb in (('skew', [[0.0, 2.0], [-2.0, 0.0]]), ('identity', np.eye(2))):
    imp = assemble_impedance_system(tp, MaterialField.uniform(tp),
                                    DampingSpec(Qb=Qb))
    sc = assemble_scattering_system(imp)
    tr = simulate(sc, cfg)
    a = audit_energy_balance(tr, sc)
    supplied = tr.dt * sum(sc.supply_rate(u, y)
                           for u, y in zip(tr.u_mid, tr.y_mid))
    deficit = supplied - (tr.energy[-1] - tr.energy[0])
    print('%-8s deficit %.3e  dissipated %.3e' % (name, deficit, a.dissipated))

# %% the two forms produce the same trajectory
imp = assemble_impedance_system(tp, MaterialField.uniform(tp),
                                DampingSpec(Qb=np.eye(2)))
tr = simulate(imp, cfg)
incoming = (tr.u_mid + tr.y_mid) / np.sqrt(2)
tr_s = simulate(assemble_scattering_system(imp), SimulationConfig(
    dt=cfg.dt, t_end=cfg.t_end, input_signal=SampledInput(incoming),
    initial_state=cfg.initial_state))
print('outgoing wave mismatch',
      np.max(np.abs(tr_s.y_mid - (tr.u_mid - tr.y_mid) / np.sqrt(2))))
print('state mismatch', np.max(np.abs(tr_s.final_state - tr.final_state)))
