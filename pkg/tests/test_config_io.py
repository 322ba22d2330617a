import json

import numpy as np
import pytest

from wavetriplet.config import (config_from_dict, damping_matrix,
                                parse_config)
from wavetriplet.errors import (AccretivityError, MaterialError,
                                PartitionError, ValidationError)
from wavetriplet.io import (emit_report, format_float, read_matrix_csv,
                            read_trace_csv, to_json_text, write_matrix_csv,
                            write_trace_csv)
from wavetriplet.model import Representation
from wavetriplet.simulate import audit_energy_balance, simulate


def write(tmp_path, data, name='cfg.json'):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def test_minimal_config_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, {
        'geometry': {'dim': 1, 'cells': 16},
        'partition': {'left': 'gamma0', 'right': 'gamma0'}}))
    sim = cfg.raw['simulation']
    assert sim['dt'] == pytest.approx(1e-3 / 16)
    assert sim['t_end'] == 1.0 and sim['seed'] == 0
    assert cfg.representation is Representation.IMPEDANCE
    system, simcfg = cfg.build()
    assert system.state_dim == 16 + 17


def test_default_dt_uses_wave_speed(tmp_path):
    cfg = config_from_dict({'geometry': {'dim': 2, 'cells': [4, 8],
                                         'extents': [1.0, 1.0]},
                            'material': {'rho': 0.25, 'T': 4.0}})
    assert cfg.raw['simulation']['dt'] == pytest.approx(1e-3 * 0.125 / 4.0)


def test_partition_overlap_error():
    with pytest.raises(PartitionError):
        config_from_dict({'geometry': {'dim': 1, 'cells': 4},
                          'partition': {'gamma0': ['left', 'right'],
                                        'gamma2': ['left']}})


def test_material_below_delta():
    with pytest.raises(MaterialError):
        config_from_dict({'geometry': {'dim': 1, 'cells': 4},
                          'material': {'rho': 1e-3, 'delta': 1e-2}})


def test_non_accretive_qb_message():
    with pytest.raises(AccretivityError,
                       match='bounded and accretive operators'):
        config_from_dict({'geometry': {'dim': 1, 'cells': 4},
                          'partition': {'left': 'gamma0',
                                        'right': 'gamma1'},
                          'damping': {'Qb': {'kind': 'matrix',
                                             'value': [[-1.0]]}}})


def test_bad_dt_and_unknown_keys():
    with pytest.raises(ValidationError):
        config_from_dict({'simulation': {'dt': 0.0}})
    with pytest.raises(ValidationError):
        config_from_dict({'simulation': {'dt': -1.0}})
    with pytest.raises(ValidationError):
        config_from_dict({'geometri': {}})
    with pytest.raises(ValidationError):
        config_from_dict({'representation': 'hybrid'})


def test_damping_kinds(tmp_path):
    assert damping_matrix({'kind': 'zero'}, 3, 'Qb') is None
    assert np.array_equal(damping_matrix(2.0, 2, 'Qb'), 2 * np.eye(2))
    S = damping_matrix({'kind': 'skew', 'omega': 3.0}, 3, 'Qb')
    assert np.array_equal(S + S.T, np.zeros((3, 3))) and S[0, 1] == 3.0
    write_matrix_csv(np.array([[1.0, 0.5], [-0.5, 1.0]]),
                     str(tmp_path / 'q.csv'))
    Q = damping_matrix({'kind': 'file', 'path': 'q.csv'}, 2, 'Qb',
                       str(tmp_path))
    assert Q[0, 1] == 0.5
    with pytest.raises(ValidationError):
        damping_matrix({'kind': 'matrix', 'value': [[1.0]]}, 2, 'Qb')


def test_round_trip(tmp_path):
    data = {'geometry': {'dim': 2, 'cells': [4, 3], 'extents': [2.0, 1.0]},
            'partition': {'gamma1': [{'edge': 'right', 'from': 0.0,
                                      'to': 0.5}],
                          'gamma2': ['top'],
                          'gamma0': ['left', 'bottom',
                                     {'edge': 'right', 'from': 0.5,
                                      'to': 1.0}]},
            'damping': {'Qb': {'kind': 'skew', 'omega': 2.0}},
            'simulation': {'t_end': 0.1, 'dt': 0.01,
                           'input': {'kind': 'gaussian_pulse'}},
            'representation': 'scattering'}
    cfg = config_from_dict(data)
    path = tmp_path / 'again.json'
    emit_report(cfg.to_dict(), str(path))
    again = parse_config(str(path))
    assert again.to_dict() == cfg.to_dict()
    s1, c1 = cfg.build()
    s2, c2 = again.build()
    assert np.array_equal(s1.A, s2.A)
    assert c1.to_dict() == c2.to_dict()


def test_overrides():
    cfg = config_from_dict({'geometry': {'dim': 1, 'cells': 8}})
    other = cfg.with_overrides({'geometry.cells': 4,
                                'material.rho': 2.0})
    assert other.triplet().n_cells == 4
    assert other.material().rho[0] == 2.0
    # default dt is recomputed from the new grid
    assert other.raw['simulation']['dt'] == pytest.approx(1e-3 / 4 / 0.5 ** 0.5)


def test_json_text_is_stable():
    text = to_json_text({'b': 0.1, 'a': [1, 2.5e-300, True, None],
                         'c': {'z': np.float64(1 / 3), 'y': 'x'}})
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert '0.10000000000000001' in text
    assert '0.33333333333333331' in text
    back = json.loads(text)
    assert back['c']['z'] == 1 / 3
    assert to_json_text({}) == '{}\n'
    assert format_float(np.nan) == 'nan'


def test_emit_report_objects(tmp_path):
    p = tmp_path / 'r.json'
    emit_report({'runs': []}, str(p))
    assert json.loads(p.read_text()) == {'runs': []}
    with pytest.raises(OSError):
        emit_report({}, str(tmp_path / 'missing' / 'r.json'))


def test_matrix_csv(tmp_path):
    M = np.random.default_rng(0).standard_normal((3, 2))
    p = str(tmp_path / 'm.csv')
    write_matrix_csv(M, p)
    assert np.array_equal(read_matrix_csv(p), M)
    (tmp_path / 'bad.csv').write_text('1,2\n3\n')
    with pytest.raises(ValidationError):
        read_matrix_csv(str(tmp_path / 'bad.csv'))


DRIVEN = {'geometry': {'dim': 1, 'cells': 12},
          'partition': {'left': 'gamma2', 'right': 'gamma1'},
          'damping': {'Qb': 1.0, 'Qi': {'kind': 'scalar', 'value': 0.2}},
          'simulation': {'dt': 0.01, 't_end': 0.5,
                         'input': {'kind': 'sinusoid', 'frequency': 2.0},
                         'initial_state': {'kind': 'random'}}}


def test_trace_csv_round_trip_and_audit(tmp_path):
    cfg = config_from_dict(DRIVEN)
    system, sim = cfg.build()
    trace = simulate(system, sim)
    p = str(tmp_path / 't.csv')
    write_trace_csv(trace, p)
    header = open(p).readline().strip()
    assert header == 't,E,u_1,y_1,v_gamma1_1,qi_power'
    back = read_trace_csv(p, 'impedance', sim.dt)
    assert np.array_equal(back.energy, trace.energy)
    assert np.array_equal(back.y, trace.y)
    rep = audit_energy_balance(back, system)
    assert rep.passed
    assert rep.per_step_max_residual == \
        audit_energy_balance(trace, system).per_step_max_residual


def test_trace_csv_byte_identical(tmp_path):
    outs = []
    for i in range(2):
        system, sim = config_from_dict(DRIVEN).build()
        p = tmp_path / ('t%d.csv' % i)
        write_trace_csv(simulate(system, sim), str(p))
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_explicit_initial_state_from_displacement():
    data = dict(DRIVEN)
    z0 = np.sin(np.linspace(0, 3, 12)).tolist()
    data['simulation'] = {'dt': 0.01, 't_end': 0.1,
                          'initial_state': {'kind': 'explicit',
                                            'w0': [0.0] * 12, 'z0': z0}}
    system, sim = config_from_dict(data).build()
    trace = simulate(system, sim)
    assert trace.energy[0] > 0
