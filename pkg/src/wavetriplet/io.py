"""Bit-stable JSON reports and dense CSV files.

Floats are always written with 17 significant digits, so a value read back
is the same double and reruns produce byte-identical files.
"""
from __future__ import annotations

import enum
import json
import math
import os
from types import SimpleNamespace

import numpy as np

from .errors import ValidationError

__all__ = ['format_float', 'to_json_text', 'emit_report', 'write_matrix_csv',
           'read_matrix_csv', 'trace_header', 'write_trace_csv',
           'read_trace_csv', 'write_snapshots_csv']


def format_float(x):
    x = float(x)
    if not math.isfinite(x):
        return 'nan' if math.isnan(x) else ('inf' if x > 0 else '-inf')
    return format(x, '.17g')


def _json(obj, indent, level):
    pad = ' ' * (indent * (level + 1))
    end = ' ' * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, enum.Enum):
        return json.dumps(obj.value)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj) if math.isfinite(obj) else 'null'
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if hasattr(obj, 'as_dict'):
        obj = obj.as_dict()
    if isinstance(obj, dict):
        if not obj:
            return '{}'
        items = ['%s%s: %s' % (pad, json.dumps(str(k)),
                               _json(obj[k], indent, level + 1))
                 for k in sorted(obj, key=str)]
        return '{\n' + ',\n'.join(items) + '\n' + end + '}'
    if isinstance(obj, (list, tuple)):
        if not obj:
            return '[]'
        items = [pad + _json(v, indent, level + 1) for v in obj]
        return '[\n' + ',\n'.join(items) + '\n' + end + ']'
    raise TypeError('cannot serialise %r' % type(obj).__name__)


def to_json_text(obj, indent=2):
    """Deterministic JSON text with sorted keys and 17-digit floats."""
    return _json(obj, indent, 0) + '\n'


def emit_report(result, path):
    """Write ``result`` (mapping or object with ``as_dict``) as JSON."""
    text = to_json_text(result)
    with open(path, 'w') as fh:
        fh.write(text)
    return path


def write_matrix_csv(M, path):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, 'w') as fh:
        for row in M:
            fh.write(','.join(format_float(v) for v in row) + '\n')
    return path


def read_matrix_csv(path):
    """Dense CSV, one row per line, no header."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith('#'):
                try:
                    rows.append([float(v) for v in line.split(',')])
                except ValueError:
                    raise ValidationError('%s: non-numeric entry in %r'
                                          % (path, line))
    if not rows:
        raise ValidationError('%s contains no matrix rows' % path)
    if len({len(r) for r in rows}) != 1:
        raise ValidationError('%s has rows of unequal length' % path)
    return np.array(rows)


def trace_header(k, k1, with_qi=True):
    cols = ['t', 'E']
    cols += ['u_%d' % (i + 1) for i in range(k)]
    cols += ['y_%d' % (i + 1) for i in range(k)]
    cols += ['v_gamma1_%d' % (i + 1) for i in range(k1)]
    if with_qi:
        cols.append('qi_power')
    return cols


def write_trace_csv(trace, path):
    """``t,E,u_*,y_*,v_gamma1_*,qi_power``; one row per step point.

    Signal columns of row ``n >= 1`` are midpoint samples of the step ending
    at ``t_n``.
    """
    k = trace.u.shape[1]
    k1 = trace.v_gamma1.shape[1]
    cols = trace_header(k, k1)
    data = np.column_stack([trace.times, trace.energy, trace.u, trace.y,
                            trace.v_gamma1, trace.qi_power])
    with open(path, 'w') as fh:
        fh.write(','.join(cols) + '\n')
        for row in data:
            fh.write(','.join(format_float(v) for v in row) + '\n')
    return path


def read_trace_csv(path, representation='impedance', dt=None):
    """Read a trace CSV back into an object usable by the auditor."""
    with open(path) as fh:
        header = fh.readline().strip().split(',')
    if header[:2] != ['t', 'E']:
        raise ValidationError('%s is not a trace CSV (header %r)'
                              % (path, header[:2]))
    data = np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)
    if data.shape[1] != len(header):
        raise ValidationError('%s: header and data widths differ' % path)
    idx = {name: i for i, name in enumerate(header)}

    def block(prefix):
        cols = [i for name, i in idx.items() if name.startswith(prefix)]
        return data[:, cols] if cols else np.zeros((data.shape[0], 0))

    times = data[:, 0]
    if dt is None:
        dt = float(times[1] - times[0]) if len(times) > 1 else 0.0
    qi = data[:, idx['qi_power']] if 'qi_power' in idx \
        else np.zeros(data.shape[0])
    from .model import Representation
    rep = Representation(representation)
    return SimpleNamespace(
        times=times, energy=data[:, 1], u=block('u_'), y=block('y_'),
        v_gamma1=block('v_gamma1_'), qi_power=qi, header=header,
        representation=rep, dt=float(dt),
        u_mid=block('u_')[1:], y_mid=block('y_')[1:],
        v1_mid=block('v_gamma1_')[1:])


def write_snapshots_csv(trace, directory, prefix='snapshot'):
    """One CSV per state block: ``step,t,values...``."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for name, arr in (('g', trace.snapshot_g), ('f', trace.snapshot_f)):
        path = os.path.join(directory, '%s_%s.csv' % (prefix, name))
        steps = np.asarray(trace.snapshot_steps)
        with open(path, 'w') as fh:
            n = arr.shape[1] if arr.ndim == 2 else 0
            fh.write(','.join(['step', 't'] + ['%s_%d' % (name, i + 1)
                                               for i in range(n)]) + '\n')
            for s, row in zip(steps, arr):
                vals = [str(int(s)), format_float(trace.times[s])]
                vals += [format_float(v) for v in row]
                fh.write(','.join(vals) + '\n')
        paths.append(path)
    return paths
