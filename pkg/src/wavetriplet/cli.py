"""Command-line entry point: ``python -m wavetriplet <command> ...``.

Exit status is 0 on success, 1 for invalid input and 2 for numerical
failures.
"""
from __future__ import annotations

import argparse
import itertools
import json
import os
import sys

import numpy as np

from .certify import BoundaryConditionSpec, certify_against_oracle, \
    classify_generator
from .config import parse_config
from .errors import NumericalError, ValidationError
from .io import (emit_report, read_matrix_csv, read_trace_csv, to_json_text,
                 write_matrix_csv, write_snapshots_csv, write_trace_csv)
from .model import external_cayley_signals, hamiltonian
from .simulate import audit_energy_balance, simulate, sweep

__all__ = ['main', 'build_parser']


def _emit(result, out):
    if out:
        emit_report(result, out)
    else:
        sys.stdout.write(to_json_text(result))


def cmd_certify(args):
    spec = BoundaryConditionSpec(read_matrix_csv(args.w1),
                                 read_matrix_csv(args.w2))
    verdict = classify_generator(spec)
    report = {'classification': verdict.classification.value,
              'sum_injective': verdict.sum_injective,
              'symmetrized_psd': verdict.symmetrized_psd,
              'symmetrized_zero': verdict.symmetrized_zero,
              'kernel_skew': verdict.kernel_skew,
              'kernel_dissipative': verdict.kernel_dissipative,
              'range_condition': verdict.range_condition,
              'v_norm': verdict.v_norm,
              'diagnostics': verdict.diagnostics}
    if args.oracle:
        cfg = parse_config(args.oracle)
        tp = cfg.triplet()
        H = hamiltonian(tp, cfg.material(tp))
        oracle = certify_against_oracle(spec, tp, H)
        report.update(oracle_max_norm=oracle.max_norm,
                      oracle_min_norm=oracle.min_norm,
                      verdict_agrees=oracle.verdict_agrees)
    _emit(report, args.out)
    return 0


def cmd_build(args):
    cfg = parse_config(args.config)
    system = cfg.system()
    manifest = system.manifest()
    if args.emit_matrices:
        d = args.emit_matrices
        os.makedirs(d, exist_ok=True)
        tp = system.triplet
        mats = {'A': system.A, 'B': system.B, 'C': system.C, 'D': system.D,
                'C1': system.C1, 'J': system.J, 'energy_weight': system.weight,
                'Div': tp.Div, 'Grad': tp.Grad, 'T0': tp.T0,
                'Tperp': tp.Tperp, 'M_cell': tp.m_cell, 'M_face': tp.m_face,
                'M_bdry': tp.m_bdry}
        for name, M in mats.items():
            M = np.asarray(M)
            if M.size:
                write_matrix_csv(M if M.ndim == 2 else M[None, :],
                                 os.path.join(d, name + '.csv'))
        emit_report(manifest, os.path.join(d, 'manifest.json'))
    _emit(manifest, None if args.emit_matrices else args.out)
    return 0


def cmd_simulate(args):
    cfg = parse_config(args.config)
    system, sim = cfg.build()
    trace = simulate(system, sim)
    write_trace_csv(trace, args.out)
    if sim.snapshot_every:
        stem = os.path.splitext(args.out)[0]
        write_snapshots_csv(trace, os.path.dirname(os.path.abspath(args.out)),
                            os.path.basename(stem))
    if args.audit:
        emit_report(audit_energy_balance(trace, system), args.audit)
    return 0


def cmd_cayley(args):
    """Rewrite the u/y columns of a trace through the external Cayley map."""
    with open(args.trace) as fh:
        lines = fh.read().splitlines()
    header = lines[0].split(',')
    tr = read_trace_csv(args.trace)
    us, ys = external_cayley_signals(tr.u, tr.y)
    data = np.loadtxt(args.trace, delimiter=',', skiprows=1, ndmin=2)
    ucols = [i for i, h in enumerate(header) if h.startswith('u_')]
    ycols = [i for i, h in enumerate(header) if h.startswith('y_')]
    data[:, ucols] = us
    data[:, ycols] = ys
    from .io import format_float
    with open(args.out, 'w') as fh:
        fh.write(lines[0] + '\n')
        for row in data:
            fh.write(','.join(format_float(v) for v in row) + '\n')
    return 0


def cmd_audit(args):
    cfg = parse_config(args.config)
    system, sim = cfg.build()
    trace = read_trace_csv(args.trace, system.representation.value, sim.dt)
    report = audit_energy_balance(trace, system)
    _emit(report, args.out)
    return 0 if report.passed else 2


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_vary(items):
    """``['a.b=1,2', 'c=x']`` -> list of override dicts (cartesian product)."""
    axes = []
    for item in items or []:
        if '=' not in item:
            raise ValidationError('--vary expects KEY=V1,V2,..., got %r'
                                  % item)
        key, values = item.split('=', 1)
        axes.append([(key.strip(), _parse_value(v))
                     for v in values.split(',') if v != ''])
    if not axes:
        return []
    return [dict(combo) for combo in itertools.product(*axes)]


def cmd_sweep(args):
    cfg = parse_config(args.config)
    variations = parse_vary(args.vary)
    results = sweep(cfg, variations, max_workers=args.workers)
    os.makedirs(args.out, exist_ok=True)
    runs = []
    for i, res in enumerate(results):
        entry = res.as_dict()
        entry['index'] = i
        if res.trace is not None:
            name = 'run_%03d.csv' % i
            write_trace_csv(res.trace, os.path.join(args.out, name))
            entry['trace'] = name
        runs.append(entry)
    emit_report({'base_config': cfg.to_dict(), 'runs': runs,
                 'n_failed': sum(1 for r in results if not r.ok)},
                os.path.join(args.out, 'sweep.json'))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog='wavetriplet',
                                description='Boundary-controlled wave '
                                            'systems on staggered grids.')
    sub = p.add_subparsers(dest='command', required=True)

    c = sub.add_parser('certify', help='classify a boundary condition')
    c.add_argument('--w1', required=True)
    c.add_argument('--w2', required=True)
    c.add_argument('--oracle', help='config whose grid hosts the oracle')
    c.add_argument('--out')
    c.set_defaults(func=cmd_certify)

    b = sub.add_parser('build', help='assemble a system and print manifest')
    b.add_argument('--config', required=True)
    b.add_argument('--emit-matrices', dest='emit_matrices')
    b.add_argument('--out')
    b.set_defaults(func=cmd_build)

    s = sub.add_parser('simulate', help='run a simulation to a trace CSV')
    s.add_argument('--config', required=True)
    s.add_argument('--out', required=True)
    s.add_argument('--audit', help='also write the audit report here')
    s.set_defaults(func=cmd_simulate)

    y = sub.add_parser('cayley', help='transform trace signals')
    y.add_argument('--trace', required=True)
    y.add_argument('--out', required=True)
    y.set_defaults(func=cmd_cayley)

    a = sub.add_parser('audit', help='energy-balance audit of a trace')
    a.add_argument('--trace', required=True)
    a.add_argument('--config', required=True)
    a.add_argument('--out')
    a.set_defaults(func=cmd_audit)

    w = sub.add_parser('sweep', help='parameter sweep')
    w.add_argument('--config', required=True)
    w.add_argument('--vary', action='append', default=[])
    w.add_argument('--out', required=True)
    w.add_argument('--workers', type=int, default=None)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        sys.stderr.write('error: %s\n' % exc)
        return 1
    except NumericalError as exc:
        sys.stderr.write('numerical failure: %s\n' % exc)
        return 2
    except (OSError, KeyError, TypeError, ValueError) as exc:
        sys.stderr.write('error: %s\n' % exc)
        return 1


if __name__ == '__main__':
    sys.exit(main())
