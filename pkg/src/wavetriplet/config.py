"""JSON model configuration.

A single file describes geometry, boundary partition, material, damping,
simulation settings and the representation::

    {
      "geometry": {"dim": 1, "extents": [1.0], "cells": [64]},
      "partition": {"left": "gamma0", "right": "gamma2"},
      "material": {"rho": 1.0, "T": 1.0, "delta": 1e-12},
      "damping": {"Qb": {"kind": "scalar", "value": 1.0}},
      "simulation": {"dt": 0.001, "t_end": 1.0,
                     "input": {"kind": "sinusoid", "amplitude": 1.0,
                               "frequency": 2.0},
                     "initial_state": {"kind": "random", "energy": 1.0}},
      "representation": "impedance"
    }

Damping matrices are given as ``zero``, ``scalar`` (times the identity),
``skew`` (2x2 rotation blocks with rate ``omega``), ``matrix`` (inline rows)
or ``file`` (dense CSV, relative paths resolved against the config file).
"""
from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .io import read_matrix_csv
from .model import (DampingSpec, MaterialField, Representation,
                    assemble_impedance_system, assemble_scattering_system)
from .simulate import (GaussianPulse, InitialState, InputSignal,
                       SampledInput, SimulationConfig, Sinusoid, ZeroSignal)
from .triplet import build_staggered_1d, build_staggered_2d

__all__ = ['ModelConfig', 'parse_config', 'config_from_dict',
           'damping_matrix', 'parse_input', 'set_dotted']

TOP_KEYS = {'geometry', 'partition', 'material', 'damping', 'simulation',
            'representation'}
SIM_KEYS = {'dt', 't_end', 'input', 'initial_state', 'snapshot_every',
            'linear_solver_tol', 'seed', 'compat_tol'}


def _as_list(v, n, name):
    if isinstance(v, (int, float)):
        return [v] * n
    v = list(v)
    if len(v) != n:
        raise ValidationError('geometry.%s needs %d entries, got %d'
                              % (name, n, len(v)))
    return v


def _geometry(raw):
    geo = dict(raw or {})
    dim = int(geo.get('dim', 1))
    if dim not in (1, 2):
        raise ValidationError('geometry.dim must be 1 or 2, got %r' % dim)
    cells = [int(c) for c in _as_list(geo.get('cells', 16), dim, 'cells')]
    extents = [float(e) for e in _as_list(geo.get('extents', 1.0), dim,
                                          'extents')]
    if any(c < 1 for c in cells):
        raise ValidationError('geometry.cells must be positive')
    if any(not e > 0 for e in extents):
        raise ValidationError('geometry.extents must be positive')
    return {'dim': dim, 'cells': cells, 'extents': extents}


def damping_matrix(spec, n, name, base_dir='.'):
    """Build an ``n x n`` damping matrix from its config description."""
    if spec is None:
        return None
    if isinstance(spec, (int, float)):
        spec = {'kind': 'scalar', 'value': spec}
    if isinstance(spec, list):
        spec = {'kind': 'matrix', 'value': spec}
    kind = spec.get('kind', 'zero')
    if kind == 'zero':
        return None
    if kind == 'scalar':
        return float(spec.get('value', 1.0)) * np.eye(n)
    if kind == 'skew':
        omega = float(spec.get('omega', 1.0))
        Q = np.zeros((n, n))
        for i in range(0, n - 1, 2):
            Q[i, i + 1] = omega
            Q[i + 1, i] = -omega
        return Q
    if kind == 'matrix':
        Q = np.array(spec['value'], dtype=float)
    elif kind == 'file':
        path = spec['path']
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        Q = read_matrix_csv(path)
    else:
        raise ValidationError('unknown %s kind %r' % (name, kind))
    if Q.ndim != 2 or Q.shape != (n, n):
        raise ValidationError('%s must be %dx%d, got shape %s'
                              % (name, n, n, Q.shape))
    return Q


_SIGNALS = {
    'sinusoid': lambda d: Sinusoid(float(d.get('amplitude', 1.0)),
                                   float(d.get('frequency', 1.0)),
                                   float(d.get('phase', 0.0))),
    'gaussian_pulse': lambda d: GaussianPulse(float(d.get('amplitude', 1.0)),
                                              float(d.get('center', 0.5)),
                                              float(d.get('width', 0.1))),
    'zero': lambda d: ZeroSignal(),
}


def _signal(d):
    kind = d.get('kind', 'zero')
    if kind not in _SIGNALS:
        raise ValidationError('unknown input kind %r' % kind)
    return _SIGNALS[kind](d)


def parse_input(raw):
    """Input description -> signal object.

    Accepts one term, a list of terms (summed, applied to every dof),
    ``{"channels": [[terms], ...]}`` or ``{"sampled": [[...], ...]}``.
    """
    if raw is None:
        return ZeroSignal()
    if isinstance(raw, dict) and 'channels' in raw:
        chans = tuple(tuple(_signal(t) for t in (c if isinstance(c, list)
                                                 else [c]))
                      for c in raw['channels'])
        return InputSignal(chans, broadcast=False)
    if isinstance(raw, dict) and 'sampled' in raw:
        return SampledInput(np.array(raw['sampled'], dtype=float))
    terms = raw if isinstance(raw, list) else [raw]
    return InputSignal((tuple(_signal(t) for t in terms),), broadcast=True)


def set_dotted(d, key, value):
    """Set ``d['a']['b'] = value`` for ``key = 'a.b'``, creating levels."""
    parts = key.split('.')
    cur = d
    for p in parts[:-1]:
        nxt = cur.get(p)
        if not isinstance(nxt, dict):
            nxt = {}
            cur[p] = nxt
        cur = nxt
    cur[parts[-1]] = value


@dataclass(frozen=True, eq=False)
class ModelConfig:
    """Validated configuration; ``raw`` holds the normalised dictionary."""
    raw: dict
    base_dir: str = '.'

    @property
    def representation(self):
        return Representation(self.raw['representation'])

    def triplet(self):
        geo = self.raw['geometry']
        if geo['dim'] == 1:
            return build_staggered_1d(geo['cells'][0], geo['extents'][0],
                                      self.raw['partition'])
        return build_staggered_2d(geo['cells'][0], geo['cells'][1],
                                  geo['extents'][0], geo['extents'][1],
                                  self.raw['partition'])

    def material(self, triplet=None):
        tp = triplet or self.triplet()
        mat = self.raw['material']
        return MaterialField.uniform(tp, mat['rho'], mat['T'], mat['delta'])

    def damping(self, triplet=None):
        tp = triplet or self.triplet()
        d = self.raw['damping']
        n1 = tp.dof_indices('gamma1').size
        return DampingSpec(
            damping_matrix(d.get('Qi'), tp.n_cells, 'Qi', self.base_dir),
            damping_matrix(d.get('Qb'), n1, 'Qb', self.base_dir))

    def system(self):
        tp = self.triplet()
        sys_ = assemble_impedance_system(tp, self.material(tp),
                                         self.damping(tp))
        if self.representation is Representation.SCATTERING:
            sys_ = assemble_scattering_system(sys_)
        return sys_

    def simulation(self, system=None):
        sim = self.raw['simulation']
        init = dict(sim.get('initial_state') or {'kind': 'zero'})
        kind = init.get('kind', 'zero')
        if kind == 'explicit':
            tp = system.triplet if system is not None else self.triplet()
            g0, f0 = init.get('g0'), init.get('f0')
            if g0 is None and 'w0' in init:
                rho = self.material(tp).rho
                g0 = rho * np.asarray(init['w0'], dtype=float)
            if f0 is None and 'z0' in init:
                f0 = tp.Grad @ np.asarray(init['z0'], dtype=float)
            state = InitialState('explicit', g0=np.asarray(g0, dtype=float),
                                 f0=np.asarray(f0, dtype=float))
        else:
            state = InitialState(kind, init.get('seed'),
                                 float(init.get('energy', 1.0)))
        return SimulationConfig(
            dt=sim['dt'], t_end=sim['t_end'],
            input_signal=parse_input(sim.get('input')),
            initial_state=state,
            snapshot_every=int(sim.get('snapshot_every', 0)),
            linear_solver_tol=float(sim.get('linear_solver_tol', 1e-12)),
            seed=int(sim.get('seed', 0)),
            compat_tol=float(sim.get('compat_tol', 1e-8)))

    def build(self):
        system = self.system()
        return system, self.simulation(system)

    def with_overrides(self, overrides):
        raw = copy.deepcopy(self.raw)
        explicit_dt = 'simulation.dt' in overrides
        for key, value in overrides.items():
            set_dotted(raw, key, value)
        if not explicit_dt and self.raw.get('_dt_default'):
            raw['simulation'].pop('dt', None)
        return config_from_dict(raw, self.base_dir)

    def to_dict(self):
        return {k: copy.deepcopy(v) for k, v in self.raw.items()
                if not k.startswith('_')}


def config_from_dict(data, base_dir='.'):
    """Validate a config mapping, apply defaults and return a ModelConfig."""
    if not isinstance(data, dict):
        raise ValidationError('config must be a JSON object')
    unknown = set(data) - TOP_KEYS - {'_dt_default'}
    if unknown:
        raise ValidationError('unknown config keys: %s'
                              % ', '.join(sorted(unknown)))
    raw = {'geometry': _geometry(data.get('geometry'))}
    dim = raw['geometry']['dim']
    default_part = ({'left': 'gamma0', 'right': 'gamma0'} if dim == 1 else
                    {e: 'gamma0' for e in ('left', 'right', 'bottom', 'top')})
    raw['partition'] = copy.deepcopy(data.get('partition') or default_part)
    mat = dict(data.get('material') or {})
    raw['material'] = {'rho': mat.get('rho', 1.0), 'T': mat.get('T', 1.0),
                       'delta': float(mat.get('delta', 1e-12))}
    raw['damping'] = copy.deepcopy(data.get('damping') or {})
    bad = set(raw['damping']) - {'Qi', 'Qb'}
    if bad:
        raise ValidationError('unknown damping keys: %s'
                              % ', '.join(sorted(bad)))
    rep = data.get('representation', 'impedance')
    try:
        raw['representation'] = Representation(rep).value
    except ValueError:
        raise ValidationError('representation must be impedance or '
                              'scattering, got %r' % rep)
    sim = copy.deepcopy(data.get('simulation') or {})
    bad = set(sim) - SIM_KEYS
    if bad:
        raise ValidationError('unknown simulation keys: %s'
                              % ', '.join(sorted(bad)))
    sim.setdefault('t_end', 1.0)
    sim.setdefault('seed', 0)
    sim.setdefault('snapshot_every', 0)
    sim.setdefault('linear_solver_tol', 1e-12)
    sim.setdefault('compat_tol', 1e-8)
    sim.setdefault('input', {'kind': 'zero'})
    sim.setdefault('initial_state', {'kind': 'zero'})
    raw['simulation'] = sim

    cfg = ModelConfig(raw, base_dir)
    # build everything once so that every invariant is checked up front
    tp = cfg.triplet()
    material = cfg.material(tp)
    damping = cfg.damping(tp).validated(tp.n_cells,
                                        tp.dof_indices('gamma1').size)
    if 'dt' not in sim:
        hmin = min(tp.geometry.h)
        sim['dt'] = 1e-3 * hmin / material.wave_speed()
        raw['_dt_default'] = True
    dt = sim['dt']
    if not isinstance(dt, (int, float)) or not dt > 0:
        raise ValidationError('simulation.dt must be positive, got %r' % dt)
    cfg.simulation()
    del damping
    return cfg


def parse_config(path):
    """Read and validate a JSON config file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError('%s is not valid JSON: %s' % (path, exc))
    return config_from_dict(data, os.path.dirname(os.path.abspath(path)))
