"""Boundary triplets, generation criteria and damped wave systems.

The package builds staggered-grid discretisations of ``div``/``grad`` with
boundary traces, decides which boundary conditions generate contraction
semigroups, and simulates boundary-controlled wave equations with an
energy-exact integrator.
"""
from .errors import *  # noqa: F401,F403
from .numerics import (contraction_certificate, is_psd, matrix_exponential,
                       operator_norm, weighted_operator_norm)
from .relations import (BoundaryRelation, contraction_to_relation,
                        flip_orthogonal_complement, is_dissipative,
                        is_maximal_dissipative, is_skew_symmetric_relation,
                        kernel_relation, relation_to_contraction,
                        relations_equal)
from .triplet import (DiscreteTriplet, build_staggered_1d,
                      build_staggered_2d, duality_defect, gamma0_trace,
                      restrict_generator, verify_green_identity)
from .certify import (BoundaryConditionSpec, Generation, GenerationVerdict,
                      build_contraction_V, certify_against_oracle,
                      check_range_condition, classify_generator,
                      symmetrized_product)
from .model import (DampingSpec, HamiltonianOperator, MaterialField,
                    Representation, WaveBoundarySystem,
                    assemble_impedance_system, assemble_scattering_system,
                    external_cayley_signals, hamiltonian,
                    reconstruct_displacement)
from .simulate import (GaussianPulse, InitialState, InputSignal,
                       SampledInput, SimulationConfig, SimulationTrace,
                       Sinusoid, audit_energy_balance, simulate,
                       step_midpoint, sweep)
from .config import ModelConfig, config_from_dict, parse_config
from .io import emit_report, read_trace_csv, write_trace_csv

__version__ = '0.1.0'
