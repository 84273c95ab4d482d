"""
Kerr Fock Generation - Algorithms Package
Adiabatic generation of photon-number states in a driven Kerr cavity:
model, spectra, penalty functional, path optimization, schedules and dynamics.
"""

from .exceptions import (
    ConvergenceError,
    DegeneratePointError,
    DimensionMismatchError,
    FockSchemeError,
    InfeasiblePathError,
    InvalidDimensionError,
    NonHermitianError,
)
from .fock_core import (
    DensityMatrix,
    Operator,
    StateVector,
    annihilation,
    coherent_state,
    default_dimension,
    displaced_fock,
    displacement,
    expectation,
    fock_state,
)
from .model import (
    DriveKind,
    DrivePoint,
    KpoPoint,
    crossing_detuning,
    final_detuning,
    kerr_hamiltonian,
    kpo_hamiltonian,
)
from .spectral import CouplingRow, EigenSystem, coupling_row, eigensystem, energy_levels
from .penalty import PenaltyProfile, QuadratureRule, axis_penalty, path_penalty, penalty_density
from .variational import (
    AnsatzResult,
    RegionCGeometry,
    coherent_alpha,
    displaced_alpha,
    optimal_offset,
    q_beta_analytic,
    region_b_beta,
)
from .path_optimizer import (
    OptimizationResult,
    ParamPath,
    PathOptimizer,
    RegionLabels,
    SearchOptions,
    TargetSpec,
    optimize,
    seed_path,
    segment_regions,
)
from .schedule import TimedSchedule, build_schedule, controls_at
from .dynamics import (
    LossModel,
    RabiScan,
    SimResult,
    WignerGrid,
    evolve_closed,
    evolve_lindblad,
    fidelity,
    rabi_tuned_fidelity,
    wigner_grid,
)

__version__ = "1.0.0"

__all__ = [
    'FockSchemeError', 'InvalidDimensionError', 'DimensionMismatchError', 'NonHermitianError',
    'DegeneratePointError', 'InfeasiblePathError', 'ConvergenceError',
    'Operator', 'StateVector', 'DensityMatrix', 'annihilation', 'displacement', 'fock_state',
    'displaced_fock', 'coherent_state', 'expectation', 'default_dimension',
    'DriveKind', 'DrivePoint', 'KpoPoint', 'kerr_hamiltonian', 'kpo_hamiltonian',
    'crossing_detuning', 'final_detuning',
    'EigenSystem', 'CouplingRow', 'eigensystem', 'coupling_row', 'energy_levels',
    'PenaltyProfile', 'QuadratureRule', 'penalty_density', 'axis_penalty', 'path_penalty',
    'AnsatzResult', 'RegionCGeometry', 'coherent_alpha', 'displaced_alpha', 'region_b_beta',
    'q_beta_analytic', 'optimal_offset',
    'ParamPath', 'TargetSpec', 'SearchOptions', 'RegionLabels', 'OptimizationResult',
    'PathOptimizer', 'seed_path', 'optimize', 'segment_regions',
    'TimedSchedule', 'build_schedule', 'controls_at',
    'LossModel', 'SimResult', 'WignerGrid', 'RabiScan', 'evolve_closed', 'evolve_lindblad',
    'fidelity', 'wigner_grid', 'rabi_tuned_fidelity',
]
