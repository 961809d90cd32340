"""Tripod high-speed quantum memory as a beam splitter with arbitrary ratios."""

from ._backend import BACKENDS, default_backend
from .kernel import (
    KernelMatrix,
    build_mapping_kernel,
    build_readout_kernel,
    compose_full_cycle,
    full_cycle_kernel,
    verify_composition,
)
from .model import (
    DriveSetting,
    FieldEnvelope,
    Grid,
    MemoryConfig,
    PhysicalParams,
    SpinWaveState,
    rabi_to_theta,
    theta_to_rabi,
    validate_config,
)
from .solver import (
    StageResult,
    excitation_balance,
    mix_spin_waves,
    run_mapping_stage,
    run_readout_stage,
)
from .spectral import ModeBasis, decompose, project, reconstruct, sweep, synthesize
from .splitter import SplitterMatrix, compare, empirical_matrix, ideal_matrix, run_protocol

__all__ = [
    "BACKENDS", "default_backend",
    "KernelMatrix", "build_mapping_kernel", "build_readout_kernel",
    "compose_full_cycle", "full_cycle_kernel", "verify_composition",
    "DriveSetting", "FieldEnvelope", "Grid", "MemoryConfig", "PhysicalParams",
    "SpinWaveState", "rabi_to_theta", "theta_to_rabi", "validate_config",
    "StageResult", "excitation_balance", "mix_spin_waves", "run_mapping_stage",
    "run_readout_stage",
    "ModeBasis", "decompose", "project", "reconstruct", "sweep", "synthesize",
    "SplitterMatrix", "compare", "empirical_matrix", "ideal_matrix", "run_protocol",
]
