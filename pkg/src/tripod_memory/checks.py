"""Invariant suite behind ``tripod-memory validate``."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernel, solver, spectral, splitter
from .model import FieldEnvelope, Grid, MemoryConfig

REFINEMENT_TOL = 1e-3
ORTHONORMAL_TOL = 1e-6
COMPLETENESS_TOL = 1e-9
COMPOSITION_TOL = 1e-10
FIDELITY_TOL = 1e-2


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    limit: float
    detail: str = ""


def gaussian_envelope(grid: Grid, center: float | None = None, width: float | None = None) -> FieldEnvelope:
    center = grid.duration / 2 if center is None else center
    width = grid.duration / 10 if width is None else width
    return FieldEnvelope.from_function(grid, lambda t: np.exp(-((t - center) ** 2) / (2 * width**2)))


def smooth_random_envelope(grid: Grid, rng: np.random.Generator, bumps: int = 3) -> FieldEnvelope:
    """Sum of a few complex Gaussians with random centres and widths."""
    t = grid.times
    T = grid.duration
    samples = np.zeros(grid.n_t, dtype=complex)
    for _ in range(bumps):
        amp = rng.normal() + 1j * rng.normal()
        center = rng.uniform(0.2 * T, 0.8 * T)
        width = rng.uniform(0.05 * T, 0.2 * T)
        samples += amp * np.exp(-((t - center) ** 2) / (2 * width**2))
    return FieldEnvelope(samples, grid)


def _comparison_grid(grid: Grid) -> Grid:
    half_t, half_z = grid.n_t // 2, grid.n_z // 2
    if grid.n_t % 2 == 0 and half_t % grid.stages == 0 and half_z >= 2 and grid.n_z % 2 == 0:
        return Grid(grid.duration, grid.length, half_t, half_z, grid.stages)
    return grid.refined(2)


def run_checks(cfg: MemoryConfig, mode: int = 1, direction: str = "backward",
               seed: int = 20240917, backend: str | None = None) -> list[CheckResult]:
    params, grid, drive = cfg.params, cfg.grid, cfg.drive
    results: list[CheckResult] = []

    pulse = gaussian_envelope(grid)
    stage = solver.run_mapping_stage(params, grid, drive.omega_w1, pulse, check=False, backend=backend)
    residual = solver.excitation_balance(pulse, stage)
    results.append(CheckResult("conservation", residual < solver.BALANCE_TOL, residual, solver.BALANCE_TOL,
                               "write-stage excitation balance, Gaussian input"))

    cycle = kernel.full_cycle_kernel(params, grid, drive.omega_w1, direction=direction, backend=backend)
    other = _comparison_grid(grid)
    try:
        basis = spectral.decompose(cycle)
    except spectral.AsymmetricKernel as exc:
        results.append(CheckResult("symmetry", False, cycle.symmetry_defect(), spectral.SYMMETRY_TOL, str(exc)))
        return results
    results.append(CheckResult("symmetry", True, cycle.symmetry_defect(), spectral.SYMMETRY_TOL,
                               "weighted cycle operator"))

    coarse = spectral.decompose(kernel.full_cycle_kernel(params, other, drive.omega_w1,
                                                         direction=direction, backend=backend))
    here = basis.eigenvalues[:3]
    there = coarse.eigenvalues[:3]
    k = min(len(here), len(there))
    gap = float(np.max(np.abs(here[:k] - there[:k]))) if k else 0.0
    results.append(CheckResult("refinement", gap < REFINEMENT_TOL, gap, REFINEMENT_TOL,
                               f"top eigenvalues vs n_t={other.n_t}, n_z={other.n_z}"))

    sv_max = float(cycle.singular_values().max(initial=0.0))
    results.append(CheckResult("passivity", sv_max <= 1 + kernel.PASSIVITY_TOL, sv_max,
                               1 + kernel.PASSIVITY_TOL, "largest singular value"))

    gram = basis.gram_defect()
    results.append(CheckResult("orthonormality", gram < ORTHONORMAL_TOL, gram, ORTHONORMAL_TOL,
                               "weighted Gram matrix vs identity"))
    _, rest = spectral.reconstruct(basis, len(basis))
    results.append(CheckResult("completeness", rest < COMPLETENESS_TOL, rest, COMPLETENESS_TOL,
                               "full-rank Mercer residual"))

    rng = np.random.default_rng(seed)
    trials = [(smooth_random_envelope(grid, rng), smooth_random_envelope(grid, rng)) for _ in range(3)]
    gap = kernel.verify_composition(params, grid, drive, trials, direction=direction, backend=backend)
    results.append(CheckResult("composition", gap < COMPOSITION_TOL, gap, COMPOSITION_TOL,
                               "kernel pipeline vs direct protocol"))

    mode = min(mode, len(basis))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", splitter.ModeLeakageWarning)
        measured = splitter.empirical_matrix(params, grid, drive, basis, mode,
                                             direction=direction, backend=backend)
    lam = measured.lambda_i
    direction_angle = math.atan2(drive.omega_r2, drive.omega_r1)
    ideal = splitter.ideal_matrix(direction_angle, min(max(lam, 0.0), 1.0), mode)
    report = splitter.compare(measured, ideal)
    worst = max(report.max_entry_error, abs(report.energy_ratio - lam))
    fidelity_ok = worst < FIDELITY_TOL and not report.flagged and cfg.unitary
    results.append(CheckResult(
        "splitter", fidelity_ok, max(worst, report.orthogonality_defect), FIDELITY_TOL,
        f"mode {mode}: entry error {report.max_entry_error:.2e}, "
        f"orthogonality defect {report.orthogonality_defect:.2e}"
        + ("" if cfg.unitary else ", drive is not unitary"),
    ))
    return results
