"""The four-stage write/write/read/read protocol as a two-port beam splitter."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import solver
from .model import (
    DriveSetting,
    FieldEnvelope,
    Grid,
    InvalidLambda,
    OutOfRangeAngle,
    PhysicalParams,
    rabi_to_theta,
)
from .spectral import ModeBasis, OutOfRange

LEAKAGE_LIMIT = 0.05
ORTHOGONALITY_TOL = 2e-2


class ModeLeakageWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ProtocolResult:
    a_plus: FieldEnvelope
    a_minus: FieldEnvelope
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class SplitterMatrix:
    entries: np.ndarray
    mode_index: int | None
    lambda_i: float
    vacuum_budget: float
    theta: float
    energy_ratio: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "entries", np.asarray(self.entries, dtype=float).reshape(2, 2))
        if self.energy_ratio is None:
            object.__setattr__(self, "energy_ratio", float(np.sum(self.entries**2) / 2))

    def row_completeness(self) -> np.ndarray:
        """Row norm^2 plus N_i^2 per output port; 1 for a canonical map."""
        return np.sum(self.entries**2, axis=1) + self.vacuum_budget**2

    def orthogonality_defect(self) -> float:
        gram = self.entries @ self.entries.T
        return float(np.linalg.norm(gram - self.lambda_i * np.eye(2)))


@dataclass(frozen=True)
class Comparison:
    max_entry_error: float
    energy_ratio: float
    lambda_i: float
    orthogonality_defect: float
    flagged: bool

    def as_dict(self) -> dict:
        return {
            "max_entry_error": self.max_entry_error,
            "energy_ratio": self.energy_ratio,
            "lambda": self.lambda_i,
            "orthogonality_defect": self.orthogonality_defect,
            "flagged": self.flagged,
        }


def run_protocol(
    params: PhysicalParams,
    grid: Grid,
    drive: DriveSetting,
    a1: FieldEnvelope,
    a2: FieldEnvelope,
    *,
    direction: str = "backward",
    check: bool = True,
    backend: str | None = None,
) -> ProtocolResult:
    """Write ``a1`` then ``a2``, read out the in-phase and counter-phase mixtures.

    Excited coherence left at the end of each write is dropped (drive off);
    its norm is reported in the diagnostics.
    """
    write_1 = solver.run_mapping_stage(params, grid, drive.omega_w1, a1, check=check, backend=backend)
    write_2 = solver.run_mapping_stage(params, grid, drive.omega_w2, a2, check=check, backend=backend)
    outputs = {}
    for sign in ("+", "-"):
        outputs[sign] = solver.run_readout_stage(
            params, grid, drive.readout_pair(sign), sign, write_1.stored, write_2.stored,
            direction, check=check, backend=backend,
        )
    diagnostics = {
        "balance_write_1": solver.excitation_balance(a1, write_1),
        "balance_write_2": solver.excitation_balance(a2, write_2),
        "residual_c_1": write_1.residual_c_norm,
        "residual_c_2": write_2.residual_c_norm,
        "stored_1": write_1.stored.spin_norm2(),
        "stored_2": write_2.stored.spin_norm2(),
        "input_energy": a1.norm2() + a2.norm2(),
        "output_energy": outputs["+"].norm2() + outputs["-"].norm2(),
    }
    return ProtocolResult(outputs["+"], outputs["-"], diagnostics)


def _drive_angle(drive: DriveSetting) -> float:
    if not drive.is_unitary:
        return math.nan
    return rabi_to_theta(drive, 1.0).direction


def empirical_matrix(
    params: PhysicalParams,
    grid: Grid,
    drive: DriveSetting,
    basis: ModeBasis,
    i: int,
    *,
    direction: str = "backward",
    backend: str | None = None,
) -> SplitterMatrix:
    """Measure the 2x2 transfer matrix of eigenmode ``i`` (1-based).

    The cycle kernel acts on the time-reversed input, so port ``k`` is fed
    the mirror image of ``phi_i`` and the outputs are projected on ``phi_i``.
    """
    if not 1 <= i <= len(basis):
        raise OutOfRange(f"mode {i} outside 1..{len(basis)}")
    phi = basis.modes[:, i - 1]
    weights = grid.time_weights
    pulse = FieldEnvelope(phi[::-1], grid)
    silent = FieldEnvelope.zeros(grid)

    entries = np.zeros((2, 2))
    out_energy = in_energy = 0.0
    worst_leak = 0.0
    for col, (a1, a2) in enumerate(((pulse, silent), (silent, pulse))):
        result = run_protocol(params, grid, drive, a1, a2, direction=direction, backend=backend)
        in_energy += a1.norm2() + a2.norm2()
        for row, out in enumerate((result.a_plus, result.a_minus)):
            amp = np.sum(weights * phi * out.samples)
            entries[row, col] = amp.real
            total = out.norm2()
            out_energy += total
            on_mode = abs(amp) ** 2
            if on_mode > 0:
                worst_leak = max(worst_leak, (total - on_mode) / on_mode)
    if worst_leak > LEAKAGE_LIMIT:
        warnings.warn(
            f"mode {i}: off-mode output energy is {worst_leak:.1%} of on-mode energy",
            ModeLeakageWarning,
            stacklevel=2,
        )
    lam = float(basis.eigenvalues[i - 1])
    return SplitterMatrix(
        entries=entries,
        mode_index=i,
        lambda_i=lam,
        vacuum_budget=math.sqrt(max(0.0, 1.0 - lam)),
        theta=_drive_angle(drive),
        energy_ratio=out_energy / in_energy if in_energy > 0 else 0.0,
    )


def ideal_matrix(theta: float, lambda_i: float = 1.0, mode_index: int | None = None) -> SplitterMatrix:
    if not 0.0 <= theta <= math.pi / 2:
        raise OutOfRangeAngle(f"theta must lie in [0, pi/2], got {theta!r}")
    if not 0.0 <= lambda_i <= 1.0:
        raise InvalidLambda(f"lambda must lie in [0, 1], got {lambda_i!r}")
    c, s = math.cos(theta), math.sin(theta)
    root = math.sqrt(lambda_i)
    return SplitterMatrix(
        entries=root * np.array([[c, s], [s, -c]]),
        mode_index=mode_index,
        lambda_i=lambda_i,
        vacuum_budget=math.sqrt(1.0 - lambda_i),
        theta=theta,
        energy_ratio=lambda_i,
    )


def compare(empirical: SplitterMatrix, ideal: SplitterMatrix,
            tol: float = ORTHOGONALITY_TOL) -> Comparison:
    defect = empirical.orthogonality_defect()
    return Comparison(
        max_entry_error=float(np.max(np.abs(empirical.entries - ideal.entries))),
        energy_ratio=float(empirical.energy_ratio),
        lambda_i=float(ideal.lambda_i),
        orthogonality_defect=defect,
        flagged=defect > tol,
    )
