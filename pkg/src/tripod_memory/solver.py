"""Direct integration of the write and read stages.

The stage equations are

    dz a = -kappa c,   dt c = kappa a + Omega b,   dt b = -Omega c,

with the field ``a`` entering at z = 0. The field has no time derivative,
so it is slaved to ``c`` along z at every instant.

Space uses the box scheme: ``a`` lives on bin edges, ``b`` and ``c`` on
bin centres, and each bin sees the mean of its two edge fields. Time uses
the ``s``-stage Gauss-Legendre collocation method (order ``2s``) with the
input sampled at the stage nodes. Both pieces preserve quadratic
invariants, so

    sum_t w_t |a_in|^2 = sum_t w_t |a_out|^2 + sum_z w_z (|b|^2 + |c|^2)

holds to round-off and the balance residual flags bugs, not truncation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import get_marcher
from .model import (
    gauss_legendre,
    DriveSetting,
    FieldEnvelope,
    Grid,
    GridMismatch,
    InvalidDrive,
    PhysicalParams,
    RATIO_RTOL,
    SpinWaveState,
    TripodMemoryError,
)

BALANCE_TOL = 1e-6


class GridTooCoarse(TripodMemoryError):
    pass


class NonFiniteState(TripodMemoryError, FloatingPointError):
    pass


@dataclass(frozen=True)
class StageResult:
    stored: SpinWaveState
    transmitted: FieldEnvelope
    residual_c_norm: float


def cell_transfer(kappa: float, omega: float, dz: float, step: float, stages: int) -> np.ndarray:
    """Linear map of one space bin over one time step.

    Acts on ``(c, b, a_1..a_s)``: medium amplitudes at the start of the step
    and the field entering the bin at each stage time. Returns the advanced
    medium and the field leaving the bin, in the same layout.
    """
    _, coeffs, weights = gauss_legendre(stages)
    s = stages
    eye = np.eye(s)
    ones = np.ones((s, 1))
    h = step
    # stage unknowns (C_1..C_s, B_1..B_s); bin field is A_r - kappa dz C_r / 2
    system = np.block([
        [eye + h * kappa * kappa * dz / 2 * coeffs, -h * omega * coeffs],
        [h * omega * coeffs, eye],
    ])
    source = np.zeros((2 * s, 2 + s))
    source[:s, 0:1] = ones
    source[s:, 1:2] = ones
    source[:s, 2:] = h * kappa * coeffs
    stage_map = np.linalg.solve(system, source)
    stage_c, stage_b = stage_map[:s], stage_map[s:]
    entering = np.hstack([np.zeros((s, 2)), eye])
    bin_field = entering - kappa * dz / 2 * stage_c

    transfer = np.zeros((2 + s, 2 + s))
    transfer[0, 0] = 1.0
    transfer[0] += h * weights @ (kappa * bin_field + omega * stage_b)
    transfer[1, 1] = 1.0
    transfer[1] -= h * omega * weights @ stage_c
    transfer[2:] = entering - kappa * dz * stage_c
    return transfer


def integrate_batch(
    kappa: float,
    omega: float,
    grid: Grid,
    inputs: np.ndarray,
    b0: np.ndarray | None = None,
    c0: np.ndarray | None = None,
    backend: str | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run many independent stages at once.

    ``inputs`` has shape (batch, n_t); ``b0``/``c0`` (batch, n_z) default to
    an empty medium. Returns final ``b``, final ``c`` and the transmitted
    field, each row independent of the others.
    """
    inputs = np.ascontiguousarray(np.atleast_2d(inputs), dtype=complex)
    n_batch = inputs.shape[0]
    if inputs.shape[1] != grid.n_t:
        raise GridMismatch(f"inputs have {inputs.shape[1]} time bins, grid has {grid.n_t}")
    shape = (n_batch, grid.n_z)
    b = np.zeros(shape, complex) if b0 is None else np.array(np.broadcast_to(b0, shape), complex)
    c = np.zeros(shape, complex) if c0 is None else np.array(np.broadcast_to(c0, shape), complex)
    transfer = cell_transfer(float(kappa), float(omega), grid.dz, grid.step, grid.stages)
    out = get_marcher(backend)(inputs, b, c, np.ascontiguousarray(transfer), grid.stages)
    return b, c, np.asarray(out)


def excitation_balance(input: FieldEnvelope, result: StageResult,
                       initial: SpinWaveState | None = None) -> float:
    """Relative mismatch of the stage's excitation bookkeeping."""
    before = input.norm2() + (initial.norm2() if initial is not None else 0.0)
    after = result.transmitted.norm2() + result.stored.norm2()
    return abs(before - after) / max(before, np.finfo(float).tiny)


def _finish_stage(grid, b, c, out, source, initial, check) -> StageResult:
    if not (np.all(np.isfinite(b)) and np.all(np.isfinite(c)) and np.all(np.isfinite(out))):
        raise NonFiniteState("stage integration produced non-finite values")
    stored = SpinWaveState(b[0], c[0], grid)
    result = StageResult(
        stored=stored,
        transmitted=FieldEnvelope(out[0], grid),
        residual_c_norm=float(np.sum(grid.space_weights * np.abs(c[0]) ** 2)),
    )
    if check:
        residual = excitation_balance(source, result, initial)
        if residual > BALANCE_TOL:
            raise GridTooCoarse(f"excitation balance residual {residual:.3e} exceeds {BALANCE_TOL:g}")
    return result


def run_mapping_stage(
    params: PhysicalParams,
    grid: Grid,
    omega_w: float,
    input: FieldEnvelope,
    *,
    check: bool = True,
    backend: str | None = None,
) -> StageResult:
    """Write ``input`` into an initially empty medium with drive ``omega_w``."""
    if input.grid.n_t != grid.n_t or input.grid.duration != grid.duration:
        raise GridMismatch("input envelope is not on the stage time axis")
    b, c, out = integrate_batch(params.coupling, omega_w, grid, input.samples[None, :], backend=backend)
    return _finish_stage(grid, b, c, out, input, None, check)


def run_release_stage(
    params: PhysicalParams,
    grid: Grid,
    omega: float,
    spin_wave: np.ndarray,
    *,
    check: bool = True,
    backend: str | None = None,
) -> StageResult:
    """Read a stored spin wave forward (output at z = L) with no input field.

    The excited coherence starts at zero.
    """
    source = FieldEnvelope.zeros(grid)
    initial = SpinWaveState(spin_wave, np.zeros(grid.n_z), grid)
    b, c, out = integrate_batch(params.coupling, omega, grid, np.zeros((1, grid.n_t)),
                                b0=initial.b[None, :], backend=backend)
    return _finish_stage(grid, b, c, out, source, initial, check)


def _mix(b1: np.ndarray, b2: np.ndarray, pair: tuple[float, float], sign: str) -> np.ndarray:
    w1, w2 = pair
    omega = np.hypot(w1, w2)
    if omega == 0:
        raise InvalidDrive("readout pair has zero total Rabi frequency")
    if sign == "+":
        return (w1 * b1 + w2 * b2) / omega
    if sign == "-":
        return (w1 * b1 - w2 * b2) / omega
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def mix_spin_waves(b1: SpinWaveState, b2: SpinWaveState,
                   drive: DriveSetting) -> tuple[SpinWaveState, SpinWaveState]:
    """In-phase and counter-phase superpositions of the two stored spin waves."""
    _check_same_space(b1.grid, b2.grid)
    grid = b1.grid
    plus_pair = drive.readout_pair("+")
    minus_pair = drive.readout_pair("-")
    plus = SpinWaveState(_mix(b1.b, b2.b, plus_pair, "+"), _mix(b1.c, b2.c, plus_pair, "+"), grid)
    minus = SpinWaveState(_mix(b1.b, b2.b, minus_pair, "-"), _mix(b1.c, b2.c, minus_pair, "-"), grid)
    return plus, minus


def _check_same_space(a: Grid, b: Grid) -> None:
    if (a.n_z, a.length) != (b.n_z, b.length):
        raise GridMismatch(f"space axes differ: {a} vs {b}")


def run_readout_stage(
    params: PhysicalParams,
    grid: Grid,
    omega_pair: tuple[float, float],
    sign: str,
    stored_1: SpinWaveState,
    stored_2: SpinWaveState,
    direction: str = "backward",
    *,
    check: bool = True,
    backend: str | None = None,
) -> FieldEnvelope:
    """Retrieve the ``sign`` superposition of two stored spin waves.

    Backward retrieval mirrors the mixed spin wave along z and then runs
    the ordinary forward stage, so the output leaves through the face the
    signal originally entered.
    """
    _check_same_space(stored_1.grid, grid)
    _check_same_space(stored_2.grid, grid)
    omega = params.rabi_base
    w1, w2 = omega_pair
    if abs(w1 * w1 + w2 * w2 - omega * omega) > RATIO_RTOL * omega * omega:
        raise InvalidDrive(f"readout pair {omega_pair} violates omega_a^2 + omega_b^2 = Omega^2")
    mixed = _mix(stored_1.b, stored_2.b, omega_pair, sign)
    if direction == "backward":
        mixed = mixed[::-1]
    elif direction != "forward":
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")
    return run_release_stage(params, grid, omega, mixed, check=check, backend=backend).transmitted
