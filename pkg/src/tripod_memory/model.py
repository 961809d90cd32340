"""Domain types and the Rabi-frequency / splitting-angle parameterization.

All quantities are in simulation units: the coupling ``g*sqrt(N)`` and the
write Rabi frequency ``Omega`` default to 1, so the cell length ``L`` and
stage duration ``T`` are the only physical knobs.

Space is cell-centred: the cell of length ``L`` is split into ``n_z`` equal
bins sampled at their centres with the bin width as weight. Time uses the
composite Gauss-Legendre rule matching the stage integrator: ``T`` is cut
into ``n_t / stages`` equal steps, each carrying ``stages`` nodes. Every
weight is positive and the weights sum to ``T`` and ``L``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal

import numpy as np

Direction = Literal["forward", "backward"]
Sign = Literal["+", "-"]

RATIO_RTOL = 1e-12


class TripodMemoryError(Exception):
    """Base class for errors raised by this package."""


class InvalidConfig(TripodMemoryError, ValueError):
    """A configuration violates one or more invariants.

    ``problems`` lists every violated invariant, not only the first one.
    """

    def __init__(self, message: str, problems: list[str] | None = None):
        super().__init__(message)
        self.problems = list(problems) if problems else [message]


class InvalidParams(InvalidConfig):
    pass


class InvalidGrid(InvalidConfig):
    pass


class InvalidDrive(InvalidConfig):
    pass


class OutOfRangeAngle(TripodMemoryError, ValueError):
    pass


class InvalidLambda(TripodMemoryError, ValueError):
    pass


class GridMismatch(TripodMemoryError, ValueError):
    pass


@dataclass(frozen=True)
class PhysicalParams:
    """Coupling ``g*sqrt(N)`` and the common write Rabi frequency ``Omega``."""

    coupling: float = 1.0
    rabi_base: float = 1.0


@lru_cache(maxsize=None)
def gauss_legendre(stages: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nodes on [0, 1], collocation matrix and weights of the Gauss method."""
    x, w = np.polynomial.legendre.leggauss(stages)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    # a_ij = integral of the j-th Lagrange basis polynomial from 0 to c_i
    powers = np.arange(1, stages + 1)
    vander = nodes[None, :] ** (powers[:, None] - 1)
    rhs = nodes[None, :] ** powers[:, None] / powers[:, None]
    coeffs = np.linalg.solve(vander, rhs).T
    for arr in (nodes, coeffs, weights):
        arr.setflags(write=False)
    return nodes, coeffs, weights


@dataclass(frozen=True)
class Grid:
    duration: float
    length: float
    n_t: int = 256
    n_z: int = 256
    stages: int = 2

    @property
    def n_steps(self) -> int:
        return self.n_t // self.stages

    @property
    def step(self) -> float:
        return self.duration / self.n_steps

    @property
    def dz(self) -> float:
        return self.length / self.n_z

    @property
    def times(self) -> np.ndarray:
        nodes, _, _ = gauss_legendre(self.stages)
        return ((np.arange(self.n_steps)[:, None] + nodes[None, :]) * self.step).ravel()

    @property
    def positions(self) -> np.ndarray:
        return (np.arange(self.n_z) + 0.5) * self.dz

    @property
    def time_weights(self) -> np.ndarray:
        _, _, weights = gauss_legendre(self.stages)
        return np.tile(weights * self.step, self.n_steps)

    @property
    def space_weights(self) -> np.ndarray:
        return np.full(self.n_z, self.dz)

    def problems(self) -> list[str]:
        out = []
        for name in ("duration", "length"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                out.append(f"{name} must be finite and > 0, got {value!r}")
        for name in ("n_t", "n_z"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 2:
                out.append(f"{name} must be an integer >= 2, got {value!r}")
        if self.stages not in (1, 2, 3):
            out.append(f"stages must be 1, 2 or 3, got {self.stages!r}")
        elif isinstance(self.n_t, (int, np.integer)) and self.n_t % self.stages:
            out.append(f"n_t={self.n_t} must be a multiple of stages={self.stages}")
        return out

    def check(self) -> "Grid":
        problems = self.problems()
        if problems:
            raise InvalidGrid("; ".join(problems), problems)
        return self

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.duration, self.length, self.n_t * factor, self.n_z * factor, self.stages)


@dataclass(frozen=True)
class DriveSetting:
    """Write and readout Rabi frequencies.

    All values are real and non-negative. The counter-phase of the second
    readout is carried by the explicit minus sign in the mixing rule, not
    by the sign of ``omega_r4``.
    """

    omega_w1: float
    omega_w2: float
    omega_r1: float
    omega_r2: float
    omega_r3: float
    omega_r4: float

    @property
    def rabi_base(self) -> float:
        return self.omega_w1

    @property
    def is_unitary(self) -> bool:
        scale = max(abs(self.omega_r1), abs(self.omega_r2), 1e-300)
        return (
            abs(self.omega_r4 - self.omega_r1) <= RATIO_RTOL * scale
            and abs(self.omega_r3 - self.omega_r2) <= RATIO_RTOL * scale
        )

    def readout_pair(self, sign: Sign) -> tuple[float, float]:
        if sign == "+":
            return self.omega_r1, self.omega_r2
        return self.omega_r3, self.omega_r4

    def problems(self, rabi_base: float) -> list[str]:
        out = []
        values = (self.omega_w1, self.omega_w2, self.omega_r1,
                  self.omega_r2, self.omega_r3, self.omega_r4)
        if not all(math.isfinite(v) for v in values):
            return ["Rabi frequencies must be finite"]
        if any(v < 0 for v in values):
            out.append("Rabi frequencies must be non-negative (phases are fixed)")
        omega2 = rabi_base**2
        for name in ("omega_w1", "omega_w2"):
            value = getattr(self, name)
            if abs(value - rabi_base) > RATIO_RTOL * rabi_base:
                out.append(f"{name}={value!r} must equal rabi_base={rabi_base!r}")
        for a, b in (("omega_r1", "omega_r2"), ("omega_r3", "omega_r4")):
            total = getattr(self, a) ** 2 + getattr(self, b) ** 2
            if abs(total - omega2) > RATIO_RTOL * omega2:
                out.append(f"{a}^2 + {b}^2 = {total!r} must equal rabi_base^2 = {omega2!r}")
        return out


@dataclass(frozen=True, eq=False)
class FieldEnvelope:
    """Complex field amplitude sampled on the time bins of ``grid``."""

    samples: np.ndarray
    grid: Grid

    def __post_init__(self):
        samples = np.array(self.samples, dtype=complex).reshape(-1)
        if samples.shape != (self.grid.n_t,):
            raise GridMismatch(
                f"envelope has {samples.size} samples, grid has n_t={self.grid.n_t}"
            )
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def zeros(cls, grid: Grid) -> "FieldEnvelope":
        return cls(np.zeros(grid.n_t, dtype=complex), grid)

    @classmethod
    def from_function(cls, grid: Grid, func) -> "FieldEnvelope":
        return cls(np.asarray(func(grid.times), dtype=complex), grid)

    def norm2(self) -> float:
        return float(np.sum(self.grid.time_weights * np.abs(self.samples) ** 2))

    def time_reversed(self) -> "FieldEnvelope":
        return FieldEnvelope(self.samples[::-1], self.grid)

    def __add__(self, other: "FieldEnvelope") -> "FieldEnvelope":
        _same_time_axis(self.grid, other.grid)
        return FieldEnvelope(self.samples + other.samples, self.grid)

    def __mul__(self, scalar) -> "FieldEnvelope":
        return FieldEnvelope(self.samples * scalar, self.grid)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SpinWaveState:
    """Spin wave ``b`` and excited-state coherence ``c`` on the space bins."""

    b: np.ndarray
    c: np.ndarray
    grid: Grid

    def __post_init__(self):
        for name in ("b", "c"):
            arr = np.array(getattr(self, name), dtype=complex).reshape(-1)
            if arr.shape != (self.grid.n_z,):
                raise GridMismatch(
                    f"{name} has {arr.size} samples, grid has n_z={self.grid.n_z}"
                )
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def empty(cls, grid: Grid) -> "SpinWaveState":
        zeros = np.zeros(grid.n_z, dtype=complex)
        return cls(zeros, zeros, grid)

    def spin_norm2(self) -> float:
        return float(np.sum(self.grid.space_weights * np.abs(self.b) ** 2))

    def norm2(self) -> float:
        w = self.grid.space_weights
        return float(np.sum(w * (np.abs(self.b) ** 2 + np.abs(self.c) ** 2)))


@dataclass(frozen=True)
class MemoryConfig:
    """A validated (params, grid, drive) triple."""

    params: PhysicalParams
    grid: Grid
    drive: DriveSetting
    unitary: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "unitary", self.drive.is_unitary)


@dataclass(frozen=True)
class RealizedAngle:
    """Splitter angle realized on a mode with efficiency ``lambda_i``.

    ``cos``/``sin`` are the matrix entries ``(Omega_r1/Omega) sqrt(lambda)``
    and ``(Omega_r2/Omega) sqrt(lambda)``; for ``lambda < 1`` they are a
    rotation by ``direction`` shrunk by ``contraction``.
    """

    direction: float
    contraction: float
    cos: float
    sin: float


def _same_time_axis(a: Grid, b: Grid) -> None:
    if (a.n_t, a.duration, a.stages) != (b.n_t, b.duration, b.stages):
        raise GridMismatch(f"time axes differ: {a} vs {b}")


def validate_config(params: PhysicalParams, grid: Grid, drive: DriveSetting) -> MemoryConfig:
    """Check every invariant and return the validated configuration.

    Raises the error class of the first violated invariant; its
    ``problems`` attribute lists all of them.
    """
    found: list[tuple[type, str]] = []
    if not (math.isfinite(params.coupling) and params.coupling >= 0):
        found.append((InvalidParams, f"coupling must be >= 0, got {params.coupling!r}"))
    if not (math.isfinite(params.rabi_base) and params.rabi_base > 0):
        found.append((InvalidParams, f"rabi_base must be > 0, got {params.rabi_base!r}"))
    found += [(InvalidGrid, p) for p in grid.problems()]
    if not any(cls is InvalidParams for cls, _ in found):
        found += [(InvalidDrive, p) for p in drive.problems(params.rabi_base)]
    if found:
        problems = [msg for _, msg in found]
        raise found[0][0]("; ".join(problems), problems)
    return MemoryConfig(params, grid, drive)


def theta_to_rabi(theta: float, rabi_base: float = 1.0) -> DriveSetting:
    """Unitary drive realizing splitting angle ``theta`` on a lossless mode."""
    if not (0.0 <= theta <= math.pi / 2):
        raise OutOfRangeAngle(f"theta must lie in [0, pi/2], got {theta!r}")
    if not rabi_base > 0:
        raise InvalidParams(f"rabi_base must be > 0, got {rabi_base!r}")
    cos_part = rabi_base * math.cos(theta)
    sin_part = rabi_base * math.sin(theta)
    return DriveSetting(
        omega_w1=rabi_base,
        omega_w2=rabi_base,
        omega_r1=cos_part,
        omega_r2=sin_part,
        omega_r3=sin_part,
        omega_r4=cos_part,
    )


def rabi_to_theta(drive: DriveSetting, lambda_i: float = 1.0) -> RealizedAngle:
    if not drive.is_unitary:
        raise InvalidDrive("rabi_to_theta needs a unitary drive (omega_r4 = omega_r1, omega_r3 = omega_r2)")
    if not (0.0 <= lambda_i <= 1.0):
        raise InvalidLambda(f"lambda must lie in [0, 1], got {lambda_i!r}")
    omega = math.hypot(drive.omega_r1, drive.omega_r2)
    root = math.sqrt(lambda_i)
    return RealizedAngle(
        direction=math.atan2(drive.omega_r2, drive.omega_r1),
        contraction=root,
        cos=drive.omega_r1 / omega * root,
        sin=drive.omega_r2 / omega * root,
    )
