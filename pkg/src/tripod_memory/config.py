"""Flat ``key = value`` run configuration.

Example::

    # physical units: g*sqrt(N) and Omega
    coupling = 1.0
    rabi_base = 1.0
    T = 10
    L = 3
    n_t = 256
    n_z = 256
    theta = 0.785398163397448   # or omega_r1 .. omega_r4

Blank lines and ``#`` comments are ignored. Keys are case-sensitive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

from .model import (
    DriveSetting,
    Grid,
    InvalidConfig,
    MemoryConfig,
    PhysicalParams,
    theta_to_rabi,
    validate_config,
)


class ConfigError(InvalidConfig):
    """Unreadable config file, unknown key or unparsable value."""


_FLOAT_KEYS = {
    "coupling", "rabi_base", "T", "L", "theta",
    "omega_w1", "omega_w2", "omega_r1", "omega_r2", "omega_r3", "omega_r4",
    "T_min", "T_max", "L_min", "L_max",
}
_INT_KEYS = {"n_t", "n_z", "stages", "n_T", "n_L", "sweep_n", "mode", "n_modes", "workers"}
_STR_KEYS = {"direction"}
KNOWN_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS
RABI_KEYS = ("omega_r1", "omega_r2", "omega_r3", "omega_r4")


@dataclass(frozen=True)
class RunConfig:
    coupling: float = 1.0
    rabi_base: float = 1.0
    T: float = 10.0
    L: float = 3.0
    n_t: int = 256
    n_z: int = 256
    stages: int = 2
    theta: float | None = math.pi / 4
    omega_w1: float | None = None
    omega_w2: float | None = None
    omega_r1: float | None = None
    omega_r2: float | None = None
    omega_r3: float | None = None
    omega_r4: float | None = None
    direction: str = "backward"
    T_min: float = 1.0
    T_max: float = 30.0
    L_min: float = 0.5
    L_max: float = 10.0
    n_T: int = 10
    n_L: int = 10
    sweep_n: int = 128
    mode: int = 1
    n_modes: int = 5
    workers: int = 0

    @property
    def params(self) -> PhysicalParams:
        return PhysicalParams(self.coupling, self.rabi_base)

    @property
    def grid(self) -> Grid:
        return Grid(self.T, self.L, self.n_t, self.n_z, self.stages)

    @property
    def drive(self) -> DriveSetting:
        explicit = [getattr(self, k) for k in RABI_KEYS]
        omega = self.rabi_base
        if all(v is not None for v in explicit):
            return DriveSetting(
                self.omega_w1 if self.omega_w1 is not None else omega,
                self.omega_w2 if self.omega_w2 is not None else omega,
                *explicit,
            )
        drive = theta_to_rabi(self.theta, omega)
        return replace(
            drive,
            omega_w1=self.omega_w1 if self.omega_w1 is not None else omega,
            omega_w2=self.omega_w2 if self.omega_w2 is not None else omega,
        )

    def validated(self) -> MemoryConfig:
        problems = []
        if self.direction not in ("forward", "backward"):
            problems.append(f"direction: must be 'forward' or 'backward', got {self.direction!r}")
        for key in ("n_T", "n_L", "sweep_n", "mode", "n_modes"):
            if getattr(self, key) < 1:
                problems.append(f"{key}: must be >= 1, got {getattr(self, key)}")
        if self.workers < 0:
            problems.append(f"workers: must be >= 0 (0 = all cores), got {self.workers}")
        for lo, hi in (("T_min", "T_max"), ("L_min", "L_max")):
            if not 0 < getattr(self, lo) <= getattr(self, hi):
                problems.append(f"{lo}/{hi}: need 0 < {lo} <= {hi}")
        if problems:
            raise ConfigError("; ".join(problems), problems)
        try:
            drive = self.drive
        except ValueError as exc:
            raise ConfigError(f"theta: {exc}") from exc
        return validate_config(self.params, self.grid, drive)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            else:
                values[key] = value
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: bad value {value!r} for key {key!r}") from None

    given = [k for k in RABI_KEYS if k in values]
    if given and len(given) != len(RABI_KEYS):
        missing = sorted(set(RABI_KEYS) - set(given))
        raise ConfigError(f"{source}: explicit Rabi quadruple incomplete, missing {', '.join(missing)}")
    if given and "theta" in values:
        raise ConfigError(f"{source}: give either theta or omega_r1..omega_r4, not both")
    if given:
        values["theta"] = None
    return RunConfig(**values)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))


def format_config(cfg: RunConfig) -> str:
    lines = []
    for key, value in cfg.__dict__.items():
        if value is None:
            continue
        lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
    return "\n".join(lines) + "\n"
