import numpy as np
import pytest

from tripod_memory import PhysicalParams, decompose, full_cycle_kernel
from tripod_memory.model import Grid

# Operating point with lambda_1 ~ 0.9995 and lambda_2 ~ 0.906 (kappa = Omega = 1).
REGIME_T, REGIME_L = 10.0, 3.0

_acceptance_lines: list[str] = []


def record_acceptance(label: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    _acceptance_lines.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion."""
    return record_acceptance


@pytest.fixture(scope="session")
def params():
    return PhysicalParams()


@pytest.fixture(scope="session")
def regime_grid():
    return Grid(REGIME_T, REGIME_L, 256, 256)


@pytest.fixture(scope="session")
def regime_kernel(params, regime_grid):
    return full_cycle_kernel(params, regime_grid)


@pytest.fixture(scope="session")
def regime_basis(regime_kernel):
    return decompose(regime_kernel)


@pytest.fixture(scope="session")
def small_grid():
    return Grid(REGIME_T, REGIME_L, 64, 64)


@pytest.fixture(scope="session")
def small_basis(params, small_grid):
    return decompose(full_cycle_kernel(params, small_grid))


@pytest.fixture
def rng():
    return np.random.default_rng(7)
