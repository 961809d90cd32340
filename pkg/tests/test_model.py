import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tripod_memory.model import (
    DriveSetting,
    FieldEnvelope,
    Grid,
    GridMismatch,
    InvalidConfig,
    InvalidDrive,
    InvalidGrid,
    InvalidLambda,
    InvalidParams,
    OutOfRangeAngle,
    PhysicalParams,
    SpinWaveState,
    gauss_legendre,
    rabi_to_theta,
    theta_to_rabi,
    validate_config,
)

R = math.sqrt(0.5)
angles = st.floats(0.0, math.pi / 2)
bases = st.floats(0.05, 20.0)


def test_theta_to_rabi_endpoints():
    d = theta_to_rabi(0.0, 1.0)
    assert (d.omega_r1, d.omega_r2, d.omega_r3, d.omega_r4) == (1.0, 0.0, 0.0, 1.0)


def test_theta_to_rabi_balanced():
    d = theta_to_rabi(math.pi / 4, 1.0)
    np.testing.assert_allclose([d.omega_r1, d.omega_r2, d.omega_r3, d.omega_r4], R, rtol=1e-15)


def test_theta_to_rabi_scaled():
    d = theta_to_rabi(math.pi / 3, 2.0)
    np.testing.assert_allclose([d.omega_r1, d.omega_r2, d.omega_r3, d.omega_r4],
                               [1, math.sqrt(3), math.sqrt(3), 1], rtol=1e-14)


@pytest.mark.parametrize("theta", [-1e-9, math.pi / 2 + 1e-9, math.nan])
def test_theta_out_of_range(theta):
    with pytest.raises(OutOfRangeAngle):
        theta_to_rabi(theta)


@given(angles, bases)
def test_theta_rabi_sums_hold(theta, omega):
    d = theta_to_rabi(theta, omega)
    assert d.omega_r1**2 + d.omega_r2**2 == pytest.approx(omega**2, rel=1e-12)
    assert d.omega_r3**2 + d.omega_r4**2 == pytest.approx(omega**2, rel=1e-12)
    assert d.is_unitary
    validate_config(PhysicalParams(1.0, omega), Grid(5, 1, 8, 8), d)


@given(angles, bases)
def test_theta_round_trip(theta, omega):
    got = rabi_to_theta(theta_to_rabi(theta, omega), 1.0)
    assert got.direction == pytest.approx(theta, abs=1e-12)
    assert got.contraction == 1.0


@given(angles, st.floats(0.0, 1.0))
def test_realized_angle_is_contracted_rotation(theta, lam):
    got = rabi_to_theta(theta_to_rabi(theta), lam)
    assert got.cos == pytest.approx(math.sqrt(lam) * math.cos(theta), abs=1e-12)
    assert got.sin == pytest.approx(math.sqrt(lam) * math.sin(theta), abs=1e-12)
    assert math.hypot(got.cos, got.sin) == pytest.approx(math.sqrt(lam), abs=1e-12)


def test_rabi_to_theta_examples():
    a = rabi_to_theta(theta_to_rabi(math.pi / 4), 1.0)
    assert a.direction == pytest.approx(math.pi / 4) and a.contraction == 1.0
    b = rabi_to_theta(theta_to_rabi(0.0), 0.81)
    assert b.direction == 0.0 and b.contraction == pytest.approx(0.9)
    c = rabi_to_theta(theta_to_rabi(math.pi / 4), 0.9)
    assert c.direction == pytest.approx(math.pi / 4)
    assert c.contraction == pytest.approx(0.94868, abs=1e-5)


def test_rabi_to_theta_rejects():
    with pytest.raises(InvalidLambda):
        rabi_to_theta(theta_to_rabi(0.3), 1.5)
    with pytest.raises(InvalidDrive):
        rabi_to_theta(DriveSetting(1, 1, 0.6, 0.8, 0.8, 0.6 + 1e-3), 1.0)


def test_validate_config_examples():
    grid = Grid(10, 3, 16, 16)
    cfg = validate_config(PhysicalParams(), grid, DriveSetting(1, 1, 1, 0, 0, 1))
    assert cfg.unitary
    cfg = validate_config(PhysicalParams(), grid, DriveSetting(1, 1, R, R, R, R))
    assert cfg.unitary
    with pytest.raises(InvalidDrive) as info:
        validate_config(PhysicalParams(), grid, DriveSetting(1, 1, 0.8, 0.8, R, R))
    assert "omega_r1^2 + omega_r2^2" in str(info.value)


def test_validate_config_collects_all_problems():
    with pytest.raises(InvalidConfig) as info:
        validate_config(PhysicalParams(-1.0, 1.0), Grid(-1, 3, 7, 1), DriveSetting(1, 1, 1, 0, 0, 1))
    assert isinstance(info.value, InvalidParams)
    assert len(info.value.problems) >= 4


def test_validate_config_non_unitary_is_valid():
    cfg = validate_config(PhysicalParams(), Grid(10, 3, 16, 16), DriveSetting(1, 1, 0.6, 0.8, 0.6, 0.8))
    assert not cfg.unitary


def test_zero_coupling_is_allowed():
    validate_config(PhysicalParams(0.0, 1.0), Grid(10, 3, 16, 16), theta_to_rabi(0.2))


@pytest.mark.parametrize("grid", [
    Grid(10, 3, 7, 16),          # not a multiple of the stage count
    Grid(10, 3, 16, 1),
    Grid(0, 3, 16, 16),
    Grid(10, math.inf, 16, 16),
    Grid(10, 3, 16, 16, stages=4),
])
def test_bad_grids(grid):
    with pytest.raises(InvalidGrid):
        validate_config(PhysicalParams(), grid, theta_to_rabi(0.0))


@pytest.mark.parametrize("stages", [1, 2, 3])
def test_gauss_legendre_tableau(stages):
    nodes, a, b = gauss_legendre(stages)
    assert b.sum() == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(a.sum(axis=1), nodes, atol=1e-15)
    # exact for polynomials up to degree 2s - 1
    for k in range(2 * stages):
        assert np.dot(b, nodes**k) == pytest.approx(1 / (k + 1), abs=1e-14)


def test_grid_quadrature():
    g = Grid(10, 3, 64, 32, stages=2)
    assert g.time_weights.sum() == pytest.approx(10)
    assert g.space_weights.sum() == pytest.approx(3)
    assert np.all(np.diff(g.times) > 0)
    # reversing the samples maps t to T - t
    np.testing.assert_allclose(g.times[::-1], g.duration - g.times, atol=1e-13)
    assert np.dot(g.time_weights, g.times**3) == pytest.approx(10**4 / 4, rel=1e-13)


def test_envelope_and_spin_wave():
    g = Grid(4, 2, 8, 4)
    e = FieldEnvelope.from_function(g, lambda t: np.ones_like(t))
    assert e.norm2() == pytest.approx(4)
    assert (2 * e + e).norm2() == pytest.approx(36)
    with pytest.raises(ValueError):
        e.samples[0] = 3
    with pytest.raises(GridMismatch):
        FieldEnvelope(np.zeros(5), g)
    with pytest.raises(GridMismatch):
        e + FieldEnvelope.zeros(Grid(5, 2, 8, 4))
    s = SpinWaveState(np.ones(4), np.ones(4), g)
    assert s.spin_norm2() == pytest.approx(2) and s.norm2() == pytest.approx(4)
    assert SpinWaveState.empty(g).norm2() == 0
