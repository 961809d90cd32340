"""Eigenmodes of the full-cycle kernel and the (T, L) sweep.

The weighted cycle operator ``sqrt(w) G sqrt(w)`` is symmetric for backward
retrieval. Its eigenvalues are the amplitude transfer factors of the
eigenmodes; the energy efficiencies ``lambda_i`` are their squares.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .kernel import KernelMatrix, full_cycle_kernel
from .model import FieldEnvelope, Grid, GridMismatch, PhysicalParams, TripodMemoryError

SYMMETRY_TOL = 1e-3
NEGATIVE_CLAMP = 1e-9
TIE_TOL = 1e-12


class AsymmetricKernel(TripodMemoryError):
    """The cycle operator is not symmetric; usually forward retrieval was used."""


class IndefiniteKernel(TripodMemoryError):
    """The cycle operator has a clearly negative eigenvalue."""


class NonConvergence(TripodMemoryError):
    pass


class OutOfRange(TripodMemoryError, IndexError):
    pass


@dataclass(frozen=True, eq=False)
class ModeBasis:
    eigenvalues: np.ndarray
    modes: np.ndarray
    grid: Grid
    kernel: KernelMatrix | None = None

    @property
    def weights(self) -> np.ndarray:
        return self.grid.time_weights

    @property
    def amplitudes(self) -> np.ndarray:
        """Operator eigenvalues sqrt(lambda_i)."""
        return np.sqrt(self.eigenvalues)

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def mode(self, i: int) -> FieldEnvelope:
        """Eigenfunction ``i`` (1-based, as in lambda_1, lambda_2, ...)."""
        if not 1 <= i <= len(self):
            raise OutOfRange(f"mode {i} outside 1..{len(self)}")
        return FieldEnvelope(self.modes[:, i - 1], self.grid)

    def gram(self) -> np.ndarray:
        return self.modes.T @ (self.weights[:, None] * self.modes)

    def gram_defect(self) -> float:
        return float(np.max(np.abs(self.gram() - np.eye(len(self)))))


@dataclass(frozen=True, eq=False)
class ModeAmplitudes:
    coefficients: np.ndarray
    basis: ModeBasis


def temporal_centroid(samples: np.ndarray, grid: Grid) -> tuple[float, float]:
    """Mean time and rms width of ``|samples|^2``."""
    density = grid.time_weights * np.abs(samples) ** 2
    total = density.sum()
    if total == 0:
        return math.nan, math.nan
    t = grid.times
    mean = float(np.sum(density * t) / total)
    width = float(np.sqrt(np.sum(density * (t - mean) ** 2) / total))
    return mean, width


def _descending_with_ties(values: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Indices sorting ``values`` descending; runs equal within TIE_TOL go by centroid."""
    order = np.argsort(-values, kind="stable")
    out, start = [], 0
    for k in range(1, len(order) + 1):
        if k == len(order) or values[order[k - 1]] - values[order[k]] > TIE_TOL:
            group = order[start:k]
            out.extend(sorted(group, key=lambda g: (np.nan_to_num(centroids[g], nan=np.inf), g)))
            start = k
    return np.array(out, dtype=int)


def decompose(kernel: KernelMatrix) -> ModeBasis:
    if kernel.shape[0] != kernel.shape[1] or kernel.grid is None:
        raise GridMismatch("decompose needs a square full-cycle kernel with a grid")
    defect = kernel.symmetry_defect()
    if defect > SYMMETRY_TOL:
        raise AsymmetricKernel(f"symmetry defect {defect:.3e} exceeds {SYMMETRY_TOL:g}")
    op = kernel.operator()
    try:
        values, vectors = np.linalg.eigh(0.5 * (op + op.T))
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc
    if values.min(initial=0.0) < -NEGATIVE_CLAMP:
        raise IndefiniteKernel(f"cycle operator has eigenvalue {values.min():.3e} < 0")
    values = np.clip(values, 0.0, None)

    grid = kernel.grid
    modes = vectors / np.sqrt(kernel.row_weights)[:, None]
    for k in range(modes.shape[1]):
        pivot = np.argmax(np.abs(modes[:, k]))
        if modes[pivot, k] < 0:
            modes[:, k] = -modes[:, k]
    lambdas = values**2
    density = grid.time_weights[:, None] * modes**2
    centroids = (grid.times @ density) / density.sum(axis=0)
    order = _descending_with_ties(lambdas, centroids)
    return ModeBasis(lambdas[order], modes[:, order], grid, kernel)


def reconstruct(basis: ModeBasis, m: int) -> tuple[np.ndarray, float]:
    """Rank-``m`` Mercer sum in Nystrom form and its weighted Frobenius residual."""
    if not 1 <= m <= len(basis):
        raise OutOfRange(f"m must lie in 1..{len(basis)}, got {m}")
    phi = basis.modes[:, :m]
    approx = (phi * basis.amplitudes[:m]) @ phi.T
    residual = math.nan
    if basis.kernel is not None:
        w = np.sqrt(basis.weights)
        residual = float(np.linalg.norm(w[:, None] * (basis.kernel.entries - approx) * w[None, :]))
    return approx, residual


def project(envelope: FieldEnvelope, basis: ModeBasis) -> ModeAmplitudes:
    if envelope.grid.n_t != basis.grid.n_t or envelope.grid.duration != basis.grid.duration:
        raise GridMismatch("envelope and basis live on different time grids")
    coefficients = basis.modes.T @ (basis.weights * envelope.samples)
    return ModeAmplitudes(coefficients, basis)


def synthesize(amps: ModeAmplitudes) -> FieldEnvelope:
    basis = amps.basis
    coefficients = np.asarray(amps.coefficients)
    samples = basis.modes[:, : coefficients.size] @ coefficients
    return FieldEnvelope(samples, basis.grid)


def mode_separation(basis: ModeBasis, i: int = 1, j: int = 2) -> dict:
    """Centroid gap between two modes, in units of their mean rms width."""
    ti, wi = temporal_centroid(basis.modes[:, i - 1], basis.grid)
    tj, wj = temporal_centroid(basis.modes[:, j - 1], basis.grid)
    width = 0.5 * (wi + wj)
    return {
        "centroid_i": ti, "centroid_j": tj, "width_i": wi, "width_j": wj,
        "separation": abs(ti - tj),
        "separation_in_widths": abs(ti - tj) / width if width > 0 else math.nan,
    }


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Rows of ``(T, L, lambda_1, lambda_2, lambda_3)`` in sweep order."""

    rows: np.ndarray

    @property
    def best(self) -> np.ndarray:
        """Row maximizing lambda_1 (earliest row on ties)."""
        return self.rows[int(np.argmax(self.rows[:, 2]))]

    def regime(self, lambda1_min: float = 0.99,
               lambda2_range: tuple[float, float] = (0.8, 0.95),
               lambda2_target: float = 0.9) -> np.ndarray | None:
        """Row with lambda_1 >= lambda1_min and lambda_2 in range, closest to the target.

        Returns None when no row qualifies.
        """
        lam1, lam2 = self.rows[:, 2], self.rows[:, 3]
        ok = (lam1 >= lambda1_min) & (lam2 >= lambda2_range[0]) & (lam2 <= lambda2_range[1])
        if not ok.any():
            return None
        candidates = np.flatnonzero(ok)
        return self.rows[candidates[np.argmin(np.abs(lam2[candidates] - lambda2_target))]]


def top_eigenvalues(params: PhysicalParams, duration: float, length: float,
                    n: int = 128, count: int = 3, backend: str | None = None) -> np.ndarray:
    grid = Grid(float(duration), float(length), n, n).check()
    basis = decompose(full_cycle_kernel(params, grid, backend=backend))
    out = np.zeros(count)
    k = min(count, len(basis))
    out[:k] = basis.eigenvalues[:k]
    return out


def _as_pair(n_points) -> tuple[int, int]:
    if np.isscalar(n_points):
        return int(n_points), int(n_points)
    n_t, n_l = n_points
    return int(n_t), int(n_l)


def sweep(
    params: PhysicalParams,
    T_range: tuple[float, float],
    L_range: tuple[float, float],
    n_points=10,
    *,
    n: int = 128,
    workers: int | None = None,
    backend: str | None = None,
) -> SweepResult:
    """Top three eigenvalues over a rectangular (T, L) grid.

    ``n_points`` is one count for both axes or a ``(n_T, n_L)`` pair. Rows
    are ordered T-major whatever the worker count.
    """
    n_T, n_L = _as_pair(n_points)
    for lo, hi in (T_range, L_range):
        if not (0 < lo <= hi):
            raise ValueError(f"ranges must be positive and ordered, got {(lo, hi)}")
    Ts = np.linspace(T_range[0], T_range[1], n_T) if n_T > 1 else np.array([float(T_range[0])])
    Ls = np.linspace(L_range[0], L_range[1], n_L) if n_L > 1 else np.array([float(L_range[0])])
    points = [(T, L) for T in Ts for L in Ls]

    def job(point):
        return top_eigenvalues(params, point[0], point[1], n=n, backend=backend)

    workers = max(1, int(workers or 1))
    if workers == 1:
        spectra = [job(p) for p in points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            spectra = list(pool.map(job, points))
    rows = np.array([[T, L, *lam] for (T, L), lam in zip(points, spectra)])
    return SweepResult(rows.reshape(-1, 5))
