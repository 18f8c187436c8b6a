"""Harmonic-oscillator eigenfunctions on a uniform quadrature grid.

Conventions: hbar = 1, dimensionless quadrature x = (a + a^dagger)/sqrt(2),
unit-frequency eigenfunctions for every mode (frequencies only enter through
operator phases).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ConfigurationError(ValueError):
    """Invalid parameters detected before any computation is run."""


@dataclass(frozen=True)
class QuadGrid:
    x_min: float = -10.0
    x_max: float = 10.0
    n_points: int = 401

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ConfigurationError(f"grid: x_min={self.x_min} must be < x_max={self.x_max}")
        if self.n_points < 3:
            raise ConfigurationError(f"grid: n_points={self.n_points} must be >= 3")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    def weights(self) -> np.ndarray:
        """Trapezoid weights for the uniform grid."""
        w = np.full(self.n_points, self.dx)
        w[0] = w[-1] = 0.5 * self.dx
        return w

    def covers(self, n_max: int) -> bool:
        half_width = np.sqrt(2.0 * n_max) + 3.0
        return self.x_min <= -half_width and self.x_max >= half_width


def eigenfunctions(n_max: int, x) -> np.ndarray:
    """Rows 0..n_max of phi_n evaluated at ``x`` (any shape).

    Uses the normalized recurrence
    phi_{n+1} = sqrt(2/(n+1)) x phi_n - sqrt(n/(n+1)) phi_{n-1},
    which never forms H_n(x) or n! and so stays finite for large n.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def eval_eigenfunction(n: int, x, n_max: int | None = None):
    """phi_n(x) for the unit-frequency oscillator."""
    limit = n if n_max is None else n_max
    if not 0 <= n <= limit:
        raise ValueError(f"level n={n} outside [0, {limit}]")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("quadrature must be finite")
    val = eigenfunctions(n, x)[n]
    return float(val) if val.ndim == 0 else val


def x_matrix_element(n_prime: int, n: int, n_max: int | None = None) -> float:
    """<n'| x |n> = (sqrt(n) delta_{n',n-1} + sqrt(n+1) delta_{n',n+1}) / sqrt(2)."""
    for level in (n_prime, n):
        if level < 0 or (n_max is not None and level > n_max):
            raise ValueError(f"level {level} outside [0, {n_max}]")
    if n_prime == n - 1:
        return np.sqrt(n / 2.0)
    if n_prime == n + 1:
        return np.sqrt((n + 1) / 2.0)
    return 0.0


@dataclass(frozen=True)
class HermiteBasis:
    n_max: int = 16
    grid: QuadGrid = field(default_factory=QuadGrid)
    phi_table: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def integrate(self, values, axis: int = -1):
        """Trapezoid integral of ``values`` sampled on the grid."""
        return np.tensordot(np.asarray(values), self.grid.weights(), axes=([axis], [0]))

    def wavefunction(self, amplitudes, x=None) -> np.ndarray:
        """psi(x) = sum_n A_n phi_n(x) for single-mode Fock amplitudes."""
        amplitudes = np.asarray(amplitudes)
        if x is None:
            table = self.phi_table[: len(amplitudes)]
        else:
            table = eigenfunctions(len(amplitudes) - 1, x)
        return np.tensordot(amplitudes, table, axes=(0, 0))


def build_phi_table(n_max: int = 16, grid: QuadGrid | None = None) -> HermiteBasis:
    """Tabulate phi_n(x_i) for n <= n_max on ``grid``."""
    grid = QuadGrid() if grid is None else grid
    if n_max < 0:
        raise ConfigurationError(f"n_max={n_max} must be non-negative")
    if not grid.covers(n_max):
        half = np.sqrt(2.0 * n_max) + 3.0
        raise ConfigurationError(
            f"grid [{grid.x_min}, {grid.x_max}] does not cover +/-{half:.4f} needed for n_max={n_max}"
        )
    table = eigenfunctions(n_max, grid.x)
    table.setflags(write=False)
    return HermiteBasis(n_max=n_max, grid=grid, phi_table=table)
