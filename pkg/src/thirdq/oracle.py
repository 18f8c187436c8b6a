"""Schrodinger-picture reference path in the ordinary two-mode Fock space.

Evolution is exact (eigendecomposition of the truncated RWA Hamiltonian), so
its error budget is independent of the Runge-Kutta engine. Wave functions are
psi(x_j, x_k) = sum_nm A[n, m] phi_n(x_j) phi_m(x_k).
"""
from __future__ import annotations

import numpy as np

from .basis import HermiteBasis, QuadGrid, eigenfunctions


def fock_annihilation(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1)


def beam_splitter_hamiltonian(n_max: int, epsilon: float, omega_j: float = 1.0,
                              omega_k: float = 1.0) -> np.ndarray:
    """H = sum (n+1/2) w + eps/2 (a_j^dag a_k + a_k^dag a_j) on (n_max+1)^2 states."""
    a = fock_annihilation(n_max)
    eye = np.eye(n_max + 1)
    free = np.diag(np.arange(n_max + 1) + 0.5)
    aj, ak = np.kron(a, eye), np.kron(eye, a)
    h = omega_j * np.kron(free, eye) + omega_k * np.kron(eye, free)
    h = h + 0.5 * epsilon * (aj.T @ ak + ak.T @ aj)
    if not np.allclose(h, h.conj().T, atol=0, rtol=0):
        raise AssertionError("assembled Hamiltonian is not Hermitian")
    return h


def oracle_evolve(psi, epsilon: float, omega_j: float = 1.0, omega_k: float = 1.0,
                  t: float = 0.0) -> np.ndarray:
    """Exact exp(-iHt) applied to Fock amplitudes of shape (n_max+1, n_max+1)."""
    psi = np.asarray(psi, dtype=complex)
    n_max = psi.shape[0] - 1
    h = beam_splitter_hamiltonian(n_max, epsilon, omega_j, omega_k)
    energies, vecs = np.linalg.eigh(h)
    coeffs = vecs.conj().T @ psi.ravel()
    out = vecs @ (np.exp(-1j * energies * t) * coeffs)
    return out.reshape(psi.shape)


def fock_product(amps_j, amps_k) -> np.ndarray:
    return np.outer(np.asarray(amps_j, dtype=complex), np.asarray(amps_k, dtype=complex))


def wavefunction(psi, x_j, x_k) -> np.ndarray:
    psi = np.asarray(psi)
    phi_j = eigenfunctions(psi.shape[0] - 1, x_j)
    phi_k = eigenfunctions(psi.shape[1] - 1, x_k)
    return phi_j.T @ psi @ phi_k


def oracle_joint_density(psi, grid_j: QuadGrid, grid_k: QuadGrid | None = None) -> np.ndarray:
    grid_k = grid_j if grid_k is None else grid_k
    return np.abs(wavefunction(psi, grid_j.x, grid_k.x)) ** 2


def oracle_density(psi, mode: str, grid: QuadGrid) -> np.ndarray:
    """Marginal |psi|^2 integrated over the other quadrature on ``grid``."""
    joint = oracle_joint_density(psi, grid)
    w = grid.weights()
    if mode == "j":
        return joint @ w
    if mode == "k":
        return w @ joint
    raise ValueError(f"mode must be 'j' or 'k', got {mode!r}")


def oracle_coherence(psi, x: float, delta: float, grid: QuadGrid, mode: str = "j") -> float:
    """1/2 int [psi*(x+d, y) psi(x-d, y) + c.c.] dy over the other mode's grid."""
    psi = np.asarray(psi)
    if mode == "k":
        psi = psi.T
    y = grid.x
    plus = wavefunction(psi, np.array([x + delta]), y)[0]
    minus = wavefunction(psi, np.array([x - delta]), y)[0]
    return float(np.real(np.sum(grid.weights() * plus.conj() * minus)))


def oracle_mean_photons(psi) -> tuple[float, float]:
    p = np.abs(np.asarray(psi)) ** 2
    n = np.arange(p.shape[0])
    return float(n @ p.sum(axis=1)), float(n @ p.sum(axis=0))


def wigner(amplitudes, grid_x: QuadGrid, grid_p: QuadGrid, y_half_width: float = 40.0,
           y_step: float = 0.025) -> np.ndarray:
    """W(x, p) = 1/(2 pi) int dy e^{-ipy} psi*(x - y/2) psi(x + y/2).

    ``amplitudes`` are single-mode Fock amplitudes. The y integral is a
    trapezoid rule on [-y_half_width, y_half_width]. Returns shape (len(x), len(p)).
    """
    amplitudes = np.asarray(amplitudes, dtype=complex)
    n_y = int(round(2 * y_half_width / y_step)) + 1
    y = np.linspace(-y_half_width, y_half_width, n_y)
    w_y = np.full(n_y, y[1] - y[0])
    w_y[0] = w_y[-1] = 0.5 * (y[1] - y[0])
    x, p = grid_x.x, grid_p.x
    n_max = len(amplitudes) - 1
    out = np.empty((len(x), len(p)))
    kernel = np.exp(-1j * np.outer(y, p)) * w_y[:, None]
    for i, xi in enumerate(x):
        left = amplitudes @ eigenfunctions(n_max, xi - 0.5 * y)
        right = amplitudes @ eigenfunctions(n_max, xi + 0.5 * y)
        out[i] = np.real((left.conj() * right) @ kernel) / (2 * np.pi)
    return out


def single_mode_density(amplitudes, grid: QuadGrid) -> np.ndarray:
    amplitudes = np.asarray(amplitudes)
    return np.abs(HermiteBasis(len(amplitudes) - 1, grid,
                               eigenfunctions(len(amplitudes) - 1, grid.x)).wavefunction(amplitudes)) ** 2
