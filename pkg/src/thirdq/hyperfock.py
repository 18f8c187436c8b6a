"""Truncated two-mode hyper-Fock space (0 or 1 oscillaton per mode).

Single-mode layout: slot 0 is |Z> (no oscillatons), slot n+1 is the Fock
level |n> carried by exactly one oscillaton. The joint index is row-major
with mode j outer: l = l_j * dim + l_k.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .basis import ConfigurationError

Z_SLOT = 0


@dataclass(frozen=True)
class ModeBasis:
    n_max: int = 16

    @property
    def dim(self) -> int:
        return self.n_max + 2

    @property
    def labels(self) -> list[str]:
        return ["Z"] + [f"F{n}" for n in range(self.n_max + 1)]

    @staticmethod
    def fock_slot(n: int) -> int:
        return n + 1


@dataclass(frozen=True)
class JointHyperBasis:
    n_max: int = 16

    @property
    def mode(self) -> ModeBasis:
        return ModeBasis(self.n_max)

    @property
    def mode_j(self) -> ModeBasis:
        return self.mode

    @property
    def mode_k(self) -> ModeBasis:
        return self.mode

    @property
    def dim(self) -> int:
        return self.mode.dim

    @property
    def joint_dim(self) -> int:
        return self.dim * self.dim

    def index(self, l_j: int, l_k: int) -> int:
        if not (0 <= l_j < self.dim and 0 <= l_k < self.dim):
            raise IndexError(f"slot pair ({l_j}, {l_k}) outside [0, {self.dim})")
        return l_j * self.dim + l_k

    def unlabel(self, l: int) -> tuple[int, int]:
        if not 0 <= l < self.joint_dim:
            raise IndexError(f"index {l} outside [0, {self.joint_dim})")
        return divmod(l, self.dim)

    def fock_block(self, state: np.ndarray) -> np.ndarray:
        """View the F x F sector of a joint vector as an (n_max+1)^2 matrix."""
        return np.asarray(state).reshape(self.dim, self.dim)[1:, 1:]

    def from_fock_block(self, amplitudes) -> np.ndarray:
        amplitudes = np.asarray(amplitudes, dtype=complex)
        size = self.n_max + 1
        if amplitudes.shape != (size, size):
            raise ValueError(f"expected ({size}, {size}) Fock amplitudes, got {amplitudes.shape}")
        full = np.zeros((self.dim, self.dim), dtype=complex)
        full[1:, 1:] = amplitudes
        return full.ravel()


def _check_tail(alpha, n_max: int):
    if abs(alpha) ** 2 > n_max / 3.0:
        raise ConfigurationError(
            f"|alpha|^2={abs(alpha) ** 2:.4g} exceeds n_max/3={n_max / 3:.4g}; raise n_max"
        )


def coherent_fock_amplitudes(alpha, n_max: int) -> np.ndarray:
    """e^{-|a|^2/2} a^n / sqrt(n!) for n = 0..n_max (no renormalization)."""
    n = np.arange(n_max + 1)
    alpha = complex(alpha)
    if alpha == 0:
        out = np.zeros(n_max + 1, dtype=complex)
        out[0] = 1.0
        return out
    log_mag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag) * np.exp(1j * np.angle(alpha) * n)


def make_coherent(alpha, n_max: int = 16) -> np.ndarray:
    """Single-mode hyper-Fock amplitudes of the coherent state |alpha>."""
    _check_tail(alpha, n_max)
    out = np.zeros(n_max + 2, dtype=complex)
    out[1:] = coherent_fock_amplitudes(alpha, n_max)
    return out


def cat_normalization(alpha: float, theta: float) -> float:
    """Exact c_n for c_n(|a> + e^{i theta}|-a>) with real a."""
    return (2.0 * (1.0 + np.cos(theta) * np.exp(-2.0 * alpha * alpha))) ** -0.5


def make_cat(alpha: float, theta: float, n_max: int = 16) -> np.ndarray:
    if np.iscomplexobj(alpha) and np.imag(alpha) != 0:
        raise ConfigurationError("cat amplitude alpha must be real")
    alpha = float(np.real(alpha))
    _check_tail(alpha, n_max)
    denom = 1.0 + np.cos(theta) * np.exp(-2.0 * alpha * alpha)
    if denom <= 0:
        raise ConfigurationError("cat state with alpha=0, theta=pi has zero norm")
    plus = coherent_fock_amplitudes(alpha, n_max)
    # coherent(-a) differs only by (-1)^n; combine exactly so even/odd slots cancel cleanly
    sign = (-1.0) ** np.arange(n_max + 1)
    out = np.zeros(n_max + 2, dtype=complex)
    out[1:] = cat_normalization(alpha, theta) * plus * (1.0 + np.exp(1j * theta) * sign)
    if np.isclose(np.cos(theta), -1.0, rtol=0, atol=1e-15):
        out[1::2] = 0.0
    elif np.isclose(np.cos(theta), 1.0, rtol=0, atol=1e-15):
        out[2::2] = 0.0
    return out


def make_vacuum(n_max: int = 16) -> np.ndarray:
    return make_coherent(0.0, n_max)


def make_fock(n: int, n_max: int = 16) -> np.ndarray:
    if not 0 <= n <= n_max:
        raise ConfigurationError(f"Fock level {n} outside [0, {n_max}]")
    out = np.zeros(n_max + 2, dtype=complex)
    out[ModeBasis.fock_slot(n)] = 1.0
    return out


def make_zero_oscillaton(n_max: int = 16) -> np.ndarray:
    out = np.zeros(n_max + 2, dtype=complex)
    out[Z_SLOT] = 1.0
    return out


def tensor(state_j, state_k) -> np.ndarray:
    state_j = np.asarray(state_j, dtype=complex)
    state_k = np.asarray(state_k, dtype=complex)
    if state_j.shape != state_k.shape or state_j.ndim != 1:
        raise ValueError(f"dimension mismatch: {state_j.shape} vs {state_k.shape}")
    return np.kron(state_j, state_k)


def make_state(kind: str, n_max: int = 16, alpha=0.0, theta: float = 0.0, level: int = 0) -> np.ndarray:
    """Dispatch used by the CLI: kind in {vacuum, coherent, cat, zero, fock}."""
    if kind == "vacuum":
        return make_vacuum(n_max)
    if kind == "coherent":
        return make_coherent(alpha, n_max)
    if kind == "cat":
        return make_cat(alpha, theta, n_max)
    if kind == "zero":
        return make_zero_oscillaton(n_max)
    if kind == "fock":
        return make_fock(level, n_max)
    raise ConfigurationError(f"unknown state kind {kind!r}")


def truncation_deficit(state) -> float:
    return 1.0 - float(np.vdot(state, state).real)
