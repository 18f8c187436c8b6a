"""Sparse matrix representations of third-quantized operators.

All operators act on the joint (n_max+2)^2 space of ``JointHyperBasis``.
In the N <= 1 truncation c_n maps F_n -> Z and c_n^dagger maps Z -> F_n;
the image of c_n^dagger on an occupied mode (N = 2) lies outside the space
and is dropped.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .basis import eigenfunctions
from .hyperfock import JointHyperBasis, Z_SLOT

PRUNE_TOL = 1e-15
MODES = ("j", "k")


def prune(op, tol: float = PRUNE_TOL) -> sp.csr_matrix:
    """Drop entries with |value| <= tol; returns canonical CSR."""
    op = sp.csr_matrix(op, dtype=complex, copy=True)
    op.data[np.abs(op.data) <= tol] = 0.0
    op.eliminate_zeros()
    op.sort_indices()
    return op


def dagger(op) -> sp.csr_matrix:
    return sp.csr_matrix(op.conj().T)


def _embed(single, mode: str, dim: int) -> sp.csr_matrix:
    eye = sp.identity(dim, dtype=complex, format="csr")
    if mode == "j":
        return sp.kron(single, eye, format="csr")
    if mode == "k":
        return sp.kron(eye, single, format="csr")
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


class HyperFockOperators:
    """Builds and caches the base operators for one ``JointHyperBasis``."""

    def __init__(self, basis: JointHyperBasis | int = 16):
        self.basis = basis if isinstance(basis, JointHyperBasis) else JointHyperBasis(basis)
        self.n_max = self.basis.n_max
        self.dim = self.basis.joint_dim

    def _check_level(self, n: int):
        if not 0 <= n <= self.n_max:
            raise ValueError(f"level n={n} outside [0, {self.n_max}]")

    @lru_cache(maxsize=None)
    def c(self, mode: str, n: int) -> sp.csr_matrix:
        self._check_level(n)
        d = self.basis.dim
        single = sp.csr_matrix(([1.0 + 0j], ([Z_SLOT], [n + 1])), shape=(d, d))
        return _embed(single, mode, d)

    @lru_cache(maxsize=None)
    def c_dag(self, mode: str, n: int) -> sp.csr_matrix:
        return dagger(self.c(mode, n))

    def c_list(self, mode: str) -> list[sp.csr_matrix]:
        return [self.c(mode, n) for n in range(self.n_max + 1)]

    @lru_cache(maxsize=None)
    def a_prime(self, mode: str) -> sp.csr_matrix:
        out = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for n in range(1, self.n_max + 1):
            out = out + np.sqrt(n) * (self.c_dag(mode, n - 1) @ self.c(mode, n))
        return prune(out)

    @lru_cache(maxsize=None)
    def a_prime_dag(self, mode: str) -> sp.csr_matrix:
        out = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for n in range(self.n_max):
            out = out + np.sqrt(n + 1) * (self.c_dag(mode, n + 1) @ self.c(mode, n))
        return prune(out)

    @lru_cache(maxsize=None)
    def number_ops(self, mode: str):
        """(per-level N_n list, photon number sum n N_n, oscillaton number sum N_n)."""
        levels = [prune(self.c_dag(mode, n) @ self.c(mode, n)) for n in range(self.n_max + 1)]
        photons = prune(sum(n * op for n, op in enumerate(levels)))
        oscillatons = prune(sum(levels))
        return levels, photons, oscillatons

    def photon_number(self, mode: str) -> sp.csr_matrix:
        return self.number_ops(mode)[1]

    def oscillaton_number(self, mode: str) -> sp.csr_matrix:
        return self.number_ops(mode)[2]

    def quadrature(self, mode: str) -> sp.csr_matrix:
        """x = (a' + a'^dagger)/sqrt(2)."""
        return prune((self.a_prime(mode) + self.a_prime_dag(mode)) / np.sqrt(2.0))


def field_op(x: float, c_matrices, n_max: int | None = None) -> sp.csr_matrix:
    """psi(x) = sum_n phi_n(x) c_n for the given (possibly time-evolved) c_n."""
    c_matrices = list(c_matrices)
    if n_max is not None and len(c_matrices) != n_max + 1:
        raise ValueError(f"expected {n_max + 1} level matrices, got {len(c_matrices)}")
    phis = eigenfunctions(len(c_matrices) - 1, float(x))
    out = phis[0] * c_matrices[0]
    for phi, c in zip(phis[1:], c_matrices[1:]):
        out = out + phi * c
    return prune(out)


def coherence_op(x: float, delta: float, c_matrices, n_max: int | None = None,
                 x_limits: tuple[float, float] | None = None) -> sp.csr_matrix:
    """C(x, delta) = 1/2 psi^dagger(x + delta) psi(x - delta) + h.c."""
    if x_limits is not None:
        lo, hi = x_limits
        if not (lo <= x - delta <= hi and lo <= x + delta <= hi):
            raise ValueError(f"x +/- delta = {x - delta}, {x + delta} outside grid [{lo}, {hi}]")
    plus = field_op(x + delta, c_matrices, n_max)
    minus = field_op(x - delta, c_matrices, n_max)
    half = 0.5 * (dagger(plus) @ minus)
    return prune(half + dagger(half))


def commutator(a, b) -> sp.csr_matrix:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return prune(a @ b - b @ a)


def expectation(op, state) -> complex:
    state = np.asarray(state)
    return complex(np.vdot(state, op @ state))
