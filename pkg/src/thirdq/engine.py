"""Heisenberg-picture evolution of the c_jn(t) operators for two modes coupled
by a rotating-wave beam splitter, plus the observables built on them.

The level operators of one mode are stored stacked: a sparse matrix of shape
((n_max+1)*D, D) whose block n is c_n(t). Expectation values always use the
t = 0 state.

Two integration frames are available. ``"lab"`` steps the equations of motion
exactly as written, free phases included. ``"interaction"`` (default) factors
the free evolution c_n -> exp(-i(n+1/2) w t) c_n out analytically and
steps only the coupling; with RK4 at fixed step this removes the O(n w dt)^4
phase error on high levels, which is what dominates the lab-frame error.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .basis import ConfigurationError, HermiteBasis
from .hyperfock import JointHyperBasis, make_cat, make_vacuum, tensor
from .operators import HyperFockOperators, coherence_op, dagger, prune


class NumericalError(RuntimeError):
    """Integration produced non-finite values or an unphysical observable."""


FRAMES = ("interaction", "lab")


@dataclass(frozen=True)
class EngineConfig:
    omega_j: float = 1.0
    omega_k: float = 1.0
    epsilon: float = 0.12
    t_final: float = 12.0
    steps: int = 1200
    n_max: int = 16
    frame: str = "interaction"

    def __post_init__(self):
        if isinstance(self.epsilon, complex) or not np.isreal(self.epsilon):
            raise ConfigurationError("epsilon must be real")
        if self.steps < 1:
            raise ConfigurationError(f"steps={self.steps} must be >= 1")
        if self.t_final < 0:
            raise ConfigurationError(f"t_final={self.t_final} must be >= 0")
        if self.n_max < 1:
            raise ConfigurationError(f"n_max={self.n_max} must be >= 1")
        if self.frame not in FRAMES:
            raise ConfigurationError(f"frame must be one of {FRAMES}, got {self.frame!r}")
        if abs(self.epsilon) >= min(self.omega_j, self.omega_k) / 4:
            warnings.warn("epsilon >= min(omega)/4: rotating-wave approximation is questionable",
                          stacklevel=3)

    @property
    def dt(self) -> float:
        return self.t_final / self.steps


@dataclass
class EvolutionState:
    t: float
    stacked_j: sp.csr_matrix
    stacked_k: sp.csr_matrix
    n_max: int

    @property
    def dim(self) -> int:
        return self.stacked_j.shape[1]

    def _blocks(self, stacked) -> list[sp.csr_matrix]:
        d = self.dim
        return [stacked[n * d:(n + 1) * d] for n in range(self.n_max + 1)]

    @property
    def cj(self) -> list[sp.csr_matrix]:
        return self._blocks(self.stacked_j)

    @property
    def ck(self) -> list[sp.csr_matrix]:
        return self._blocks(self.stacked_k)

    def stacked(self, mode: str) -> sp.csr_matrix:
        return {"j": self.stacked_j, "k": self.stacked_k}[mode]

    def levels(self, mode: str) -> list[sp.csr_matrix]:
        return self._blocks(self.stacked(mode))


@dataclass
class Trajectory:
    config: EngineConfig
    snapshots: list[EvolutionState]
    monitor: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def times(self) -> list[float]:
        return [s.t for s in self.snapshots]

    def at(self, t: float) -> EvolutionState:
        for snap in self.snapshots:
            if math.isclose(snap.t, t, rel_tol=1e-12, abs_tol=1e-12):
                return snap
        raise KeyError(f"no snapshot at t={t}")

    def drift(self) -> dict[str, float]:
        return {key: float(np.max(np.abs(vals - vals[0]))) for key, vals in self.monitor.items()
                if key != "t"}


class _Structure:
    """Constant sparse matrices shared by every right-hand-side evaluation."""

    def __init__(self, n_max: int, dim: int):
        levels = n_max + 1
        eye = sp.identity(dim, format="csr", dtype=complex)
        n = np.arange(levels)
        self.n_max, self.dim = n_max, dim
        # block n <- sqrt(n) * block n-1
        self.shift_down = sp.kron(sp.diags(np.sqrt(n[1:]), -1, shape=(levels, levels)), eye, format="csr")
        # block n <- sqrt(n+1) * block n+1
        self.shift_up = sp.kron(sp.diags(np.sqrt(n[1:]), 1, shape=(levels, levels)), eye, format="csr")
        self.sqrt_m = sp.kron(sp.diags(np.sqrt(n[1:])), eye, format="csr")
        self.energies = n + 0.5

    def a_prime(self, stacked) -> sp.csr_matrix:
        """sum_m sqrt(m) c_{m-1}^dagger c_m built from stacked level operators."""
        d = self.dim
        lower = stacked[: self.n_max * d]
        upper = stacked[d:]
        return dagger(lower) @ (self.sqrt_m @ upper)

    def phase_rows(self, omega: float, t: float) -> sp.dia_matrix:
        ph = np.exp(-1j * self.energies * omega * t)
        return sp.diags(np.repeat(ph, self.dim))


def _coupling(struct: _Structure, own, other_a, phase):
    """sqrt(n) c_{n-1} A e^{i phase} + sqrt(n+1) c_{n+1} A^dagger e^{-i phase}."""
    term = (struct.shift_down @ own) @ other_a
    term_dag = (struct.shift_up @ own) @ dagger(other_a)
    if phase != 0.0:
        return np.exp(1j * phase) * term + np.exp(-1j * phase) * term_dag
    return term + term_dag


def rhs(state: EvolutionState, config: EngineConfig, struct: _Structure | None = None):
    """Lab-frame time derivatives (d c_j/dt, d c_k/dt) as stacked matrices.

    i dc_jn/dt = (n+1/2) w_j c_jn
                 + eps/2 sqrt(n) c_{j,n-1} sum_m sqrt(m) c_{k,m-1}^dag c_km
                 + eps/2 sqrt(n+1) c_{j,n+1} sum_m sqrt(m+1) c_{k,m+1}^dag c_km
    and the same with j <-> k.
    """
    struct = struct or _Structure(state.n_max, state.dim)
    cj, ck = state.stacked_j, state.stacked_k
    half_eps = 0.5 * config.epsilon
    free_j = sp.diags(np.repeat(struct.energies * config.omega_j, state.dim)) @ cj
    free_k = sp.diags(np.repeat(struct.energies * config.omega_k, state.dim)) @ ck
    dj = -1j * (free_j + half_eps * _coupling(struct, cj, struct.a_prime(ck), 0.0))
    dk = -1j * (free_k + half_eps * _coupling(struct, ck, struct.a_prime(cj), 0.0))
    return dj, dk


def _rhs_interaction(t, cj, ck, config: EngineConfig, struct: _Structure):
    detune = (config.omega_j - config.omega_k) * t
    half_eps = 0.5 * config.epsilon
    dj = (-1j * half_eps) * _coupling(struct, cj, struct.a_prime(ck), detune)
    dk = (-1j * half_eps) * _coupling(struct, ck, struct.a_prime(cj), -detune)
    return dj, dk


def initial_state(n_max: int = 16) -> EvolutionState:
    ops = HyperFockOperators(JointHyperBasis(n_max))
    return EvolutionState(
        t=0.0,
        stacked_j=sp.vstack(ops.c_list("j"), format="csr"),
        stacked_k=sp.vstack(ops.c_list("k"), format="csr"),
        n_max=n_max,
    )


def _clean(m) -> sp.csr_matrix:
    m = sp.csr_matrix(m)
    m.data[np.abs(m.data) <= 1e-15] = 0.0
    m.eliminate_zeros()
    return m


def _check_finite(m, t):
    if not np.all(np.isfinite(m.data)):
        raise NumericalError(f"non-finite operator entries at t={t:.6g}; increase steps")


class _Monitor:
    def __init__(self, psi0):
        self.psi0 = np.asarray(psi0, dtype=complex)
        self.rows = []

    def record(self, state: EvolutionState):
        self.rows.append((state.t, *conserved_quantities(state, self.psi0).values()))

    def as_dict(self):
        arr = np.array(self.rows, dtype=float)
        keys = ("t", "oscillatons_j", "oscillatons_k", "photons_j", "photons_k", "photons_total")
        return {k: arr[:, i] for i, k in enumerate(keys)}


def integrate(state: EvolutionState, t_end: float, steps: int, config: EngineConfig,
              sample_times=None, monitor_state=None) -> Trajectory:
    """Classic RK4 from ``state.t`` to ``t_end`` in ``steps`` equal steps.

    ``t_end`` may lie before ``state.t`` (negative step). Only the requested
    sample times are stored.
    """
    if steps < 1:
        raise ConfigurationError("steps must be >= 1")
    t0 = state.t
    dt = (t_end - t0) / steps
    struct = _Structure(state.n_max, state.dim)
    wanted = _sample_indices(t0, dt, steps, [t_end] if sample_times is None else sample_times)
    interaction = config.frame == "interaction"

    def to_frame(st: EvolutionState):
        if not interaction:
            return st.stacked_j, st.stacked_k
        return (struct.phase_rows(config.omega_j, -st.t) @ st.stacked_j,
                struct.phase_rows(config.omega_k, -st.t) @ st.stacked_k)

    def from_frame(t, yj, yk) -> EvolutionState:
        if interaction:
            yj = struct.phase_rows(config.omega_j, t) @ yj
            yk = struct.phase_rows(config.omega_k, t) @ yk
        return EvolutionState(t=t, stacked_j=_clean(yj), stacked_k=_clean(yk), n_max=state.n_max)

    def f(t, yj, yk):
        if interaction:
            return _rhs_interaction(t, yj, yk, config, struct)
        return rhs(EvolutionState(t, yj, yk, state.n_max), config, struct)

    monitor = _Monitor(monitor_state) if monitor_state is not None else None
    yj, yk = to_frame(state)
    snapshots = []
    for i in range(steps + 1):
        t = t0 + i * dt
        if i in wanted or monitor is not None:
            snap = from_frame(t, yj, yk)
            if i in wanted:
                snapshots.append(snap)
            if monitor is not None:
                monitor.record(snap)
        if i == steps:
            break
        k1j, k1k = f(t, yj, yk)
        k2j, k2k = f(t + dt / 2, yj + (dt / 2) * k1j, yk + (dt / 2) * k1k)
        k3j, k3k = f(t + dt / 2, yj + (dt / 2) * k2j, yk + (dt / 2) * k2k)
        k4j, k4k = f(t + dt, yj + dt * k3j, yk + dt * k3k)
        yj = _clean(yj + (dt / 6) * (k1j + 2 * k2j + 2 * k3j + k4j))
        yk = _clean(yk + (dt / 6) * (k1k + 2 * k2k + 2 * k3k + k4k))
        _check_finite(yj, t + dt)
        _check_finite(yk, t + dt)
    return Trajectory(config=config, snapshots=snapshots,
                      monitor=monitor.as_dict() if monitor is not None else {})


def _sample_indices(t0, dt, steps, sample_times) -> set[int]:
    out = set()
    for ts in sample_times:
        if dt == 0:
            if not math.isclose(ts, t0, abs_tol=1e-12):
                raise ConfigurationError(f"sample time {ts} not reachable in a zero-length run")
            out.add(0)
            continue
        k = round((ts - t0) / dt)
        if not 0 <= k <= steps or abs(t0 + k * dt - ts) > 1e-9 * max(1.0, abs(ts)):
            raise ConfigurationError(f"sample time {ts} is not on the step grid (dt={dt:.6g})")
        out.add(k)
    return out


def evolve(config: EngineConfig, sample_times=None, initial: EvolutionState | None = None,
           monitor_state=None) -> Trajectory:
    """Integrate from t=0 (Schrodinger-picture operators) to ``config.t_final``."""
    state = initial if initial is not None else initial_state(config.n_max)
    return integrate(state, config.t_final, config.steps, config, sample_times, monitor_state)


# observables -------------------------------------------------------------------------

def applied(state: EvolutionState, mode: str, psi0) -> np.ndarray:
    """Rows n: c_n(t)|psi0>."""
    return np.asarray(state.stacked(mode) @ np.asarray(psi0, dtype=complex)).reshape(
        state.n_max + 1, state.dim)


def conserved_quantities(state: EvolutionState, psi0) -> dict[str, float]:
    n = np.arange(state.n_max + 1)
    occ_j = np.sum(np.abs(applied(state, "j", psi0)) ** 2, axis=1)
    occ_k = np.sum(np.abs(applied(state, "k", psi0)) ** 2, axis=1)
    return {
        "oscillatons_j": float(occ_j.sum()),
        "oscillatons_k": float(occ_k.sum()),
        "photons_j": float(n @ occ_j),
        "photons_k": float(n @ occ_k),
        "photons_total": float(n @ (occ_j + occ_k)),
    }


def _clip_density(p, what: str):
    if np.min(p) < -1e-10:
        raise NumericalError(f"{what} reached {np.min(p):.3e} < 0; integration failed")
    return np.where(p < 0, 0.0, p)


def density(state: EvolutionState, mode: str, hbasis: HermiteBasis, psi0) -> np.ndarray:
    """P(x, t) = <psi^dagger(x, t) psi(x, t)> on the grid of ``hbasis``."""
    vecs = applied(state, mode, psi0)
    amps = hbasis.phi_table[: state.n_max + 1].T @ vecs
    return _clip_density(np.sum(np.abs(amps) ** 2, axis=1), "density")


def joint_density(state: EvolutionState, hbasis_j: HermiteBasis, hbasis_k: HermiteBasis,
                  psi0) -> np.ndarray:
    """P(x_j, x_k, t) = <psi_j^dag psi_k^dag psi_k psi_j>, shape (len(x_j), len(x_k))."""
    levels, d = state.n_max + 1, state.dim
    vj = applied(state, "j", psi0)                       # (n, D)
    both = np.asarray(state.stacked_k @ vj.T)            # (m*D, n)
    both = both.reshape(levels, d, levels)               # [m, s, n]
    support = np.flatnonzero(np.any(both != 0, axis=(0, 2)))
    both = both[:, support, :]
    phi_j = hbasis_j.phi_table[:levels].T                # (xj, n)
    phi_k = hbasis_k.phi_table[:levels].T                # (xk, m)
    out = np.zeros((phi_j.shape[0], phi_k.shape[0]))
    for s in range(both.shape[1]):
        amp = phi_j @ both[:, s, :].T @ phi_k.T
        out += np.abs(amp) ** 2
    return _clip_density(out, "joint density")


def quadrature_mean(state: EvolutionState, mode: str, psi0) -> float:
    """<x(t)> = sqrt(2) Re <a'(t)>."""
    struct = _Structure(state.n_max, state.dim)
    a = struct.a_prime(state.stacked(mode))
    psi0 = np.asarray(psi0, dtype=complex)
    return float(np.sqrt(2.0) * np.vdot(psi0, a @ psi0).real)


def coherence_value(state: EvolutionState, mode: str, x: float, delta: float, psi0,
                    op=None) -> complex:
    op = coherence_op(x, delta, state.levels(mode)) if op is None else op
    psi0 = np.asarray(psi0, dtype=complex)
    return complex(np.vdot(psi0, op @ psi0))


def cat_initial(alpha: float, theta: float, n_max: int) -> np.ndarray:
    return tensor(make_cat(alpha, theta, n_max), make_vacuum(n_max))


def coherence_scan(state: EvolutionState, delta: float, thetas, alpha: float = 2.0,
                   x: float = 0.0, mode: str = "j") -> np.ndarray:
    """<C_j(x, delta)> for psi0 = cat(alpha, theta) x vacuum, for each theta."""
    op = coherence_op(x, delta, state.levels(mode))
    vals = np.array([coherence_value(state, mode, x, delta, cat_initial(alpha, th, state.n_max), op)
                     for th in thetas])
    if np.max(np.abs(vals.imag)) > 1e-10:
        raise NumericalError(f"coherence imaginary residue {np.max(np.abs(vals.imag)):.3e}")
    return vals.real


def default_deltas() -> np.ndarray:
    return np.linspace(0.1, 4.0, 79)


def maximize_delta(state: EvolutionState, thetas, alpha: float = 2.0, deltas=None,
                   x: float = 0.0) -> tuple[float, float]:
    """Delta with the largest max - min contrast of the theta scan."""
    deltas = default_deltas() if deltas is None else np.asarray(deltas)
    contrasts = [np.ptp(coherence_scan(state, d, thetas, alpha, x)) for d in deltas]
    best = int(np.argmax(contrasts))
    return float(deltas[best]), float(contrasts[best])


def correlation_coefficient(p, x_j, x_k) -> float:
    """Pearson correlation of x_j and x_k under the (grid-normalized) density p."""
    p = np.asarray(p) / np.sum(p)
    xj, xk = np.meshgrid(x_j, x_k, indexing="ij")
    mj, mk = np.sum(p * xj), np.sum(p * xk)
    cov = np.sum(p * (xj - mj) * (xk - mk))
    return float(cov / np.sqrt(np.sum(p * (xj - mj) ** 2) * np.sum(p * (xk - mk) ** 2)))
