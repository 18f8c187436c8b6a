"""Oscillaton-number-violating extension: Bogoliubov mixing of c and c^dagger,
the mixing angle induced by a heavy boson, and the subharmonic photon
scattering rate it predicts.

hbar and c are carried explicitly (default 1) so any consistent Gaussian
unit system can be used; q^2 = alpha_fs * hbar * c.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .basis import ConfigurationError


@dataclass(frozen=True)
class BogoliubovParams:
    gamma: float

    def __post_init__(self):
        if not abs(self.gamma) < math.pi / 4:
            raise ConfigurationError(f"|gamma|={abs(self.gamma)} must be < pi/4")

    @property
    def beta(self) -> float:
        return (math.cos(self.gamma) ** 2 - math.sin(self.gamma) ** 2) ** -0.5


def bogoliubov_apply(c, c_dag, params: BogoliubovParams):
    """c' = beta (cos g c + sin g c^dag),  c'^dag = beta (sin g c + cos g c^dag)."""
    cg, sg, b = math.cos(params.gamma), math.sin(params.gamma), params.beta
    return b * (cg * c + sg * c_dag), b * (sg * c + cg * c_dag)


@dataclass(frozen=True)
class MassiveCouplingConfig:
    epsilon: float
    omega: float = 1.0
    Omega: float = 50.0
    cutoff_c: int = 20
    cutoff_b: int = 6

    def __post_init__(self):
        if self.omega <= 0 or self.Omega <= 0:
            raise ConfigurationError("frequencies must be positive")
        ratio = self.Omega / self.omega
        if ratio < 10:
            raise ConfigurationError(f"Omega/omega={ratio:.3g} < 10: heavy-boson limit not satisfied")
        if ratio < 25:
            warnings.warn(f"Omega/omega={ratio:.3g} < 25: O(omega/Omega) corrections are large",
                          stacklevel=3)
        if abs(self.epsilon) > 0.1 * min(1.0, self.omega):
            warnings.warn("epsilon is not small; second-order result may not apply", stacklevel=3)
        if self.cutoff_c < 2 or self.cutoff_b < 1:
            raise ConfigurationError("cutoffs too small")


def gamma_closed_form(config: MassiveCouplingConfig) -> float:
    """gamma = eps^2 / (omega Omega), hbar = 1."""
    return config.epsilon ** 2 / (config.omega * config.Omega)


class CutoffError(ConfigurationError):
    pass


def coupled_oscillator_hamiltonian(config: MassiveCouplingConfig):
    """H = w(c^dag c + 1/2) + W(b^dag b + 1/2) + eps (b + b^dag)(c + c^dag).

    Returns (H, c) with c the light-mode annihilator on the product space
    (light mode outer).
    """
    c1 = np.diag(np.sqrt(np.arange(1, config.cutoff_c + 1, dtype=float)), 1)
    b1 = np.diag(np.sqrt(np.arange(1, config.cutoff_b + 1, dtype=float)), 1)
    eye_c, eye_b = np.eye(config.cutoff_c + 1), np.eye(config.cutoff_b + 1)
    c = np.kron(c1, eye_b)
    b = np.kron(eye_c, b1)
    eye = np.eye(c.shape[0])
    h = (config.omega * (c.T @ c + 0.5 * eye) + config.Omega * (b.T @ b + 0.5 * eye)
         + config.epsilon * (b + b.T) @ (c + c.T))
    return h, c


def gamma_numerical_oracle(config: MassiveCouplingConfig, boundary_tol: float = 1e-10) -> float:
    """Mixing angle from the exact ground state of the coupled oscillators.

    For the dressed vacuum |G> of d = u c + v c^dag, <G|c c|G> = u v, which to
    leading order is the c^dag admixture of c' = c + gamma c^dag. We return
    Re <G|c c|G>; no fitting is involved.
    """
    h, c = coupled_oscillator_hamiltonian(config)
    _, vecs = np.linalg.eigh(h)
    ground = vecs[:, 0]
    probs = (np.abs(ground) ** 2).reshape(config.cutoff_c + 1, config.cutoff_b + 1)
    edge = max(probs[-1, :].sum(), probs[:, -1].sum())
    if edge > boundary_tol:
        raise CutoffError(f"ground-state occupation at cutoff {edge:.3e} > {boundary_tol:.1e}")
    return float(np.real(ground.conj() @ (c @ (c @ ground))))


@dataclass(frozen=True)
class ScatteringConfig:
    omega: float = 1.0
    detuning: float = 0.01
    dipole_d: float = 1.0
    L: float = 1.0
    solid_angle: float = 0.01
    alpha_fs: float = 1 / 137.035999
    gamma: float = 0.01
    mass_m: float = 0.0
    hbar: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if self.detuning == 0:
            raise ConfigurationError("detuning must be non-zero")
        if self.omega <= 0:
            raise ConfigurationError("omega must be positive")
        if abs(self.detuning) >= 0.1 * self.hbar * self.omega:
            warnings.warn("detuning is not small compared with hbar*omega", stacklevel=3)
        if abs(self.gamma) > 0.1:
            warnings.warn("|gamma| > 0.1: small-angle results are approximate", stacklevel=3)

    @property
    def charge(self) -> float:
        return math.sqrt(self.alpha_fs * self.hbar * self.c)

    @property
    def wavelength(self) -> float:
        return 2 * math.pi * self.c / self.omega


class KinematicsError(ValueError):
    pass


def subharmonic_frequency(config: ScatteringConfig) -> float:
    """omega' = omega/2 - m c^2 / hbar (``mass_m`` is the rest energy)."""
    w = 0.5 * config.omega - config.mass_m / config.hbar
    if w <= 0:
        raise KinematicsError(f"omega'={w:.6g} <= 0: pair creation kinematically forbidden")
    return w


def state_energies(omega: float, omega_prime: float, hbar: float = 1.0) -> tuple[float, float]:
    """Initial and final energies including oscillaton zero-point terms (massless)."""
    e0 = 1.5 * hbar * omega + 0.5 * hbar * omega_prime
    ef = 0.5 * hbar * omega + 2.5 * hbar * omega_prime
    return e0, ef


def matrix_element_initial(config: ScatteringConfig) -> complex:
    """<I|H'|0> = i w q (2 pi hbar / (w L^3))^{1/2} d."""
    w = config.omega
    return 1j * w * config.charge * math.sqrt(2 * math.pi * config.hbar / (w * config.L ** 3)) * config.dipole_d


def matrix_element_final(config: ScatteringConfig) -> complex:
    """<f|H'|I> = -2i sqrt(2) w q gamma (2 pi hbar / (w' L^3))^{1/2} d."""
    w, wp = config.omega, subharmonic_frequency(config)
    return (-2j * math.sqrt(2) * w * config.charge * config.gamma
            * math.sqrt(2 * math.pi * config.hbar / (wp * config.L ** 3)) * config.dipole_d)


def matrix_element_final_elastic(config: ScatteringConfig) -> complex:
    """Elastic emission at omega' = omega: no 2 sqrt(2) gamma factor."""
    w = config.omega
    return -1j * w * config.charge * math.sqrt(2 * math.pi * config.hbar / (w * config.L ** 3)) * config.dipole_d


def subharmonic_rate(config: ScatteringConfig) -> float:
    """Gamma = 16 pi alpha^2 gamma^2 (hbar w / Delta)^2 (d^4 / (L^3 lambda)) w' dOmega."""
    wp = subharmonic_frequency(config)
    return (16 * math.pi * config.alpha_fs ** 2 * config.gamma ** 2
            * (config.hbar * config.omega / config.detuning) ** 2
            * config.dipole_d ** 4 / (config.L ** 3 * config.wavelength) * wp * config.solid_angle)


def photon_density_of_states(omega: float, config: ScatteringConfig) -> float:
    """Final photon states per unit energy in solid angle dOmega (one polarization)."""
    return (config.L ** 3 * omega ** 2 * config.solid_angle
            / ((2 * math.pi) ** 3 * config.hbar * config.c ** 3))


def _golden_rule(m_final: complex, m_initial: complex, omega_out: float, config: ScatteringConfig) -> float:
    amplitude = m_final * m_initial / config.detuning
    return 2 * math.pi / config.hbar * abs(amplitude) ** 2 * photon_density_of_states(omega_out, config)


def subharmonic_rate_pipeline(config: ScatteringConfig) -> float:
    """Second-order golden rule with the single near-resonant intermediate state."""
    return _golden_rule(matrix_element_final(config), matrix_element_initial(config),
                        subharmonic_frequency(config), config)


def elastic_rate_pipeline(config: ScatteringConfig) -> float:
    return _golden_rule(matrix_element_final_elastic(config), matrix_element_initial(config),
                        config.omega, config)


def rate_ratio(gamma: float) -> float:
    if abs(gamma) > 0.1:
        warnings.warn("|gamma| > 0.1: R = 4 gamma^2 is a small-angle result", stacklevel=2)
    return 4.0 * gamma ** 2


def rate_ratio_pipeline(config: ScatteringConfig) -> float:
    """Subharmonic over elastic rate, both from the golden-rule path."""
    return subharmonic_rate_pipeline(config) / elastic_rate_pipeline(config)
