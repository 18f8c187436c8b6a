import math
import warnings

import numpy as np
import pytest
import scipy.sparse as sp

from thirdq.basis import ConfigurationError, QuadGrid, build_phi_table
from thirdq.engine import (EngineConfig, EvolutionState, NumericalError, _Structure, coherence_scan,
                           conserved_quantities, correlation_coefficient, density, evolve,
                           initial_state, integrate, joint_density, quadrature_mean, rhs)
from thirdq.hyperfock import make_cat, make_coherent, make_fock, make_vacuum, tensor
from thirdq.oracle import oracle_evolve, oracle_joint_density

from conftest import COUPLED_TIMES

SQ2 = math.sqrt(2)


def maxdiff(a, b):
    d = a - b
    return float(abs(d).max()) if sp.issparse(d) else float(np.max(np.abs(d)))


def fock_amps(psi, n_max=16):
    d = n_max + 2
    return np.asarray(psi).reshape(d, d)[1:, 1:]


# ---- configuration ------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ConfigurationError):
        EngineConfig(steps=0)
    with pytest.raises(ConfigurationError):
        EngineConfig(t_final=-1)
    with pytest.raises(ConfigurationError):
        EngineConfig(epsilon=0.1j)
    with pytest.raises(ConfigurationError):
        EngineConfig(frame="rotating")
    assert EngineConfig().dt == pytest.approx(0.01)


def test_rwa_warning():
    with pytest.warns(UserWarning, match="rotating-wave"):
        EngineConfig(epsilon=0.3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        EngineConfig(epsilon=0.2)


# ---- right-hand side ----------------------------------------------------------------

def test_rhs_free_evolution(schrodinger_ops):
    cfg = EngineConfig(epsilon=0.0, omega_j=1.3, omega_k=0.7)
    dj, dk = rhs(schrodinger_ops, cfg)
    for n, (bj, bk) in enumerate(zip(EvolutionState(0, dj, dk, 16).cj, EvolutionState(0, dj, dk, 16).ck)):
        assert maxdiff(bj, -1j * (n + 0.5) * 1.3 * schrodinger_ops.cj[n]) == 0
        assert maxdiff(bk, -1j * (n + 0.5) * 0.7 * schrodinger_ops.ck[n]) == 0


def test_rhs_lowest_level_has_no_lowering_term(schrodinger_ops):
    cfg = EngineConfig(epsilon=0.12)
    dj, _ = rhs(schrodinger_ops, cfg)
    struct = _Structure(16, schrodinger_ops.dim)
    a_k = struct.a_prime(schrodinger_ops.stacked_k)
    c = schrodinger_ops.cj
    want = -1j * (0.5 * c[0] + 0.06 * (c[1] @ a_k.conj().T))
    assert maxdiff(dj[: schrodinger_ops.dim], want) < 1e-16


def test_rhs_matches_hand_assembled_equation(schrodinger_ops):
    cfg = EngineConfig(epsilon=0.12)
    dj, _ = rhs(schrodinger_ops, cfg)
    c, ck = schrodinger_ops.cj, schrodinger_ops.ck
    a_k = sum(math.sqrt(m) * ck[m - 1].conj().T @ ck[m] for m in range(1, 17))
    a_k_dag = sum(math.sqrt(m + 1) * ck[m + 1].conj().T @ ck[m] for m in range(16))
    for n in (0, 5, 16):
        term = (n + 0.5) * c[n]
        if n > 0:
            term = term + 0.06 * math.sqrt(n) * c[n - 1] @ a_k
        if n < 16:
            term = term + 0.06 * math.sqrt(n + 1) * c[n + 1] @ a_k_dag
        d = dj[n * schrodinger_ops.dim:(n + 1) * schrodinger_ops.dim]
        assert maxdiff(d, -1j * term) < 1e-15


@pytest.mark.parametrize("psi0", [
    tensor(make_coherent(2.0), make_vacuum()),
    tensor(make_cat(2.0, 1.0), make_coherent(0.5)),
    tensor(make_fock(3), make_fock(5)),
])
def test_rhs_conserves_oscillatons_and_photons(schrodinger_ops, psi0):
    dj, dk = rhs(schrodinger_ops, EngineConfig())
    n = np.arange(17)
    for stacked, deriv in ((schrodinger_ops.stacked_j, dj), (schrodinger_ops.stacked_k, dk)):
        v = (stacked @ psi0).reshape(17, -1)
        dv = (deriv @ psi0).reshape(17, -1)
        rates = 2 * np.real(np.sum(v.conj() * dv, axis=1))
        assert abs(rates.sum()) < 1e-12
        if stacked is schrodinger_ops.stacked_j:
            photon_rate = n @ rates
        else:
            photon_rate += n @ rates
    assert abs(photon_rate) < 1e-12


# ---- integration --------------------------------------------------------------------

def test_initial_snapshot_is_schrodinger(schrodinger_ops):
    snap = evolve(EngineConfig(), [0.0]).at(0.0)
    assert maxdiff(snap.stacked_j, schrodinger_ops.stacked_j) == 0
    assert maxdiff(snap.stacked_k, schrodinger_ops.stacked_k) == 0


def test_free_evolution_phases(free_run, schrodinger_ops):
    snap = free_run.at(12.0)
    for n in range(17):
        want = np.exp(-1j * (n + 0.5) * 12.0) * schrodinger_ops.cj[n]
        assert maxdiff(snap.cj[n], want) < 1e-9
        assert maxdiff(snap.ck[n], np.exp(-1j * (n + 0.5) * 12.0) * schrodinger_ops.ck[n]) < 1e-9


def test_richardson_fourth_order():
    ends = {s: evolve(EngineConfig(t_final=3, steps=s)).at(3.0).stacked_j for s in (25, 50, 100)}
    ratio = maxdiff(ends[25], ends[50]) / maxdiff(ends[50], ends[100])
    assert 14 < ratio < 18


def test_lab_frame_converges_to_same_solution():
    inter = evolve(EngineConfig(t_final=1, steps=100)).at(1.0).stacked_j
    errs = [maxdiff(evolve(EngineConfig(t_final=1, steps=s, frame="lab")).at(1.0).stacked_j, inter)
            for s in (100, 200)]
    assert 13 < errs[0] / errs[1] < 19
    assert errs[1] < 1e-5


def test_time_reversal():
    cfg = EngineConfig(t_final=3, steps=300)
    fwd = evolve(cfg).at(3.0)
    back = integrate(fwd, 0.0, 300, cfg, [0.0]).at(0.0)
    start = initial_state(16)
    assert maxdiff(back.stacked_j, start.stacked_j) < 1e-8
    assert maxdiff(back.stacked_k, start.stacked_k) < 1e-8


def test_deterministic():
    cfg = EngineConfig(t_final=0.5, steps=50)
    a, b = evolve(cfg).at(0.5), evolve(cfg).at(0.5)
    assert (a.stacked_j != b.stacked_j).nnz == 0 and (a.stacked_k != b.stacked_k).nnz == 0


def test_sample_times_off_grid_rejected():
    with pytest.raises(ConfigurationError):
        evolve(EngineConfig(t_final=1, steps=10), [0.05])
    with pytest.raises(ConfigurationError):
        evolve(EngineConfig(t_final=1, steps=10), [1.5])


def test_only_requested_snapshots_kept():
    traj = evolve(EngineConfig(t_final=1, steps=10), [0.0, 0.3, 1.0])
    assert traj.times == pytest.approx([0.0, 0.3, 1.0])
    with pytest.raises(KeyError):
        traj.at(0.5)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_non_finite_aborts():
    with pytest.warns(UserWarning):
        cfg = EngineConfig(epsilon=1e200, t_final=1, steps=1)
    with pytest.raises(NumericalError, match="increase steps"):
        evolve(cfg)


def test_heisenberg_matches_exact_propagator(coupled_run, coherent_psi0):
    # the Z_j x F_m component of c_jn(t)|psi0> carries the Schrodinger amplitude psi(t)[n, m]
    # up to a phase convention, so compare occupation probabilities
    snap = coupled_run.at(12.0)
    amps = oracle_evolve(fock_amps(coherent_psi0), 0.12, t=12.0)
    got = np.array([(snap.cj[n] @ coherent_psi0).reshape(18, 18)[0, 1:] for n in range(17)])
    assert np.max(np.abs(np.abs(got) ** 2 - np.abs(amps) ** 2)) < 1e-9


# ---- conservation -------------------------------------------------------------------

def test_conservation_over_coupled_run(coupled_run):
    drift = coupled_run.drift()
    assert set(drift) == {"oscillatons_j", "oscillatons_k", "photons_j", "photons_k", "photons_total"}
    for key in ("oscillatons_j", "oscillatons_k", "photons_total"):
        assert drift[key] < 1e-8
    assert drift["photons_j"] > 1.0  # photons move between the modes


@pytest.mark.parametrize("psi0", [
    tensor(make_cat(2.0, 0.3), make_coherent(0.8)),
    tensor(make_fock(4), make_fock(2)),
])
def test_conservation_other_states(coupled_run, psi0):
    q0 = conserved_quantities(coupled_run.at(0.0), psi0)
    for t in COUPLED_TIMES[1:]:
        q = conserved_quantities(coupled_run.at(t), psi0)
        for key in ("oscillatons_j", "oscillatons_k", "photons_total"):
            assert abs(q[key] - q0[key]) < 1e-8


# ---- observables --------------------------------------------------------------------

def test_density_t0_coherent(hbasis, coherent_psi0, schrodinger_ops):
    p = density(schrodinger_ops, "j", hbasis, coherent_psi0)
    gauss = np.exp(-(hbasis.x - 2 * SQ2) ** 2) / np.sqrt(np.pi)
    assert np.max(np.abs(p - gauss)) < 1e-3  # truncation tail of the coherent state only
    mean = hbasis.integrate(hbasis.x * p) / hbasis.integrate(p)
    assert mean == pytest.approx(2 * SQ2, abs=2e-5)
    var = hbasis.integrate((hbasis.x - mean) ** 2 * p) / hbasis.integrate(p)
    assert var == pytest.approx(0.5, abs=2e-4)


def test_density_t0_vacuum_mode(hbasis, coherent_psi0, schrodinger_ops):
    p = density(schrodinger_ops, "k", hbasis, coherent_psi0)
    norm = np.vdot(coherent_psi0, coherent_psi0).real  # truncated coherent norm, not renormalized
    assert np.max(np.abs(p - norm * np.exp(-hbasis.x ** 2) / np.sqrt(np.pi))) < 1e-14


def test_mean_position_follows_rwa_solution(coupled_run, coherent_psi0):
    s0 = coupled_run.at(0.0)
    struct = _Structure(16, s0.dim)
    a_j0 = np.vdot(coherent_psi0, struct.a_prime(s0.stacked_j) @ coherent_psi0)
    a_k0 = np.vdot(coherent_psi0, struct.a_prime(s0.stacked_k) @ coherent_psi0)
    for t in COUPLED_TIMES:
        snap = coupled_run.at(t)
        rot = np.exp(-1j * t)
        a_j = rot * (np.cos(0.06 * t) * a_j0 - 1j * np.sin(0.06 * t) * a_k0)
        a_k = rot * (np.cos(0.06 * t) * a_k0 - 1j * np.sin(0.06 * t) * a_j0)
        assert quadrature_mean(snap, "j", coherent_psi0) == pytest.approx(SQ2 * a_j.real, abs=1e-9)
        assert quadrature_mean(snap, "k", coherent_psi0) == pytest.approx(SQ2 * a_k.real, abs=1e-9)


def test_amplitude_transfer(coupled_run, coherent_psi0):
    q0, q12 = (conserved_quantities(coupled_run.at(t), coherent_psi0) for t in (0.0, 12.0))
    assert q12["photons_j"] < q0["photons_j"] and q12["photons_k"] > q0["photons_k"]
    assert q12["photons_j"] == pytest.approx(q0["photons_j"] * math.cos(0.72) ** 2, rel=1e-6)


def test_joint_density_t0_product(coherent_psi0, schrodinger_ops):
    g = QuadGrid(n_points=201)
    hb = build_phi_table(16, g)
    cat = tensor(make_cat(2.0, 0.7), make_vacuum())
    p = joint_density(schrodinger_ops, hb, hb, cat)
    pj = density(schrodinger_ops, "j", hb, cat)
    pk = np.exp(-g.x ** 2) / np.sqrt(np.pi)
    assert np.max(np.abs(p - np.outer(pj, pk))) < 1e-14
    assert abs(correlation_coefficient(p, g.x, g.x)) < 1e-12


def test_joint_density_normalized(coupled_run, coherent_psi0):
    g = QuadGrid(n_points=201)
    hb = build_phi_table(16, g)
    w = g.weights()
    for t in COUPLED_TIMES:
        p = joint_density(coupled_run.at(t), hb, hb, coherent_psi0)
        assert abs(w @ p @ w - 1) < 1e-5


def test_joint_density_correlation_matches_oracle(coupled_run):
    g = QuadGrid(n_points=201)
    hb = build_phi_table(16, g)
    cat = tensor(make_cat(2.0, 0.0), make_vacuum())
    p = joint_density(coupled_run.at(12.0), hb, hb, cat)
    q = oracle_joint_density(oracle_evolve(fock_amps(cat), 0.12, t=12.0), g)
    r_engine = correlation_coefficient(p, g.x, g.x)
    assert abs(r_engine) > 0.05
    assert abs(r_engine - correlation_coefficient(q, g.x, g.x)) < 1e-6
    assert np.max(np.abs(p - q)) < 1e-6


def test_coherence_scan_real_and_sinusoidal(schrodinger_ops, coupled_run):
    thetas = np.linspace(0, 2 * np.pi, 25)
    basis = np.c_[np.ones_like(thetas), np.cos(thetas), np.sin(thetas)]
    for snap in (schrodinger_ops, coupled_run.at(12.0)):
        # the cat normalization carries a cos(theta) e^{-8} factor; undo it before fitting
        vals = coherence_scan(snap, 2.0, thetas) * (1 + np.exp(-8) * np.cos(thetas))
        coef = np.linalg.lstsq(basis, vals, rcond=None)[0]
        assert np.max(np.abs(basis @ coef - vals)) < 1e-12


def test_coherence_contrast_drops(schrodinger_ops, coupled_run):
    thetas = np.linspace(0, 2 * np.pi, 37)
    c0 = np.ptp(coherence_scan(schrodinger_ops, 2 * SQ2, thetas))
    c12 = np.ptp(coherence_scan(coupled_run.at(12.0), 2 * SQ2, thetas))
    assert c12 < c0


# ---- cutoff sensitivity -------------------------------------------------------------

def _short_run_observables(n_max, make_psi):
    snap = evolve(EngineConfig(n_max=n_max, t_final=1, steps=100)).at(1.0)
    psi = make_psi(n_max)
    hb = build_phi_table(n_max)
    return density(snap, "j", hb, psi), quadrature_mean(snap, "j", psi)


def test_cutoff_invariance_for_contained_state():
    # support inside every cutoff: the truncated dynamics must not depend on n_max
    make_psi = lambda n: tensor(make_fock(3, n) + 0.5 * make_fock(5, n), make_fock(2, n)) / math.sqrt(1.25)
    ref = _short_run_observables(12, make_psi)
    for n_max in (16, 20):
        p, m = _short_run_observables(n_max, make_psi)
        assert np.max(np.abs(p - ref[0])) < 1e-5
        assert abs(m - ref[1]) < 1e-5


def test_cutoff_convergence_for_coherent_state():
    make_psi = lambda n: tensor(make_coherent(2.0, n), make_vacuum(n))
    obs = {n: _short_run_observables(n, make_psi) for n in (16, 20, 24)}
    move16 = np.max(np.abs(obs[16][0] - obs[24][0]))
    move20 = np.max(np.abs(obs[20][0] - obs[24][0]))
    # the move is set by the coherent tail cut off at t = 0 and shrinks with the cutoff
    assert move16 < 1e-3 and move20 < 5e-5 and move16 > 5 * move20
    assert abs(obs[20][1] - obs[24][1]) < 1e-6
