import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from thirdq.basis import eigenfunctions
from thirdq.hyperfock import (JointHyperBasis, make_cat, make_coherent, make_fock, make_vacuum,
                              make_zero_oscillaton, tensor)
from thirdq.operators import (HyperFockOperators, coherence_op, commutator, dagger, expectation,
                              field_op, prune)

OPS = HyperFockOperators(16)
JB = OPS.basis


def dense(m):
    return m.toarray()


def is_zero(m):
    return m.nnz == 0


def test_c_lowers_to_zero_oscillaton():
    psi = tensor(make_fock(3), make_fock(0))
    out = OPS.c("j", 3) @ psi
    want = tensor(make_zero_oscillaton(), make_fock(0))
    assert np.array_equal(out, want)


def test_c_on_empty_mode_vanishes():
    for k_state in (make_vacuum(), make_coherent(1.0), make_zero_oscillaton()):
        psi = tensor(make_zero_oscillaton(), k_state)
        assert np.count_nonzero(OPS.c("j", 3) @ psi) == 0


@pytest.mark.parametrize("n", range(17))
def test_commutator_on_empty_sector(n):
    zz = tensor(make_zero_oscillaton(), make_zero_oscillaton())
    comm = commutator(OPS.c("j", n), OPS.c_dag("j", n))
    assert expectation(comm, zz) == 1


def test_c_dag_is_adjoint():
    for mode in ("j", "k"):
        for n in range(17):
            assert (OPS.c_dag(mode, n) != dagger(OPS.c(mode, n))).nnz == 0


def test_c_level_range():
    with pytest.raises(ValueError):
        OPS.c("j", 17)
    with pytest.raises(ValueError):
        OPS.c("x", 0)


def test_a_prime_lowers():
    out = OPS.a_prime("j") @ tensor(make_fock(1), make_vacuum())
    assert np.array_equal(out, tensor(make_fock(0), make_vacuum()))
    assert np.count_nonzero(OPS.a_prime("j") @ tensor(make_zero_oscillaton(), make_vacuum())) == 0


def _single_mode_block(op, mode="j"):
    """Restrict a mode operator to that mode's F sector with the other mode in F0."""
    idx = [JB.index(l, 1) if mode == "j" else JB.index(1, l) for l in range(1, 18)]
    return dense(op)[np.ix_(idx, idx)]


def test_a_prime_is_standard_truncated_annihilator():
    a = np.diag(np.sqrt(np.arange(1, 17)), 1)
    for mode in ("j", "k"):
        assert np.array_equal(_single_mode_block(OPS.a_prime(mode), mode), a)
        assert np.array_equal(_single_mode_block(OPS.a_prime_dag(mode), mode), a.T)


def test_a_prime_commutator_boundary_form():
    comm = _single_mode_block(commutator(OPS.a_prime("j"), OPS.a_prime_dag("j")))
    want = np.eye(17)
    want[16, 16] = 1 - 17  # I - (n_max + 1) |n_max><n_max|
    assert np.max(np.abs(comm - want)) < 1e-14


def test_number_operators():
    levels, photons, osc = OPS.number_ops("j")
    assert expectation(photons, tensor(make_fock(4), make_fock(0))) == 4
    psi = tensor(make_zero_oscillaton(), make_fock(2))
    assert expectation(OPS.oscillaton_number("j"), psi) == 0
    assert expectation(OPS.oscillaton_number("k"), psi) == 1
    for op in levels + [photons, osc]:
        assert np.count_nonzero(dense(op) - np.diag(np.diag(dense(op)))) == 0


def test_coherent_photon_mean_is_truncated_poisson():
    psi = tensor(make_coherent(2.0), make_vacuum())
    n = np.arange(16)
    p = np.exp(-4) * 4.0 ** n / np.array([math.factorial(int(k)) for k in n])
    assert expectation(OPS.photon_number("j"), psi).real == pytest.approx(4 * p.sum(), rel=1e-13)


@pytest.mark.parametrize("n", [0, 3, 16])
@pytest.mark.parametrize("x", [-1.7, 0.0, 2.2])
def test_field_op_action(n, x):
    k_state = make_coherent(0.7)
    psi = tensor(make_fock(n), k_state)
    out = field_op(x, OPS.c_list("j"), n_max=16) @ psi
    want = float(eigenfunctions(16, x)[n]) * tensor(make_zero_oscillaton(), k_state)
    assert np.max(np.abs(out - want)) < 1e-15


def test_field_op_length_check():
    with pytest.raises(ValueError):
        field_op(0.0, OPS.c_list("j")[:-1], n_max=16)


def test_vacuum_density(hbasis):
    psi = tensor(make_vacuum(), make_vacuum())
    for x in (-2.0, 0.0, 0.5, 3.0):
        f = field_op(x, OPS.c_list("j"))
        val = expectation(dagger(f) @ f, psi).real
        assert val == pytest.approx(np.exp(-x * x) / np.sqrt(np.pi), abs=1e-15)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False),
                min_size=17, max_size=17).filter(lambda v: np.linalg.norm(v) > 0.1))
def test_density_integrates_to_one(amps):
    from thirdq.basis import build_phi_table
    hb = build_phi_table(16)
    single = np.zeros(18, dtype=complex)
    single[1:] = np.asarray(amps) / np.linalg.norm(amps)
    psi = tensor(single, make_vacuum())
    vals = []
    for x in hb.x[::4]:
        f = field_op(x, OPS.c_list("j"))
        vals.append((f @ psi))
    # the same integral evaluated at full resolution through the phi table
    vecs = np.array([OPS.c("j", n) @ psi for n in range(17)])
    dens = np.sum(np.abs(hb.phi_table.T @ vecs) ** 2, axis=1)
    assert abs(hb.integrate(dens) - 1) < 1e-10
    assert np.allclose([np.vdot(v, v).real for v in vals], dens[::4], atol=1e-13)


def test_coherence_at_zero_offset_is_density():
    psi = tensor(make_cat(2.0, 0.4), make_vacuum())
    for x in (-1.0, 0.3):
        f = field_op(x, OPS.c_list("j"))
        c0 = coherence_op(x, 0.0, OPS.c_list("j"))
        assert abs(expectation(c0, psi) - expectation(dagger(f) @ f, psi)) < 1e-15


def test_coherence_self_adjoint():
    c = coherence_op(0.3, 1.1, OPS.c_list("j"))
    assert (c != dagger(c)).nnz == 0


def test_coherence_range_check():
    with pytest.raises(ValueError):
        coherence_op(9.0, 2.0, OPS.c_list("j"), x_limits=(-10, 10))


def cat_wavefunction(x, alpha, theta):
    norm = (2 * (1 + math.cos(theta) * math.exp(-2 * alpha ** 2))) ** -0.5
    g = lambda c: np.pi ** -0.25 * np.exp(-0.5 * (x - c) ** 2)
    return norm * (g(math.sqrt(2) * alpha) + np.exp(1j * theta) * g(-math.sqrt(2) * alpha))


@pytest.mark.parametrize("theta", np.linspace(0, 2 * np.pi, 9))
def test_cat_coherence_matches_closed_form(theta):
    # n_max = 40 pushes the coherent tail below 1e-20 so the truncated state equals the closed form
    ops = HyperFockOperators(40)
    delta = 2.0 * math.sqrt(2)
    psi = tensor(make_cat(2.0, theta, 40), make_vacuum(40))
    got = expectation(coherence_op(0.0, delta, ops.c_list("j")), psi)
    want = np.real(np.conj(cat_wavefunction(delta, 2.0, theta)) * cat_wavefunction(-delta, 2.0, theta))
    assert abs(got.imag) < 1e-15
    assert abs(got.real - want) < 1e-8


def test_cat_coherence_is_sinusoidal():
    ops = HyperFockOperators(40)
    thetas = np.linspace(0, 2 * np.pi, 13)
    c = coherence_op(0.0, 2.0, ops.c_list("j"))
    vals = np.array([expectation(c, tensor(make_cat(2.0, t, 40), make_vacuum(40))).real for t in thetas])
    # exact form: (A + B cos theta) / (1 + e^{-8} cos theta)
    norm = 1 + np.cos(thetas) * np.exp(-8)
    fit = np.linalg.lstsq(np.c_[np.ones_like(thetas), np.cos(thetas)], vals * norm, rcond=None)
    assert np.max(np.abs(fit[0] @ np.c_[np.ones_like(thetas), np.cos(thetas)].T - vals * norm)) < 1e-12


@pytest.mark.parametrize("m,n", [(0, 1), (3, 7), (16, 2)])
def test_distinct_level_commutator(m, n):
    # vanishes on the empty sector; the only surviving piece is the level transfer
    # -|F_n><F_m| left behind by the removed two-oscillaton image
    comm = commutator(OPS.c("j", m), OPS.c_dag("j", n))
    zz = tensor(make_zero_oscillaton(), make_vacuum())
    assert np.count_nonzero(comm @ zz) == 0
    transfer = sp.kron(sp.csr_matrix(([-1.0], ([n + 1], [m + 1])), shape=(18, 18)), sp.identity(18))
    assert is_zero(prune(comm - transfer))


def test_number_operators_commute():
    for n, m in [(0, 0), (4, 9), (16, 1)]:
        assert is_zero(commutator(OPS.number_ops("j")[0][n], OPS.number_ops("k")[0][m]))


def test_cross_mode_commutation():
    j_ops = [OPS.c("j", 2), OPS.c_dag("j", 5), OPS.a_prime("j"), OPS.photon_number("j")]
    k_ops = [OPS.c("k", 2), OPS.c_dag("k", 0), OPS.a_prime_dag("k"), OPS.oscillaton_number("k")]
    for a in j_ops:
        for b in k_ops:
            assert is_zero(commutator(a, b))


@pytest.mark.parametrize("n", [0, 5, 16])
def test_sector_wise_commutator(n):
    # truncated [c_n, c_n^dag]: +1 on Z, 0 on F_m (m != n), -1 on F_n
    comm = dense(commutator(OPS.c("j", n), OPS.c_dag("j", n)))
    for l_j in range(18):
        for l_k in (0, 1, 9):
            v = tensor(np.eye(18)[l_j], np.eye(18)[l_k])
            val = np.vdot(v, comm @ v).real
            want = 1 if l_j == 0 else (-1 if l_j == n + 1 else 0)
            assert val == want
    assert np.count_nonzero(comm - np.diag(np.diag(comm))) == 0


def test_smeared_field_commutator(hbasis):
    zz = tensor(make_zero_oscillaton(), make_zero_oscillaton())
    x = hbasis.x
    inner = np.flatnonzero(np.abs(x) <= 2)[::8]
    psis = [field_op(xi, OPS.c_list("j")) for xi in x]
    f = np.exp(-x ** 2 / 2)
    w = hbasis.grid.weights()
    for i in inner:
        kernel = np.array([expectation(commutator(psis[i], dagger(p)), zz).real for p in psis])
        assert abs(kernel @ (w * f) - f[i]) < 1e-6


def test_commutator_dimension_check():
    with pytest.raises(ValueError):
        commutator(OPS.c("j", 0), sp.identity(5, format="csr"))


def test_prune_drops_tiny_entries():
    m = sp.csr_matrix(np.array([[1e-16, 1.0], [0.0, 2e-15]]))
    assert prune(m).nnz == 2


def test_field_op_evaluation_order_independent(hbasis):
    xs = list(hbasis.x[::10])
    seq = [field_op(x, OPS.c_list("j")) for x in xs]
    with ThreadPoolExecutor(4) as pool:
        par = list(pool.map(lambda x: field_op(x, OPS.c_list("j")), reversed(xs)))[::-1]
    for a, b in zip(seq, par):
        assert (a != b).nnz == 0
