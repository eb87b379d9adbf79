import math

import numpy as np
import pytest
import scipy.sparse as sp

from acfnet.errors import InvalidArgument, InvalidState
from acfnet.hilbert import basis_state, is_hermitian
from acfnet.model import (
    AS_WRITTEN,
    UNITARY,
    ModeCountParams,
    SystemParams,
    cavity_fiber_part,
    drive_amplitudes,
    excitation_number,
    feedback_unitary,
    hamiltonian,
    lindblad_ops,
    quantum_part,
    resonant_mode_count,
)


def _dense_bell_n2(p):
    """Two-cavity Bell Hamiltonian written out directly with numpy Kronecker products."""
    I3, I2 = np.eye(3), np.eye(2)
    a = np.array([[0, 1], [0, 0]], dtype=complex)

    def t(i, j):
        m = np.zeros((3, 3), dtype=complex)
        m[i, j] = 1
        return m

    def k5(A1, A2, c1, c2, f):
        out = A1
        for x in (A2, c1, c2, f):
            out = np.kron(out, x)
        return out

    a1 = k5(I3, I3, a, I2, I2)
    a2 = k5(I3, I3, I2, a, I2)
    b = k5(I3, I3, I2, I2, a)
    s10 = [k5(t(1, 0), I3, I2, I2, I2), k5(I3, t(1, 0), I2, I2, I2)]
    s11 = [k5(t(1, 1), I3, I2, I2, I2), k5(I3, t(1, 1), I2, I2, I2)]
    s21 = [k5(t(2, 1), I3, I2, I2, I2), k5(I3, t(2, 1), I2, I2, I2)]
    s20 = [k5(t(2, 0), I3, I2, I2, I2), k5(I3, t(2, 0), I2, I2, I2)]
    HC = sum(p.Omega_MW * (s + s.conj().T) for s in s10) + p.delta * sum(s11)
    HC = HC - p.delta * (a1.conj().T @ a1 + a2.conj().T @ a2 + b.conj().T @ b)
    HQ = p.g * (a1 @ s21[0] + a2 @ s21[1]) + p.J * b.conj().T @ (a1 + a2) + p.Omega * (s20[0] + s20[1])
    return HC + HQ + HQ.conj().T


def test_bell_n2_matches_direct_construction(bell):
    H = hamiltonian(bell).toarray()
    assert np.allclose(H, _dense_bell_n2(bell), atol=1e-15)


@pytest.mark.parametrize("scheme", ["bell", "klm"])
@pytest.mark.parametrize("n,k", [(2, 1), (2, 2), (3, 1)])
def test_hamiltonian_hermitian(scheme, n, k):
    p = SystemParams(scheme=scheme, n=n, fock_truncation=k, Omega=0.07, Omega_MW=-0.02, delta=0.03, J=1.7)
    assert is_hermitian(hamiltonian(p), 1e-14)


def test_atom_cavity_matrix_element(bell):
    space = bell.space()
    H = hamiltonian(bell, space)
    bra = basis_state([2, 1, 0, 0, 0], space)
    ket = basis_state([1, 1, 1, 0, 0], space)
    assert bra @ H @ ket == pytest.approx(bell.g)


def test_drive_sign_rule():
    for n in (2, 3, 4, 5):
        o1, on = drive_amplitudes(SystemParams(n=n, Omega=0.3))
        assert o1 == (-1) ** n * on
    assert drive_amplitudes(SystemParams(scheme="klm", Omega=0.3)) == (0.3, 0.0)


def test_klm_microwave_signs(klm):
    space = klm.space()
    H = hamiltonian(klm, space)
    v00 = basis_state([0, 0, 0, 0, 0], space)
    assert basis_state([1, 0, 0, 0, 0], space) @ H @ v00 == pytest.approx(klm.Omega_MW)
    assert basis_state([0, 1, 0, 0, 0], space) @ H @ v00 == pytest.approx(-klm.Omega_MW)


def test_space_mismatch_rejected(bell):
    with pytest.raises(InvalidArgument):
        hamiltonian(bell, SystemParams(n=3).space())


def test_quantum_part_conserves_excitations():
    for n in (2, 3):
        p = SystemParams(n=n, Omega=0.0, J=1.3)
        space = p.space()
        HQ = quantum_part(p, space)
        N = excitation_number(space)
        assert abs(HQ @ N - N @ HQ).max() < 1e-14
        assert abs(cavity_fiber_part(p, space) @ N - N @ cavity_fiber_part(p, space)).max() < 1e-14


def test_lindblad_count_and_rates():
    p = SystemParams(n=3, gamma=0.1, kappa_cavity=[0.1, 0.2, 0.3], kappa_fiber=[0.05, 0.07])
    ops = lindblad_ops(p)
    assert len(ops) == 9
    top = np.linalg.svd(ops[0].toarray(), compute_uv=False)[0]
    assert top ** 2 == pytest.approx(0.05)
    for L, rate in zip(ops[4:], [0.1, 0.2, 0.3, 0.05, 0.07]):
        assert np.linalg.svd(L.toarray(), compute_uv=False)[0] ** 2 == pytest.approx(rate)


def test_zero_rates_give_zero_operators():
    ops = lindblad_ops(SystemParams(gamma=0.0, kappa_cavity=0.0, kappa_fiber=0.0))
    assert len(ops) == 7 and all(L.nnz == 0 for L in ops)


@pytest.mark.parametrize("mode", [None, "first", "both"])
def test_lindblads_annihilate_ground_state(mode):
    p = SystemParams(gamma=0.1, kappa_cavity=0.2, kappa_fiber=0.1, feedback_mode=mode, eta=0.7)
    g0 = basis_state([0] * 5, p.space())
    for L in lindblad_ops(p):
        assert np.linalg.norm(L @ g0) == 0


def test_bad_rates_rejected():
    with pytest.raises(InvalidArgument):
        SystemParams(gamma=-0.1)
    with pytest.raises(InvalidArgument):
        SystemParams(kappa_cavity=[0.1])
    with pytest.raises(InvalidArgument):
        SystemParams(J=0)
    with pytest.raises(InvalidArgument):
        SystemParams(feedback_mode="third")


def _ground_block(U, p):
    space = p.space()
    i0 = basis_state([0, 0, 0, 0, 0], space)
    i1 = basis_state([1, 0, 0, 0, 0], space)
    return np.array([[i0 @ U @ i0, i0 @ U @ i1], [i1 @ U @ i0, i1 @ U @ i1]])


@pytest.mark.parametrize("scheme,form", [("bell", AS_WRITTEN), ("klm", UNITARY)])
def test_feedback_unitary_is_unitary(scheme, form, rng):
    for eta in rng.uniform(-4, 4, size=5):
        p = SystemParams(scheme=scheme, eta=eta, klm_feedback_form=form)
        U = feedback_unitary(p)
        assert abs(U @ U.conj().T - sp.identity(72)).max() < 1e-12


def test_feedback_examples():
    p = SystemParams(eta=math.pi / 2)
    B = _ground_block(feedback_unitary(p), p)
    assert B[1, 0] == pytest.approx(-1j) and abs(B[0, 0]) < 1e-15
    p0 = SystemParams(eta=0.0, scheme="klm")
    assert abs(feedback_unitary(p0) - sp.identity(72)).max() < 1e-15
    with pytest.raises(InvalidState):
        feedback_unitary(SystemParams())


def test_klm_feedback_as_written_is_hyperbolic():
    # exp[-i eta (|1><0| - |0><1|)] = cosh(eta) - sinh(eta) sigma_y on the ground doublet
    eta = 0.5 * math.pi
    p = SystemParams(scheme="klm", eta=eta)
    B = _ground_block(feedback_unitary(p), p)
    sy = np.array([[0, -1j], [1j, 0]])
    assert np.allclose(B, math.cosh(eta) * np.eye(2) - math.sinh(eta) * sy)


def test_feedback_leaves_level_two_alone():
    p = SystemParams(eta=1.1)
    v = basis_state([2, 0, 0, 0, 0], p.space())
    assert np.allclose(feedback_unitary(p) @ v, v)


def test_feedback_preserves_singular_values():
    p = SystemParams(kappa_cavity=0.1, eta=0.9, feedback_mode="both")
    plain = lindblad_ops(p.replace(feedback_mode=None))
    kicked = lindblad_ops(p)
    for k in (4, 5):
        s0 = np.linalg.svd(plain[k].toarray(), compute_uv=False)
        s1 = np.linalg.svd(kicked[k].toarray(), compute_uv=False)
        assert np.allclose(s0, s1)
    assert abs(plain[6] - kicked[6]).max() == 0


def test_resonant_mode_count():
    n = resonant_mode_count(ModeCountParams(1.0, 2 * math.pi * 1e6, 3e8))
    assert n == pytest.approx(3.3333e-3, rel=1e-4)
    assert resonant_mode_count(ModeCountParams(2.0, 2 * math.pi * 1e6, 3e8)) == pytest.approx(2 * n)
    assert resonant_mode_count(ModeCountParams(1.0, 1e-12, 3e8)) < 1e-20
    for bad in (ModeCountParams(0.0, 1.0), ModeCountParams(1.0, 0.0), ModeCountParams(1.0, 1.0, -1.0)):
        with pytest.raises(InvalidArgument):
            resonant_mode_count(bad)
