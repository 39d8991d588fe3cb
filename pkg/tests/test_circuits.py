import math

import numpy as np
import pytest

from qngcert.circuits import (
    BlochMessiahParams,
    EntanglingParams,
    PassiveParams,
    bloch_messiah_unitary,
    entangling_unitary,
    passive_unitary,
)
from qngcert.fock import (
    Basis,
    TwoModeState,
    annihilation_matrix,
    apply,
    beam_splitter,
    phase_shift,
    single_mode_squeeze,
)
from qngcert.verify import bloch_messiah_output, bloch_messiah_symplectic, entangling_symplectic


def up_to_phase(a, b):
    """Largest entry of ``a - e^{i g} b`` for the best global phase ``g``."""
    ov = np.vdot(b.ravel(), a.ravel())
    return np.abs(a - (ov / abs(ov)) * b).max()


def heisenberg(U, basis, keep):
    """``U^+ a_i U`` for both modes, restricted to photon numbers below ``keep``."""
    a = annihilation_matrix(basis.cutoff)
    eye = np.eye(basis.dim)
    k, l = basis.numbers()
    low = (k < keep) & (l < keep)
    out = []
    for op in (np.kron(a, eye), np.kron(eye, a)):
        out.append((U.conj().T @ op @ U)[np.ix_(low, low)])
    return out, [m[np.ix_(low, low)] for m in (np.kron(a, eye), np.kron(eye, a))]


class TestParams:
    def test_entangling_rejects_negative_xi(self):
        with pytest.raises(ValueError):
            EntanglingParams(xi=-0.1)

    def test_entangling_rejects_tau_outside_window(self):
        with pytest.raises(ValueError):
            EntanglingParams(tau1=2.0)

    def test_entangling_rejects_nan(self):
        with pytest.raises(ValueError):
            EntanglingParams(phi=float("nan"))

    def test_passive_phase_wrapped(self):
        assert PassiveParams(phi1=7.0).phi1 == pytest.approx(7.0 - 2 * math.pi)

    def test_as_tuple_order(self):
        p = EntanglingParams(1, 2, 0.3, 4, 0.5, 0.6)
        assert p.as_tuple() == (1, 2, 0.3, 4, 0.5, 0.6)
        assert list(p.as_dict()) == list(EntanglingParams.FIELDS)

    def test_bloch_messiah_bound(self):
        with pytest.raises(ValueError):
            BlochMessiahParams(xi1=10.0)


class TestFamilies:
    def test_zero_bloch_messiah_is_identity(self):
        b = Basis(4)
        U = bloch_messiah_unitary(BlochMessiahParams(), b)
        assert np.abs(U.mat - np.eye(b.size)).max() < 1e-14

    def test_opposite_squeezers(self):
        b = Basis(6)
        r = 0.3
        U = bloch_messiah_unitary(BlochMessiahParams(xi1=r, xi2=-r), b)
        ref = single_mode_squeeze(r, 1, b).mat @ single_mode_squeeze(-r, 2, b).mat
        assert np.abs(U.mat - ref).max() < 1e-12

    def test_unsqueezed_entangling_is_passive(self):
        b = Basis(5)
        p = EntanglingParams(phi1=0.4, phi2=1.3, tau1=0.7)
        U = entangling_unitary(p, b)
        ref = phase_shift(1.3, 2, b).mat @ passive_unitary(PassiveParams(phi1=0.4, theta=0.7), b).mat
        assert up_to_phase(U.mat, ref) < 1e-10

    def test_passive_phase_on_output_side(self):
        b = Basis(2)
        out = apply(passive_unitary(PassiveParams(phi1=0.5, theta=math.pi / 2), b), TwoModeState.fock(0, 1, b))
        assert out.matrix[1, 0] == pytest.approx(np.exp(0.5j))

    def test_entangling_unitary_certified(self):
        U = entangling_unitary(EntanglingParams(0.1, 0.2, 0.3, 0.4, 0.5, 0.6), Basis(15))
        assert U.unitarity_defect < 1e-6


class TestHeisenbergMaps:
    """The 4x4 Bogoliubov matrices agree with the Fock-space operators."""

    def check(self, U, S, basis, keep=5):
        lhs, ladders = heisenberg(U, basis, keep)
        adag = [m.conj().T for m in ladders]
        for i in range(2):
            rhs = S[i, 0] * ladders[0] + S[i, 1] * ladders[1] + S[i, 2] * adag[0] + S[i, 3] * adag[1]
            assert np.abs(lhs[i] - rhs).max() < 1e-8

    def test_entangling_family(self):
        x = (0.3, -1.1, 0.5, 0.8, 0.35, 1.2)
        b = Basis(40)
        self.check(entangling_unitary(EntanglingParams(*x), b).mat, entangling_symplectic(x), b)

    def test_bloch_messiah(self):
        p = BlochMessiahParams(0.6 * np.exp(0.3j), 1.1 * np.exp(-2.0j), 0.15 * np.exp(1.0j), 0.1 * np.exp(-0.4j))
        b = Basis(40)
        self.check(bloch_messiah_unitary(p, b).mat, bloch_messiah_symplectic(p), b)

    def test_symplectic_form_preserved(self):
        x = (0.2, 0.9, 1.0, -0.3, 0.7, 0.4)
        S = entangling_symplectic(x)
        K = np.diag([1, 1, -1, -1])
        assert np.abs(S @ K @ S.conj().T - K).max() < 1e-12


class TestBlochMessiahOutput:
    def test_matches_dense_product(self):
        b = Basis(30)
        p = BlochMessiahParams(0.7 * np.exp(1.1j), 1.2 * np.exp(-2j), 0.2 * np.exp(0.4j), 0.25 * np.exp(2.5j))
        s = TwoModeState.product([0.6, 0.8j], [0.0, 0.6, 0.8], b)
        dense = s
        for op in (beam_splitter(p.tau2, b), single_mode_squeeze(p.xi2, 2, b), single_mode_squeeze(p.xi1, 1, b),
                   beam_splitter(p.tau1, b)):
            dense = apply(op, dense)
        fast = bloch_messiah_output(p, s)
        assert np.abs(fast.resized(12).amp - dense.resized(12).amp).max() < 1e-12
