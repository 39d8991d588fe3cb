import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

import qngcert.loss as loss_mod
from qngcert.errors import BasisMismatch, LeakageTooLarge, NoMargin, NonMonotoneFidelity, ParameterOutOfRange
from qngcert.fock import Basis, TwoModeState
from qngcert.loss import (
    TwoModeDensity,
    fidelity_to_pure,
    kraus_operators,
    loss_channel,
    lossy_fidelity,
    min_transmission,
    pure_loss,
)
from qngcert.targets import fock_pair, noon_like

etas = st.floats(0.0, 1.0)


def fock_pair_fidelity(theta, eta):
    c, s = math.cos(theta), math.sin(theta)
    return (c * c + eta * s * s) ** 2 + (c * s * (1 - eta)) ** 2


def random_state(seed, cutoff=3):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(cutoff + 1, cutoff + 1)) + 1j * rng.normal(size=(cutoff + 1, cutoff + 1))
    return TwoModeState.from_matrix(m / np.linalg.norm(m))


class TestKraus:
    @settings(max_examples=25, deadline=None)
    @given(eta=etas)
    def test_completeness(self, eta):
        A = kraus_operators(eta, 6)
        total = np.einsum("jab,jac->bc", A, A)
        assert np.abs(total - np.eye(7)).max() < 1e-12

    def test_single_photon(self):
        A = kraus_operators(0.3, 1)
        assert A[0, 1, 1] == pytest.approx(math.sqrt(0.3))
        assert A[1, 0, 1] == pytest.approx(math.sqrt(0.7))

    @pytest.mark.parametrize("eta", [-0.1, 1.5])
    def test_range(self, eta):
        with pytest.raises(ParameterOutOfRange):
            kraus_operators(eta, 2)


class TestChannel:
    def test_single_photon_output(self):
        rho = pure_loss(TwoModeState.fock(1, 0, Basis(1)), 0.3).rho
        b = Basis(1)
        assert rho[b.index(1, 0), b.index(1, 0)] == pytest.approx(0.3)
        assert rho[b.index(0, 0), b.index(0, 0)] == pytest.approx(0.7)

    def test_full_loss_gives_vacuum(self):
        rho = pure_loss(random_state(1), 0.0).rho
        assert rho[0, 0] == pytest.approx(1.0)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2**16), e1=etas, e2=etas)
    def test_semigroup(self, seed, e1, e2):
        s = random_state(seed)
        twice = loss_channel(pure_loss(s, e1), e2).rho
        assert np.abs(twice - pure_loss(s, e1 * e2).rho).max() < 1e-12

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2**16), eta=etas)
    def test_trace_and_positivity(self, seed, eta):
        rho = pure_loss(random_state(seed), eta)
        assert rho.trace_defect < 1e-12
        assert np.linalg.eigvalsh(rho.rho).min() > -1e-12

    def test_mixed_path_agrees_with_pure_path(self):
        s = random_state(5)
        assert np.abs(loss_channel(TwoModeDensity.pure(s), 0.4).rho - pure_loss(s, 0.4).rho).max() < 1e-13

    def test_leaky_state_rejected(self):
        s = TwoModeState(Basis(1), np.array([1, 0, 0, 0]), leakage=1e-6)
        with pytest.raises(LeakageTooLarge):
            pure_loss(s, 0.5)

    def test_density_shape_checked(self):
        with pytest.raises(BasisMismatch):
            TwoModeDensity(Basis(1), np.eye(3))


class TestFidelity:
    @pytest.mark.parametrize("theta", [math.pi / 8, math.pi / 4, 1.2])
    @pytest.mark.parametrize("eta", [0.0, 0.35, 0.9])
    def test_fock_pair_closed_form(self, theta, eta):
        t = fock_pair(theta, 1, Basis(1))
        assert lossy_fidelity(t, eta) == pytest.approx(fock_pair_fidelity(theta, eta), abs=1e-13)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2**16), eta=etas)
    def test_fast_path_matches_density(self, seed, eta):
        s = random_state(seed)
        assert lossy_fidelity(s, eta) == pytest.approx(fidelity_to_pure(s, pure_loss(s, eta)), abs=1e-12)

    def test_basis_checked(self):
        with pytest.raises(BasisMismatch):
            fidelity_to_pure(random_state(0, 2), pure_loss(random_state(0, 3), 0.5))


class TestMinTransmission:
    def test_matches_analytic_crossing(self):
        theta, value = math.pi / 4, 0.6
        expect = brentq(lambda e: fock_pair_fidelity(theta, e) - value, 0, 1)
        res = min_transmission(fock_pair(theta, 1, Basis(1)), value, tol=1e-6)
        assert res.monotone_verified
        assert expect <= res.eta_min <= expect + 1e-6

    def test_threshold_of_one_leaves_no_margin(self):
        with pytest.warns(NoMargin):
            res = min_transmission(noon_like(0.4, 1, Basis(2)), 1.0)
        assert res.eta_min == 1.0 and res.no_margin

    def test_threshold_below_full_loss(self):
        # full loss leaves vacuum, which already has fidelity cos^2 theta
        res = min_transmission(fock_pair(0.3, 1, Basis(1)), 0.5)
        assert res.eta_min == 0.0

    def test_curve_recorded(self):
        res = min_transmission(fock_pair(0.7, 1, Basis(1)), 0.5, grid_points=11)
        assert len(res.fidelity_curve) == 11
        assert res.fidelity_curve[-1] == (1.0, pytest.approx(1.0))

    def test_non_monotone_warns(self, monkeypatch):
        # a dip near eta = 0.5 forces the last-crossing rule
        monkeypatch.setattr(loss_mod, "lossy_fidelity", lambda t, e: 0.5 + 0.5 * e - 0.3 * math.exp(-((e - 0.5) / 0.05) ** 2))
        with pytest.warns(NonMonotoneFidelity):
            res = min_transmission(fock_pair(0.7, 1, Basis(1)), 0.55, tol=1e-6)
        assert not res.monotone_verified
        assert res.eta_min > 0.5
