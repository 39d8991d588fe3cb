import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qngcert.circuits import EntanglingParams, PassiveParams, entangling_unitary, passive_unitary
from qngcert.cmaes import CmaesConfig
from qngcert.errors import BasisMismatch, LeakageTooLarge, NotConvergedWarning
from qngcert.fock import Basis, TwoModeOperator, TwoModeState
from qngcert.targets import fock_pair, noon_like, photon_subtracted
from qngcert.threshold import (
    EntanglingLandscape,
    EscalationConfig,
    GridConfig,
    ThresholdResult,
    certify,
    gaussian_threshold,
    inner_max,
    overlap_matrix,
    passive_threshold,
    search_maps,
    search_point,
)
from qngcert.verify import FAST_GRID, _brute_passive, tmsv_lower_bound

QUICK_OPT = CmaesConfig(dim=6, restarts=4, seed=1)
QUICK_ESC = EscalationConfig(start_cutoff=6, step=3, stop_cutoff=9)


def random_state(seed, cutoff=2):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(cutoff + 1, cutoff + 1)) + 1j * rng.normal(size=(cutoff + 1, cutoff + 1))
    return TwoModeState.from_matrix(m / np.linalg.norm(m))


def dummy_result(value):
    return ThresholdResult("passive", value, PassiveParams(), (np.ones(1), np.ones(1)), [], True, 0)


class TestInnerMax:
    def test_rank_one(self):
        a, b = np.array([0.6, 0.8j]), np.array([1.0, 0.0, 0.0])
        val, u, v = inner_max(np.outer(a, b))
        assert val == pytest.approx(1.0)
        assert abs(np.vdot(u, a)) == pytest.approx(1.0)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**16))
    def test_dominates_random_probes(self, seed):
        rng = np.random.default_rng(seed)
        M = rng.normal(size=(4, 5)) + 1j * rng.normal(size=(4, 5))
        val, u, v = inner_max(M)
        assert abs(u.conj() @ M @ v) ** 2 == pytest.approx(val)
        for _ in range(20):
            x = rng.normal(size=4) + 1j * rng.normal(size=4)
            y = rng.normal(size=5) + 1j * rng.normal(size=5)
            x, y = x / np.linalg.norm(x), y / np.linalg.norm(y)
            assert abs(x.conj() @ M @ y) ** 2 <= val + 1e-12


class TestOverlapMatrix:
    def test_product_target_reached_by_identity(self):
        t = TwoModeState.product([0.6, 0.8], [0.0, 1.0], Basis(3))
        val, _, _ = inner_max(overlap_matrix(t, TwoModeOperator.identity(Basis(3)), 3))
        assert val == pytest.approx(1.0)

    def test_input_cutoff_checked(self):
        with pytest.raises(BasisMismatch):
            overlap_matrix(random_state(0), TwoModeOperator.identity(Basis(2)), 3)

    def test_target_cutoff_checked(self):
        with pytest.raises(BasisMismatch):
            overlap_matrix(random_state(0, 4), TwoModeOperator.identity(Basis(2)), 2)


class TestCertify:
    def test_strict_inequality(self):
        assert not certify(0.8, dummy_result(0.8)).certified
        v = certify(0.85, dummy_result(0.8))
        assert v.certified and v.margin == pytest.approx(0.05)

    def test_fidelity_range(self):
        with pytest.raises(ValueError):
            certify(1.2, dummy_result(0.5))


class TestPassive:
    def test_single_photon_superposition_is_reachable(self):
        mat = np.zeros((2, 2))
        mat[0, 1] = mat[1, 0] = 1 / math.sqrt(2)
        res = passive_threshold(TwoModeState.from_matrix(mat), FAST_GRID)
        assert res.value == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("seed", [3, 4])
    def test_against_dense_scan(self, seed):
        t = random_state(seed, 1)
        engine = passive_threshold(t, FAST_GRID).value
        brute = _brute_passive(t, 201)
        assert engine >= brute - 1e-9
        assert engine - brute < 1e-3

    def test_returned_parameters_reproduce_value(self):
        t = noon_like(0.5, 1, Basis(2))
        res = passive_threshold(t, FAST_GRID)
        b = Basis(4)
        M = overlap_matrix(t, passive_unitary(res.best_params, b), 4)
        assert inner_max(M)[0] == pytest.approx(res.value, abs=1e-10)
        a, c = res.best_input
        assert abs(a @ overlap_matrix(t, passive_unitary(res.best_params, b), len(a) - 1) @ c) ** 2 \
            == pytest.approx(res.value, abs=1e-10)

    def test_mode_swap_invariance(self):
        t = random_state(9, 2)
        assert passive_threshold(t, FAST_GRID).value == pytest.approx(
            passive_threshold(t.swapped(), FAST_GRID).value, abs=1e-6)

    def test_leaky_target_rejected(self):
        t = TwoModeState(Basis(1), np.array([1, 0, 0, 0]), leakage=1e-3)
        with pytest.raises(LeakageTooLarge):
            passive_threshold(t)

    def test_grid_value_without_refinement_is_lower(self):
        t = random_state(5, 2)
        coarse = passive_threshold(t, GridConfig(n_phi=21, n_theta=21, refine=False)).value
        assert coarse <= passive_threshold(t, FAST_GRID).value + 1e-12


class TestSearchMaps:
    def test_round_trip(self):
        p = EntanglingParams(0.4, -1.2, 0.3, 2.0, 0.8, 1.1)
        x = np.array([f(z) for f, z in zip(search_maps(), search_point(p))])
        assert np.allclose(x, p.as_tuple())

    def test_maps_land_in_window(self):
        z = np.linspace(-50, 50, 101)
        maps = search_maps(2.0)
        assert np.all((maps[2](z) >= 0) & (maps[2](z) <= math.pi / 2))
        assert np.all((maps[4](z) >= 0) & (maps[4](z) < 2.0))


class TestEntanglingLandscape:
    def test_matches_dense_unitary(self):
        t = fock_pair(0.6, 1, Basis(1))
        p = EntanglingParams(0.3, -0.4, 0.5, 1.0, 0.4, 0.9)
        land = EntanglingLandscape(t, 8, pad=12)
        U = entangling_unitary(p, Basis(20))
        # truncation only touches the outermost layers
        expect = inner_max(overlap_matrix(t, U, 8))[0]
        assert land.values(np.array([p.as_tuple()]))[0] == pytest.approx(expect, abs=1e-8)


class TestGaussian:
    def test_vacuum(self):
        t = TwoModeState.fock(0, 0, Basis(1))
        res = gaussian_threshold(t, QUICK_OPT, QUICK_ESC)
        assert res.value == pytest.approx(1.0, abs=1e-8)
        assert res.converged

    def test_fock_pair_between_bound_and_one(self):
        theta = math.pi / 4
        res = gaussian_threshold(fock_pair(theta, 1, Basis(1)), QUICK_OPT, QUICK_ESC)
        assert tmsv_lower_bound(theta) - 1e-6 <= res.value < 1 - 1e-3

    def test_best_parameters_reproduce_value(self):
        t = fock_pair(0.5, 1, Basis(1))
        res = gaussian_threshold(t, QUICK_OPT, QUICK_ESC)
        n = res.cutoff_trace[-1][0]
        U = entangling_unitary(res.best_params, Basis(n + QUICK_ESC.pad + 15))
        assert inner_max(overlap_matrix(t, U, n))[0] == pytest.approx(res.value, abs=1e-6)

    def test_gaussian_dominates_passive(self):
        t = noon_like(0.7, 1, Basis(2))
        passive = passive_threshold(t, FAST_GRID)
        gauss = gaussian_threshold(t, QUICK_OPT, QUICK_ESC, warm_start=passive.best_params)
        assert gauss.value >= passive.value - 1e-9

    def test_single_subtracted_is_gaussian_separable(self):
        t = photon_subtracted(1, (math.pi / 4,), 0.3)
        res = gaussian_threshold(t, CmaesConfig(dim=6, restarts=4, seed=0))
        assert res.value == pytest.approx(1.0, abs=1e-4)

    def test_seed_determinism(self):
        t = fock_pair(0.3, 1, Basis(1))
        a = gaussian_threshold(t, QUICK_OPT, QUICK_ESC)
        b = gaussian_threshold(t, QUICK_OPT, QUICK_ESC)
        assert a.value == b.value and a.cutoff_trace == b.cutoff_trace

    def test_not_converged_is_flagged(self):
        t = fock_pair(0.6, 1, Basis(1))
        esc = EscalationConfig(start_cutoff=4, step=2, stop_cutoff=6, tol=1e-300)
        with pytest.warns(NotConvergedWarning):
            res = gaussian_threshold(t, CmaesConfig(dim=6, restarts=2, seed=0), esc)
        assert not res.converged
        assert [c for c, _ in res.cutoff_trace] == [4, 6]

    def test_schedule(self):
        t = fock_pair(0.6, 1, Basis(1))
        assert EscalationConfig().schedule(t) == [15, 20, 25, 30, 35]
        assert EscalationConfig(start_cutoff=40).schedule(t) == [40, 45]

    def test_result_serializes(self):
        res = gaussian_threshold(TwoModeState.fock(0, 0, Basis(1)), QUICK_OPT, QUICK_ESC)
        d = res.to_dict()
        assert d["kind"] == "gaussian" and set(d["best_params"]) == set(EntanglingParams.FIELDS)
