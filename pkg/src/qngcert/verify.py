"""Self-checks: oracle suites and the figure-level acceptance checks.

Every check returns a ``CheckResult``; ``run_suite`` prints one line per
check. The figure checks share a ``Context`` that caches thresholds, so a
target used by several checks is optimized once.
"""

from __future__ import annotations

import math
import sys
import time
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize_scalar

from .circuits import BlochMessiahParams
from .cmaes import CmaesConfig, maximize
from .errors import NotConvergedWarning
from .fock import (
    Basis,
    TwoModeState,
    annihilation_matrix,
    apply,
    beam_splitter,
    phase_shift,
    propagator,
    single_mode_squeeze,
    single_mode_squeeze_matrix,
    two_mode_squeeze,
)
from .loss import TwoModeDensity, loss_channel, min_transmission, pure_loss
from .overlap import _raw_overlap, matrix_product_overlap
from .targets import TargetSpec
from .threshold import (
    EntanglingLandscape,
    EscalationConfig,
    GridConfig,
    ThresholdResult,
    gaussian_threshold,
    inner_max,
    passive_threshold,
    search_maps,
)

FAST_GRID = GridConfig(n_phi=101, n_theta=101, refine_starts=5)
QUARTER = math.pi / 4


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<34} {self.detail}  [{self.seconds:.1f}s]"


def _timed(name: str, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    t0 = time.perf_counter()
    ok, detail = fn()
    return CheckResult(name, bool(ok), detail, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# oracle checks (no paper numbers)


def check_overlap_regression(cases: int = 50, seed: int = 11, tol: float = 1e-8) -> tuple[bool, str]:
    """Closed-form overlaps against truncated matrix products on random cases."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        k, l, m, n = (int(v) for v in rng.integers(0, 5, size=4))
        tau1, tau2 = (rng.uniform(0, math.pi / 2) * np.exp(1j * rng.uniform(0, 2 * math.pi)) for _ in range(2))
        xi = rng.uniform(0, 0.6) * np.exp(1j * rng.uniform(0, 2 * math.pi))
        phi = rng.uniform(0, 2 * math.pi)
        a = _raw_overlap(k, l, m, n, tau1, tau2, xi, phi)
        b = matrix_product_overlap(k, l, m, n, tau1, tau2, xi, phi)
        worst = max(worst, abs(a - b))
    return worst <= tol, f"worst |closed form - matrix product| = {worst:.1e} over {cases} cases"


def _random_single_mode(rng, photons: int) -> np.ndarray:
    v = rng.normal(size=photons + 1) + 1j * rng.normal(size=photons + 1)
    return v / np.linalg.norm(v)


def _bogoliubov(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.block([[A, B], [B.conj(), A.conj()]])


def symplectic(kind: str, value: complex, mode: int = 1) -> np.ndarray:
    """Heisenberg map ``U^+ (a1, a2, a1^+, a2^+) U`` of an elementary unitary as a 4x4 matrix.

    Products compose in the same order as the unitaries.
    """
    A, B = np.eye(2, dtype=complex), np.zeros((2, 2), dtype=complex)
    mag, ang = abs(value), np.angle(value)
    if kind == "bs":
        c, s = math.cos(mag), math.sin(mag)
        A = np.array([[c, np.exp(1j * ang) * s], [-np.exp(-1j * ang) * s, c]])
    elif kind == "tms":
        A = math.cosh(mag) * A
        B = np.exp(1j * ang) * math.sinh(mag) * np.array([[0, 1], [1, 0]])
    elif kind == "sq":
        i = mode - 1
        A[i, i] = math.cosh(2 * mag)
        B[i, i] = np.exp(1j * ang) * math.sinh(2 * mag)
    elif kind == "phase":
        A[mode - 1, mode - 1] = np.exp(1j * value.real)
    else:
        raise ValueError(kind)
    return _bogoliubov(A, B)


def entangling_symplectic(x) -> np.ndarray:
    phi1, phi2, tau1, phi, xi, tau2 = x
    return (symplectic("phase", phi1, 1) @ symplectic("phase", phi2, 2) @ symplectic("bs", tau1)
            @ symplectic("phase", phi, 1) @ symplectic("tms", xi) @ symplectic("bs", tau2))


def bloch_messiah_symplectic(p: BlochMessiahParams) -> np.ndarray:
    return (symplectic("bs", p.tau1) @ symplectic("sq", p.xi1, 1) @ symplectic("sq", p.xi2, 2)
            @ symplectic("bs", p.tau2))


_CROSS = (np.array([0, 2]), np.array([1, 3]))


def _nonlocality(x, target: np.ndarray, squeeze_weight: float = 0.0) -> float:
    """Weight of ``S_ent(x)^-1 S_target`` that couples the two modes.

    ``squeeze_weight`` adds a small penalty on the local squeezing
    ``cosh r_1 + cosh r_2 - 2`` left over for the input, which selects the
    solution whose product input is most compact in the Fock basis.
    """
    T = np.linalg.solve(entangling_symplectic(x), target)
    m1, m2 = _CROSS
    cross = np.sum(np.abs(T[np.ix_(m1, m2)]) ** 2) + np.sum(np.abs(T[np.ix_(m2, m1)]) ** 2)
    return float(cross + squeeze_weight * (abs(T[0, 0]) + abs(T[1, 1]) - 2))


def bloch_messiah_output(p: BlochMessiahParams, state: TwoModeState) -> TwoModeState:
    """Apply the Bloch-Messiah circuit with block propagators and per-mode squeezers."""
    cutoff = state.basis.cutoff
    bs = propagator("bs", cutoff)
    k, _ = state.basis.numbers()

    def beam(amp, tau):
        # BS(theta e^{i alpha}) = R1(alpha) BS(theta) R1(-alpha)
        alpha = np.angle(tau)
        return np.exp(1j * alpha * k) * bs.apply(np.exp(-1j * alpha * k) * amp, abs(tau))

    amp = beam(state.amp, p.tau2)
    psi = amp.reshape(cutoff + 1, cutoff + 1)
    psi = single_mode_squeeze_matrix(p.xi1, cutoff) @ psi @ single_mode_squeeze_matrix(p.xi2, cutoff).T
    return TwoModeState(state.basis, beam(psi.reshape(-1), p.tau1))


def check_reachability(circuits: int = 20, inputs: int = 5, seed: int = 5, cutoff: int = 30,
                       bogoliubov_max: float = 0.8, target: float = 1 - 1e-5,
                       squeeze_weight: float = 1e-6) -> tuple[bool, str]:
    """Outputs of random Bloch-Messiah circuits are reached by the entangling family.

    Product inputs are truncated at ``cutoff`` per mode; outputs are built
    exactly on a basis 20 photons larger, where their leakage is negligible.

    The family parameters are located on the Bogoliubov level, where
    reachability means ``S_ent(p)^-1 S_BM`` is a local map; the fidelity of
    every output with the family is then certified on the truncated Fock
    space, with a CMA-ES polish from that point when it falls short.
    """
    rng = np.random.default_rng(seed)
    build = Basis(cutoff + 20)
    maps = search_maps()
    worst, worst_local, leak = 1.0, 0.0, 0.0
    polished = 0
    for _ in range(circuits):
        p = BlochMessiahParams(
            *(rng.uniform(0, math.pi / 2) * np.exp(1j * rng.uniform(0, 2 * math.pi)) for _ in range(2)),
            *(0.5 * rng.uniform(0, bogoliubov_max) * np.exp(1j * rng.uniform(0, 2 * math.pi)) for _ in range(2)),
        )
        S = bloch_messiah_symplectic(p)
        cfg = CmaesConfig(dim=6, restarts=6, max_evals=4000, seed=int(rng.integers(2**31)), tol_fun=1e-13,
                          tol_x=1e-12, stagnation_tol=1e-9, stagnation_gens=100)
        coarse = maximize(lambda x: -_nonlocality(x, S, squeeze_weight), cfg, bounds=maps)
        # settle exactly onto the solution set next to the least-squeezed point
        exact = replace(cfg, restarts=1, sigma0=1e-3, max_evals=20000, tol_fun=1e-16, stagnation_tol=1e-12,
                        stagnation_gens=200)
        fit = maximize(lambda x: -_nonlocality(x, S), exact, bounds=maps, x0=coarse.best_z)
        worst_local = max(worst_local, -fit.best_f)
        for _ in range(inputs):
            out = bloch_messiah_output(
                p, TwoModeState.product(_random_single_mode(rng, 2), _random_single_mode(rng, 2), build))
            leak = max(leak, 1.0 - out.norm2)
            land = EntanglingLandscape(out, cutoff, pad=build.cutoff - cutoff)
            best = float(land.values(fit.best_x[None])[0])
            if best < target:
                polished += 1
                polish = CmaesConfig(dim=6, restarts=1, sigma0=0.02, max_evals=1500, seed=int(rng.integers(2**31)))
                best = max(best, maximize(land.values, polish, bounds=maps, x0=fit.best_z, batch=True).best_f)
            worst = min(worst, best)
    return worst >= target, (f"worst fidelity {worst:.8f} over {circuits * inputs} outputs; "
                             f"worst Bogoliubov cross-mode weight {worst_local:.1e}; output leakage {leak:.1e}; "
                             f"{polished} polished on the Fock level")


def check_loss_channel(states: int = 10, seed: int = 3, tol: float = 1e-9) -> tuple[bool, str]:
    """Trace preservation, positivity and the semigroup law of the loss channel."""
    rng = np.random.default_rng(seed)
    trace_err = semi_err = 0.0
    min_eig = 1.0
    for _ in range(states):
        c = int(rng.integers(1, 6))
        mat = rng.normal(size=(c + 1, c + 1)) + 1j * rng.normal(size=(c + 1, c + 1))
        s = TwoModeState.from_matrix(mat / np.linalg.norm(mat))
        e1, e2 = rng.uniform(0, 1, size=2)
        for eta in (0.0, e1, 1.0):
            rho = pure_loss(s, eta)
            trace_err = max(trace_err, rho.trace_defect)
            min_eig = min(min_eig, float(np.linalg.eigvalsh(rho.rho)[0]))
        two_step = loss_channel(pure_loss(s, e1), e2)
        semi_err = max(semi_err, float(np.abs(two_step.rho - pure_loss(s, e1 * e2).rho).max()))
        mixed = loss_channel(TwoModeDensity.pure(s), e1)
        semi_err = max(semi_err, float(np.abs(mixed.rho - pure_loss(s, e1).rho).max()))
    ok = trace_err <= tol and semi_err <= tol and min_eig >= -1e-10
    return ok, f"trace defect {trace_err:.1e}, semigroup error {semi_err:.1e}, min eigenvalue {min_eig:.1e}"


def check_inner_max(targets: int = 5, probes: int = 100, seed: int = 7) -> tuple[bool, str]:
    """No random product probe beats the spectral-norm value."""
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(targets):
        mat = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        land = EntanglingLandscape(TwoModeState.from_matrix(mat / np.linalg.norm(mat)), 8, pad=5)
        z = rng.normal(size=(1, 6))
        params = np.array([[f(np.asarray(v)) for f, v in zip(search_maps(), z[0])]])
        M = land.matrices(params)[0]
        value, u, v = inner_max(M)
        if abs(abs(u.conj() @ M @ v) ** 2 - value) > 1e-12:
            return False, "singular vectors do not attain the value"
        a = rng.normal(size=(probes, M.shape[0])) + 1j * rng.normal(size=(probes, M.shape[0]))
        b = rng.normal(size=(probes, M.shape[1])) + 1j * rng.normal(size=(probes, M.shape[1]))
        a /= np.linalg.norm(a, axis=1, keepdims=True)
        b /= np.linalg.norm(b, axis=1, keepdims=True)
        probe = np.abs(np.einsum("pk,kl,pl->p", a.conj(), M, b)) ** 2
        worst = max(worst, float(np.max(probe - value)))
    return worst <= 1e-12, f"max(probe - value) = {worst:.2e} over {targets * probes} probes"


def _brute_passive(target: TwoModeState, n_grid: int = 801) -> float:
    """Passive threshold by dense scan with scipy's expm on the full truncated space."""
    c = target.basis.cutoff
    big = Basis(2 * c)
    a = annihilation_matrix(big.cutoff)
    eye = np.eye(big.dim)
    a1, a2 = np.kron(a, eye), np.kron(eye, a)
    gen = a1.T @ a2 - a1 @ a2.T
    psi = target.resized(big.cutoff).amp
    k, _ = big.numbers()
    # product inputs are not limited to the target cutoff: |2c, 0> can reach |c, c>
    best = 0.0
    phis = np.linspace(0, 2 * math.pi, n_grid, endpoint=False)
    for theta in np.linspace(0, math.pi / 2, n_grid):
        U = expm(theta * gen)
        rows = (psi.conj()[None, :] * np.exp(1j * np.outer(phis, k))) @ U
        vals = np.linalg.svd(rows.reshape(n_grid, big.dim, big.dim), compute_uv=False)[:, 0] ** 2
        best = max(best, float(vals.max()))
    return best


def check_passive_brute(targets: int = 3, seed: int = 13, tol: float = 1e-4) -> tuple[bool, str]:
    """Passive thresholds of small random targets against a dense brute-force scan."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(targets):
        mat = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        t = TwoModeState.from_matrix(mat / np.linalg.norm(mat))
        worst = max(worst, abs(passive_threshold(t).value - _brute_passive(t, 401)))
    return worst <= tol, f"worst |engine - brute| = {worst:.1e}"


def check_two_mode_squeezed_vacuum(cutoff: int = 25, tol: float = 1e-8) -> tuple[bool, str]:
    basis = Basis(cutoff)
    worst = 0.0
    for r in (0.1, 0.5, 0.9, 1.2):
        out = apply(two_mode_squeeze(r, basis), TwoModeState.fock(0, 0, basis))
        n = np.arange(cutoff + 1)
        expect = np.tanh(r) ** n / np.cosh(r)
        worst = max(worst, float(np.abs(out.matrix.diagonal() - expect).max()))
    return worst <= tol, f"worst Schmidt amplitude error {worst:.1e}"


def check_unitarity(cutoff: int = 25) -> tuple[bool, str]:
    basis = Basis(cutoff)
    defects = {
        "beam_splitter": beam_splitter(0.7 * np.exp(0.4j), basis).unitarity_defect,
        "phase_shift": phase_shift(1.3, 2, basis).unitarity_defect,
        "two_mode_squeeze": two_mode_squeeze(0.5 * np.exp(1.1j), basis).unitarity_defect,
        "single_mode_squeeze": single_mode_squeeze(0.35 * np.exp(-0.6j), 1, basis).unitarity_defect,
    }
    ok = all(v <= 1e-6 for v in defects.values()) and defects["beam_splitter"] <= 1e-12
    return ok, ", ".join(f"{k} {v:.1e}" for k, v in defects.items())


def check_seed_determinism() -> tuple[bool, str]:
    """Identical seeds give bitwise identical thresholds and CSV bytes."""
    import tempfile
    from pathlib import Path

    from .cli import execute

    spec = TargetSpec(family="fock_pair", theta=0.6, n=1)
    opt = CmaesConfig(dim=6, restarts=2, max_evals=1500, seed=42)
    esc = EscalationConfig(start_cutoff=4, stop_cutoff=6, step=2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotConvergedWarning)
        a = gaussian_threshold(spec.build(), opt, esc)
        b = gaussian_threshold(spec.build(), opt, esc)
    same_value = a.value.hex() == b.value.hex() and a.best_params == b.best_params
    config = {
        "target": spec.to_dict(),
        "kind": "both",
        "optimizer": {"restarts": 2, "max_evals": 1500},
        "escalation": {"start_cutoff": 4, "stop_cutoff": 6, "step": 2},
        "grid": {"n_phi": 41, "n_theta": 41},
    }
    blobs = []
    with tempfile.TemporaryDirectory() as tmp:
        for i in range(2):
            out = Path(tmp) / f"run{i}.csv"
            execute("threshold", config, seed=42, out=out, fmt="csv", jobs=1)
            blobs.append(out.read_bytes())
    ok = same_value and blobs[0] == blobs[1]
    return ok, f"value {a.value!r}, CSV bytes identical: {blobs[0] == blobs[1]}"


ORACLES: dict[str, Callable[[], tuple[bool, str]]] = {
    "overlap closed form (50 cases)": check_overlap_regression,
    "two-mode squeezed vacuum": check_two_mode_squeezed_vacuum,
    "unitarity defects": check_unitarity,
    "inner_max dominance": check_inner_max,
    "passive brute-force grid": check_passive_brute,
    "loss channel CPTP + semigroup": check_loss_channel,
    "seed determinism": check_seed_determinism,
    "Bloch-Messiah reachability": check_reachability,
}


# ---------------------------------------------------------------------------
# figure-level checks


@dataclass
class Context:
    """Caches targets and thresholds shared between figure checks."""

    grid: GridConfig = field(default_factory=lambda: FAST_GRID)
    opt: CmaesConfig = field(default_factory=lambda: CmaesConfig(dim=6))
    esc: EscalationConfig = field(default_factory=EscalationConfig)
    states: dict = field(default_factory=dict)
    passive_cache: dict = field(default_factory=dict)
    gaussian_cache: dict = field(default_factory=dict)
    seconds: dict = field(default_factory=dict)

    def state(self, spec: TargetSpec) -> TwoModeState:
        if spec not in self.states:
            self.states[spec] = spec.build()
        return self.states[spec]

    def passive(self, spec: TargetSpec) -> ThresholdResult:
        if spec not in self.passive_cache:
            t0 = time.perf_counter()
            self.passive_cache[spec] = passive_threshold(self.state(spec), self.grid)
            self.seconds[(spec, "passive")] = time.perf_counter() - t0
        return self.passive_cache[spec]

    def gaussian(self, spec: TargetSpec) -> ThresholdResult:
        if spec not in self.gaussian_cache:
            hint = self.passive(spec).best_params
            t0 = time.perf_counter()
            self.gaussian_cache[spec] = gaussian_threshold(self.state(spec), self.opt, self.esc, warm_start=hint)
            self.seconds[(spec, "gaussian")] = time.perf_counter() - t0
        return self.gaussian_cache[spec]


def single_subtracted(r: float, phi: float = QUARTER) -> TargetSpec:
    return TargetSpec(family="photon_subtracted", m=1, phis=(phi,), r=r)


def double_subtracted(r: float, phi2: float, phi1: float = QUARTER) -> TargetSpec:
    return TargetSpec(family="photon_subtracted", m=2, phis=(phi1, phi2), r=r)


R_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7)


def tmsv_lower_bound(theta: float) -> float:
    """``max_r |cos(theta) sech r + sin(theta) sech r tanh r|^2``."""
    def f(r):
        return -(math.cos(theta) / math.cosh(r) + math.sin(theta) * math.tanh(r) / math.cosh(r)) ** 2

    grid = np.linspace(0, 5, 501)
    r0 = grid[int(np.argmin([f(r) for r in grid]))]
    res = minimize_scalar(f, bounds=(max(r0 - 0.01, 0), r0 + 0.01), method="bounded", options={"xatol": 1e-12})
    return -min(float(res.fun), f(r0))


def criterion_1(ctx: Context):
    single = np.zeros((2, 2))
    single[0, 1] = single[1, 0] = 1 / math.sqrt(2)
    targets = [TwoModeState.from_matrix(single), ctx.state(TargetSpec(family="noon_like", theta=QUARTER, n=1))]
    out = []
    for t in targets:
        t0 = time.perf_counter()
        v = passive_threshold(t).value
        out.append((v, time.perf_counter() - t0))
    ok = all(abs(v - 1) <= 1e-6 and dt < 10 for v, dt in out)
    return ok, "; ".join(f"T_O = {v:.9f} in {dt:.2f}s" for v, dt in out)


def criterion_2(ctx: Context):
    parts, ok = [], True
    for r in (0.2, 0.7):
        spec = single_subtracted(r)
        res = ctx.gaussian(spec)
        dt = ctx.seconds[(spec, "gaussian")]
        ok &= abs(res.value - 1) <= 1e-3 and dt < 600
        parts.append(f"r={r}: T_G = {res.value:.8f} ({dt:.0f}s)")
    return ok, "; ".join(parts)


def criterion_3(ctx: Context):
    parts, ok = [], True
    for theta in (math.pi / 8, QUARTER, 3 * math.pi / 8):
        v = ctx.gaussian(TargetSpec(family="fock_pair", theta=theta, n=1)).value
        lb = tmsv_lower_bound(theta)
        ok &= v < 1 - 1e-3 and v >= lb - 1e-6
        parts.append(f"theta={theta:.4f}: T_G = {v:.6f} >= bound {lb:.6f}")
    return ok, "; ".join(parts)


def criterion_4(ctx: Context):
    ends = [TargetSpec(family="fock_pair", theta=0.01, n=1), TargetSpec(family="noon_like", theta=0.01, n=1)]
    end_ok = True
    for spec in ends:
        end_ok &= min(ctx.passive(spec).value, ctx.gaussian(spec).value) >= 1 - 1e-3
    gaps = [ctx.passive_cache[s].value - g.value for s, g in ctx.gaussian_cache.items()]
    worst = max(gaps)
    return end_ok and worst <= 2e-4, f"max(T_O - T_G) = {worst:.1e} over {len(gaps)} targets; endpoints ok: {end_ok}"


def criterion_5(ctx: Context):
    vals = [ctx.passive(single_subtracted(r)).value for r in R_GRID]
    decreasing = all(b < a for a, b in zip(vals, vals[1:]))
    drop = vals[1] - vals[-1]
    return decreasing and drop >= 0.05, "T_O(r) = " + ", ".join(f"{v:.4f}" for v in vals) + f"; drop {drop:.3f}"


def criterion_6(ctx: Context):
    parts, ok = [], True
    for r in (0.2, 0.4, 0.7):
        spec = double_subtracted(r, -QUARTER)
        res = min_transmission(ctx.state(spec), ctx.gaussian(spec))
        ok &= 1 - res.eta_min < 0.01
        parts.append(f"r={r}: 1-eta_min = {1 - res.eta_min:.4f}")
    return ok, "; ".join(parts)


def criterion_7(ctx: Context):
    etas = [min_transmission(ctx.state(single_subtracted(r)), ctx.passive(single_subtracted(r))).eta_min
            for r in R_GRID]
    i = int(np.argmin(etas))
    ok = 0 < i < len(R_GRID) - 1 and abs(R_GRID[i] - 0.45) <= 0.15 + 1e-12
    return ok, "eta_min(r) = " + ", ".join(f"{e:.4f}" for e in etas) + f"; best at r={R_GRID[i]}"


def criterion_8(ctx: Context):
    parts, ok = [], True
    for r in (0.2, 0.7):
        for phi2 in (-QUARTER, 0.0, QUARTER):
            spec = double_subtracted(r, phi2)
            g, p = ctx.gaussian(spec).value, ctx.passive(spec).value
            ok &= abs(g - p) < 1e-3
            parts.append(f"(r={r}, phi2={phi2:+.3f}) |T_G-T_O| = {abs(g - p):.1e}")
    return ok, "; ".join(parts)


HYBRID_THETA_TEXT = 0.7 * math.pi / 2
# cos(0.7 pi)|0,cat-> + sin(0.7 pi)|1,cat+> equals the theta = 0.3 pi state up to a local phase
HYBRID_THETA_CAPTION = math.pi - 0.7 * math.pi


def hybrid_loss(ctx: Context, theta: float) -> float:
    spec = TargetSpec(family="hybrid2", theta=theta, alpha=0.3)
    return 1 - min_transmission(ctx.state(spec), ctx.gaussian(spec)).eta_min


def criterion_9(ctx: Context):
    loss = hybrid_loss(ctx, HYBRID_THETA_TEXT)
    if abs(loss - 0.135) <= 0.02:
        return True, f"1-eta_min = {loss:.4f} at theta = 0.7*pi/2"
    rerun = hybrid_loss(ctx, HYBRID_THETA_CAPTION)
    return False, (f"1-eta_min = {loss:.4f} at theta = 0.7*pi/2 (outside 0.135 +- 0.02); "
                   f"re-run at theta = 0.7*pi (equivalently 0.3*pi): {rerun:.4f}")


def criterion_10(ctx: Context):
    t0 = time.perf_counter()
    results = [_timed(name, fn) for name, fn in ORACLES.items()]
    dt = time.perf_counter() - t0
    failed = [r.name for r in results if not r.passed]
    return not failed and dt < 900, f"{len(results) - len(failed)}/{len(results)} oracle checks pass in {dt:.0f}s"


CRITERIA: dict[int, Callable[[Context], tuple[bool, str]]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}
# checks that compare thresholds across targets run after the targets exist
FIGURE_ORDER = (1, 2, 3, 5, 6, 7, 8, 9, 4)
SUITES = ("oracles", "figures-fast", "figures-full")


def run_suite(name: str, stream=sys.stdout) -> list[CheckResult]:
    """Run a named suite, printing one PASS/FAIL line per check.

    Raises:
        KeyError: unknown suite name.
    """
    if name not in SUITES:
        raise KeyError(name)
    if name == "oracles":
        results = []
        for check, fn in ORACLES.items():
            results.append(_timed(check, fn))
            print(results[-1].line(), file=stream, flush=True)
        return results
    ctx = Context() if name == "figures-fast" else Context(grid=GridConfig())
    results = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotConvergedWarning)
        for i in FIGURE_ORDER:
            results.append(_timed(f"criterion {i}", lambda i=i: CRITERIA[i](ctx)))
            print(results[-1].line(), file=stream, flush=True)
    return results
