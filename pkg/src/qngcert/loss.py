"""Pure-loss channel, fidelity of lossy states and minimal tolerable transmission.

Both modes pass through the same channel of transmission ``eta``. Single-mode
Kraus operators are

    A_j = sum_n sqrt(C(n, j)) eta^{(n-j)/2} (1-eta)^{j/2} |n-j><n|,

and the two-mode output is ``sum_{j,j'} (A_j x A_j') |psi><psi| (A_j x A_j')^+``.
Loss only lowers photon numbers, so the truncated Kraus set is complete.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import comb

from .errors import BasisMismatch, LeakageTooLarge, NoMargin, NonMonotoneFidelity, ParameterOutOfRange
from .fock import Basis, TwoModeState
from .threshold import ThresholdResult

LOSS_MAX_LEAKAGE = 1e-8
MONOTONE_SLACK = 1e-12


@dataclass(frozen=True)
class TwoModeDensity:
    basis: Basis
    rho: np.ndarray
    trace_defect: float = field(init=False)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (self.basis.size, self.basis.size):
            raise BasisMismatch(f"density shape {rho.shape} does not match basis of size {self.basis.size}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "trace_defect", float(abs(np.trace(rho).real - 1.0)))

    @classmethod
    def pure(cls, state: TwoModeState) -> "TwoModeDensity":
        return cls(state.basis, np.outer(state.amp, state.amp.conj()))


@dataclass
class LossResult:
    eta_min: float
    threshold_used: ThresholdResult
    fidelity_curve: list[tuple[float, float]]
    monotone_verified: bool
    no_margin: bool = False


def kraus_operators(eta: float, cutoff: int) -> np.ndarray:
    """Single-mode loss Kraus operators, shape ``(cutoff+1, cutoff+1, cutoff+1)`` indexed ``[j, out, in]``."""
    if not 0.0 <= eta <= 1.0:
        raise ParameterOutOfRange(f"eta must lie in [0, 1], got {eta}")
    d = cutoff + 1
    out = np.zeros((d, d, d))
    n = np.arange(d)
    for j in range(d):
        src = n[j:]
        with np.errstate(divide="ignore", invalid="ignore"):
            # 0**0 = 1 keeps eta in {0, 1} exact
            amp = np.sqrt(comb(src, j)) * np.power(eta, (src - j) / 2) * np.power(1 - eta, j / 2)
        out[j, src - j, src] = amp
    return out


def _branches(state: TwoModeState, eta: float) -> tuple[np.ndarray, np.ndarray]:
    if state.leakage > LOSS_MAX_LEAKAGE:
        raise LeakageTooLarge(f"state leakage {state.leakage:.2e} exceeds {LOSS_MAX_LEAKAGE}")
    A = kraus_operators(eta, state.basis.cutoff)
    return A, np.einsum("jab,bc->jac", A, state.matrix)


def pure_loss(state: TwoModeState, eta: float) -> TwoModeDensity:
    """Output density of equal pure loss ``eta`` on both modes.

    Raises:
        ParameterOutOfRange: ``eta`` outside ``[0, 1]``.
        LeakageTooLarge: the input state has truncation leakage above 1e-8.
    """
    A, Y = _branches(state, eta)
    # X[j, j'] = A_j Psi A_j'^T, one pure branch per Kraus pair
    X = np.einsum("jac,kdc->jkad", Y, A).reshape(-1, state.basis.size)
    return TwoModeDensity(state.basis, X.T @ X.conj())


def loss_channel(rho: TwoModeDensity, eta: float) -> TwoModeDensity:
    """Equal pure loss on both modes of a (possibly mixed) two-mode density."""
    d = rho.basis.dim
    A = kraus_operators(eta, rho.basis.cutoff)
    t = rho.rho.reshape(d, d, d, d)
    # mode 1 (indices a, c), then mode 2 (indices b, e)
    t = np.einsum("jxa,abce,jyc->xbye", A, t, A.conj())
    t = np.einsum("jxb,abce,jye->axcy", A, t, A.conj())
    return TwoModeDensity(rho.basis, t.reshape(d * d, d * d))


def fidelity_to_pure(target: TwoModeState, rho: TwoModeDensity) -> float:
    """``<target| rho |target>``."""
    if target.basis != rho.basis:
        raise BasisMismatch(f"cutoffs {target.basis.cutoff} and {rho.basis.cutoff} differ")
    psi = target.amp
    return float(np.real(psi.conj() @ rho.rho @ psi))


def lossy_fidelity(target: TwoModeState, eta: float) -> float:
    """Fidelity of the lossy target with itself, without building the density matrix.

    Sums ``|<target| A_j x A_j' |target>|^2`` over all Kraus pairs.
    """
    A, Y = _branches(target, eta)
    W = np.einsum("kl,jlm->jkm", target.matrix.conj(), A)
    Z = np.einsum("jkm,ikm->ji", Y, W)
    return float(np.sum(np.abs(Z) ** 2))


def min_transmission(target: TwoModeState, threshold: ThresholdResult | float, tol: float = 1e-4,
                     grid_points: int = 21) -> LossResult:
    """Smallest transmission at which the lossy target still beats the threshold.

    ``F(eta)`` is sampled on a uniform grid to check monotonicity, then the
    crossing ``F(eta) = threshold`` is bisected to ``tol``. If ``F`` is not
    monotone the bracket is taken at the last upward crossing of the grid and
    a ``NonMonotoneFidelity`` warning is issued. A threshold of 1 leaves no
    margin: ``eta_min = 1`` with ``no_margin`` set.

    Args:
        target: the lossless target, held fixed as the certification target.
        threshold: a ThresholdResult, or a bare value in ``[0, 1]``.
        tol: bisection tolerance in ``eta``.
        grid_points: size of the monotonicity grid on ``[0, 1]``.
    """
    if isinstance(threshold, ThresholdResult):
        value, used = threshold.value, threshold
    else:
        value, used = float(threshold), None
    etas = np.linspace(0.0, 1.0, grid_points)
    fids = np.array([lossy_fidelity(target, e) for e in etas])
    curve = [(float(e), float(f)) for e, f in zip(etas, fids)]
    monotone = bool(np.all(np.diff(fids) >= -MONOTONE_SLACK))

    if value >= fids[-1]:
        warnings.warn(f"threshold {value} leaves no loss margin", NoMargin, stacklevel=2)
        return LossResult(1.0, used, curve, monotone, no_margin=True)
    if not monotone:
        warnings.warn("lossy fidelity is not monotone in eta; using the last crossing", NonMonotoneFidelity,
                      stacklevel=2)
    below = np.nonzero(fids <= value)[0]
    if len(below) == 0:
        return LossResult(0.0, used, curve, monotone)
    lo, hi = float(etas[below[-1]]), float(etas[below[-1] + 1])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if lossy_fidelity(target, mid) > value:
            hi = mid
        else:
            lo = mid
    return LossResult(hi, used, curve, monotone)
