"""Target-state families: Fock pairs, NOON-like states, hybrid cat states and
photon-subtracted squeezed vacua.

Squeezing parameters ``r`` of the photon-subtracted family are Bogoliubov
parameters: ``S(r)^+ a S(r) = a cosh r + a^+ sinh r``, i.e. the generator
coefficient of ``exp(xi a^+2 - xi^* a^2)`` is ``xi = r / 2``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields

import numpy as np

from .errors import CutoffTooSmall, InvalidConfig, ZeroState
from .fock import Basis, TwoModeState, annihilation_matrix, single_mode_squeeze_matrix

FAMILIES = ("fock_pair", "noon_like", "hybrid1", "hybrid2", "photon_subtracted")
CAT_TAIL = 1e-10
CAT_MIN_CUTOFF = 15
SUBTRACTED_LEAKAGE = 1e-8
# Fock layers kept above the requested cutoff while building a subtracted state.
_BUILD_PAD = 40


class DegenerateCat(UserWarning):
    """Odd cat requested at alpha = 0; its limit |1> is returned."""


def fock_pair(theta: float, n: int, basis: Basis) -> TwoModeState:
    """``cos(theta)|0,0> + sin(theta)|n,n>``."""
    if n > basis.cutoff:
        raise CutoffTooSmall(f"|{n},{n}> needs cutoff >= {n}")
    mat = np.zeros((basis.dim, basis.dim), dtype=complex)
    mat[0, 0] += math.cos(theta)
    mat[n, n] += math.sin(theta)
    return TwoModeState(basis, mat.reshape(-1)).normalized()


def noon_like(theta: float, n: int, basis: Basis) -> TwoModeState:
    """``cos(theta)|0,2n> + sin(theta)|2n,0>``."""
    if 2 * n > basis.cutoff:
        raise CutoffTooSmall(f"|0,{2 * n}> needs cutoff >= {2 * n}")
    mat = np.zeros((basis.dim, basis.dim), dtype=complex)
    mat[0, 2 * n] += math.cos(theta)
    mat[2 * n, 0] += math.sin(theta)
    return TwoModeState(basis, mat.reshape(-1)).normalized()


def cat_cutoff(alpha: float, tail: float = CAT_TAIL) -> int:
    """Smallest cutoff (at least ``CAT_MIN_CUTOFF``) leaving less than ``tail`` of either cat above it."""
    c = CAT_MIN_CUTOFF
    while True:
        worst = max(1.0 - np.sum(np.abs(cat_state(alpha, p, c + 60)[: c + 1]) ** 2) for p in "+-")
        if worst < tail:
            return c
        c += 1


def cat_state(alpha: float, parity: str, cutoff: int | None = None) -> np.ndarray:
    """Normalized single-mode ``|alpha> + |-alpha>`` (``"+"``) or ``|alpha> - |-alpha>`` (``"-"``)."""
    if parity not in ("+", "-"):
        raise ValueError("parity must be '+' or '-'")
    if cutoff is None:
        cutoff = cat_cutoff(alpha)
    n = np.arange(cutoff + 1)
    keep = (n % 2 == 0) if parity == "+" else (n % 2 == 1)
    if alpha == 0:
        out = np.zeros(cutoff + 1)
        if parity == "+":
            out[0] = 1.0
        else:
            warnings.warn("odd cat at alpha = 0 replaced by its limit |1>", DegenerateCat, stacklevel=2)
            out[1] = 1.0
        return out.astype(complex)
    # log-space coefficients alpha^n / sqrt(n!)
    logc = n * math.log(abs(alpha)) - 0.5 * np.array([math.lgamma(k + 1) for k in n])
    c = np.where(keep, np.exp(logc - logc[keep].max()), 0.0) * np.sign(alpha) ** n
    return (c / np.linalg.norm(c)).astype(complex)


def hybrid(variant: int, theta: float, alpha: float, basis: Basis | None = None) -> TwoModeState:
    """Fock qubit in mode 1 entangled with a cat qubit in mode 2.

    variant 1: ``cos(theta)|0>|cat+> + sin(theta)|1>|cat->``;
    variant 2: ``cos(theta)|0>|cat-> + sin(theta)|1>|cat+>``.
    """
    if variant not in (1, 2):
        raise ValueError("variant must be 1 or 2")
    basis = basis or Basis(cat_cutoff(alpha))
    if basis.cutoff < 1:
        raise CutoffTooSmall("hybrid states need cutoff >= 1")
    big = max(basis.cutoff, cat_cutoff(alpha)) + 20
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateCat)
        plus, minus = cat_state(alpha, "+", big), cat_state(alpha, "-", big)
    first, second = (plus, minus) if variant == 1 else (minus, plus)
    mat = np.zeros((big + 1, big + 1), dtype=complex)
    mat[0] = math.cos(theta) * first
    mat[1] = math.sin(theta) * second
    return TwoModeState.from_matrix(mat).resized(basis.cutoff)


def _subtraction(phi: float, r1: float, r2: float, dim: int):
    """Bogoliubov-transformed ``cos(phi) a1 + sin(phi) a2`` acting on the core state."""
    a = annihilation_matrix(dim - 1)
    ad = a.T
    c1, s1 = math.cosh(r1), math.sinh(r1)
    c2, s2 = math.cosh(r2), math.sinh(r2)
    m1 = c1 * a + s1 * ad
    m2 = c2 * a + s2 * ad
    return lambda psi: math.cos(phi) * (m1 @ psi) + math.sin(phi) * (psi @ m2.T)


def core_state(m: int, phis, r: float, r2: float | None = None) -> TwoModeState:
    """Finite Fock superposition ``|core>`` with ``S_1 S_2 |core>`` the subtracted state.

    ``r`` and ``r2`` are the Bogoliubov squeezings of modes 1 and 2
    (``r2`` defaults to ``-r``). Each ``cos(phi) a1 + sin(phi) a2`` is
    commuted through the squeezers, ``a_i -> a_i cosh r_i + a_i^+ sinh r_i``,
    and applied to vacuum on an ``m``-photon space, which holds the result
    exactly.
    """
    phis = _check_phis(m, phis)
    r2 = -r if r2 is None else r2
    dim = m + 1
    psi = np.zeros((dim, dim), dtype=complex)
    psi[0, 0] = 1.0
    for phi in phis:
        psi = _subtraction(phi, r, r2, dim)(psi)
    if np.linalg.norm(psi) < 1e-14:
        raise ZeroState("subtraction annihilates the squeezed vacuum")
    return TwoModeState.from_matrix(psi).normalized()


def _check_phis(m: int, phis) -> tuple:
    if m not in (1, 2):
        raise ValueError("m must be 1 or 2")
    phis = tuple(float(p) for p in np.atleast_1d(phis))
    if len(phis) != m:
        raise ValueError(f"need {m} subtraction angles, got {len(phis)}")
    return phis


def squeezed_vacuum(r: float, cutoff: int) -> np.ndarray:
    """Single-mode ``S(r)|0>`` with Bogoliubov parameter ``r``."""
    s = single_mode_squeeze_matrix(r / 2, cutoff, pad=_BUILD_PAD)
    return s[:, 0]


def _subtracted_matrix(m: int, phis: tuple, r: float, big: int) -> np.ndarray:
    psi = np.outer(squeezed_vacuum(r, big), squeezed_vacuum(-r, big))
    a = annihilation_matrix(big)
    for phi in phis:
        psi = math.cos(phi) * (a @ psi) + math.sin(phi) * (psi @ a.T)
    norm = np.linalg.norm(psi)
    if norm < 1e-14:
        raise ZeroState("subtraction annihilates the squeezed vacuum")
    return psi / norm


def subtracted_cutoff(m: int, phis, r: float, leakage: float = SUBTRACTED_LEAKAGE, minimum: int = 10) -> int:
    """Smallest cutoff at which the subtracted state leaks less than ``leakage``."""
    phis = _check_phis(m, phis)
    c = minimum
    while True:
        psi = _subtracted_matrix(m, phis, r, c + _BUILD_PAD)
        if 1.0 - np.sum(np.abs(psi[: c + 1, : c + 1]) ** 2) <= leakage:
            return c
        c += 1


def photon_subtracted(m: int, phis, r: float, basis: Basis | None = None) -> TwoModeState:
    """``prod_k (cos(phi_k) a1 + sin(phi_k) a2) S_1(r) S_2(-r) |0,0>``, normalized.

    The state is built ``_BUILD_PAD`` layers above the requested cutoff and
    truncated; the truncated weight is reported as leakage. Without a basis
    the smallest cutoff with leakage <= 1e-8 is chosen.
    """
    phis = _check_phis(m, phis)
    if basis is None:
        basis = Basis(subtracted_cutoff(m, phis, r))
    if basis.cutoff < m:
        raise CutoffTooSmall(f"{m}-photon subtraction needs cutoff >= {m}")
    psi = _subtracted_matrix(m, phis, r, basis.cutoff + _BUILD_PAD)
    return TwoModeState.from_matrix(psi).resized(basis.cutoff)


# ---------------------------------------------------------------------------
# serializable spec


@dataclass(frozen=True)
class TargetSpec:
    family: str
    theta: float | None = None
    n: int | None = None
    alpha: float | None = None
    r: float | None = None
    phis: tuple | None = None
    m: int | None = None
    cutoff: int | None = None

    REQUIRED = {
        "fock_pair": ("theta", "n"),
        "noon_like": ("theta", "n"),
        "hybrid1": ("theta", "alpha"),
        "hybrid2": ("theta", "alpha"),
        "photon_subtracted": ("m", "phis", "r"),
    }

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidConfig(f"family: unknown target family {self.family!r}")
        allowed = set(self.REQUIRED[self.family]) | {"cutoff"}
        for f in fields(self):
            if f.name == "family":
                continue
            v = getattr(self, f.name)
            if f.name in self.REQUIRED[self.family] and v is None:
                raise InvalidConfig(f"{f.name}: required for family {self.family!r}")
            if v is not None and f.name not in allowed:
                raise InvalidConfig(f"{f.name}: not a parameter of family {self.family!r}")
        if self.theta is not None and not -1e-12 <= self.theta <= math.pi / 2 + 1e-12:
            raise InvalidConfig(f"theta: must lie in [0, pi/2], got {self.theta}")
        if self.m is not None and self.m not in (1, 2):
            raise InvalidConfig(f"m: must be 1 or 2, got {self.m}")
        if self.phis is not None:
            object.__setattr__(self, "phis", tuple(float(p) for p in self.phis))
            if self.m is not None and len(self.phis) != self.m:
                raise InvalidConfig(f"phis: expected {self.m} angles, got {len(self.phis)}")
        for name in ("n", "cutoff"):
            v = getattr(self, name)
            if v is not None and (int(v) != v or v < 0):
                raise InvalidConfig(f"{name}: must be a non-negative integer")
        if self.alpha is not None and self.alpha < 0:
            raise InvalidConfig("alpha: must be >= 0")

    @classmethod
    def from_dict(cls, data: dict) -> "TargetSpec":
        if not isinstance(data, dict):
            raise InvalidConfig("target: expected a JSON object")
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise InvalidConfig(f"{key}: unknown target key")
        if "family" not in data:
            raise InvalidConfig("family: missing from target")
        return cls(**data)

    def to_dict(self) -> dict:
        out = {"family": self.family}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name != "family" and v is not None:
                out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    def replace(self, **changes) -> "TargetSpec":
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(changes)
        return TargetSpec(**d)

    def build(self) -> TwoModeState:
        basis = Basis(self.cutoff) if self.cutoff is not None else None
        fam = self.family
        if fam in ("fock_pair", "noon_like"):
            need = self.n if fam == "fock_pair" else 2 * self.n
            basis = basis or Basis(need)
            return (fock_pair if fam == "fock_pair" else noon_like)(self.theta, self.n, basis)
        if fam in ("hybrid1", "hybrid2"):
            return hybrid(int(fam[-1]), self.theta, self.alpha, basis)
        return photon_subtracted(self.m, self.phis, self.r, basis)
