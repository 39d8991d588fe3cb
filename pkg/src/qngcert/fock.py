"""Truncated two-mode Fock space.

States are stored as flat amplitude vectors over ``|k>_1 |l>_2`` with
``k, l <= cutoff`` and flat index ``k * dim + l``. Gaussian unitaries are
built by exponentiating their (anti-Hermitian) generators through an
eigendecomposition of each invariant block: total photon number for the
beam splitter, photon-number difference for two-mode squeezing and parity
for single-mode squeezing.

Conventions::

    U_BS(tau)  = exp(tau a1^+ a2 - tau^* a1 a2^+)
    R_i(phi)   = exp(i phi a_i^+ a_i)
    S_i(xi)    = exp(xi a_i^+2 - xi^* a_i^2)        (Bogoliubov factor cosh 2|xi|)
    S_12(xi)   = exp(xi a1^+ a2^+ - xi^* a1 a2)     (Bogoliubov factor cosh |xi|)
"""

from __future__ import annotations

import math

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BasisMismatch, ParameterOutOfRange, TruncationWarning, ZeroState

XI_MAX = 3.0
UNITARITY_TOL = 1e-6
INTERIOR_LEAKAGE = 1e-8
# Minimum extra Fock layers used when exponentiating a squeezing generator
# before truncating back to the requested cutoff; see squeeze_pad.
SQUEEZE_PAD = 20
SQUEEZE_PAD_MAX = 300
_PAD_TAIL = 1e-16


def squeeze_pad(bogoliubov: float, cutoff: int, minimum: int = SQUEEZE_PAD) -> int:
    """Layers to add above ``cutoff`` so the squeezed tail ``tanh(r)^n`` is below 1e-16 there."""
    t = math.tanh(abs(bogoliubov))
    if t < 1e-300:
        return minimum
    need = math.ceil(math.log(_PAD_TAIL) / math.log(t)) - cutoff if t < 1 else SQUEEZE_PAD_MAX
    return int(min(max(need, minimum), SQUEEZE_PAD_MAX))


@dataclass(frozen=True)
class Basis:
    """Two-mode truncated Fock basis with ``cutoff`` the largest index per mode."""

    cutoff: int

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 0:
            raise ValueError(f"cutoff must be a non-negative integer, got {self.cutoff!r}")

    @property
    def dim(self) -> int:
        return self.cutoff + 1

    @property
    def size(self) -> int:
        return self.dim * self.dim

    def index(self, k: int, l: int) -> int:
        if not (0 <= k <= self.cutoff and 0 <= l <= self.cutoff):
            raise IndexError(f"|{k},{l}> outside cutoff {self.cutoff}")
        return k * self.dim + l

    def pair(self, i: int) -> tuple[int, int]:
        return divmod(int(i), self.dim)

    def numbers(self) -> tuple[np.ndarray, np.ndarray]:
        """Photon numbers (k, l) of every flat index."""
        k, l = np.divmod(np.arange(self.size), self.dim)
        return k, l


def _check_basis(a: Basis, b: Basis) -> None:
    if a != b:
        raise BasisMismatch(f"basis cutoff {a.cutoff} does not match {b.cutoff}")


@dataclass(frozen=True, eq=False)
class TwoModeState:
    """Amplitudes of a two-mode state plus the norm^2 estimated above the cutoff."""

    basis: Basis
    amp: np.ndarray
    leakage: float = 0.0

    def __post_init__(self):
        amp = np.array(self.amp, dtype=complex).reshape(-1)
        if amp.shape != (self.basis.size,):
            raise ValueError(f"expected {self.basis.size} amplitudes, got {amp.shape[0]}")
        if self.leakage < 0:
            raise ValueError("leakage must be non-negative")
        amp.flags.writeable = False
        object.__setattr__(self, "amp", amp)
        object.__setattr__(self, "leakage", float(self.leakage))

    @classmethod
    def fock(cls, k: int, l: int, basis: Basis) -> "TwoModeState":
        amp = np.zeros(basis.size, dtype=complex)
        amp[basis.index(k, l)] = 1.0
        return cls(basis, amp)

    @classmethod
    def from_matrix(cls, mat, leakage: float = 0.0) -> "TwoModeState":
        mat = np.asarray(mat)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("amplitude matrix must be square")
        return cls(Basis(mat.shape[0] - 1), mat.reshape(-1), leakage)

    @classmethod
    def product(cls, u, v, basis: Basis | None = None) -> "TwoModeState":
        """Product state with single-mode amplitude vectors ``u`` (mode 1) and ``v`` (mode 2)."""
        u = np.asarray(u, dtype=complex)
        v = np.asarray(v, dtype=complex)
        n = max(len(u), len(v))
        basis = basis or Basis(n - 1)
        mat = np.zeros((basis.dim, basis.dim), dtype=complex)
        mat[: len(u), : len(v)] = np.outer(u, v)
        return cls(basis, mat.reshape(-1))

    @property
    def matrix(self) -> np.ndarray:
        """Amplitudes as a ``dim x dim`` matrix indexed ``[k, l]``."""
        return self.amp.reshape(self.basis.dim, self.basis.dim)

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amp, self.amp).real)

    def normalized(self) -> "TwoModeState":
        total = self.norm2 + self.leakage
        if total < 1e-28:
            raise ZeroState("cannot normalize a zero state")
        return TwoModeState(self.basis, self.amp / np.sqrt(total), self.leakage / total)

    def resized(self, cutoff: int) -> "TwoModeState":
        """Zero-pad or truncate to ``cutoff``; truncated weight is added to the leakage."""
        basis = Basis(cutoff)
        mat = np.zeros((basis.dim, basis.dim), dtype=complex)
        m = min(basis.dim, self.basis.dim)
        mat[:m, :m] = self.matrix[:m, :m]
        dropped = self.norm2 - float(np.sum(np.abs(mat) ** 2))
        return TwoModeState(basis, mat.reshape(-1), self.leakage + max(dropped, 0.0))

    def swapped(self) -> "TwoModeState":
        """Exchange the two modes."""
        return TwoModeState(self.basis, self.matrix.T.reshape(-1), self.leakage)

    def support(self, tol: float = 0.0) -> int:
        """Smallest cutoff whose square keeps all but ``tol`` of the norm^2."""
        p = np.abs(self.matrix) ** 2
        total = p.sum()
        for c in range(self.basis.dim):
            if total - p[: c + 1, : c + 1].sum() <= tol:
                return c
        return self.basis.cutoff


@dataclass(frozen=True, eq=False)
class TwoModeOperator:
    basis: Basis
    mat: np.ndarray
    unitarity_defect: float = 0.0

    def __post_init__(self):
        mat = np.array(self.mat, dtype=complex)
        if mat.shape != (self.basis.size, self.basis.size):
            raise ValueError(f"operator shape {mat.shape} does not match basis size {self.basis.size}")
        mat.flags.writeable = False
        object.__setattr__(self, "mat", mat)

    @classmethod
    def from_matrix(cls, mat, basis: Basis) -> "TwoModeOperator":
        """Wrap ``mat`` and certify its unitarity defect."""
        return cls(basis, mat, unitarity_defect(mat))

    @classmethod
    def identity(cls, basis: Basis) -> "TwoModeOperator":
        return cls(basis, np.eye(basis.size))

    @property
    def dagger(self) -> "TwoModeOperator":
        return TwoModeOperator(self.basis, self.mat.conj().T, self.unitarity_defect)

    def __matmul__(self, other):
        if isinstance(other, TwoModeOperator):
            return compose(self, other)
        if isinstance(other, TwoModeState):
            return apply(self, other)
        return NotImplemented


def unitarity_defect(mat: np.ndarray) -> float:
    """Largest ``||(U^+U - I) e_j||`` restricted to interior columns.

    A column is interior when the norm^2 missing from its image is below
    ``INTERIOR_LEAKAGE``. Columns that spill past the cutoff are excluded
    both as ``j`` and as components of the deviation vector, since their
    overlaps with interior columns are set by the discarded tail.
    """
    gram = mat.conj().T @ mat
    missing = 1.0 - np.real(np.diag(gram))
    interior = missing < INTERIOR_LEAKAGE
    if not interior.any():
        return 0.0
    gram[np.diag_indices_from(gram)] -= 1.0
    dev = np.linalg.norm(gram[np.ix_(interior, interior)], axis=0)
    return float(dev.max())


def _certified(mat: np.ndarray, basis: Basis, what: str) -> TwoModeOperator:
    op = TwoModeOperator.from_matrix(mat, basis)
    if op.unitarity_defect > UNITARITY_TOL:
        warnings.warn(
            f"{what}: unitarity defect {op.unitarity_defect:.2e} at cutoff {basis.cutoff}",
            TruncationWarning,
            stacklevel=3,
        )
    return op


# ---------------------------------------------------------------------------
# invariant blocks of the generators


@lru_cache(maxsize=4096)
def _block_eig(kind: str, label: int, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition ``G = V diag(-i w) V^+`` of one tridiagonal generator block.

    ``kind == "bs"``: states ``|j, label-j>`` for ``j = lo..hi`` under
    ``a1^+ a2 - a1 a2^+``. ``kind == "tms"``: states ``|j, j-label>`` under
    ``a1^+ a2^+ - a1 a2``. ``kind == "sq"``: single-mode states
    ``|label + 2j>`` under ``a^+2 - a^2``.
    """
    j = np.arange(lo, hi)
    if kind == "bs":
        off = np.sqrt((j + 1.0) * (label - j))
    elif kind == "tms":
        off = np.sqrt((j + 1.0) * (j - label + 1.0))
    elif kind == "sq":
        n = label + 2 * j
        off = np.sqrt((n + 1.0) * (n + 2.0))
    else:
        raise ValueError(kind)
    size = hi - lo + 1
    gen = np.zeros((size, size))
    gen[np.arange(1, size), np.arange(size - 1)] = off
    gen[np.arange(size - 1), np.arange(1, size)] = -off
    w, v = np.linalg.eigh(1j * gen)
    return w, v


def _block_exp(kind: str, label: int, lo: int, hi: int, t: float) -> np.ndarray:
    w, v = _block_eig(kind, label, lo, hi)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def _bs_blocks(cutoff: int):
    """(label, lo, hi, flat indices) of total-number blocks in the truncated square."""
    dim = cutoff + 1
    for n in range(2 * cutoff + 1):
        lo, hi = max(0, n - cutoff), min(n, cutoff)
        j = np.arange(lo, hi + 1)
        yield n, lo, hi, j * dim + (n - j)


def _tms_blocks(cutoff: int):
    """(label, lo, hi, flat indices) of photon-difference chains in the truncated square."""
    dim = cutoff + 1
    for d in range(-cutoff, cutoff + 1):
        lo, hi = max(0, d), min(cutoff, cutoff + d)
        j = np.arange(lo, hi + 1)
        yield d, lo, hi, j * dim + (j - d)


class BlockPropagator:
    """Fast ``exp(t G) x`` for a block-diagonal generator on a truncated square.

    Blocks are zero-padded to a common size so a whole population of
    parameter values is propagated with two batched matrix products.
    """

    def __init__(self, kind: str, cutoff: int):
        blocks = list(_bs_blocks(cutoff) if kind == "bs" else _tms_blocks(cutoff))
        size = (cutoff + 1) ** 2
        width = max(hi - lo + 1 for _, lo, hi, _ in blocks)
        nb = len(blocks)
        self.size = size
        self.idx = np.full((nb, width), size, dtype=np.intp)
        self.w = np.zeros((nb, width))
        self.v = np.zeros((nb, width, width), dtype=complex)
        for b, (label, lo, hi, idx) in enumerate(blocks):
            w, v = _block_eig(kind, label, lo, hi)
            m = len(idx)
            self.idx[b, :m] = idx
            self.w[b, :m] = w
            self.v[b, :m, :m] = v
        self.vh = np.conj(np.swapaxes(self.v, -1, -2))

    def apply(self, x: np.ndarray, t) -> np.ndarray:
        """Return ``exp(t G) x``; ``x`` has shape ``(..., size)`` and ``t`` broadcasts over ``...``."""
        x = np.asarray(x, dtype=complex)
        t = np.asarray(t, dtype=float)
        ext = np.concatenate([x, np.zeros(x.shape[:-1] + (1,), dtype=complex)], axis=-1)
        xg = ext[..., self.idx]
        y = (self.vh @ xg[..., None])[..., 0]
        y *= np.exp(-1j * t[..., None, None] * self.w)
        z = (self.v @ y[..., None])[..., 0]
        out = np.empty(x.shape[:-1] + (self.size + 1,), dtype=complex)
        out[..., self.idx] = z
        return out[..., : self.size]


@lru_cache(maxsize=64)
def propagator(kind: str, cutoff: int) -> BlockPropagator:
    return BlockPropagator(kind, cutoff)


# ---------------------------------------------------------------------------
# elementary operators


def _check_mode(mode: int) -> None:
    if mode not in (1, 2):
        raise ValueError(f"mode must be 1 or 2, got {mode!r}")


def _check_xi(xi: complex, xi_max: float) -> None:
    if abs(xi) > xi_max:
        raise ParameterOutOfRange(f"|xi| = {abs(xi):.4g} exceeds xi_max = {xi_max}")


def _phase_diag(basis: Basis, phi1: float = 0.0, phi2: float = 0.0) -> np.ndarray:
    k, l = basis.numbers()
    return np.exp(1j * (phi1 * k + phi2 * l))


def phase_shift(phi: float, mode: int, basis: Basis) -> TwoModeOperator:
    """``R_mode(phi) = exp(i phi n_mode)``."""
    _check_mode(mode)
    d = _phase_diag(basis, phi if mode == 1 else 0.0, phi if mode == 2 else 0.0)
    return TwoModeOperator(basis, np.diag(d), 0.0)


def beam_splitter(tau: complex, basis: Basis) -> TwoModeOperator:
    """Truncated matrix of ``exp(tau a1^+ a2 - tau^* a1 a2^+)``.

    Each total-number block is exponentiated in full before truncation, so
    the returned entries are exact.
    """
    theta, alpha = abs(tau), np.angle(tau)
    c = basis.cutoff
    mat = np.zeros((basis.size, basis.size), dtype=complex)
    for n in range(2 * c + 1):
        e = _block_exp("bs", n, 0, n, theta)
        j = np.arange(n + 1)
        keep = (j <= c) & (n - j <= c)
        idx = j[keep] * basis.dim + (n - j[keep])
        mat[np.ix_(idx, idx)] = e[np.ix_(keep, keep)]
    d = _phase_diag(basis, alpha)
    mat = d[:, None] * mat * d.conj()[None, :]
    return TwoModeOperator.from_matrix(mat, basis)


def two_mode_squeeze(xi: complex, basis: Basis, xi_max: float = XI_MAX, pad: int | None = None) -> TwoModeOperator:
    """Truncated matrix of ``exp(xi a1^+ a2^+ - xi^* a1 a2)``, exponentiated ``pad`` layers above the cutoff.

    ``pad=None`` picks enough layers for the squeezed tail to vanish (``squeeze_pad``).
    """
    _check_xi(xi, xi_max)
    r, alpha = abs(xi), np.angle(xi)
    if pad is None:
        pad = squeeze_pad(r, basis.cutoff)
    c, big = basis.cutoff, basis.cutoff + pad
    mat = np.zeros((basis.size, basis.size), dtype=complex)
    for d in range(-c, c + 1):
        lo, hi = max(0, d), min(big, big + d)
        e = _block_exp("tms", d, lo, hi, r)
        j = np.arange(lo, hi + 1)
        keep = (j <= c) & (j - d <= c)
        idx = j[keep] * basis.dim + (j[keep] - d)
        mat[np.ix_(idx, idx)] = e[np.ix_(keep, keep)]
    ph = _phase_diag(basis, alpha)
    mat = ph[:, None] * mat * ph.conj()[None, :]
    return _certified(mat, basis, "two_mode_squeeze")


def single_mode_squeeze_matrix(xi: complex, cutoff: int, pad: int | None = None) -> np.ndarray:
    """Single-mode ``exp(xi a^+2 - xi^* a^2)`` truncated to ``cutoff``."""
    s, alpha = abs(xi), np.angle(xi)
    if pad is None:
        pad = squeeze_pad(2 * s, cutoff)
    big = cutoff + pad
    mat = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    for parity in (0, 1):
        if parity > big:
            continue
        hi = (big - parity) // 2
        e = _block_exp("sq", parity, 0, hi, s)
        n = parity + 2 * np.arange(hi + 1)
        keep = n <= cutoff
        mat[np.ix_(n[keep], n[keep])] = e[np.ix_(keep, keep)]
    ph = np.exp(0.5j * alpha * np.arange(cutoff + 1))
    return ph[:, None] * mat * ph.conj()[None, :]


def single_mode_squeeze(xi: complex, mode: int, basis: Basis, xi_max: float = XI_MAX, pad: int | None = None) -> TwoModeOperator:
    """``S_mode(xi)`` tensored with the identity on the other mode."""
    _check_mode(mode)
    _check_xi(xi, xi_max)
    s = single_mode_squeeze_matrix(xi, basis.cutoff, pad)
    eye = np.eye(basis.dim)
    mat = np.kron(s, eye) if mode == 1 else np.kron(eye, s)
    return _certified(mat, basis, "single_mode_squeeze")


def annihilation_matrix(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1)


def annihilate(mode: int, state: TwoModeState) -> TwoModeState:
    """Apply ``a_mode``; the result is not normalized."""
    _check_mode(mode)
    if state.basis.cutoff < 1:
        raise ValueError("annihilation needs cutoff >= 1")
    a = annihilation_matrix(state.basis.cutoff)
    m = state.matrix
    out = a @ m if mode == 1 else m @ a.T
    if np.linalg.norm(out) < 1e-14:
        raise ZeroState(f"a_{mode} annihilates the state")
    return TwoModeState(state.basis, out.reshape(-1), state.leakage)


def apply(op: TwoModeOperator, state: TwoModeState) -> TwoModeState:
    """Matrix-vector product; norm lost past the cutoff is added to the leakage."""
    _check_basis(op.basis, state.basis)
    out = op.mat @ state.amp
    lost = state.norm2 - float(np.vdot(out, out).real)
    return TwoModeState(state.basis, out, state.leakage + max(lost, 0.0))


def compose(a: TwoModeOperator, b: TwoModeOperator) -> TwoModeOperator:
    """Operator product ``a @ b`` (``b`` acts first)."""
    _check_basis(a.basis, b.basis)
    return TwoModeOperator.from_matrix(a.mat @ b.mat, a.basis)


def inner(a: TwoModeState, b: TwoModeState) -> complex:
    """Hermitian inner product ``<a|b>``."""
    _check_basis(a.basis, b.basis)
    return complex(np.vdot(a.amp, b.amp))
