"""Closed-form Fock overlaps of the canonical entangling circuit.

Computes ``o_{k,l,m,n} = <m,n| U_BS(tau1) R_1(phi) S_12(xi) U_BS(tau2) |k,l>``
from a generating function instead of matrix products. With the
passive parts written as linear maps on the creation operators,
``P a_i^+ P^+ = sum_j T_ji a_j^+``, one has

    <0| e^{mu.a} W e^{lam.a^+} |0> = <0| e^{g.a} S_12(xi) e^{f.a^+} |0>,
    f = T_2 lam,   g = T_1^T mu,

and normal ordering ``S_12 = e^{z a1^+ a2^+} sech^{n1+n2+1} r e^{-z^* a1 a2}``
(``xi = r e^{i t}``, ``z = e^{i t} tanh r``) gives

    sech r * exp(z g1 g2 - z^* f1 f2 + sech r (g . f)).

The overlap is ``sqrt(k! l! m! n!)`` times the coefficient of
``mu1^m mu2^n lam1^k lam2^l``. The exponent is a quadratic form, so only
the power ``Q^J / J!`` with ``2J = k+l+m+n`` contributes.

Used only as a cross-check of the matrix-product path.
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial, sqrt

import numpy as np

from .errors import NotDerived

MAX_INDEX = 6


def passive_transfer_bs(tau: complex) -> np.ndarray:
    """Creation-operator transfer matrix of ``U_BS(tau)``."""
    th, al = abs(tau), np.angle(tau)
    return np.array(
        [[np.cos(th), np.exp(1j * al) * np.sin(th)], [-np.exp(-1j * al) * np.sin(th), np.cos(th)]]
    )


def _quadratic_terms(tau1, tau2, xi, phi):
    r, ang = abs(xi), np.angle(xi)
    z = np.exp(1j * ang) * np.tanh(r)
    sech = 1.0 / np.cosh(r)
    t1 = passive_transfer_bs(tau1) @ np.diag([np.exp(1j * phi), 1.0])
    t2 = passive_transfer_bs(tau2)
    # variables ordered (mu1, mu2, lam1, lam2); g = t1^T mu, f = t2 lam
    gmap = np.zeros((2, 4), dtype=complex)
    gmap[:, :2] = t1.T
    fmap = np.zeros((2, 4), dtype=complex)
    fmap[:, 2:] = t2
    q = z * np.outer(gmap[0], gmap[1]) - np.conj(z) * np.outer(fmap[0], fmap[1])
    q = q + sech * (gmap.T @ fmap)
    # symmetric quadratic form -> monomial coefficients
    terms = []
    for a in range(4):
        for b in range(a, 4):
            c = q[a, b] + (q[b, a] if a != b else 0.0)
            if abs(c) > 0:
                e = [0, 0, 0, 0]
                e[a] += 1
                e[b] += 1
                terms.append((c, tuple(e)))
    return sech, terms


def _raw_overlap(k, l, m, n, tau1, tau2, xi, phi) -> complex:
    total = k + l + m + n
    if total % 2:
        return 0.0j
    sech, terms = _quadratic_terms(tau1, tau2, xi, phi)
    shape = (m + 1, n + 1, k + 1, l + 1)
    poly = np.zeros(shape, dtype=complex)
    poly[0, 0, 0, 0] = 1.0
    for _ in range(total // 2):
        nxt = np.zeros(shape, dtype=complex)
        for c, e in terms:
            src = tuple(slice(0, s - d) for s, d in zip(shape, e))
            dst = tuple(slice(d, s) for s, d in zip(shape, e))
            nxt[dst] += c * poly[src]
        poly = nxt
    coef = poly[m, n, k, l] / factorial(total // 2)
    return complex(sech * coef * sqrt(factorial(k) * factorial(l) * factorial(m) * factorial(n)))


def matrix_product_overlap(k, l, m, n, tau1, tau2, xi, phi, cutoff: int | None = None) -> complex:
    """Same overlap from truncated matrix products (the reference path)."""
    from .fock import Basis, TwoModeState, apply, beam_splitter, phase_shift, two_mode_squeeze

    basis = Basis(cutoff if cutoff is not None else k + l + m + n + 20)
    s = TwoModeState.fock(k, l, basis)
    for op in (
        beam_splitter(tau2, basis),
        two_mode_squeeze(xi, basis),
        phase_shift(phi, 1, basis),
        beam_splitter(tau1, basis),
    ):
        s = apply(op, s)
    return complex(s.amp[basis.index(m, n)])


_VALIDATION_CASES = (
    (0, 0, 1, 1, 0.0, 0.0, 0.4, 0.0),
    (1, 0, 2, 1, 0.3 + 0.2j, -0.5j, 0.35 * np.exp(0.7j), 0.9),
    (2, 1, 0, 3, 1.1, 0.4 * np.exp(-1.3j), 0.2, -0.4),
    (1, 2, 2, 1, 0.7j, 0.25, 0.5 * np.exp(2.1j), 2.3),
)


@lru_cache(maxsize=1)
def validate_derivation(tol: float = 1e-8) -> float:
    """Compare the closed form with matrix products on fixed cases; return the worst error."""
    worst = 0.0
    for case in _VALIDATION_CASES:
        err = abs(_raw_overlap(*case) - matrix_product_overlap(*case))
        worst = max(worst, err)
    if worst > tol:
        raise NotDerived(f"closed-form overlap disagrees with matrix products by {worst:.2e}")
    return worst


def overlap_generating_function(k: int, l: int, m: int, n: int, tau1: complex, tau2: complex,
                                xi: complex, phi: float) -> complex:
    """``<m,n| U_BS(tau1) R_1(phi) S_12(xi) U_BS(tau2) |k,l>`` in closed form.

    Raises:
        NotDerived: if the closed form fails its self-validation.
        ValueError: if an index exceeds ``MAX_INDEX``.
    """
    if min(k, l, m, n) < 0 or max(k, l, m, n) > MAX_INDEX:
        raise ValueError(f"Fock indices must lie in [0, {MAX_INDEX}]")
    validate_derivation()
    return _raw_overlap(k, l, m, n, tau1, tau2, xi, phi)
