"""Parametrized two-mode Gaussian unitaries.

Three families are provided:

* the canonical entangling family
  ``R_1(phi1) R_2(phi2) U_BS(tau1) R_1(phi) S_12(xi) U_BS(tau2)`` with real
  ``tau1, tau2, xi``; input-side local phases are dropped because the
  product input state absorbs them,
* the passive family ``R_1(phi1) U_BS(theta)``,
* the Bloch-Messiah form ``U_BS(tau1) S_1(xi1) S_2(xi2) U_BS(tau2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fock import (
    XI_MAX,
    Basis,
    TwoModeOperator,
    beam_splitter,
    compose,
    phase_shift,
    single_mode_squeeze,
    two_mode_squeeze,
)

_ANGLE_SLACK = 1e-12


def _finite(**values):
    for name, v in values.items():
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class EntanglingParams:
    phi1: float = 0.0
    phi2: float = 0.0
    tau1: float = 0.0
    phi: float = 0.0
    xi: float = 0.0
    tau2: float = 0.0

    def __post_init__(self):
        _finite(**self.as_dict())
        if not 0.0 <= self.xi <= XI_MAX:
            raise ValueError(f"xi must lie in [0, {XI_MAX}], got {self.xi}")
        for name in ("tau1", "tau2"):
            v = getattr(self, name)
            if not -_ANGLE_SLACK <= v <= math.pi / 2 + _ANGLE_SLACK:
                raise ValueError(f"{name} must lie in [0, pi/2], got {v}")

    FIELDS = ("phi1", "phi2", "tau1", "phi", "xi", "tau2")

    def as_dict(self) -> dict:
        return {f: float(getattr(self, f)) for f in self.FIELDS}

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, f) for f in self.FIELDS)


@dataclass(frozen=True)
class PassiveParams:
    phi1: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        _finite(phi1=self.phi1, theta=self.theta)
        if not -_ANGLE_SLACK <= self.theta <= math.pi / 2 + _ANGLE_SLACK:
            raise ValueError(f"theta must lie in [0, pi/2], got {self.theta}")
        object.__setattr__(self, "phi1", float(self.phi1) % (2 * math.pi))

    def as_dict(self) -> dict:
        return {"phi1": float(self.phi1), "theta": float(self.theta)}


@dataclass(frozen=True)
class BlochMessiahParams:
    tau1: complex = 0.0
    tau2: complex = 0.0
    xi1: complex = 0.0
    xi2: complex = 0.0

    def __post_init__(self):
        for name in ("xi1", "xi2"):
            if abs(getattr(self, name)) > XI_MAX:
                raise ValueError(f"|{name}| must not exceed {XI_MAX}")


def _product(*ops: TwoModeOperator) -> TwoModeOperator:
    out = ops[0]
    for op in ops[1:]:
        out = compose(out, op)
    return out


def entangling_unitary(p: EntanglingParams, basis: Basis) -> TwoModeOperator:
    return _product(
        phase_shift(p.phi1, 1, basis),
        phase_shift(p.phi2, 2, basis),
        beam_splitter(p.tau1, basis),
        phase_shift(p.phi, 1, basis),
        two_mode_squeeze(p.xi, basis),
        beam_splitter(p.tau2, basis),
    )


def passive_unitary(p: PassiveParams, basis: Basis) -> TwoModeOperator:
    """``R_1(phi1) U_BS(theta)``: the phase sits on the output side.

    A phase placed before the beam splitter would be absorbed by the input
    product state and the family would miss relative output phases.
    """
    return compose(phase_shift(p.phi1, 1, basis), beam_splitter(p.theta, basis))


def bloch_messiah_unitary(p: BlochMessiahParams, basis: Basis) -> TwoModeOperator:
    return _product(
        beam_splitter(p.tau1, basis),
        single_mode_squeeze(p.xi1, 1, basis),
        single_mode_squeeze(p.xi2, 2, basis),
        beam_splitter(p.tau2, basis),
    )
