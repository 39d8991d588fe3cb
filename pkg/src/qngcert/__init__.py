"""Fidelity-threshold certification of non-Gaussian and mode-intrinsic entanglement."""

from .circuits import (
    BlochMessiahParams,
    EntanglingParams,
    PassiveParams,
    bloch_messiah_unitary,
    entangling_unitary,
    passive_unitary,
)
from .cmaes import CmaesConfig, OptRun, maximize
from .errors import (
    BasisMismatch,
    CutoffTooSmall,
    InvalidConfig,
    LeakageTooLarge,
    NoMargin,
    NonMonotoneFidelity,
    NotConvergedWarning,
    NotDerived,
    ObjectiveNonFinite,
    ParameterOutOfRange,
    QngError,
    TruncationWarning,
    ZeroState,
)
from .fock import (
    Basis,
    TwoModeOperator,
    TwoModeState,
    annihilate,
    apply,
    beam_splitter,
    compose,
    inner,
    phase_shift,
    single_mode_squeeze,
    two_mode_squeeze,
)
from .loss import LossResult, TwoModeDensity, fidelity_to_pure, min_transmission, pure_loss
from .overlap import overlap_generating_function
from .targets import TargetSpec, cat_state, core_state, fock_pair, hybrid, noon_like, photon_subtracted
from .threshold import (
    CertificationVerdict,
    EscalationConfig,
    GridConfig,
    ThresholdResult,
    certify,
    gaussian_threshold,
    inner_max,
    overlap_matrix,
    passive_threshold,
)

__all__ = [name for name in dir() if not name.startswith("_")]
