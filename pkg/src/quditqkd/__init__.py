"""Higher-dimensional prepare-and-measure QKD toolkit.

Finite fields GF(p^n), generalized Pauli operators, the order-(N+1)
basis-cycling unitary with its label orbits, error-rate recursions and
tolerance thresholds, and a seeded Pauli-frame Monte-Carlo simulator of
the prepare-and-measure protocol under configurable channels and
eavesdropping attacks.
"""

__version__ = "0.1.0"

from .exceptions import ConfigError, InvariantViolation
from .fields import GF, make_field, make_quadratic_extension
from .pauli import PauliLabel, bell_state, pauli_compose, pauli_matrix, projector_standard_diff
from .protocol import (
    ChannelModel,
    ProtocolConfig,
    SimReport,
    estimate_qer,
    locc2_ep_round,
    pec_majority,
    run_protocol,
    run_trials,
    sift,
)
from .rates import (
    AttackReport,
    ErrorDistribution,
    PecBounds,
    ThresholdTable,
    attack_calculus,
    dominance_check,
    ep_closed_form,
    ep_step,
    eve_ber,
    intercept_resend_sbmer_ceiling,
    make_error_distribution,
    pec_phase_bound,
    qer_estimator,
    thresholds,
    worst_case_distribution,
)
from .toperator import (
    SymplecticParams,
    TOperator,
    VerificationReport,
    build_T,
    choose_M,
    conjugate_label,
    equiv_classes,
    find_char_poly,
    make_t_operator,
    phase_exponent_f,
    verify_T,
)

__all__ = [
    "GF",
    "make_field",
    "make_quadratic_extension",
    "PauliLabel",
    "pauli_matrix",
    "pauli_compose",
    "bell_state",
    "projector_standard_diff",
    "SymplecticParams",
    "TOperator",
    "VerificationReport",
    "find_char_poly",
    "choose_M",
    "phase_exponent_f",
    "build_T",
    "make_t_operator",
    "conjugate_label",
    "equiv_classes",
    "verify_T",
    "ErrorDistribution",
    "ThresholdTable",
    "PecBounds",
    "AttackReport",
    "make_error_distribution",
    "worst_case_distribution",
    "ep_step",
    "ep_closed_form",
    "dominance_check",
    "pec_phase_bound",
    "thresholds",
    "qer_estimator",
    "eve_ber",
    "intercept_resend_sbmer_ceiling",
    "attack_calculus",
    "ChannelModel",
    "ProtocolConfig",
    "SimReport",
    "sift",
    "estimate_qer",
    "locc2_ep_round",
    "pec_majority",
    "run_protocol",
    "run_trials",
    "ConfigError",
    "InvariantViolation",
]
