"""Passivity certification and LQ optimal control for boundary-controlled
port-Hamiltonian systems: continuous-level certificates, structure-preserving
discretization, Riccati solutions with operator-node residuals, spectral
factorizations, and energy-exact time stepping.
"""

from .errors import (
    PassilqError,
    DimensionMismatch,
    NonHermitian,
    PositivityViolation,
    RankDeficient,
    ComplementarityFailure,
    SingularP1H,
    SingularR0,
    NonHermitianM,
    NotPositiveDefiniteM,
    StructureRestorationFailed,
    NoStabilizingSolution,
    HamiltonianEigSplitFailure,
    NotEnergyPreserving,
    ClosedLoopNotStable,
    ResolventSingular,
    StepSolveSingular,
)
from .phs_model import (
    HField,
    PhsSpec,
    ValidationReport,
    validate_spec,
    diagonalize_p1h,
    boundary_matrices,
    spec_to_json,
    spec_from_json,
)
from .passivity_cert import PassivityCertificate, classify, classify_discrete
from .discretize import (
    DiscreteSystem,
    discretize_phs,
    restore_structure,
    discretize_beam,
    system_to_json,
    system_from_json,
)
from .lq_riccati import (
    RiccatiSolution,
    solve_care,
    explicit_solution,
    node_riccati_residual,
    contraction_check,
    cost_quadratic,
)
from .freq_domain import (
    transfer,
    popov,
    spectral_factor,
    factorization_residual,
    frequency_response,
    default_omega_grid,
)
from .simulate import (
    Trajectory,
    ZeroInput,
    Feedback,
    Prescribed,
    neg_output_feedback,
    simulate,
    cost_integral,
    balance_report,
)
from .beam_example import (
    BeamParams,
    mu,
    alpha,
    optimal_feedback,
    initial_state,
    explicit_beam_solution,
    state_feedback_gain,
    verify_proposition,
)
from . import corpus

__version__ = "0.1.0"

__all__ = [
    "PassilqError",
    "DimensionMismatch",
    "NonHermitian",
    "PositivityViolation",
    "RankDeficient",
    "ComplementarityFailure",
    "SingularP1H",
    "SingularR0",
    "NonHermitianM",
    "NotPositiveDefiniteM",
    "StructureRestorationFailed",
    "NoStabilizingSolution",
    "HamiltonianEigSplitFailure",
    "NotEnergyPreserving",
    "ClosedLoopNotStable",
    "ResolventSingular",
    "StepSolveSingular",
    "HField",
    "PhsSpec",
    "ValidationReport",
    "validate_spec",
    "diagonalize_p1h",
    "boundary_matrices",
    "spec_to_json",
    "spec_from_json",
    "PassivityCertificate",
    "classify",
    "classify_discrete",
    "DiscreteSystem",
    "discretize_phs",
    "restore_structure",
    "discretize_beam",
    "system_to_json",
    "system_from_json",
    "RiccatiSolution",
    "solve_care",
    "explicit_solution",
    "node_riccati_residual",
    "contraction_check",
    "cost_quadratic",
    "transfer",
    "popov",
    "spectral_factor",
    "factorization_residual",
    "frequency_response",
    "default_omega_grid",
    "Trajectory",
    "ZeroInput",
    "Feedback",
    "Prescribed",
    "neg_output_feedback",
    "simulate",
    "cost_integral",
    "balance_report",
    "BeamParams",
    "mu",
    "alpha",
    "optimal_feedback",
    "initial_state",
    "explicit_beam_solution",
    "state_feedback_gain",
    "verify_proposition",
    "corpus",
]
