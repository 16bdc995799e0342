"""Three-outcome design and analysis for randomized time-to-event trials.

Two treatment arms are compared on the log hazard ratio scale. A fixed
design picks an event count and a pair of decision boundaries so that a
trial can end with "reject H0", "reject H1", or an explicit
inconclusive verdict, with caps on the error rates of both rejections
and floors on their probabilities under the rival hypothesis. A
one-interim variant spends part of each error budget at an early look.
A seeded Monte-Carlo engine simulates whole trials and checks the
normal approximation the designs rest on.
"""

__version__ = "0.1.0"

from .errors import (
    BracketingError,
    ConvergenceError,
    DataError,
    DataFormatError,
    DegenerateRiskSetError,
    HypothesisOrderingError,
    InfeasibilityError,
    InfeasibleGrayZoneError,
    InfeasibleScenarioError,
    InvalidParameterError,
    NumericalError,
    TrialDesignError,
    UndefinedStatisticError,
    ValidationError,
)
from .numerics import (
    DEFAULT_QUADRATURE,
    QuadratureSettings,
    find_root,
    integrate,
    normal_cdf,
    normal_pdf,
    normal_quantile,
)
from .design import (
    INCONCLUSIVE,
    REJECT_H0,
    REJECT_H1,
    DesignSpec,
    FixedDesign,
    boundaries_at,
    classify_outcome,
    raw_event_counts,
    solve_fixed_design,
)
from .sequential import (
    GS_QUADRATURE,
    GSDesign,
    GSSpec,
    continue_and_reject_H0_prob,
    continue_and_reject_H1_prob,
    design_at,
    interim_boundaries,
    solve_final_boundaries,
    solve_gs_design,
    split_events,
)
from .trial import (
    RNG_ALGORITHM,
    IncrementResult,
    LogRankResult,
    OCEstimate,
    PatientRecord,
    SamplingCheck,
    SimScenario,
    TrialData,
    log_rank,
    log_rank_increment,
    read_patient_csv,
    replicate_patients,
    simulate_theta_hats,
    simulate_trial,
    theta_hat_sampling_check,
)
from .cli import run

__all__ = [
    "__version__",
    "BracketingError",
    "ConvergenceError",
    "DataError",
    "DataFormatError",
    "DegenerateRiskSetError",
    "HypothesisOrderingError",
    "InfeasibilityError",
    "InfeasibleGrayZoneError",
    "InfeasibleScenarioError",
    "InvalidParameterError",
    "NumericalError",
    "TrialDesignError",
    "UndefinedStatisticError",
    "ValidationError",
    "DEFAULT_QUADRATURE",
    "QuadratureSettings",
    "find_root",
    "integrate",
    "normal_cdf",
    "normal_pdf",
    "normal_quantile",
    "INCONCLUSIVE",
    "REJECT_H0",
    "REJECT_H1",
    "DesignSpec",
    "FixedDesign",
    "boundaries_at",
    "classify_outcome",
    "raw_event_counts",
    "solve_fixed_design",
    "GS_QUADRATURE",
    "GSDesign",
    "GSSpec",
    "continue_and_reject_H0_prob",
    "continue_and_reject_H1_prob",
    "design_at",
    "interim_boundaries",
    "solve_final_boundaries",
    "solve_gs_design",
    "split_events",
    "RNG_ALGORITHM",
    "IncrementResult",
    "LogRankResult",
    "OCEstimate",
    "PatientRecord",
    "SamplingCheck",
    "SimScenario",
    "TrialData",
    "log_rank",
    "log_rank_increment",
    "read_patient_csv",
    "replicate_patients",
    "simulate_theta_hats",
    "simulate_trial",
    "theta_hat_sampling_check",
    "run",
]
