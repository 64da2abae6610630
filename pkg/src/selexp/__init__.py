"""Estimation after selection for two exponential populations with unknown
guarantee times and a common unknown scale."""

from .estimators import (
    EstimatorConstants,
    EstimatorSpec,
    SpecParseError,
    constants,
    evaluate,
    evaluate_arrays,
    is_affine_permutation_equivariant,
    parse_spec,
)
from .mc import (
    DominationReport,
    McConfig,
    McRiskResult,
    compare_domination,
    estimate_bias,
    estimate_risk,
    validate_psi,
)
from .model import (
    DomainError,
    PopulationParams,
    SelectionOutcome,
    SufficientStatistic,
    Target,
    normalized_gap,
    realized_target,
    reduce_samples,
    select,
)
from .risk import (
    UNBOUNDED,
    AdmissibleInterval,
    RiskPoint,
    admissible_interval,
    bias_linear,
    cstar,
    minimax_c,
    moment_u,
    psi_envelopes,
    psi_mu,
    risk_linear,
    risk_value,
    sup_risk_linear,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibleInterval",
    "DomainError",
    "DominationReport",
    "EstimatorConstants",
    "EstimatorSpec",
    "McConfig",
    "McRiskResult",
    "PopulationParams",
    "RiskPoint",
    "SelectionOutcome",
    "SpecParseError",
    "SufficientStatistic",
    "Target",
    "UNBOUNDED",
    "admissible_interval",
    "bias_linear",
    "compare_domination",
    "constants",
    "cstar",
    "estimate_bias",
    "estimate_risk",
    "evaluate",
    "evaluate_arrays",
    "is_affine_permutation_equivariant",
    "minimax_c",
    "moment_u",
    "normalized_gap",
    "parse_spec",
    "psi_envelopes",
    "psi_mu",
    "realized_target",
    "reduce_samples",
    "risk_linear",
    "risk_value",
    "select",
    "sup_risk_linear",
    "validate_psi",
]
