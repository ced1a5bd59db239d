"""Retrain freely chosen decoy data to a predetermined model.

Given a fitted parameterized model, this package constructs a custom error
norm under which arbitrary decoy training data minimizes to exactly the
given parameters, quantifies when training data is information-
theoretically deniable, and demonstrates that perfectly fitting "original"
datasets can be manufactured at will.
"""

from .errors import (
    CertificateTampered,
    DeniableFitError,
    DimensionMismatch,
    DimensionTooSmall,
    EmptyInput,
    InvalidArguments,
    LengthMismatch,
    NoEvaluator,
    NonFiniteObjective,
    NonFiniteValue,
    NonPositiveSupport,
    RankConditionViolated,
    RejectionExhausted,
    VariantMismatch,
    ZeroErrorVector,
    ZeroResidual,
)
from .linalg import (
    DEFAULT_ZERO_TOL,
    ProjectionMatrix,
    nullspace_projector,
    numerical_rank,
    rank_condition,
)
from .norms import (
    VARIANT_EUCLIDEAN,
    VARIANT_ONE_NORM,
    CraftedNorm,
    crafted_matrix_norm,
    crafted_norm_value,
    make_crafted_norm,
    mae_transform,
    pick_w1,
    seminorm_b,
    standard_metric,
)
from .models import (
    Dataset,
    ParamModel,
    jacobian,
    linear_regression_model,
    residuals,
    serialized_bit_length,
)
from .training import (
    FittedModel,
    LossSpec,
    OptimizerConfig,
    fit,
    minimize,
)
from .deniability import (
    ContinuousUniform,
    DenialCertificate,
    DeniabilityReport,
    DiscreteUniform,
    DistributionSpec,
    Exponential,
    TrialResult,
    VerificationReport,
    adversary_recover,
    craft_denial,
    craft_denial_resampling,
    deniability_check,
    derive_seed,
    entropy_per_record,
    generate_decoy,
    run_denial_trial,
    substream,
    verify_denial,
)

__version__ = "0.1.0"

__all__ = [
    "CertificateTampered",
    "ContinuousUniform",
    "CraftedNorm",
    "Dataset",
    "DeniabilityReport",
    "DeniableFitError",
    "DenialCertificate",
    "DimensionMismatch",
    "DimensionTooSmall",
    "DiscreteUniform",
    "DistributionSpec",
    "EmptyInput",
    "Exponential",
    "FittedModel",
    "InvalidArguments",
    "LengthMismatch",
    "LossSpec",
    "NoEvaluator",
    "NonFiniteObjective",
    "NonFiniteValue",
    "NonPositiveSupport",
    "OptimizerConfig",
    "ParamModel",
    "ProjectionMatrix",
    "RankConditionViolated",
    "RejectionExhausted",
    "TrialResult",
    "VariantMismatch",
    "VerificationReport",
    "ZeroErrorVector",
    "ZeroResidual",
    "DEFAULT_ZERO_TOL",
    "VARIANT_EUCLIDEAN",
    "VARIANT_ONE_NORM",
    "adversary_recover",
    "craft_denial",
    "craft_denial_resampling",
    "crafted_matrix_norm",
    "crafted_norm_value",
    "deniability_check",
    "derive_seed",
    "entropy_per_record",
    "fit",
    "generate_decoy",
    "jacobian",
    "linear_regression_model",
    "make_crafted_norm",
    "mae_transform",
    "minimize",
    "nullspace_projector",
    "numerical_rank",
    "pick_w1",
    "rank_condition",
    "residuals",
    "run_denial_trial",
    "seminorm_b",
    "serialized_bit_length",
    "standard_metric",
    "substream",
    "verify_denial",
]
