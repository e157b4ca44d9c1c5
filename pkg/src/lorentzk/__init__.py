"""Weighted Lorentz norms and K-functionals for step functions on (0, inf).

The package computes lambda/gamma/s-flavor Lorentz quasi-norms exactly on
step functions, checks the weight conditions that govern their equivalence,
evaluates explicit head/tail K-functional formulas with matched parameters,
and cross-checks them against brute-force decomposition oracles and a
deterministic verification corpus.
"""

from .grids import DEFAULT_CHECK_GRID, Grid
from .kfunctional import (
    Decomposition,
    ExplicitKValue,
    KQuery,
    NearOptimalSDecomposition,
    OracleResult,
    SCoupleOracleResult,
    corollary_1,
    corollary_couple,
    decomposition_lemma,
    k_explicit_general,
    k_explicit_s,
    k_oracle,
    k_oracle_exhaustive,
    k_oracle_s_couple,
    near_optimal_s_decomposition,
    oracle_grid,
    truncation_decomposition,
)
from .norms import (
    LorentzSpace,
    NormResult,
    TruncatedNorm,
    gamma_equals_s_check,
    norm,
    norm_result,
    s_lambda_identity_check,
    truncated_norm,
    truncated_norm_result,
)
from .stepfn import (
    GridProjectionError,
    JUMP_CONVENTION,
    MaximalFunction,
    OscillationTransform,
    StepFunction,
    add,
    dilate,
    equimeasurable,
    maximal,
    osc_transform,
    pointwise_min_with_constant,
    project_to_grid,
    rearrange,
    scale,
    sub_clamped,
)
from .verify import (
    CorpusEntry,
    EquivalenceRecord,
    EquivalenceReport,
    SUITE_TAGS,
    make_corpus,
    records_to_csv,
    report_to_json,
    run_identity_suite,
    run_theorem_suite,
)
from .weights import (
    ConditionVerdict,
    CoupleConfig,
    InvalidWeightError,
    PowerLaw,
    PowerLogWeight,
    PowerWeight,
    ReciprocalWeight,
    TabulatedWeight,
    Weight,
    check_bp,
    check_cond1,
    check_cond3,
    check_delta2,
    check_ratio_monotone,
    check_rbp,
    check_sufconds,
    fundamental,
    fundamental_ratio,
    reciprocal_weight,
    tail_diverges_at_zero,
    tail_fundamental,
    tail_fundamental_ratio,
    weight_from_json_dict,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CHECK_GRID",
    "Grid",
    "Decomposition",
    "ExplicitKValue",
    "KQuery",
    "NearOptimalSDecomposition",
    "OracleResult",
    "SCoupleOracleResult",
    "corollary_1",
    "corollary_couple",
    "decomposition_lemma",
    "k_explicit_general",
    "k_explicit_s",
    "k_oracle",
    "k_oracle_exhaustive",
    "k_oracle_s_couple",
    "near_optimal_s_decomposition",
    "oracle_grid",
    "truncation_decomposition",
    "LorentzSpace",
    "NormResult",
    "TruncatedNorm",
    "gamma_equals_s_check",
    "norm",
    "norm_result",
    "s_lambda_identity_check",
    "truncated_norm",
    "truncated_norm_result",
    "GridProjectionError",
    "JUMP_CONVENTION",
    "MaximalFunction",
    "OscillationTransform",
    "StepFunction",
    "add",
    "dilate",
    "equimeasurable",
    "maximal",
    "osc_transform",
    "pointwise_min_with_constant",
    "project_to_grid",
    "rearrange",
    "scale",
    "sub_clamped",
    "CorpusEntry",
    "EquivalenceRecord",
    "EquivalenceReport",
    "SUITE_TAGS",
    "make_corpus",
    "records_to_csv",
    "report_to_json",
    "run_identity_suite",
    "run_theorem_suite",
    "ConditionVerdict",
    "CoupleConfig",
    "InvalidWeightError",
    "PowerLaw",
    "PowerLogWeight",
    "PowerWeight",
    "ReciprocalWeight",
    "TabulatedWeight",
    "Weight",
    "check_bp",
    "check_cond1",
    "check_cond3",
    "check_delta2",
    "check_ratio_monotone",
    "check_rbp",
    "check_sufconds",
    "fundamental",
    "fundamental_ratio",
    "reciprocal_weight",
    "tail_diverges_at_zero",
    "tail_fundamental",
    "tail_fundamental_ratio",
    "weight_from_json_dict",
    "__version__",
]
