"""Treatment-effect estimation in partially linear regression models via
linear source separation, with orthogonal-moment baselines, asymptotic
variance calculators, and a Monte-Carlo experiment harness."""

from .asymptotics import (
    REGIME_HOML,
    REGIME_ICA,
    REGIME_TIE,
    AsymptoticsError,
    VarianceReport,
    compare_numerators,
    score_cross_derivative,
    var_homl,
    var_ica_auddy,
    var_ica_hyvarinen,
    variance_report,
)
from .baselines import (
    BaselineError,
    MomentDiagnostics,
    NuisanceFit,
    estimate_homl,
    estimate_oml,
    fit_nuisance,
    homl_estimate,
    ols_joint,
    oml_estimate,
)
from .dgp import (
    DEFAULT_MULTI_THETA,
    NONLINEARITY_NAMES,
    Dataset,
    DgpError,
    GroundTruth,
    PlrSpec,
    UnknownNonlinearityError,
    apply_nonlinearity,
    build_linear_mixing,
    multi_treatment_theta,
    resolve,
    simulate,
)
from .distributions import (
    FAMILIES,
    THREE_POINT_PROBABILITIES,
    THREE_POINT_SUPPORT,
    DiscreteDensityError,
    DistributionError,
    MomentReport,
    NoiseSpec,
    NonGaussianityCheck,
    check_nongaussianity,
    homl_condition_value,
    ica_condition_value,
    log_density,
    moments,
    sample,
)
from .harness import (
    BUILTIN_SCENARIOS,
    CellStats,
    ConfigError,
    Metrics,
    ResultRecord,
    ScenarioConfig,
    aggregate,
    band_verdict,
    cell_seed,
    csv_digest,
    emit_csv,
    metrics,
    overlap_band,
    parse_config_text,
    parse_noise,
    read_records,
    run_scenario,
    scenario_from_config,
    spec_from_config,
)
from .ica import (
    CONTRASTS,
    Contrast,
    CanonicalizationError,
    Diagnostics,
    EffectEstimate,
    FastIcaResult,
    IcaError,
    RankDeficientError,
    UnmixingEstimate,
    assemble_unmixing,
    canonicalize,
    estimate_ica,
    extract_effects,
    extract_effects_from_mixing,
    fastica,
    get_contrast,
    stationarity_residual,
    whiten,
)
from .kernels import (
    Assignment,
    KernelError,
    LassoFit,
    NotSymmetricError,
    SingularMatrixError,
    hungarian,
    lasso_fit,
    solve_linear,
    soft_threshold,
    sym_eig,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "AsymptoticsError",
    "BUILTIN_SCENARIOS",
    "BaselineError",
    "CONTRASTS",
    "CanonicalizationError",
    "CellStats",
    "ConfigError",
    "Contrast",
    "DEFAULT_MULTI_THETA",
    "Dataset",
    "DgpError",
    "Diagnostics",
    "DiscreteDensityError",
    "DistributionError",
    "EffectEstimate",
    "FAMILIES",
    "FastIcaResult",
    "GroundTruth",
    "IcaError",
    "KernelError",
    "LassoFit",
    "Metrics",
    "MomentDiagnostics",
    "MomentReport",
    "NONLINEARITY_NAMES",
    "NoiseSpec",
    "NonGaussianityCheck",
    "NotSymmetricError",
    "NuisanceFit",
    "PlrSpec",
    "RankDeficientError",
    "REGIME_HOML",
    "REGIME_ICA",
    "REGIME_TIE",
    "ResultRecord",
    "ScenarioConfig",
    "SingularMatrixError",
    "THREE_POINT_PROBABILITIES",
    "THREE_POINT_SUPPORT",
    "UnknownNonlinearityError",
    "UnmixingEstimate",
    "VarianceReport",
    "aggregate",
    "apply_nonlinearity",
    "assemble_unmixing",
    "band_verdict",
    "build_linear_mixing",
    "canonicalize",
    "cell_seed",
    "check_nongaussianity",
    "compare_numerators",
    "csv_digest",
    "emit_csv",
    "estimate_homl",
    "estimate_ica",
    "estimate_oml",
    "extract_effects",
    "extract_effects_from_mixing",
    "fastica",
    "get_contrast",
    "fit_nuisance",
    "homl_condition_value",
    "homl_estimate",
    "hungarian",
    "ica_condition_value",
    "lasso_fit",
    "log_density",
    "metrics",
    "moments",
    "multi_treatment_theta",
    "ols_joint",
    "oml_estimate",
    "overlap_band",
    "parse_config_text",
    "parse_noise",
    "read_records",
    "resolve",
    "run_scenario",
    "sample",
    "scenario_from_config",
    "score_cross_derivative",
    "simulate",
    "solve_linear",
    "soft_threshold",
    "spec_from_config",
    "stationarity_residual",
    "sym_eig",
    "var_homl",
    "var_ica_auddy",
    "var_ica_hyvarinen",
    "variance_report",
    "whiten",
]
