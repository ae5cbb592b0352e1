"""fracdelay: simulation and static analysis of mixed-order Caputo
fractional linear systems coupled with a delayed difference equation.

The package splits into:

* special_functions : Gamma and two-parameter Mittag-Leffler evaluation
* matrix_analysis   : Metzler/nonnegative/Hurwitz/Schur predicates and
                      the equivalence-triad certificates
* system_model      : system data, time-expression mini-language,
                      validation, config loading
* solver            : fractional Adams-Bashforth-Moulton integrator,
                      Picard fixed-point oracle, closed-form scalar oracle
* analysis          : positivity classification, attractivity test,
                      smallest asymptotic bound
* cli               : `fracdelay` command-line tool
"""

from .analysis import (
    AnalysisReport,
    AsymptoticBound,
    AttractivityResult,
    PositivityDetail,
    analyze,
    asymptotic_bound,
    check_attractivity,
    classify_positivity,
    effective_matrix,
    sup_bound_estimate,
)
from .errors import (
    AccuracyError,
    ConfigError,
    DimensionError,
    DomainError,
    ExprEvalError,
    ExprSyntaxError,
    FracDelayError,
    LinearAlgebraError,
    SingularMatrixError,
    ValidationError,
)
from .matrix_analysis import (
    MetzlerHurwitzCertificate,
    NonnegSchurCertificate,
    SpectralSummary,
    is_hurwitz,
    is_metzler,
    is_nonnegative,
    is_schur,
    metzler_hurwitz_certificate,
    nonneg_schur_certificate,
    row_sum_lt_one,
    spectral_summary,
)
from .solver import (
    Grid,
    HistoryBuffer,
    Trajectory,
    interpolate_history,
    picard_solve,
    scalar_ml_solution,
    simulate,
    sup_norm_difference,
)
from .special_functions import MLQuery, gamma, ml_derivative_check, mittag_leffler
from .system_model import (
    InitialData,
    MultiOrder,
    MultiOrderSystem,
    TimeExpr,
    ValidationReport,
    derive_initial_phi,
    derived_initial_data,
    eval_time_expr,
    load_config,
    parse_time_expr,
    system_from_config,
    validate_system,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "AnalysisReport",
    "AsymptoticBound",
    "AttractivityResult",
    "ConfigError",
    "DimensionError",
    "DomainError",
    "ExprEvalError",
    "ExprSyntaxError",
    "FracDelayError",
    "Grid",
    "HistoryBuffer",
    "InitialData",
    "LinearAlgebraError",
    "MLQuery",
    "MetzlerHurwitzCertificate",
    "MultiOrder",
    "MultiOrderSystem",
    "NonnegSchurCertificate",
    "PositivityDetail",
    "SingularMatrixError",
    "SpectralSummary",
    "TimeExpr",
    "Trajectory",
    "ValidationError",
    "ValidationReport",
    "analyze",
    "asymptotic_bound",
    "check_attractivity",
    "classify_positivity",
    "derive_initial_phi",
    "derived_initial_data",
    "effective_matrix",
    "eval_time_expr",
    "gamma",
    "interpolate_history",
    "is_hurwitz",
    "is_metzler",
    "is_nonnegative",
    "is_schur",
    "load_config",
    "metzler_hurwitz_certificate",
    "mittag_leffler",
    "ml_derivative_check",
    "nonneg_schur_certificate",
    "parse_time_expr",
    "picard_solve",
    "row_sum_lt_one",
    "scalar_ml_solution",
    "simulate",
    "spectral_summary",
    "sup_bound_estimate",
    "sup_norm_difference",
    "system_from_config",
    "validate_system",
]
