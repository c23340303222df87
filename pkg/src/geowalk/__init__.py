"""geowalk: geodesic random walks and the singularities of piecewise-geodesic
endpoint maps on constant-curvature model spaces."""

__version__ = "0.1.0"

from .errors import (
    AmbiguousCutLocusError,
    ChartDomainError,
    DegenerateAimError,
    GeowalkError,
    HypothesisViolatedError,
    NotCriticalError,
    UnsupportedGeometryError,
)
from .paths import (
    DirectionTuple,
    SphereChart,
    Trajectory,
    broken_geodesic,
    build_chart,
    chart_coords,
    chart_eval,
    phi_endpoint,
    phi_jacobian,
    trajectory_to_csv,
)
from .regularity import (
    QuadraticFormSpec,
    RegularityIndex,
    chi_diff_cf,
    decay_exponent_fit,
    normal_form_pushforward_cf,
    regularity_index,
    sample_chi_diff,
    spec_from_certificate,
)
from .singular import (
    AngleLinearityReport,
    FoldCertificate,
    ImmersionReport,
    ScanSummary,
    SingularityReport,
    acceleration_check,
    anchor_point,
    angle_linearity_check,
    corank_at,
    first_variation_check,
    hessian_at_singular,
    immersion_check,
    signature_prediction,
    singular_set_scan,
    toponogov_bound,
    vpq_curve,
)
from .spaces import (
    ManifoldPoint,
    ModelSpace,
    TangentVector,
    distance,
    exp_map,
    log_map,
    metric_inner,
    orthonormal_frame,
    parallel_transport,
    sample_unit_direction,
)
from .spectral import (
    SmoothingReport,
    SpectralResult,
    TorusFunction,
    apply_operator,
    dual_frequency,
    eigenvalue_of_mode,
    inner_product,
    iterate_smoothing,
    l2_norm,
    norm_and_selfadjointness,
    random_real_function,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances
from .walks import (
    DiffusiveFitReport,
    Ensemble,
    EscapeRateReport,
    WalkConfig,
    WalkRecord,
    default_workers,
    diffusive_fit,
    empirical_cf,
    escape_rate,
    radial_histogram,
    run_ensemble,
    run_walk,
    walk_step,
    walk_to_tuple,
)

__all__ = [
    "__version__",
    # errors
    "AmbiguousCutLocusError",
    "ChartDomainError",
    "DegenerateAimError",
    "GeowalkError",
    "HypothesisViolatedError",
    "NotCriticalError",
    "UnsupportedGeometryError",
    # model spaces
    "ManifoldPoint",
    "ModelSpace",
    "TangentVector",
    "distance",
    "exp_map",
    "log_map",
    "metric_inner",
    "orthonormal_frame",
    "parallel_transport",
    "sample_unit_direction",
    # piecewise-geodesic paths and charts
    "DirectionTuple",
    "SphereChart",
    "Trajectory",
    "broken_geodesic",
    "build_chart",
    "chart_coords",
    "chart_eval",
    "phi_endpoint",
    "phi_jacobian",
    "trajectory_to_csv",
    # critical points of the endpoint map
    "AngleLinearityReport",
    "FoldCertificate",
    "ImmersionReport",
    "ScanSummary",
    "SingularityReport",
    "acceleration_check",
    "anchor_point",
    "angle_linearity_check",
    "corank_at",
    "first_variation_check",
    "hessian_at_singular",
    "immersion_check",
    "signature_prediction",
    "singular_set_scan",
    "toponogov_bound",
    "vpq_curve",
    # random walks
    "DiffusiveFitReport",
    "Ensemble",
    "EscapeRateReport",
    "WalkConfig",
    "WalkRecord",
    "default_workers",
    "diffusive_fit",
    "empirical_cf",
    "escape_rate",
    "radial_histogram",
    "run_ensemble",
    "run_walk",
    "walk_step",
    "walk_to_tuple",
    # step-averaging operator on the torus
    "SmoothingReport",
    "SpectralResult",
    "TorusFunction",
    "apply_operator",
    "dual_frequency",
    "eigenvalue_of_mode",
    "inner_product",
    "iterate_smoothing",
    "l2_norm",
    "norm_and_selfadjointness",
    "random_real_function",
    # pushforward regularity
    "QuadraticFormSpec",
    "RegularityIndex",
    "chi_diff_cf",
    "decay_exponent_fit",
    "normal_form_pushforward_cf",
    "regularity_index",
    "sample_chi_diff",
    "spec_from_certificate",
    # tolerances
    "DEFAULT_TOLERANCES",
    "Tolerances",
]
