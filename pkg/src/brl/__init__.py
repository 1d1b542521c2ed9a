"""Interaction spectra for multi-bubble configurations on a 4d annulus.

The package evaluates the domain's Green and Robin functions by
certified zonal series, assembles the point-interaction matrix, solves
the reduced system that fixes concentration rates, and scans ring
configurations for the positivity of the smallest eigenvalue.
"""

from .annulus import (
    AnnulusGeometry,
    AnnulusOracle,
    EvalResult,
    GradResult,
    SeriesControl,
    grad_green,
    grad_robin,
    grad_robin_radial,
    green,
    q_m_diag,
    q_m_pair,
    regular_part,
    robin,
    robin_radial,
)
from .bubbles import (
    AnsatzProfile,
    BubbleParams,
    RatesResult,
    ansatz_profile,
    bubble_u,
    projected_bubble,
    psi_kernels,
    quad_identity_check,
    rates,
    slice_grid,
)
from .constants import ALPHA4, CONSTANTS, FRAK_C, OMEGA
from .errors import (
    BrlError,
    ConfigError,
    ConvergenceError,
    DomainError,
    PerronError,
    ScanError,
    SeriesError,
    SimplicityError,
    SingularPairError,
    SingularSystemError,
    SymmetryError,
)
from .gegenbauer import (
    GegenbauerEvaluator,
    gegenbauer_p1,
    gegenbauer_p1_prime,
    gegenbauer_p1_prime_sequence,
    gegenbauer_p1_sequence,
    gegenbauer_parity_check,
    zonal_z,
)
from .interaction import (
    Configuration,
    InteractionMatrix,
    SpectralData,
    as_point_gradients,
    assemble_m,
    jacobi_eigh,
    lambda1_gradient,
    rayleigh,
    smallest_eigen,
)
from .reduced import (
    CriticalSearchResult,
    ReducedSolution,
    ResidualReport,
    StabilityReport,
    critical_search,
    eval_f1,
    eval_f2,
    eval_f3,
    kl_functional,
    lambda1_fd_hessian,
    residual_c0,
    residual_c0_bracket,
    residual_ci,
    residual_report,
    schur_det_check,
    solve_d_lambda,
)
from .rings import (
    CirculantCoeffs,
    PerpDiagnostic,
    RingConfig,
    RingScan,
    ThresholdResult,
    circulant_coeffs,
    circulant_eigs,
    dense_radius_grid,
    discrepancy_report,
    lambda1_ring,
    lambda1_ring_shortcut,
    lower_bound_report,
    min_over_r,
    perp_shortcut_gap,
    sufficient_condition_check,
    sufficient_rho_interval,
    threshold_rho,
)
from .cliconfig import (
    ExperimentConfig,
    RunRecord,
    content_hash,
    default_max_terms,
    read_config_file,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "OMEGA",
    "ALPHA4",
    "FRAK_C",
    "CONSTANTS",
    "AnnulusGeometry",
    "AnnulusOracle",
    "SeriesControl",
    "EvalResult",
    "GradResult",
    "q_m_pair",
    "q_m_diag",
    "green",
    "regular_part",
    "robin",
    "robin_radial",
    "grad_green",
    "grad_robin",
    "grad_robin_radial",
    "GegenbauerEvaluator",
    "gegenbauer_p1",
    "gegenbauer_p1_sequence",
    "gegenbauer_p1_prime",
    "gegenbauer_p1_prime_sequence",
    "gegenbauer_parity_check",
    "zonal_z",
    "Configuration",
    "InteractionMatrix",
    "SpectralData",
    "assemble_m",
    "jacobi_eigh",
    "smallest_eigen",
    "rayleigh",
    "lambda1_gradient",
    "as_point_gradients",
    "ReducedSolution",
    "ResidualReport",
    "StabilityReport",
    "CriticalSearchResult",
    "solve_d_lambda",
    "eval_f1",
    "eval_f2",
    "eval_f3",
    "schur_det_check",
    "residual_c0",
    "residual_c0_bracket",
    "residual_ci",
    "residual_report",
    "kl_functional",
    "lambda1_fd_hessian",
    "critical_search",
    "RingConfig",
    "CirculantCoeffs",
    "RingScan",
    "ThresholdResult",
    "PerpDiagnostic",
    "circulant_coeffs",
    "circulant_eigs",
    "lambda1_ring",
    "lambda1_ring_shortcut",
    "perp_shortcut_gap",
    "dense_radius_grid",
    "min_over_r",
    "threshold_rho",
    "sufficient_rho_interval",
    "sufficient_condition_check",
    "lower_bound_report",
    "discrepancy_report",
    "BubbleParams",
    "RatesResult",
    "AnsatzProfile",
    "bubble_u",
    "psi_kernels",
    "projected_bubble",
    "rates",
    "slice_grid",
    "ansatz_profile",
    "quad_identity_check",
    "ExperimentConfig",
    "RunRecord",
    "read_config_file",
    "content_hash",
    "default_max_terms",
    "BrlError",
    "DomainError",
    "ConfigError",
    "SingularPairError",
    "SeriesError",
    "PerronError",
    "SimplicityError",
    "SingularSystemError",
    "ConvergenceError",
    "ScanError",
    "SymmetryError",
]
