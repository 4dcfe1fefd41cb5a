"""ctqwlab: a numerical laboratory for continuous-time quantum-walk search.

The package builds search Hamiltonians H = gamma * L - |w><w| on finite
graphs, diagonalizes them, and measures overlap transitions, critical
couplings, and time-dependent success probabilities.
"""
from .analysis import ScalingFit, ScalingModel, exponent_prediction, fit_scaling
from .engine import (
    BoundReport,
    CriticalGamma,
    GammaMaxResult,
    OverlapRecord,
    SearchProblem,
    SuccessGrid,
    critical_gamma,
    crossing_scan,
    default_time_grid,
    evolve_state,
    gamma_max_search,
    oscillation_period,
    overlap_sweep,
    overlaps,
    propagate_krylov,
    success_grid,
    success_probability,
    verify_bounds,
)
from .errors import (
    DEFAULT_DENSE_GUARD,
    ConfigError,
    CtqwError,
    DenseGuardError,
    DenseSizeWarning,
    KrylovConvergenceError,
    NoTransitionError,
    NumericalError,
)
from .graphs import (
    Family,
    Graph,
    GraphSpec,
    build,
    cartesian_product,
    default_target,
    near_center_target,
    product_interior_target,
)
from .oracles import (
    CompleteOracleParams,
    ExactSpectrum,
    complete_success,
    complete_success_large_n,
    decimation_identity_residuals,
    dsg_exact_spectrum,
    dsg_zeta_asymptotic,
    dsg_zeta_closed,
    dsg_zeta_direct,
)
from .spectra import (
    AlphaFit,
    SpectralDecomposition,
    SpectralSums,
    fit_alpha,
    laplacian_decomposition,
    spectral_sums,
    spectral_sums_for,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_DENSE_GUARD",
    "ConfigError",
    "CtqwError",
    "DenseGuardError",
    "DenseSizeWarning",
    "KrylovConvergenceError",
    "NoTransitionError",
    "NumericalError",
    "Family",
    "Graph",
    "GraphSpec",
    "build",
    "cartesian_product",
    "default_target",
    "near_center_target",
    "product_interior_target",
    "CompleteOracleParams",
    "ExactSpectrum",
    "complete_success",
    "complete_success_large_n",
    "decimation_identity_residuals",
    "dsg_exact_spectrum",
    "dsg_zeta_asymptotic",
    "dsg_zeta_closed",
    "dsg_zeta_direct",
    "AlphaFit",
    "SpectralDecomposition",
    "SpectralSums",
    "fit_alpha",
    "laplacian_decomposition",
    "spectral_sums",
    "spectral_sums_for",
    "BoundReport",
    "CriticalGamma",
    "GammaMaxResult",
    "OverlapRecord",
    "SearchProblem",
    "SuccessGrid",
    "critical_gamma",
    "crossing_scan",
    "default_time_grid",
    "evolve_state",
    "gamma_max_search",
    "oscillation_period",
    "overlap_sweep",
    "overlaps",
    "propagate_krylov",
    "success_grid",
    "success_probability",
    "verify_bounds",
    "ScalingFit",
    "ScalingModel",
    "exponent_prediction",
    "fit_scaling",
    "__version__",
]
