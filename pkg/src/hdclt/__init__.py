"""Bootstrap inference for high-dimensional dependent time series.

The package estimates long-run covariance matrices with a quadratic-spectral
kernel and an automatic bandwidth rule, calibrates max-of-sums test
statistics by a Gaussian multiplier bootstrap, and builds three procedures
on top: mean and white-noise tests, CUSUM change-point detection, and
simultaneous confidence regions for covariance and precision entries.
A Monte Carlo layer measures how well the Gaussian and bootstrap
approximations actually hold for synthetic dependent processes.
"""

from .bootstrap import (
    BootstrapDraws,
    Calibration,
    QuantileEstimate,
    calibrate,
    quantile,
    sample_ghat,
)
from .dgp import (
    CoupledPair,
    DgpSpec,
    ThetaEstimate,
    analytic_instantaneous_cov,
    analytic_longrun_cov,
    estimate_theta,
    generate,
    generate_coupled,
)
from .exceptions import (
    DataFormatError,
    DegenerateDataError,
    HdcltError,
    NumericalError,
)
from .gaussapprox import (
    CoverageSummary,
    DeltaEstimate,
    RateSummary,
    RateTable,
    RectFamily,
    RhoEstimate,
    bootstrap_rho,
    delta_for_series,
    delta_nr,
    empirical_rho,
    monte_carlo_rate,
    rate_sweep,
    region_coverage,
)
from .inference import (
    ConfRegion,
    TestReport,
    changepoint_test,
    cov_confidence_region,
    cusum_vector,
    mean_test,
    tns_batch,
    tns_statistic,
    whitenoise_embed,
    whitenoise_test,
)
from .kernels import KernelSpec, qs_kernel
from .lrcov import (
    ANDREWS_CONST,
    LongRunCovariance,
    LrcMatrix,
    andrews_bandwidth,
    autocov_hat,
    bandwidth_from_ar,
    cholesky_psd,
    fit_ar1,
    lrcov_estimate,
    theta_matrix,
)
from .precision import (
    NodewiseFit,
    NodewisePrecision,
    PrecisionEstimate,
    default_penalties,
    lasso_nodewise,
    precision_estimate,
)
from .rng import derive_rng, derive_seed
from .series import (
    center,
    load_csv,
    save_csv,
    series_fingerprint,
    validate_series,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # exceptions
    "HdcltError", "DataFormatError", "DegenerateDataError", "NumericalError",
    # rng / series plumbing
    "derive_rng", "derive_seed",
    "validate_series", "load_csv", "save_csv", "center", "series_fingerprint",
    # kernels and long-run covariance
    "qs_kernel", "KernelSpec", "ANDREWS_CONST",
    "LrcMatrix", "autocov_hat", "fit_ar1", "bandwidth_from_ar",
    "andrews_bandwidth", "lrcov_estimate", "theta_matrix", "cholesky_psd",
    "LongRunCovariance",
    # bootstrap
    "BootstrapDraws", "QuantileEstimate", "Calibration",
    "sample_ghat", "quantile", "calibrate",
    # statistics and procedures
    "tns_statistic", "tns_batch", "TestReport",
    "mean_test", "whitenoise_embed", "whitenoise_test",
    "cusum_vector", "changepoint_test",
    "ConfRegion", "cov_confidence_region",
    # precision matrix
    "NodewiseFit", "PrecisionEstimate", "default_penalties",
    "lasso_nodewise", "precision_estimate", "NodewisePrecision",
    # synthetic processes
    "DgpSpec", "CoupledPair", "ThetaEstimate",
    "generate", "generate_coupled", "estimate_theta",
    "analytic_longrun_cov", "analytic_instantaneous_cov",
    # Monte Carlo laboratory
    "RectFamily", "RhoEstimate", "DeltaEstimate", "RateTable",
    "RateSummary", "CoverageSummary",
    "empirical_rho", "bootstrap_rho", "delta_for_series", "delta_nr",
    "rate_sweep", "monte_carlo_rate", "region_coverage",
]
