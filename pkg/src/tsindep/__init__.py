"""Independence tests for pairs of multivariate time series.

The package fits a working model to each series (VAR by least squares or a
constant-correlation bivariate GARCH by Gaussian QMLE), extracts the
innovation estimates, and tests their independence with HSIC-based
statistics whose critical values come from a residual bootstrap.  Classic
cross-correlation competitors (portmanteau, spectral, and squared/outer
residual transforms) are included, along with a Monte Carlo harness for
size and power studies and a small CLI.
"""

from .bootstrap import (
    BootstrapConfig,
    BootstrapResult,
    bootstrap_estimate,
    bootstrap_run,
    bootstrap_test,
    hsic_test_suite,
    resample_innovations,
    standardize_residuals,
)
from .crosscorr import (
    CrossCovSet,
    bandwidth_rule,
    cross_cov,
    cross_cov_set,
    daniell,
    g_test,
    l_test,
    single_lag_stat,
    t_test,
    w_test,
)
from .exceptions import (
    BootstrapError,
    BoundaryError,
    DataError,
    FitError,
    NumericalError,
    SingularityError,
    TsindepError,
)
from .hsic import (
    LagConfig,
    PairedResiduals,
    hsic_v,
    hsic_v_reference,
    joint_stat,
    scaled_stat,
    single_stat,
    stat_from_grams,
)
from .io import log_returns, read_csv, write_csv
from .kernels import (
    GramMatrix,
    KernelSpec,
    eval_kernel,
    gram_matrix,
    median_heuristic_sigma,
)
from .models import (
    FitResult,
    ModelSpec,
    fit_ccc_garch,
    fit_var,
    influence_values,
    paired_residuals,
    psd_sqrt,
    residuals,
    simulate,
)
from .results import TestOutcome
from .simlab import (
    EgpSpec,
    McConfig,
    McSummary,
    TestSpec,
    egp_innovations,
    gen_garch_pair,
    gen_var_pair,
    run_monte_carlo,
)
from .special import chi2_quantile, chi2_sf, norm_sf

__version__ = "0.1.0"

__all__ = [
    "BootstrapConfig",
    "BootstrapResult",
    "BootstrapError",
    "BoundaryError",
    "CrossCovSet",
    "DataError",
    "EgpSpec",
    "FitError",
    "FitResult",
    "GramMatrix",
    "KernelSpec",
    "LagConfig",
    "McConfig",
    "McSummary",
    "ModelSpec",
    "NumericalError",
    "PairedResiduals",
    "SingularityError",
    "TestOutcome",
    "TestSpec",
    "TsindepError",
    "bandwidth_rule",
    "bootstrap_estimate",
    "bootstrap_run",
    "bootstrap_test",
    "chi2_quantile",
    "chi2_sf",
    "cross_cov",
    "cross_cov_set",
    "daniell",
    "egp_innovations",
    "eval_kernel",
    "fit_ccc_garch",
    "fit_var",
    "g_test",
    "gen_garch_pair",
    "gen_var_pair",
    "gram_matrix",
    "hsic_test_suite",
    "hsic_v",
    "hsic_v_reference",
    "influence_values",
    "joint_stat",
    "l_test",
    "log_returns",
    "median_heuristic_sigma",
    "norm_sf",
    "paired_residuals",
    "psd_sqrt",
    "read_csv",
    "resample_innovations",
    "residuals",
    "run_monte_carlo",
    "scaled_stat",
    "simulate",
    "single_lag_stat",
    "single_stat",
    "standardize_residuals",
    "stat_from_grams",
    "t_test",
    "w_test",
    "write_csv",
    "__version__",
]
