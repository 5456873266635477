"""Discrete extended generalized Pareto models for count data."""

from .carrier import CarrierFamily, CarrierKind, DEFAULT_OMEGA
from .counts import CountSample
from .errors import (
    BandError,
    ConfigurationError,
    ConvergenceError,
    DomainError,
    ParseError,
    UsageError,
)
from .gof import GofReport, ks_statistic, ks_test_mc, qq_data, qq_envelope, return_levels
from .inference import FitResult, bic, bootstrap_bands, compare_bic, fit_mle, log_likelihood
from .models import Family, ModelSpec, ParamVector, cdf, logpmf, pmf, quantile, sample, sf
from .simlab import (
    RecoveryConfig,
    SweepConfig,
    SweepResult,
    run_recovery,
    run_threshold_sweep,
    sample_discrete_gev,
)

__version__ = "0.1.0"

__all__ = [
    "BandError", "CarrierFamily", "CarrierKind", "ConfigurationError", "ConvergenceError",
    "CountSample", "DEFAULT_OMEGA", "DomainError", "Family", "FitResult", "GofReport",
    "ModelSpec", "ParamVector", "ParseError", "RecoveryConfig", "SweepConfig", "SweepResult",
    "UsageError", "bic", "bootstrap_bands", "cdf", "compare_bic", "fit_mle", "ks_statistic",
    "ks_test_mc", "log_likelihood", "logpmf", "pmf", "qq_data", "qq_envelope", "quantile",
    "return_levels", "run_recovery", "run_threshold_sweep", "sample", "sample_discrete_gev", "sf",
]
