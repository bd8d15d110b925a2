"""
MRFM Spin Detection Package

Discrete-time signal models for single-spin magnetic resonance force
microscopy (random telegraph and reflecting random walk), classical,
likelihood-ratio and second-order approximation detectors, and a Monte-Carlo
harness producing ROC and power curves.
"""

__version__ = "1.0.0"
__author__ = "MRFM Spin Detection Team"

from .approx_detectors import (
    HybridConstants,
    approximate_lrt_statistic,
    cross_term_gain,
    cross_term_gain_matched,
    cross_term_statistic,
    filtered_energy_closed_form,
    hybrid_constants,
    hybrid_statistic,
    symmetric_expansion_statistic,
)
from .classical_detectors import (
    LowPassFilter,
    Statistic,
    amplitude_statistic,
    energy_statistic,
    lpf_apply,
    matched_filter_statistic,
)
from .config import ConfigurationManager, ExperimentConfig, validate_config
from .detector_registry import DETECTOR_NAMES, DetectorParams, DetectorSet, DetectorSpec, build_detector_set
from .exceptions import (
    ConfigurationError,
    DataValidationError,
    FileNotFoundError,
    HarnessError,
    ModelError,
    NumericalError,
    ParseError,
    SpinDetectionError,
)
from .experiment import ExperimentRunner
from .harness import (
    CurveTable,
    TrialBatch,
    auc,
    auc_standard_error,
    default_pf_grid,
    empirical_threshold,
    power_curve,
    roc_curve,
    run_trials,
)
from .logging_config import get_logger, setup_logging
from .lrt_detectors import (
    TelegraphPosterior,
    WalkPosterior,
    rt_brute_force_log_lrt,
    rt_forward,
    rt_log_lrt,
    rt_posterior_step,
    rw_brute_force_log_lrt,
    rw_forward,
    rw_log_lrt,
    rw_posterior_step,
)
from .parser import ObservationFile, ResultsParser
from .presets import load_preset, preset_names
from .report_generator import SummaryReportGenerator
from .signal_models import (
    ObservationRecord,
    SignalPath,
    TelegraphModel,
    WalkModel,
    add_awgn,
    gen_random_walk,
    gen_telegraph,
    physical_amplitude,
    sigma_for_snr,
    snr_db,
    stationary_distribution,
)


__all__ = [
    "TelegraphModel",
    "WalkModel",
    "SignalPath",
    "ObservationRecord",
    "gen_telegraph",
    "gen_random_walk",
    "add_awgn",
    "stationary_distribution",
    "snr_db",
    "sigma_for_snr",
    "physical_amplitude",
    "Statistic",
    "LowPassFilter",
    "lpf_apply",
    "amplitude_statistic",
    "energy_statistic",
    "matched_filter_statistic",
    "TelegraphPosterior",
    "WalkPosterior",
    "rt_posterior_step",
    "rt_forward",
    "rt_log_lrt",
    "rt_brute_force_log_lrt",
    "rw_posterior_step",
    "rw_forward",
    "rw_log_lrt",
    "rw_brute_force_log_lrt",
    "HybridConstants",
    "hybrid_constants",
    "symmetric_expansion_statistic",
    "filtered_energy_closed_form",
    "hybrid_statistic",
    "approximate_lrt_statistic",
    "cross_term_statistic",
    "cross_term_gain",
    "cross_term_gain_matched",
    "DETECTOR_NAMES",
    "DetectorParams",
    "DetectorSpec",
    "DetectorSet",
    "build_detector_set",
    "TrialBatch",
    "CurveTable",
    "run_trials",
    "empirical_threshold",
    "roc_curve",
    "power_curve",
    "auc",
    "auc_standard_error",
    "default_pf_grid",
    "ExperimentConfig",
    "ConfigurationManager",
    "validate_config",
    "load_preset",
    "preset_names",
    "ResultsParser",
    "ObservationFile",
    "SummaryReportGenerator",
    "ExperimentRunner",
    "get_logger",
    "setup_logging",
    "SpinDetectionError",
    "ModelError",
    "DataValidationError",
    "ParseError",
    "FileNotFoundError",
    "ConfigurationError",
    "HarnessError",
    "NumericalError",
]
