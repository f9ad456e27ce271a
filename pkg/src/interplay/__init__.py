"""Trace-driven two-level cache simulator with way-disabling, and an analytical
model that predicts the CPI of multi-cache way-disabling configurations from
single-cache training simulations."""

from .cache import AccessOutcome, Cache, CacheGeometry, ConfigError, new_cache
from .configspace import ConfigSpace, WayConfig, full_space, label, predicted_set, trainings_for, training_set
from .harness import (
    PolicyReport,
    SweepResult,
    ValidationReport,
    policy_analysis,
    predict_all,
    run_exhaustive_sweep,
    run_training_sweep,
    validate,
)
from .predictor import (
    DataError,
    Prediction,
    PredictorMode,
    TrainingData,
    captured_l2_misses,
    l2_miss_rates,
    l2_penalty,
    linear_cycles,
    predict,
    total_l2_misses,
)
from .simulator import HierarchyParams, SimStats, cpi, simulate
from .trace import TraceArrays, TraceRecord, WorkloadSpec, generate_trace, parse_record, read_trace, write_trace

__version__ = "0.1.0"

__all__ = [
    "AccessOutcome", "Cache", "CacheGeometry", "ConfigError", "new_cache",
    "ConfigSpace", "WayConfig", "full_space", "label", "predicted_set", "trainings_for", "training_set",
    "PolicyReport", "SweepResult", "ValidationReport", "policy_analysis", "predict_all",
    "run_exhaustive_sweep", "run_training_sweep", "validate",
    "DataError", "Prediction", "PredictorMode", "TrainingData", "captured_l2_misses", "l2_miss_rates",
    "l2_penalty", "linear_cycles", "predict", "total_l2_misses",
    "HierarchyParams", "SimStats", "cpi", "simulate",
    "TraceArrays", "TraceRecord", "WorkloadSpec", "generate_trace", "parse_record", "read_trace", "write_trace",
]
