"""Experiment runners and the correlation statistics behind the figures."""

from .correlation import CorrelationSummary, correlate, ols_fit, pearson_r, r_squared
from .runners import (
    AVERAGED,
    PER_MODEL,
    CurveExperimentResult,
    ExperimentConfig,
    ExperimentResult,
    LabeledData,
    ScatterRecord,
    partition_for,
    run_ablation_experiment,
    run_curve_experiment,
    run_subset_experiment,
    summarize_curves,
    working_rows,
)
from .seeding import derive_seed

__all__ = [
    "AVERAGED",
    "PER_MODEL",
    "CorrelationSummary",
    "CurveExperimentResult",
    "ExperimentConfig",
    "ExperimentResult",
    "LabeledData",
    "ScatterRecord",
    "correlate",
    "derive_seed",
    "ols_fit",
    "partition_for",
    "pearson_r",
    "r_squared",
    "run_ablation_experiment",
    "run_curve_experiment",
    "run_subset_experiment",
    "summarize_curves",
    "working_rows",
]
