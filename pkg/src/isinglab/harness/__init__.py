"""Experiment harness: configs, dispatch, result tables, reports, CLI."""

from .config import (BudgetError, ConfigError, ExperimentConfig, load_config,
                     parse_config)
from .experiments import ResultTable, ScalingFit, run_experiment, scaling_fit
from .report import (emit_report, table_from_csv, table_from_json,
                     table_to_csv, table_to_json)

__all__ = [
    "BudgetError",
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "ResultTable",
    "ScalingFit",
    "run_experiment",
    "scaling_fit",
    "emit_report",
    "table_from_csv",
    "table_from_json",
    "table_to_csv",
    "table_to_json",
]
