"""CLI, file formats and reproducible convergence experiments."""

from .experiment import (
    SCENARIOS,
    ConvergenceRow,
    ErrorFit,
    ExperimentConfig,
    ExperimentResult,
    fit_error_order,
    run_experiment,
)
from .fixtures import bs_surface
from .io import read_config, read_surface_csv, write_report_csv, write_surface_csv

__all__ = [
    "SCENARIOS",
    "ConvergenceRow",
    "ErrorFit",
    "ExperimentConfig",
    "ExperimentResult",
    "bs_surface",
    "fit_error_order",
    "read_config",
    "read_surface_csv",
    "run_experiment",
    "write_report_csv",
    "write_surface_csv",
]
