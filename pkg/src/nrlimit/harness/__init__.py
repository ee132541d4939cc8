"""Experiment drivers, configuration, reports and the command-line interface."""
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .experiments import (
    exp_galerkin_tail,
    exp_global_bound,
    exp_linear_longtime,
    exp_nonlinear_locuniform,
    exp_scaling_identity,
    exp_transform_gain,
    run_evolve,
    run_experiment,
)
from .report import ConvergenceReport, fit_slope
from .validation import run_validation_suite

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "exp_galerkin_tail",
    "exp_global_bound",
    "exp_linear_longtime",
    "exp_nonlinear_locuniform",
    "exp_scaling_identity",
    "exp_transform_gain",
    "run_evolve",
    "run_experiment",
    "ConvergenceReport",
    "fit_slope",
    "run_validation_suite",
]
