"""Config-driven experiments: ``run`` a config, write CSV tables and a JSON summary."""

from .config import ConfigError, ExperimentConfig, config_from_dict, load_config
from .runner import OUTPUT_ENV, ExperimentResult, list_experiments, output_dir_for, run
from .studies import evenly_spaced_vs_uniform, min_mu_search, segment_example

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentResult",
    "OUTPUT_ENV",
    "config_from_dict",
    "evenly_spaced_vs_uniform",
    "list_experiments",
    "load_config",
    "min_mu_search",
    "output_dir_for",
    "run",
    "segment_example",
]
