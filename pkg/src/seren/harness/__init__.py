from .buffer import ReplayBuffer
from .config import ConfigError, ExperimentConfig, load_config, load_config_list
from .loop import (
    run_baseline_egreedy,
    run_degenerate_equivalence,
    run_experiment,
    run_seren,
    run_seren_degenerate,
)
from .metrics import CSV_HEADER, EpisodeRow, MetricsLog

__all__ = [
    "CSV_HEADER", "ConfigError", "EpisodeRow", "ExperimentConfig", "MetricsLog", "ReplayBuffer",
    "load_config", "load_config_list", "run_baseline_egreedy", "run_degenerate_equivalence",
    "run_experiment", "run_seren", "run_seren_degenerate",
]
