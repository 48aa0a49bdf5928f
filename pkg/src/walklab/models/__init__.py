from .config import Config, load_config, with_overrides
from .experiment import (
    SCHEMA,
    ConfigError,
    Diagnostic,
    ExperimentConfig,
    load_experiment,
    parse_experiment,
    render_experiment,
    validate_config,
)
from .occupation import EnvOccupation, occupation_from_counts

__all__ = [
    "Config",
    "load_config",
    "with_overrides",
    "SCHEMA",
    "ConfigError",
    "Diagnostic",
    "ExperimentConfig",
    "load_experiment",
    "parse_experiment",
    "render_experiment",
    "validate_config",
    "EnvOccupation",
    "occupation_from_counts",
]
