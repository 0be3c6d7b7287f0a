from pathlib import Path
from dataclasses import dataclass
import yaml

import logging
import os

from .config import NumericTolerances, SolverSettings, configure_solver, configure_tolerances
from .database.db import sqlite_url
from .plugin_manager import PluginManager
from .validation import ComplexityConfig

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = "config/config.yaml"
SWEEP_KEYS = {"repetitions", "trials", "j_max", "hi_multiplier", "mmd_bound_constant", "epsilon", "delta"}

def load_config_file(config_file: str | Path) -> dict:
    """Load configuration from YAML file."""
    try:
        with open(config_file, 'r') as file:
            config = yaml.safe_load(file) or {}
            logger.info(f"Loaded config file from {config_file}")
    except FileNotFoundError:
        logger.error(f"Configuration file {config_file} not found")
        raise
    except yaml.YAMLError as e:
        logger.error(f"Error parsing configuration file: {e}")
        raise

    if not isinstance(config, dict):
        raise ValueError(f"Configuration file {config_file} must hold a mapping. Got {type(config).__name__}")
    return config

def env_seed(default: int = 0) -> int:
    value = os.getenv("QMETRIC_SEED")
    if value is None or not value.strip():
        return default
    try:
        seed = int(value)
    except ValueError:
        raise ValueError(f"QMETRIC_SEED must be a non-negative integer. Got {value!r}")
    if seed < 0:
        raise ValueError(f"QMETRIC_SEED must be a non-negative integer. Got {value!r}")
    return seed

@dataclass
class RuntimeContext:
    config: dict
    config_file: str | Path | None = None

    @classmethod
    def from_config_file(cls, config_file: str | Path):
        config = load_config_file(config_file)
        return cls(config=config, config_file=config_file)

    @classmethod
    def from_env(cls):
        """Load QMETRIC_CONFIG (default config/config.yaml); a missing file means built-in defaults."""
        config_file = Path(os.getenv("QMETRIC_CONFIG", DEFAULT_CONFIG))
        if not config_file.exists():
            logger.debug(f"No application config at {config_file}. Using built-in defaults")
            return cls(config={})
        return cls.from_config_file(config_file)

    def __post_init__(self):
        if self.config is None:
            raise ValueError("RuntimeContext requires a config dictionary")
        self.initialize_runtime(self.config)

    def initialize_runtime(self, config: dict):

        logger.debug("Initializing Runtime Context")

        ## Numerics
        numerics = dict(config.get('numerics', {}) or {})
        max_dim = (config.get('moment_operator', {}) or {}).get('max_dim')
        if max_dim is not None:
            numerics['max_moment_dim'] = int(max_dim)
        transport_cfg = dict(config.get('transport', {}) or {})
        if 'perturbation' in transport_cfg:
            numerics['ot_perturbation'] = float(transport_cfg.pop('perturbation'))
        self.tolerances: NumericTolerances = configure_tolerances(numerics)

        ## Transport solver
        self.solver: SolverSettings = configure_solver(transport_cfg)

        ## Sweep defaults
        sweep_cfg = config.get('sweep', {}) or {}
        unknown = set(sweep_cfg) - SWEEP_KEYS - {'workers'}
        if unknown:
            raise ValueError(f"Unknown sweep config keys: {sorted(unknown)}")
        self.complexity = ComplexityConfig(
            seed=env_seed(),
            **{key: value for key, value in sweep_cfg.items() if key in SWEEP_KEYS},
        )
        self.workers = int(sweep_cfg.get('workers') or os.cpu_count() or 1)
        if self.workers < 1:
            raise ValueError(f"sweep.workers must be >= 1. Got {self.workers}")

        ## Output and store
        self.output_dir = Path((config.get('output', {}) or {}).get('directory', 'output'))
        self.store_path = (config.get('store', {}) or {}).get('path')

        ## Plugins
        self.plugin_manager = PluginManager()

    def store_url(self, output_dir: str | Path | None = None) -> str:
        """Configured store URL, or a SQLite file inside the output directory."""
        if self.store_path:
            return self.store_path
        return sqlite_url(output_dir or self.output_dir)

    def update_runtime(self, config_file: str | Path):
        self.config_file = Path(config_file)
        self.config = load_config_file(self.config_file)
        self.initialize_runtime(self.config)
