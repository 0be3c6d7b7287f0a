import logging
import logging.config
import os
import sys
import yaml

from pathlib import Path
from typing import Any, Dict

logger = logging.getLogger(__name__)

DEFAULT_LOG_CONFIG = "config/logging.yaml"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# Third-party loggers kept at WARNING unless running verbose
NOISY_LOGGERS = [
    'matplotlib',
    'asyncio',
    'sqlalchemy.engine',
    'concurrent.futures',
]

class LogHandler:
    """Configures logging for CLI runs. Log lines go to stderr; stdout carries results."""

    def __init__(self, config: Dict[str, Any] | None = None, level: int | None = None):
        self.config = config
        self.level = level

    @classmethod
    def from_file(cls, config_file: str | Path, log_level: str | int | None = None):
        config_file = Path(config_file)
        level = cls.coerce_log_level(log_level)
        if not config_file.exists():
            logger.debug(f"No logging config at {config_file}. Using default logging configuration")
            return cls(level=level)
        try:
            with open(config_file) as f:
                config = yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as e:
            logger.warning(f"Error loading logging config {config_file}: {e}")
            return cls(level=level)
        return cls(config=config, level=level)

    @classmethod
    def from_env(cls):
        """Build from QMETRIC_LOG_CONFIG and QMETRIC_LOG_LEVEL."""
        return cls.from_file(
            os.getenv("QMETRIC_LOG_CONFIG", DEFAULT_LOG_CONFIG),
            log_level=os.getenv("QMETRIC_LOG_LEVEL"),
        )

    @staticmethod
    def coerce_log_level(log_level: str | int | None) -> int | None:
        if log_level is None or isinstance(log_level, int):
            return log_level

        name = log_level.strip()
        if name.isdigit():
            return int(name)

        level = logging.getLevelName(name.upper())
        if isinstance(level, int):
            return level
        raise ValueError(f"Invalid log level: {log_level}")

    def start_logger(self, verbose: bool = False):
        """
        Apply the dictConfig if one was loaded, else a basic stderr configuration.

        Parameters
        ----------
        verbose : bool, optional
            Default to DEBUG and leave third-party loggers untouched.
        """
        if self.config:
            for handler in (self.config.get("handlers") or {}).values():
                if handler.get("filename"):
                    Path(handler["filename"]).parent.mkdir(parents=True, exist_ok=True)
            logging.config.dictConfig(self.config)
            if self.level is not None:
                root = logging.getLogger()
                root.setLevel(self.level)
                for handler in root.handlers:
                    handler.setLevel(self.level)
                for logger_name in self.config.get("loggers", {}):
                    logging.getLogger(logger_name).setLevel(self.level)
        else:
            level = self.level if self.level is not None else (logging.DEBUG if verbose else logging.INFO)
            logging.basicConfig(level=level, format=LOG_FORMAT, datefmt=DATE_FORMAT, stream=sys.stderr, force=True)

        if not verbose:
            for logger_name in NOISY_LOGGERS:
                logging.getLogger(logger_name).setLevel(logging.WARNING)
        logger.debug(f"Logging started (dictConfig={'yes' if self.config else 'no'}, level={self.level})")
