import logging

import pytest
import yaml

from src.log_handler import LogHandler


@pytest.fixture(autouse=True)
def restore_logging():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    for handler in root.handlers:
        if handler not in handlers:
            handler.close()
    root.handlers[:] = handlers
    root.setLevel(level)
    logging.getLogger("src").handlers.clear()
    logging.getLogger("src").propagate = True


@pytest.mark.parametrize("value, expected", [
    (None, None),
    (10, 10),
    ("20", 20),
    ("debug", logging.DEBUG),
    (" Warning ", logging.WARNING),
])
def test_coerce_log_level(value, expected):
    assert LogHandler.coerce_log_level(value) == expected


def test_coerce_log_level_rejects_unknown_names():
    with pytest.raises(ValueError, match="Invalid log level: loud"):
        LogHandler.coerce_log_level("loud")


def test_missing_file_falls_back_to_basic_config(tmp_path):
    handler = LogHandler.from_file(tmp_path / "missing.yaml", log_level="ERROR")
    assert handler.config is None
    handler.start_logger()
    assert logging.getLogger().level == logging.ERROR


def test_broken_file_falls_back(tmp_path):
    path = tmp_path / "logging.yaml"
    path.write_text("version: [1\n")
    assert LogHandler.from_file(path).config is None


def test_file_handler_directory_is_created(tmp_path):
    log_file = tmp_path / "logs" / "run.log"
    config = {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {"plain": {"format": "%(levelname)s %(message)s"}},
        "handlers": {"file": {"class": "logging.FileHandler", "formatter": "plain", "filename": str(log_file)}},
        "loggers": {"src": {"level": "DEBUG", "handlers": ["file"], "propagate": False}},
    }
    path = tmp_path / "logging.yaml"
    path.write_text(yaml.safe_dump(config))

    LogHandler.from_file(path).start_logger()
    logging.getLogger("src.test").info("hello")
    for handler in logging.getLogger("src").handlers:
        handler.flush()
    assert "INFO hello" in log_file.read_text()


def test_level_overrides_dict_config(tmp_path):
    config = {
        "version": 1,
        "handlers": {"console": {"class": "logging.StreamHandler", "level": "INFO"}},
        "loggers": {"src": {"level": "INFO", "handlers": ["console"], "propagate": False}},
    }
    path = tmp_path / "logging.yaml"
    path.write_text(yaml.safe_dump(config))
    LogHandler.from_file(path, log_level="DEBUG").start_logger()
    assert logging.getLogger("src").level == logging.DEBUG


def test_noisy_loggers_are_quieted(tmp_path):
    LogHandler.from_file(tmp_path / "missing.yaml").start_logger()
    assert logging.getLogger("sqlalchemy.engine").level == logging.WARNING
