import logging

from utils.errors import DataError, DivergenceError, ExecutionError, FormatError, ParseError, ValidationError
from utils.logging_config import APP_LOGGER_NAME, get_default_logger, get_logger, setup_logging
from utils.settings_manager import get_setting, get_settings_manager, reload_settings


def test_module_loggers_are_children_of_the_app_logger():
    assert get_logger("trainer.training").name == f"{APP_LOGGER_NAME}.trainer.training"
    assert get_logger(APP_LOGGER_NAME).name == APP_LOGGER_NAME
    assert get_default_logger().name == APP_LOGGER_NAME


def test_file_logging(tmp_path):
    log_file = tmp_path / "layeragg.log"
    logger = setup_logging("DEBUG", str(log_file), console_output=False)
    get_logger("data.synth").debug("generated 3 utterances")
    for handler in logger.handlers:
        handler.flush()
    text = log_file.read_text(encoding="utf-8")
    assert "DEBUG" in text and "generated 3 utterances" in text
    setup_logging("WARNING", console_output=False)
    assert isinstance(logging.getLogger(APP_LOGGER_NAME).handlers[0], logging.NullHandler)


def test_default_settings():
    assert get_setting("epochs") == 30
    assert get_setting("learning_rate") == 1e-3
    assert tuple(get_setting("synth_signal_layers")) == (3, 5)
    assert get_setting("missing_key", "fallback") == "fallback"
    snapshot = get_settings_manager().get_all_settings()
    snapshot["epochs"] = 1
    assert get_setting("epochs") == 30


def test_log_level_comes_from_environment(monkeypatch):
    monkeypatch.setenv("LAYERAGG_LOG_LEVEL", "DEBUG")
    reload_settings()
    try:
        assert get_setting("log_level") == "DEBUG"
    finally:
        monkeypatch.delenv("LAYERAGG_LOG_LEVEL")
        reload_settings()


def test_error_hierarchy():
    error = ParseError("bad record", 7)
    assert isinstance(error, DataError) and isinstance(error, ValidationError)
    assert error.line_number == 7
    assert isinstance(FormatError("x"), ValidationError)
    divergence = DivergenceError(4, float("inf"))
    assert isinstance(divergence, ExecutionError)
    assert divergence.epoch == 4
