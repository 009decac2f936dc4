"""
Utility modules for LayerAgg.

This package provides common utility functions for logging, configuration,
and the shared error hierarchy.

Modules:
    logging_config: Logging configuration and setup utilities
    settings_manager: Default values for every command
    errors: Exception hierarchy mapped onto CLI exit codes
"""

__version__ = "1.0.0"

from .logging_config import setup_logging, get_logger, init_logging, get_default_logger

__all__ = [
    "setup_logging",
    "get_logger",
    "init_logging",
    "get_default_logger",
]
