"""
Command line modules for LayerAgg.

Modules:
    dispatch: Argument parsing, subcommand routing and exit codes
"""

__version__ = "1.0.0"

from .dispatch import create_argument_parser, dispatch, main

__all__ = [
    "create_argument_parser",
    "dispatch",
    "main",
]
