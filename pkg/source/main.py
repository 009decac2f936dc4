"""
LayerAgg command line entry point.

Usage:
    python source/main.py <command> [options]
"""

from cli.dispatch import main


if __name__ == "__main__":
    main()
