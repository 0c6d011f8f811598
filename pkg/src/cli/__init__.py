"""
Command-line interface: train, eval, stats, theory, sweep, gen-data.
"""

from .main import build_parser, main

__all__ = ["build_parser", "main"]
