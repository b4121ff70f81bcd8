"""Graded integrable QFT numerical laboratory."""

__version__ = "0.1.0"
