"""Picard-Fuchs operators, truncated normal functions and their inhomogeneities."""

__version__ = "0.1.0"
