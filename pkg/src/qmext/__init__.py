"""Computational toolkit for function spaces on finite quasi-metric measure spaces."""

__version__ = "0.1.0"
