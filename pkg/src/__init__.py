"""Metric group toolkit - exact finite metric groups, cohomology, centers and spinors."""

__version__ = "0.1.0"
