"""Increasing self-similar Markov processes: simulation and limit-law checks."""

__version__ = "1.0.0"
