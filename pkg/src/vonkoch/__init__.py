"""Generalized von Koch functions and the multifractal analysis of their
associated self-similar measures."""

__version__ = "0.1.0"
