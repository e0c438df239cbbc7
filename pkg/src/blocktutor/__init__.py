"""Constraint-based tutoring platform for a block-structured C-like teaching language."""

__version__ = "0.1.0"
