"""Hex-grid robot navigation: wall-following rules, exploration-space
reduction, Pledge-guided tabular RL, and classical planners."""

__version__ = "0.1.0"
