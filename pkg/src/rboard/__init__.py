"""Reproducible benchmark orchestration for recommender-system tasks."""

__version__ = "0.1.0"
