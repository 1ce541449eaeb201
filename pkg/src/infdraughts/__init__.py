"""Infinite draughts: rules engine, exact solver, and ordinal game-value certifier."""

__version__ = "0.1.0"
