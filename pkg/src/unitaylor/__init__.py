"""Finite-horizon constructor and verifier for partially smooth universal Taylor series."""

__version__ = "0.1.0"
