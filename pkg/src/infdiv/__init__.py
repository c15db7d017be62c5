"""Certify or refute infinite divisibility of laws built from log-convex data."""

__version__ = "0.1.0"
