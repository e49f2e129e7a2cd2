"""Constructive shadowing and hyperbolicity numerics for weighted shifts."""

__version__ = "0.1.0"
