# decoherence_lab/__init__.py
"""Intrinsic decoherence simulations under the Milburn equation."""

__version__ = "0.1.0"
