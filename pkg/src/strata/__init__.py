"""Boundary strata classes of moduli of stable curves, exactly."""

__version__ = "0.1.0"
