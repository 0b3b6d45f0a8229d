"""Numerical laboratory for the long-time asymptotics of Toda shock waves."""

__version__ = "0.1.0"
