"""Circular semiquantum private comparison on chi-type states: simulator and analysis."""
__version__ = "0.1.0"
