"""Unitary-group matrix integrals of HCIZ type and their large-N free energy."""

__version__ = "0.1.0"
