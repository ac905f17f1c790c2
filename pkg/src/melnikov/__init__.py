"""Melnikov functions of the nongeneric quadratic reversible center under
discontinuous polynomial perturbations."""

__version__ = "0.1.0"
