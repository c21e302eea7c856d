"""Invariant Ricci-flat Kaehler metrics on tangent bundles of rank-one symmetric spaces."""

__version__ = "0.1.0"
