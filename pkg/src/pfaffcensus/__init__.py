"""Exact censuses of rational points on plane curves, determinant-method
covers with prescribed monomial support, and certified counting bounds."""

__version__ = "0.1.0"
