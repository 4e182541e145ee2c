"""Exact cohomology of finite categories with coefficients in natural systems."""

__version__ = "0.1.0"
