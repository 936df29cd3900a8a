"""Zeros of independence polynomials of bounded-degree trees near the boundary of U_delta."""

__version__ = "0.1.0"
