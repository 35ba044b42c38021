"""Cotangent sums, continued fractions, Vaughan's identity and the
Nyman-Beurling Gram form, computed and cross-checked."""

__version__ = "0.1.0"
