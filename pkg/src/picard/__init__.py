"""Exact Fourier-Jacobi computations for Picard modular forms over Q(sqrt(-3))."""

__version__ = "0.1.0"
