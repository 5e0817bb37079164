"""Frobenius manifold M_{m,n} and the bihamiltonian universal Whitham hierarchy."""

__version__ = "0.1.0"
