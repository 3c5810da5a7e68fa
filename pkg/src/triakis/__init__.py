"""Polyhedral harmonics of the triakis tetrahedron and octahedron families."""

__version__ = "0.1.0"
