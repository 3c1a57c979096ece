"""Nodal domains of Laplacian eigenfunctions on the unit square and the flat torus."""

__version__ = "0.1.0"
