"""Numerical laboratory for Dirichlet-Laplacian spectral projections
under planar perturbations of the square [0, pi]^2."""

__version__ = "0.1.0"

DEFAULT_SEED = 20240601
