"""Exact computation of Hochschild, cyclic, periodic and co-periodic homology
of finite-dimensional (DG) algebras, with Tate complexes of Z/pZ, filtered
truncations and spectral sequences, all over F_p or Q with exact arithmetic."""

from .exactlin import Field, Matrix, Subspace, QQ

__all__ = ["Field", "Matrix", "Subspace", "QQ"]
__version__ = "0.1.0"
