"""Exact-arithmetic verification of support projections and equivariant
splittings on finite tree complexes with group actions."""

__version__ = "0.1.0"

from .fields import Field, QQ
from .linalg import Matrix, Subspace, image, is_idempotent, kernel, rref

__all__ = [
    "Field",
    "QQ",
    "Matrix",
    "Subspace",
    "image",
    "kernel",
    "rref",
    "is_idempotent",
    "__version__",
]
