"""Exact supercommutative algebra and supersheaves on finite spaces."""

from .qlinalg import BACKEND, Matrix, Q, Subspace
from .superring import SuperAlgebra, grassmann, product, rationals
from .supermodule import ModuleHom, SuperModule, free_module
from .supersheaf import FiniteSpace, ModuleSheaf, SuperRingSheaf

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Matrix", "Q", "Subspace", "SuperAlgebra", "grassmann", "product", "rationals",
    "ModuleHom", "SuperModule", "free_module", "FiniteSpace", "ModuleSheaf", "SuperRingSheaf",
]
