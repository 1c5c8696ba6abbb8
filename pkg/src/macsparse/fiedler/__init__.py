from .cholesky import CholeskyFactor, SymbolicCholesky, sparse_cholesky
from .krylov import KrylovResult, krylov_schur
from .ordering import amd_ordering
from .solver import (
    FiedlerPair,
    FiedlerSolver,
    default_shift,
    deflate,
    fiedler_dense_oracle,
    fiedler_shift_invert,
)

__all__ = [
    "CholeskyFactor",
    "FiedlerPair",
    "FiedlerSolver",
    "KrylovResult",
    "SymbolicCholesky",
    "amd_ordering",
    "default_shift",
    "deflate",
    "fiedler_dense_oracle",
    "fiedler_shift_invert",
    "krylov_schur",
    "sparse_cholesky",
]
