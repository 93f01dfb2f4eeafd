"""Krylov approximations to f(A)v with a posteriori error estimates."""

from .dense_funm import FunctionKind, MatrixFunctionSpec, SymTridiagonal
from .errors import ConvergenceError, DimensionError, InputError, MatrixMarketError
from .bounds import BoundReport, bound_report
from .estimates import ConvergenceRecord, EstimatePair, xi_estimates
from .krylov import KrylovDecomposition, arnoldi, krylov_approx, lanczos
from .experiments import RunConfig, load_matrix, run_experiment, run_trace, start_vector
from .oracle import reference_fAv, true_error
from .restart import restarted_approx
from .sparse_ops import SparseMatrix, SpectralInterval

__version__ = "0.1.0"

__all__ = [
    "FunctionKind",
    "MatrixFunctionSpec",
    "SymTridiagonal",
    "ConvergenceError",
    "DimensionError",
    "InputError",
    "MatrixMarketError",
    "BoundReport",
    "bound_report",
    "ConvergenceRecord",
    "EstimatePair",
    "xi_estimates",
    "KrylovDecomposition",
    "arnoldi",
    "krylov_approx",
    "lanczos",
    "RunConfig",
    "load_matrix",
    "run_experiment",
    "run_trace",
    "start_vector",
    "reference_fAv",
    "true_error",
    "restarted_approx",
    "SparseMatrix",
    "SpectralInterval",
]
