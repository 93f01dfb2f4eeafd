"""Dense reference values of ``f(A) v`` and true errors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense_funm import MatrixFunctionSpec, funm_dense
from .errors import DimensionError, InputError
from .sparse_ops import SparseMatrix

__all__ = ["OracleResult", "reference_fAv", "true_error", "DENSE_CAP"]

DENSE_CAP = 3000


@dataclass(frozen=True)
class OracleResult:
    exact: np.ndarray
    method: str  # "diagonal-exact" or "dense-kernel"
    cost_note: str


def reference_fAv(A: SparseMatrix, v, spec: MatrixFunctionSpec,
                  max_dense: int = DENSE_CAP) -> OracleResult:
    """``kind(-tau A) v`` exactly for diagonal ``A``, densely otherwise."""
    v = np.asarray(v)
    if v.shape != (A.n,):
        raise DimensionError(f"vector of shape {v.shape} does not match n = {A.n}")
    if A.is_diagonal():
        fd = spec.scalar(A.diagonal())
        return OracleResult(fd * v, "diagonal-exact", f"elementwise, N = {A.n}")
    if A.n > max_dense:
        raise InputError(
            f"dense reference limited to N <= {max_dense} (got {A.n}); use a smaller instance")
    F = funm_dense(A.to_dense(), spec)
    exact = F @ v
    if np.iscomplexobj(exact) and not np.any(exact.imag):
        exact = exact.real
    return OracleResult(exact, "dense-kernel", f"dense {A.n} x {A.n} evaluation")


def true_error(approx, oracle: OracleResult) -> tuple[float, float]:
    """Absolute and relative 2-norm error of ``approx``."""
    approx = np.asarray(approx)
    if approx.shape != oracle.exact.shape:
        raise DimensionError("approximation and reference differ in length")
    err = float(np.linalg.norm(oracle.exact - approx))
    ref = float(np.linalg.norm(oracle.exact))
    return err, (err / ref if ref > 0 else err)
