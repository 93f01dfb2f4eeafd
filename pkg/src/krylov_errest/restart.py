"""Restarted Arnoldi for ``f(A) v`` with an accumulated Hessenberg matrix.

After ``k`` cycles of length ``m`` the bases ``W = [V1, ..., Vk]`` satisfy
``A W = W H_acc + h_k v_next e_km^T`` where ``H_acc`` is block lower
bidiagonal with the cycle Hessenberg matrices on its diagonal and
``h_j e_1 e_m^T`` below it.  Only the trailing block of
``f(H_acc) e_1`` is new in each cycle.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dense_funm import MatrixFunctionSpec
from .errors import InputError
from .estimates import ConvergenceRecord, _relative, xi_from_hessenberg
from .krylov import DEFAULT_BREAKDOWN_TOL, arnoldi
from .sparse_ops import SparseMatrix

__all__ = ["RestartState", "RestartResult", "restarted_approx"]


@dataclass
class RestartState:
    m: int
    beta: float
    cycle: int = 0
    H_acc: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    V: Optional[np.ndarray] = None
    h_next: float = 0.0
    v_next: Optional[np.ndarray] = None
    f_approx: Optional[np.ndarray] = None
    records: list = field(default_factory=list)


@dataclass
class RestartResult:
    approx: np.ndarray
    records: list
    converged: bool
    state: RestartState


def _extend(H_acc, h_prev, H_new):
    p, q = H_acc.shape[0], H_new.shape[0]
    out = np.zeros((p + q, p + q), dtype=np.result_type(H_acc, H_new))
    out[:p, :p] = H_acc
    out[p:, p:] = H_new
    if p:
        out[p, p - 1] = h_prev
    return out


def restarted_approx(A: SparseMatrix, v, spec: MatrixFunctionSpec, m: int,
                     max_cycles: int = 60, eps: float = 1e-12, estimator: str = "xi2",
                     reference: Optional[np.ndarray] = None,
                     breakdown_tol: float = DEFAULT_BREAKDOWN_TOL,
                     stop_on_true: bool = True) -> RestartResult:
    """Approximate ``f(A) v`` by Arnoldi cycles of length ``m``.

    Stops once the chosen relative estimate (``"xi1"`` or ``"xi2"``) is at
    most ``eps``.  When ``reference`` (the exact ``f(A) v``) is given the
    true relative error is recorded, and used for stopping unless
    ``stop_on_true`` is false.
    """
    if m < 2:
        raise InputError("restart length must be at least 2")
    if eps <= 0:
        raise InputError("eps must be positive")
    if estimator not in ("xi1", "xi2"):
        raise InputError(f"unknown estimator '{estimator}'")
    v = np.asarray(v, dtype=float)
    beta = float(np.linalg.norm(v))
    state = RestartState(m=m, beta=beta)
    ref_norm = None if reference is None else float(np.linalg.norm(reference))
    start = v
    converged = False
    t0 = time.perf_counter()
    for k in range(1, max_cycles + 1):
        dec = arnoldi(A, start, min(m, A.n), breakdown_tol)
        H_acc = _extend(state.H_acc, state.h_next, dec.H)
        c, xi1, xi2 = xi_from_hessenberg(H_acc, dec.h_next, beta, spec)
        p = state.H_acc.shape[0]
        update = beta * (dec.V @ c[p: p + dec.m])
        f = update if state.f_approx is None else state.f_approx + update
        state.cycle, state.H_acc, state.V = k, H_acc, dec.V
        state.h_next, state.v_next, state.f_approx = dec.h_next, dec.v_next, f
        norm = float(np.linalg.norm(f))
        rec = ConvergenceRecord(
            step=H_acc.shape[0], xi1=xi1, xi2=xi2,
            xi1_rel=_relative(xi1, norm), xi2_rel=_relative(xi2, norm))
        if reference is not None:
            err = float(np.linalg.norm(reference - f))
            rec.true_abs = err
            rec.true_rel = err / ref_norm if ref_norm > 0 else err
        rec.wall_ms = (time.perf_counter() - t0) * 1e3
        state.records.append(rec)
        use_true = reference is not None and stop_on_true
        measure = rec.true_rel if use_true else getattr(rec, f"{estimator}_rel")
        if measure <= eps or dec.exact:
            converged = measure <= eps or not use_true
            break
        start = dec.v_next
    return RestartResult(approx=state.f_approx, records=state.records,
                         converged=converged, state=state)
