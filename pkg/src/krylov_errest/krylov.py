"""Arnoldi and Lanczos processes and the basic Krylov approximation.

Both processes are incremental: ``step()`` extends the basis by one vector
and ``decomposition()`` snapshots the current ``A V = V H + h v e_m^T``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dense_funm import MatrixFunctionSpec, SymTridiagonal, funm_dense, funm_hermitian
from .errors import DimensionError, InputError
from .sparse_ops import SparseMatrix

__all__ = [
    "KrylovDecomposition",
    "ArnoldiProcess",
    "LanczosProcess",
    "arnoldi",
    "lanczos",
    "krylov_approx",
]

DEFAULT_BREAKDOWN_TOL = 1e-14


@dataclass(frozen=True)
class KrylovDecomposition:
    """Snapshot of an m-step Arnoldi or Lanczos decomposition.

    Attributes
    ----------
    V : (N, m) array
        Orthonormal basis, ``V[:, 0] = v / beta``.
    H : (m, m) array
        Projected matrix (upper Hessenberg, or tridiagonal for Lanczos).
    h_next : float
        ``h_{m+1,m}``; zero after a lucky breakdown.
    v_next : (N,) array
        Next basis vector. All zeros when ``exact`` is set.
    beta : float
        ``||v||``.
    exact : bool
        The Krylov space is invariant under ``A``.
    tridiagonal : SymTridiagonal or None
        Set for Lanczos decompositions.
    """

    V: np.ndarray
    H: np.ndarray
    h_next: float
    v_next: np.ndarray
    beta: float
    exact: bool = False
    tridiagonal: Optional[SymTridiagonal] = None

    @property
    def m(self) -> int:
        return self.H.shape[0]

    @property
    def z0(self) -> float:
        """Default interpolation node, the (1, 1) entry of ``H``."""
        return self.H[0, 0]


def _start(A: SparseMatrix, v, m: int):
    v = np.asarray(v, dtype=float)
    if v.shape != (A.n,):
        raise DimensionError(f"starting vector has shape {v.shape}, expected ({A.n},)")
    beta = float(np.linalg.norm(v))
    if beta == 0.0:
        raise InputError("starting vector is zero")
    if m < 1 or m > A.n:
        raise InputError(f"need 1 <= m <= N = {A.n}, got m = {m}")
    return v, beta


class ArnoldiProcess:
    """Arnoldi with modified Gram-Schmidt and one reorthogonalization pass."""

    def __init__(self, A: SparseMatrix, v, breakdown_tol: float = DEFAULT_BREAKDOWN_TOL,
                 max_steps: Optional[int] = None):
        max_steps = A.n if max_steps is None else min(max_steps, A.n)
        v, self.beta = _start(A, v, max_steps)
        self.A = A
        self.max_steps = max_steps
        self.tol = breakdown_tol * A.frobenius_norm
        self._V = np.zeros((A.n, max_steps + 1))
        self._V[:, 0] = v / self.beta
        self._H = np.zeros((max_steps + 1, max_steps))
        self.m = 0
        self.exact = False

    def step(self) -> None:
        if self.exact or self.m >= self.max_steps:
            raise InputError("process cannot be extended further")
        j = self.m
        w = self.A.matvec(self._V[:, j])
        for _ in range(2):
            for i in range(j + 1):
                c = self._V[:, i] @ w
                self._H[i, j] += c
                w -= c * self._V[:, i]
        h = float(np.linalg.norm(w))
        self.m = j + 1
        if h <= self.tol or self.m == self.A.n:
            self._H[j + 1, j] = 0.0
            self.exact = True
        else:
            self._H[j + 1, j] = h
            self._V[:, j + 1] = w / h

    def run(self, m: int) -> "ArnoldiProcess":
        while self.m < m and not self.exact:
            self.step()
        return self

    def decomposition(self) -> KrylovDecomposition:
        m = self.m
        if m == 0:
            raise InputError("no steps taken yet")
        v_next = np.zeros(self.A.n) if self.exact else self._V[:, m].copy()
        return KrylovDecomposition(
            V=self._V[:, :m].copy(), H=self._H[:m, :m].copy(),
            h_next=float(self._H[m, m - 1]), v_next=v_next,
            beta=self.beta, exact=self.exact)


class LanczosProcess:
    """Symmetric Lanczos, optionally with full reorthogonalization."""

    def __init__(self, A: SparseMatrix, v, reorth: bool = True,
                 breakdown_tol: float = DEFAULT_BREAKDOWN_TOL, max_steps: Optional[int] = None):
        if not A.is_symmetric():
            raise InputError("Lanczos requires a symmetric matrix")
        max_steps = A.n if max_steps is None else min(max_steps, A.n)
        v, self.beta = _start(A, v, max_steps)
        self.A = A
        self.reorth = reorth
        self.max_steps = max_steps
        self.tol = breakdown_tol * A.frobenius_norm
        self._V = np.zeros((A.n, max_steps + 1))
        self._V[:, 0] = v / self.beta
        self.alpha: list[float] = []
        self.eta: list[float] = []
        self.m = 0
        self.exact = False

    def step(self) -> None:
        if self.exact or self.m >= self.max_steps:
            raise InputError("process cannot be extended further")
        j = self.m
        q = self._V[:, j]
        w = self.A.matvec(q)
        if j > 0:
            w -= self.eta[-1] * self._V[:, j - 1]
        a = float(q @ w)
        w -= a * q
        if self.reorth:
            Vj = self._V[:, : j + 1]
            for _ in range(2):
                w -= Vj @ (Vj.T @ w)
        self.alpha.append(a)
        eta = float(np.linalg.norm(w))
        self.m = j + 1
        if eta <= self.tol or self.m == self.A.n:
            self.eta.append(0.0)
            self.exact = True
        else:
            self.eta.append(eta)
            self._V[:, j + 1] = w / eta

    def run(self, m: int) -> "LanczosProcess":
        while self.m < m and not self.exact:
            self.step()
        return self

    def decomposition(self) -> KrylovDecomposition:
        m = self.m
        if m == 0:
            raise InputError("no steps taken yet")
        T = SymTridiagonal(np.array(self.alpha[:m]), np.array(self.eta[: m - 1]))
        v_next = np.zeros(self.A.n) if self.exact else self._V[:, m].copy()
        return KrylovDecomposition(
            V=self._V[:, :m].copy(), H=T.to_dense(), h_next=self.eta[m - 1],
            v_next=v_next, beta=self.beta, exact=self.exact, tridiagonal=T)


def arnoldi(A: SparseMatrix, v, m: int,
            breakdown_tol: float = DEFAULT_BREAKDOWN_TOL) -> KrylovDecomposition:
    """Run ``m`` Arnoldi steps (fewer on lucky breakdown)."""
    _start(A, v, m)
    return ArnoldiProcess(A, v, breakdown_tol, max_steps=m).run(m).decomposition()


def lanczos(A: SparseMatrix, v, m: int, reorth: bool = True,
            breakdown_tol: float = DEFAULT_BREAKDOWN_TOL) -> KrylovDecomposition:
    """Run ``m`` Lanczos steps on a symmetric ``A`` (fewer on breakdown)."""
    _start(A, v, m)
    return LanczosProcess(A, v, reorth, breakdown_tol, max_steps=m).run(m).decomposition()


def krylov_approx(dec: KrylovDecomposition, spec: MatrixFunctionSpec) -> np.ndarray:
    """``beta V f(H) e_1`` with ``f(z) = kind(-tau z)``."""
    if spec.tau == 0.0:
        fH_e1 = np.zeros(dec.m)
        fH_e1[0] = float(spec.scalar(0.0))
    elif dec.tridiagonal is not None:
        fH_e1 = funm_hermitian(dec.tridiagonal, spec)[:, 0]
    else:
        fH_e1 = funm_dense(dec.H, spec)[:, 0]
    if np.iscomplexobj(fH_e1) and not np.any(fH_e1.imag):
        fH_e1 = fH_e1.real
    return dec.beta * (dec.V @ fH_e1)
