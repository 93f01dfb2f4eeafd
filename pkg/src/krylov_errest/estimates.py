"""A posteriori error estimates from augmented projected matrices.

For a decomposition ``A V = V H + h v_next e_m^T`` and ``f(z) = kind(-tau z)``
one dense evaluation of ``f`` on the bordered matrix

    [[H,     0 ],
     [e_m^T, z0]]

yields ``f(H) e_1`` in its leading block and ``e_m^T phi_1(H) e_1`` in the
last row, where ``phi_1(z) = (f(z) - f(z0)) / (z - z0)``.  Chaining more
border rows with nodes ``z_1, z_2, ...`` exposes the higher ``phi_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dense_funm import MatrixFunctionSpec, funm_dense, validate_nodes
from .errors import InputError
from .krylov import KrylovDecomposition
from .sparse_ops import SparseMatrix

__all__ = [
    "AugmentedMatrix",
    "EstimatePair",
    "ExpansionTerm",
    "ConvergenceRecord",
    "augment",
    "xi_from_hessenberg",
    "xi_estimates",
    "xi_estimates_restarted",
    "phi_moments",
    "phi_moment",
    "ritz_nodes",
    "expansion_terms",
    "partial_sums",
    "tail_index",
]

_EXPANSION_CAP = 5000


@dataclass(frozen=True)
class AugmentedMatrix:
    base: np.ndarray
    nodes: np.ndarray
    assembled: np.ndarray


def augment(H, nodes: Sequence[complex]) -> AugmentedMatrix:
    """Border ``H`` with one row per node.

    Row ``m + j`` carries a one just left of the diagonal and ``z_j`` on it,
    so ``M_j = [[M_{j-1}, 0], [e_last^T, z_j]]``.
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InputError(f"H must be square, got shape {H.shape}")
    z = validate_nodes(nodes)
    real = not np.iscomplexobj(H) and not np.any(z.imag)
    dtype = float if real else complex
    m, k = H.shape[0], z.size
    M = np.zeros((m + k, m + k), dtype=dtype)
    M[:m, :m] = H
    for j in range(k):
        r = m + j
        M[r, r - 1] = 1.0
        M[r, r] = z[j].real if real else z[j]
    return AugmentedMatrix(base=H, nodes=z, assembled=M)


@dataclass(frozen=True)
class EstimatePair:
    xi1: float
    xi2: float
    xi1_rel: float
    xi2_rel: float
    approx_norm: float


@dataclass
class ConvergenceRecord:
    """One row of a convergence trace.

    ``step`` is the Krylov dimension (cumulative over cycles for restarts).
    """

    step: int
    xi1: float
    xi2: float
    xi1_rel: float
    xi2_rel: float
    true_abs: Optional[float] = None
    true_rel: Optional[float] = None
    wall_ms: float = 0.0
    bounds: Optional[object] = None


def _real_if_close(x):
    if np.iscomplexobj(x) and not np.any(x.imag):
        return x.real
    return x


def _relative(xi, norm):
    return xi / norm if norm > 0 else (0.0 if xi == 0 else math.inf)


def xi_from_hessenberg(H, h_next: float, beta: float, spec: MatrixFunctionSpec):
    """Shared core of the plain and restarted estimates.

    Returns ``(c, xi1, xi2)`` where ``c = f(augment(H, (h_11,))) e_1`` has
    length ``m + 1``.
    """
    H = np.asarray(H)
    m = H.shape[0]
    aug = augment(H, (H[0, 0],))
    c = _real_if_close(funm_dense(aug.assembled, spec)[:, 0])
    xi1 = float(beta * h_next * abs(c[m - 1]))
    xi2 = float(beta * h_next * abs(c[m]))
    return c, xi1, xi2


def xi_estimates(dec: KrylovDecomposition, spec: MatrixFunctionSpec):
    """Approximation ``beta V f(H) e_1`` with its estimates ``xi1`` and ``xi2``.

    ``xi1 = beta h |e_m^T f(H) e_1|`` and ``xi2 = beta h |e_m^T phi_1(H) e_1|``,
    both read off a single evaluation on the bordered matrix with node
    ``z0 = h_11``.
    """
    c, xi1, xi2 = xi_from_hessenberg(dec.H, dec.h_next, dec.beta, spec)
    approx = dec.beta * (dec.V @ c[: dec.m])
    norm = float(np.linalg.norm(approx))
    return approx, EstimatePair(xi1, xi2, _relative(xi1, norm), _relative(xi2, norm), norm)


def xi_estimates_restarted(state, spec: MatrixFunctionSpec) -> EstimatePair:
    """Estimates for the accumulated Hessenberg matrix of a restarted run."""
    if state.cycle < 1:
        raise InputError("no completed restart cycle")
    _, xi1, xi2 = xi_from_hessenberg(state.H_acc, state.h_next, state.beta, spec)
    norm = float(np.linalg.norm(state.f_approx))
    return EstimatePair(xi1, xi2, _relative(xi1, norm), _relative(xi2, norm), norm)


def phi_moments(H, nodes: Sequence[complex], spec: MatrixFunctionSpec) -> np.ndarray:
    """``e_m^T phi_k(H) e_1`` for ``k = 1..len(nodes)`` from one evaluation.

    ``phi_k`` uses the first ``k`` nodes; all values come from the first
    column of ``f`` on the fully chained matrix, which is block lower
    triangular so its leading blocks are the shorter chains.
    """
    H = np.asarray(H)
    aug = augment(H, nodes)
    F = funm_dense(aug.assembled, spec)
    m = H.shape[0]
    return _real_if_close(F[m:, 0].copy())


def phi_moment(H, nodes: Sequence[complex], spec: MatrixFunctionSpec):
    """``e_m^T phi_k(H) e_1`` with ``k = len(nodes)``."""
    return phi_moments(H, nodes, spec)[-1]


def ritz_nodes(H) -> np.ndarray:
    """Eigenvalues of ``H`` sorted so that equal values are adjacent."""
    return np.sort_complex(np.linalg.eigvals(np.asarray(H)).astype(complex))


@dataclass(frozen=True)
class ExpansionTerm:
    k: int
    coefficient: complex
    direction: np.ndarray
    term_norm: float

    @property
    def vector(self) -> np.ndarray:
        return self.coefficient * self.direction


def expansion_terms(A: SparseMatrix, dec: KrylovDecomposition, spec: MatrixFunctionSpec,
                    nodes: Sequence[complex], K: int,
                    early_stop: bool = True) -> list[ExpansionTerm]:
    """Leading terms of the error expansion of ``beta V f(H) e_1``.

    ``term_k = beta h e_m^T phi_k(H) e_1 * q_{k-1}(A) v_next`` with
    ``q_0 = 1`` and ``q_k(z) = (z - z_0)...(z - z_{k-1})``. If fewer than
    ``K`` nodes are given the last one is repeated.  Summation stops after
    ``min(K, 5000)`` terms, when a term drops below ``1e-2 * eps`` of the
    running sum (``early_stop``), or when the polynomial directions
    overflow.
    """
    if K < 1:
        raise InputError("K must be at least 1")
    K = min(int(K), _EXPANSION_CAP)
    z = validate_nodes(nodes)
    if z.size < K:
        z = np.concatenate([z, np.full(K - z.size, z[-1])])
    z = z[:K]
    validate_nodes(z)
    moments = np.asarray(phi_moments(dec.H, z, spec))
    scale = dec.beta * dec.h_next
    direction = np.asarray(dec.v_next)
    if np.any(z.imag):
        direction = direction.astype(complex)
    terms: list[ExpansionTerm] = []
    running = np.zeros_like(direction, dtype=np.result_type(direction, moments))
    tiny = 1e-2 * np.finfo(float).eps
    for k in range(1, K + 1):
        coef = scale * moments[k - 1]
        dnorm = float(np.linalg.norm(direction))
        if not math.isfinite(dnorm):
            break
        term_norm = float(abs(coef) * dnorm)
        terms.append(ExpansionTerm(k, coef, direction.copy(), term_norm))
        running = running + coef * direction
        if early_stop and term_norm < tiny * np.linalg.norm(running):
            break
        if k < K:
            zk = z[k - 1]
            with np.errstate(over="ignore", invalid="ignore"):
                direction = A.matvec(direction) - (zk.real if not np.any(z.imag) else zk) * direction
    return terms


def partial_sums(terms: Sequence[ExpansionTerm]) -> list[np.ndarray]:
    """Cumulative sums of the term vectors."""
    out = []
    acc = None
    for t in terms:
        acc = t.vector if acc is None else acc + t.vector
        out.append(acc)
    return out


def tail_index(norm_A: float) -> int:
    """Index beyond which expansion terms decay faster than ``k^{-3/2}``."""
    if norm_A < 0:
        raise InputError("norm must be nonnegative")
    return int(math.ceil(20.0 * math.e * norm_A))
