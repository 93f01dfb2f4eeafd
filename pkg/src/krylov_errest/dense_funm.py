"""Small dense matrix-function kernels and scalar divided differences.

Every function of interest is evaluated in the form ``kind(-tau * z)`` so
that ``MatrixFunctionSpec(FunctionKind.EXP, tau)`` describes ``exp(-tau A)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DimensionError, InputError

__all__ = [
    "FunctionKind",
    "MatrixFunctionSpec",
    "SymTridiagonal",
    "expm_dense",
    "cos_sin_dense",
    "funm_dense",
    "symtrid_eig",
    "funm_hermitian",
    "validate_nodes",
    "divided_difference",
    "newton_divided_difference",
    "phi1_scalar",
]


class FunctionKind(str, enum.Enum):
    EXP = "exp"
    COS = "cos"
    SIN = "sin"


@dataclass(frozen=True)
class MatrixFunctionSpec:
    """Which function is applied, as ``kind(-tau * z)``.

    A negative ``tau`` is accepted here (``tau = -1`` turns ``exp`` into
    ``e^z``); drivers that model time steps reject it themselves.
    """

    kind: FunctionKind
    tau: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", FunctionKind(self.kind))
        tau = float(self.tau)
        if not math.isfinite(tau):
            raise InputError(f"tau must be finite, got {self.tau!r}")
        object.__setattr__(self, "tau", tau)

    def scalar(self, z):
        """Evaluate ``kind(-tau z)`` for scalar or array ``z``."""
        x = -self.tau * np.asarray(z)
        if self.kind is FunctionKind.EXP:
            return np.exp(x)
        if self.kind is FunctionKind.COS:
            return np.cos(x)
        return np.sin(x)

    def derivative(self, z, k: int):
        """k-th derivative of ``z -> kind(-tau z)``."""
        if k == 0:
            return self.scalar(z)
        x = -self.tau * np.asarray(z)
        scale = (-self.tau) ** k
        if self.kind is FunctionKind.EXP:
            return scale * np.exp(x)
        # derivative cycles of cos and sin
        if self.kind is FunctionKind.COS:
            cycle = (np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t), np.sin)
        else:
            cycle = (np.sin, np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t))
        return scale * cycle[k % 4](x)


@dataclass(frozen=True)
class SymTridiagonal:
    """Real symmetric tridiagonal matrix stored by its two diagonals."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float).reshape(-1)
        e = np.asarray(self.offdiag, dtype=float).reshape(-1)
        if d.size == 0:
            raise DimensionError("tridiagonal matrix must be at least 1x1")
        if e.size != d.size - 1:
            raise DimensionError(
                f"offdiag has length {e.size}, expected {d.size - 1}")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def size(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


# Higham (2005) scaling-and-squaring constants.
_PADE_COEFFS = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0),
}
_THETA = ((3, 1.495585217958292e-2), (5, 2.539398330063230e-1),
          (7, 9.504178996162932e-1), (9, 2.097847961257068e0))
_THETA_13 = 5.371920351148152


def _square_matrix(M) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError("matrix has non-finite entries")
    if not np.iscomplexobj(M):
        M = M.astype(float, copy=False)
    return M


def _pade_low(M, m):
    b = _PADE_COEFFS[m]
    n = M.shape[0]
    ident = np.eye(n, dtype=M.dtype)
    M2 = M @ M
    power = ident
    u = b[1] * ident
    v = b[0] * ident
    for k in range(1, m // 2 + 1):
        power = power @ M2
        u = u + b[2 * k + 1] * power
        v = v + b[2 * k] * power
    return M @ u, v


def _pade13(M):
    b = _PADE_COEFFS[13]
    ident = np.eye(M.shape[0], dtype=M.dtype)
    M2 = M @ M
    M4 = M2 @ M2
    M6 = M4 @ M2
    u = M @ (M6 @ (b[13] * M6 + b[11] * M4 + b[9] * M2)
             + b[7] * M6 + b[5] * M4 + b[3] * M2 + b[1] * ident)
    v = (M6 @ (b[12] * M6 + b[10] * M4 + b[8] * M2)
         + b[6] * M6 + b[4] * M4 + b[2] * M2 + b[0] * ident)
    return u, v


def expm_dense(M) -> np.ndarray:
    """Matrix exponential by scaling and squaring with diagonal Padé.

    Raises
    ------
    DimensionError
        If ``M`` is not square.
    OverflowError
        If the exponential is not representable in double precision.
    """
    M = _square_matrix(M)
    if M.shape[0] == 0:
        return M.copy()
    norm1 = np.linalg.norm(M, 1)
    with np.errstate(over="ignore", invalid="ignore"):
        for m, theta in _THETA:
            if norm1 <= theta:
                u, v = _pade_low(M, m)
                result = np.linalg.solve(v - u, v + u)
                break
        else:
            s = max(0, int(math.ceil(math.log2(norm1 / _THETA_13))))
            scaled = M / 2.0**s
            u, v = _pade13(scaled)
            result = np.linalg.solve(v - u, v + u)
            for _ in range(s):
                result = result @ result
    if not np.all(np.isfinite(result)):
        raise OverflowError(f"exp(M) overflows (||M||_1 = {norm1:.3e})")
    return result


def cos_sin_dense(M) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(cos M, sin M)`` through complex exponentials."""
    M = _square_matrix(M)
    if not np.iscomplexobj(M):
        E = expm_dense(1j * M)
        return E.real.copy(), E.imag.copy()
    Ep = expm_dense(1j * M)
    Em = expm_dense(-1j * M)
    return (Ep + Em) / 2, (Ep - Em) / 2j


def funm_dense(M, spec: MatrixFunctionSpec) -> np.ndarray:
    """``kind(-tau M)`` for a general dense square matrix."""
    X = -spec.tau * _square_matrix(M)
    if spec.kind is FunctionKind.EXP:
        return expm_dense(X)
    c, s = cos_sin_dense(X)
    return c if spec.kind is FunctionKind.COS else s


def symtrid_eig(T: SymTridiagonal) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors of ``T``."""
    if T.size == 1:
        return T.diag.copy(), np.ones((1, 1))
    try:
        w, Q = scipy.linalg.eigh_tridiagonal(T.diag, T.offdiag)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"tridiagonal eigensolver failed: {exc}") from exc
    return w, Q


def funm_hermitian(T: SymTridiagonal, spec: MatrixFunctionSpec) -> np.ndarray:
    """``Q kind(-tau Lambda) Q^T`` from the spectral decomposition of ``T``."""
    w, Q = symtrid_eig(T)
    fw = np.real(spec.scalar(w))
    return (Q * fw) @ Q.T


def validate_nodes(nodes: Sequence[complex]) -> np.ndarray:
    """Return nodes as a complex array, checking equal nodes are contiguous."""
    z = np.asarray(nodes, dtype=complex).reshape(-1)
    if z.size == 0:
        raise InputError("node sequence is empty")
    seen = set()
    for i, zi in enumerate(z):
        if i > 0 and zi == z[i - 1]:
            continue
        key = complex(zi)
        if key in seen:
            raise InputError(f"node {key} reappears at position {i} after a different node")
        seen.add(key)
    return z


def _newton_table(z, value, deriv):
    col = np.array([value(zi) for zi in z], dtype=complex)
    for j in range(1, z.size):
        nxt = np.empty(z.size - j, dtype=complex)
        for i in range(z.size - j):
            if z[i + j] == z[i]:
                nxt[i] = deriv(z[i], j) / math.factorial(j)
            else:
                nxt[i] = (col[i + 1] - col[i]) / (z[i + j] - z[i])
        col = nxt
    return complex(col[0])


def divided_difference(spec: MatrixFunctionSpec, nodes: Sequence[complex]) -> complex:
    """Divided difference ``f[z_0, ..., z_k]`` of ``f(z) = kind(-tau z)``.

    Repeated nodes must be adjacent; they are handled with the closed-form
    derivatives of ``f``.
    """
    z = validate_nodes(nodes)
    return _newton_table(z, lambda t: complex(spec.scalar(t)),
                         lambda t, k: complex(spec.derivative(t, k)))


def newton_divided_difference(func: Callable[[complex], complex],
                              nodes: Sequence[complex]) -> complex:
    """Divided difference of an arbitrary scalar function on distinct nodes."""
    z = np.asarray(nodes, dtype=complex).reshape(-1)
    if z.size == 0:
        raise InputError("node sequence is empty")
    if np.unique(z).size != z.size:
        raise InputError("nodes must be pairwise distinct")

    def no_deriv(t, k):  # pragma: no cover - unreachable for distinct nodes
        raise InputError("confluent nodes need derivatives")

    return _newton_table(z, lambda t: complex(func(t)), no_deriv)


def phi1_scalar(spec: MatrixFunctionSpec, z0: complex, z: complex) -> complex:
    """``(f(z) - f(z0)) / (z - z0)`` with the derivative as confluent limit."""
    if abs(z - z0) <= 1e-8 * (1 + abs(z0)):
        return complex(spec.derivative(z0, 1))
    return complex((spec.scalar(z) - spec.scalar(z0)) / (z - z0))
