"""CSR operators, the two test-matrix generators, Matrix Market I/O and
the logarithmic norm."""

from __future__ import annotations

import functools
import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError, DimensionError, InputError, MatrixMarketError

__all__ = [
    "SparseMatrix",
    "SpectralInterval",
    "matvec",
    "build_diag_spectrum",
    "build_convection_diffusion",
    "log_norm_neg",
    "read_matrix_market",
    "write_matrix_market",
    "read_vector",
    "write_vector",
]


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """Real square matrix in compressed-sparse-row form.

    Immutable after construction; the arrays are made read-only.
    """

    n: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        n = int(self.n)
        row_ptr = np.array(self.row_ptr, dtype=np.int64).reshape(-1)
        col_idx = np.array(self.col_idx, dtype=np.int64).reshape(-1)
        values = np.array(self.values, dtype=float).reshape(-1)
        if n < 0 or row_ptr.size != n + 1:
            raise DimensionError(f"row_ptr must have n+1 = {n + 1} entries")
        if row_ptr[0] != 0 or row_ptr[-1] != col_idx.size or np.any(np.diff(row_ptr) < 0):
            raise InputError("row_ptr must be nondecreasing from 0 to nnz")
        if col_idx.size != values.size:
            raise DimensionError("col_idx and values differ in length")
        if col_idx.size and (col_idx.min() < 0 or col_idx.max() >= n):
            raise InputError("column index out of range")
        if not np.all(np.isfinite(values)):
            raise InputError("matrix values must be finite")
        steps = np.diff(col_idx)
        row_starts = row_ptr[1:-1]
        inner = np.ones(steps.size, dtype=bool)
        inner[row_starts[(row_starts > 0) & (row_starts < col_idx.size)] - 1] = False
        if np.any(steps[inner] <= 0):
            raise InputError("column indices must increase strictly within each row")
        for arr in (row_ptr, col_idx, values):
            arr.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "row_ptr", row_ptr)
        object.__setattr__(self, "col_idx", col_idx)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_scipy(cls, M) -> "SparseMatrix":
        M = sp.csr_matrix(M, dtype=float)
        if M.shape[0] != M.shape[1]:
            raise DimensionError(f"matrix must be square, got {M.shape}")
        M.sum_duplicates()
        M.sort_indices()
        return cls(M.shape[0], M.indptr, M.indices, M.data)

    @classmethod
    def from_dense(cls, D) -> "SparseMatrix":
        return cls.from_scipy(sp.csr_matrix(np.asarray(D, dtype=float)))

    @functools.cached_property
    def csr(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.values, self.col_idx, self.row_ptr), shape=(self.n, self.n))

    @property
    def nnz(self) -> int:
        return self.values.size

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    def matvec(self, x) -> np.ndarray:
        return matvec(self, x)

    def to_dense(self) -> np.ndarray:
        return self.csr.toarray()

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix.from_scipy(self.csr.T)

    @functools.cached_property
    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def diagonal(self) -> np.ndarray:
        return self.csr.diagonal()

    def is_diagonal(self) -> bool:
        rows = np.repeat(np.arange(self.n), np.diff(self.row_ptr))
        return bool(np.all(rows == self.col_idx))

    def is_symmetric(self) -> bool:
        """Exact symmetry, ``||A - A^T||_F == 0``."""
        diff = self.csr - self.csr.T
        return diff.count_nonzero() == 0


def matvec(A: SparseMatrix, x) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (A.n,):
        raise DimensionError(f"vector of shape {x.shape} does not match n = {A.n}")
    return A.csr @ x


@dataclass(frozen=True)
class SpectralInterval:
    a: float
    b: float

    def __post_init__(self):
        if not self.a <= self.b:
            raise InputError(f"interval needs a <= b, got [{self.a}, {self.b}]")


def build_diag_spectrum(N: int, interval: SpectralInterval) -> SparseMatrix:
    """Diagonal matrix with ``N`` equispaced eigenvalues spanning ``interval``."""
    if N < 2:
        raise InputError("N must be at least 2")
    i = np.arange(N)
    d = interval.a + (interval.b - interval.a) * i / (N - 1)
    return SparseMatrix(N, np.arange(N + 1), i, d)


def _tridiag(n, lower, main, upper):
    return sp.diags([np.full(n - 1, lower), np.full(n, main), np.full(n - 1, upper)],
                    [-1, 0, 1], format="csr")


def build_convection_diffusion(n: int, delta1: float, delta2: float) -> SparseMatrix:
    """Seven-point convection-diffusion operator on the unit cube, ``N = n^3``.

    ``A = -(1/h^2) [I (x) (I (x) C1) + (B (x) I + I (x) C2) (x) I]`` with
    ``h = 1/(n+1)``, ``B = tridiag(1, -2, 1)`` and
    ``Cj = tridiag(1 + zeta_j, -2, 1 - zeta_j)``, ``zeta_j = delta_j h / 2``.
    ``tridiag(l, d, u)`` lists sub-, main and super-diagonal.
    """
    if n < 2:
        raise InputError("n must be at least 2")
    h = 1.0 / (n + 1)
    z1, z2 = delta1 * h / 2, delta2 * h / 2
    eye = sp.identity(n, format="csr")
    B = _tridiag(n, 1.0, -2.0, 1.0)
    C1 = _tridiag(n, 1.0 + z1, -2.0, 1.0 - z1)
    C2 = _tridiag(n, 1.0 + z2, -2.0, 1.0 - z2)
    inner = sp.kron(eye, sp.kron(eye, C1)) + sp.kron(sp.kron(B, eye) + sp.kron(eye, C2), eye)
    return SparseMatrix.from_scipy(-(1.0 / h**2) * inner)


def _lanczos_lambda_max(S, tol, maxiter, seed=0):
    n = S.shape[0]
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(n)
    q /= np.linalg.norm(q)
    Q = np.zeros((n, min(n, maxiter) + 1))
    Q[:, 0] = q
    alpha, beta = [], []
    theta = -np.inf
    for j in range(min(n, maxiter)):
        w = S @ Q[:, j]
        a = Q[:, j] @ w
        w -= a * Q[:, j]
        if j > 0:
            w -= beta[-1] * Q[:, j - 1]
        w -= Q[:, : j + 1] @ (Q[:, : j + 1].T @ w)
        alpha.append(a)
        b = np.linalg.norm(w)
        T = np.diag(alpha) + np.diag(beta, 1) + np.diag(beta, -1)
        evals, evecs = np.linalg.eigh(T)
        theta = evals[-1]
        resid = b * abs(evecs[-1, -1])
        if resid <= tol * max(abs(theta), np.finfo(float).tiny) or b == 0 or j + 1 == n:
            return float(theta)
        beta.append(b)
        Q[:, j + 1] = w / b
    raise ConvergenceError(
        f"Lanczos for lambda_max did not converge in {maxiter} iterations", estimate=float(theta))


def log_norm_neg(A: SparseMatrix, tol: float = 1e-8, maxiter: int = 300) -> float:
    """``mu_2[-A] = lambda_max(-(A + A^T)/2)``.

    Diagonal matrices are handled exactly; otherwise symmetric Lanczos with
    full reorthogonalization is run on the symmetrized operator.
    """
    if A.is_diagonal():
        return float(-A.diagonal().min())
    S = -0.5 * (A.csr + A.csr.T)
    return _lanczos_lambda_max(S.tocsr(), tol, maxiter)


def write_matrix_market(A: SparseMatrix, path) -> None:
    """Write ``A`` as a real general coordinate file, 17 significant digits."""
    coo = A.csr.tocoo()
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{A.n} {A.n} {coo.nnz}\n")
        for i, j, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{i + 1} {j + 1} {v:.17g}\n")


def read_matrix_market(path) -> SparseMatrix:
    """Read a real (or integer) general/symmetric coordinate file.

    Symmetric files store the lower triangle; it is mirrored on read.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixMarketError("empty file", line=1)
    header = lines[0].split()
    if len(header) != 5 or header[0] != "%%MatrixMarket":
        raise MatrixMarketError("missing %%MatrixMarket banner", line=1)
    obj, fmt, field, symmetry = (h.lower() for h in header[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise MatrixMarketError(f"unsupported format '{obj} {fmt}'", line=1)
    if field not in ("real", "integer"):
        raise MatrixMarketError(f"unsupported field '{field}'", line=1)
    if symmetry not in ("general", "symmetric"):
        raise MatrixMarketError(f"unsupported symmetry '{symmetry}'", line=1)

    lineno = 1
    size = None
    rows, cols, vals = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        text = line.strip()
        if not text or text.startswith("%"):
            continue
        parts = text.split()
        if size is None:
            try:
                nr, nc, nnz = (int(p) for p in parts)
            except ValueError:
                raise MatrixMarketError(f"bad size line '{text}'", line=lineno) from None
            if nr != nc:
                raise MatrixMarketError(f"matrix is not square ({nr} x {nc})", line=lineno)
            size = (nr, nnz)
            continue
        if len(parts) != 3:
            raise MatrixMarketError(f"expected 'row col value', got '{text}'", line=lineno)
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise MatrixMarketError(f"cannot parse entry '{text}'", line=lineno) from None
        n = size[0]
        if not (1 <= i <= n and 1 <= j <= n):
            raise MatrixMarketError(f"index ({i}, {j}) outside 1..{n}", line=lineno)
        if symmetry == "symmetric" and j > i:
            raise MatrixMarketError("symmetric file has an upper-triangle entry", line=lineno)
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(v)
        if symmetry == "symmetric" and i != j:
            rows.append(j - 1)
            cols.append(i - 1)
            vals.append(v)
    if size is None:
        raise MatrixMarketError("missing size line", line=lineno)
    n, nnz = size
    stored = len(vals) if symmetry == "general" else sum(1 for r, c in zip(rows, cols) if r >= c)
    if stored != nnz:
        raise MatrixMarketError(f"expected {nnz} entries, found {stored}", line=lineno)
    if len(set(zip(rows, cols))) != len(vals):
        raise MatrixMarketError("duplicate entries", line=lineno)
    return SparseMatrix.from_scipy(sp.coo_matrix((vals, (rows, cols)), shape=(n, n)))


def write_vector(x, path) -> None:
    """Plain text, one value per line, 17 significant digits."""
    x = np.asarray(x)
    with open(path, "w") as fh:
        if np.iscomplexobj(x):
            for z in x:
                fh.write(f"{z.real:.17g} {z.imag:.17g}\n")
        else:
            for z in x:
                fh.write(f"{z:.17g}\n")


def read_vector(path) -> np.ndarray:
    data = np.loadtxt(path, ndmin=2)
    if data.shape[1] == 2:
        return data[:, 0] + 1j * data[:, 1]
    return data[:, 0]
