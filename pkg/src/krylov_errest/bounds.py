"""Upper bounds on the Arnoldi/Lanczos error for ``exp(-tau A) v``.

Four bounds are provided: two for general ``A`` driven by the logarithmic
norm ``mu2 = mu_2[-A]``, and two sharper ones for symmetric ``A`` with
spectrum in ``[a, b]``.  Each pairs a computable moment of the projected
matrix with a constant (``gamma1``, ``gamma2``, ``gamma3``).

Maxima over ``t in [0, tau]`` are taken on a uniform grid of ``n_t``
points with local refinement of the largest peaks, so bounds that need
them are (tight) lower approximations of the exact bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .dense_funm import FunctionKind, MatrixFunctionSpec, expm_dense, funm_hermitian
from .errors import InputError
from .estimates import augment, phi_moment
from .krylov import KrylovDecomposition
from .sparse_ops import SparseMatrix, SpectralInterval, log_norm_neg

__all__ = [
    "BoundReport",
    "expm1_ratio",
    "gamma1",
    "sampled_moment_max",
    "bound_thm41",
    "bound_thm42",
    "bound_thm43",
    "bound_thm44",
    "estimate_interval",
    "bound_report",
]

DEFAULT_NT = 257


def expm1_ratio(x: float) -> float:
    """``(e^x - 1) / x`` with its limit 1 at ``x = 0``."""
    if abs(x) < 1e-6:
        return 1.0 + x / 2 + x * x / 6 + x**3 / 24
    return math.expm1(x) / x


def gamma1(interval: SpectralInterval, lambda_min: float, tau: float) -> float:
    """``e^{tau (b - a)} (e^{-tau lambda_min} - 1) / (-tau lambda_min)``."""
    if tau < 0:
        raise InputError("tau must be nonnegative")
    return math.exp(tau * (interval.b - interval.a)) * expm1_ratio(-tau * lambda_min)


def _require_exp(spec):
    if spec.kind is not FunctionKind.EXP:
        raise InputError("bounds are exponential-only")
    if spec.tau < 0:
        raise InputError("tau must be nonnegative")


def _moment(X, row, t, phi):
    y = expm_dense(-t * X)[row, 0]
    return abs(y) / t if phi else abs(y)


def sampled_moment_max(H, tau: float, n_t: int = DEFAULT_NT, z0: Optional[complex] = None,
                       refine: int = 4) -> float:
    """Sampled ``max_{0<=t<=tau}`` of ``|e_m^T e^{-tH} e_1|``, or of
    ``|e_m^T phi_1(-tH) e_1|`` (node ``-t z0``) when ``z0`` is given.

    The grid is walked with the one-step propagator ``exp(-dt X)``;
    for the ``phi_1`` moment ``X`` is ``H`` bordered with ``z0`` and the
    last entry of the propagated vector equals ``-t`` times the moment.
    The ``refine`` largest grid peaks are then polished by a bounded scalar
    search between their neighbours, which resolves peaks narrower than the
    grid spacing.
    """
    H = np.asarray(H)
    m = H.shape[0]
    if n_t < 2:
        raise InputError("need at least two samples")
    phi = z0 is not None
    if phi:
        X, row = augment(H, (z0,)).assembled, m
    else:
        X, row = H, m - 1
    value0 = 1.0 if m == 1 else 0.0
    if tau == 0:
        return value0
    ts = np.linspace(0.0, tau, n_t)
    P = expm_dense(-(tau / (n_t - 1)) * X)
    y = np.zeros(X.shape[0], dtype=P.dtype)
    y[0] = 1.0
    vals = np.empty(n_t)
    vals[0] = value0
    for i, t in enumerate(ts[1:], start=1):
        y = P @ y
        vals[i] = abs(y[row]) / t if phi else abs(y[row])
    best = float(vals.max())
    if refine <= 0:
        return best
    padded = np.concatenate([[-np.inf], vals, [-np.inf]])
    peaks = np.flatnonzero((padded[1:-1] >= padded[:-2]) & (padded[1:-1] >= padded[2:]))
    for i in peaks[np.argsort(vals[peaks])[::-1][:refine]]:
        lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, n_t - 1)]
        lo = max(lo, 1e-300) if phi else lo
        res = minimize_scalar(lambda t: -_moment(X, row, t, phi), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-12 * tau})
        best = max(best, -float(res.fun))
    return best


def bound_thm41(dec: KrylovDecomposition, spec: MatrixFunctionSpec, mu2: float,
                n_t: int = DEFAULT_NT) -> float:
    """``tau beta h max_t |e_m^T e^{-tH} e_1| (e^{tau mu2} - 1)/(tau mu2)``."""
    _require_exp(spec)
    tau = spec.tau
    if dec.h_next == 0 or tau == 0:
        return 0.0
    peak = sampled_moment_max(dec.H, tau, n_t)
    return tau * dec.beta * dec.h_next * peak * expm1_ratio(tau * mu2)


def bound_thm42(dec: KrylovDecomposition, spec: MatrixFunctionSpec,
                interval: SpectralInterval, lambda_min: float) -> float:
    """``gamma1 tau beta eta |e_m^T e^{-tau T} e_1|`` for symmetric ``A``."""
    _require_exp(spec)
    if dec.tridiagonal is None:
        raise InputError("this bound needs a Lanczos (tridiagonal) decomposition")
    if dec.h_next == 0 or spec.tau == 0:
        return 0.0
    moment = funm_hermitian(dec.tridiagonal, spec)[dec.m - 1, 0]
    return gamma1(interval, lambda_min, spec.tau) * spec.tau * dec.beta * dec.h_next * abs(moment)


def _shifted_next_norm(A, dec, z0):
    if dec.h_next == 0:
        return 0.0
    w = A.matvec(dec.v_next) - z0 * dec.v_next
    return float(np.linalg.norm(w))


def bound_thm43(A: SparseMatrix, dec: KrylovDecomposition, spec: MatrixFunctionSpec,
                mu2: float, z0: Optional[float] = None,
                n_t: int = DEFAULT_NT) -> tuple[float, float]:
    """``(1 + gamma2) tau beta h max_t |e_m^T phi_1(-tH) e_1|`` and ``gamma2``.

    ``gamma2 = ||(A - z0 I) v_next|| (e^{tau mu2} - 1) / mu2``.
    """
    _require_exp(spec)
    z0 = dec.z0 if z0 is None else z0
    tau = spec.tau
    g2 = _shifted_next_norm(A, dec, z0) * tau * expm1_ratio(tau * mu2)
    if dec.h_next == 0 or tau == 0:
        return 0.0, g2
    peak = sampled_moment_max(dec.H, tau, n_t, z0=z0)
    return (1 + g2) * tau * dec.beta * dec.h_next * peak, g2


def bound_thm44(A: SparseMatrix, dec: KrylovDecomposition, spec: MatrixFunctionSpec,
                interval: SpectralInterval, lambda_min: float,
                z0: Optional[float] = None) -> tuple[float, float]:
    """``(1 + gamma3) tau beta eta |e_m^T phi_1(-tau T) e_1|`` and ``gamma3``.

    ``gamma3 = tau gamma1 ||(A - z0 I) v_next||``; ``z0`` must lie in ``[a, b]``.
    """
    _require_exp(spec)
    if dec.tridiagonal is None:
        raise InputError("this bound needs a Lanczos (tridiagonal) decomposition")
    z0 = dec.z0 if z0 is None else z0
    slack = 1e-12 * max(1.0, abs(interval.a), abs(interval.b))
    if not interval.a - slack <= z0 <= interval.b + slack:
        raise InputError(f"z0 = {z0} lies outside [{interval.a}, {interval.b}]")
    tau = spec.tau
    g3 = tau * gamma1(interval, lambda_min, tau) * _shifted_next_norm(A, dec, z0)
    if dec.h_next == 0 or tau == 0:
        return 0.0, g3
    # the bordered evaluation already carries the factor -tau
    moment = phi_moment(dec.H, (z0,), spec)
    return (1 + g3) * dec.beta * dec.h_next * abs(moment), g3


def estimate_interval(A: SparseMatrix, margin: float = 0.01) -> SpectralInterval:
    """Extremal Lanczos Ritz values of symmetric ``A`` widened by ``margin``."""
    lo = -log_norm_neg(A)
    neg = SparseMatrix(A.n, A.row_ptr, A.col_idx, -A.values)
    hi = log_norm_neg(neg)
    pad = margin * (hi - lo if hi > lo else max(abs(lo), abs(hi), 1.0))
    return SpectralInterval(lo - pad, hi + pad)


@dataclass
class BoundReport:
    bound_41: float
    bound_43: float
    gamma2: float
    mu2: float
    t_samples: int
    bound_42: Optional[float] = None
    bound_44: Optional[float] = None
    gamma1: Optional[float] = None
    gamma3: Optional[float] = None


def bound_report(A: SparseMatrix, dec: KrylovDecomposition, spec: MatrixFunctionSpec,
                 mu2: float, interval: Optional[SpectralInterval] = None,
                 lambda_min: Optional[float] = None, n_t: int = DEFAULT_NT) -> BoundReport:
    """All applicable bounds for one decomposition.

    The symmetric-only bounds are filled in when ``dec`` is a Lanczos
    decomposition and ``interval``/``lambda_min`` are known.
    """
    b41 = bound_thm41(dec, spec, mu2, n_t)
    b43, g2 = bound_thm43(A, dec, spec, mu2, n_t=n_t)
    report = BoundReport(bound_41=b41, bound_43=b43, gamma2=g2, mu2=mu2, t_samples=n_t)
    if dec.tridiagonal is not None and interval is not None and lambda_min is not None:
        report.gamma1 = gamma1(interval, lambda_min, spec.tau)
        report.bound_42 = bound_thm42(dec, spec, interval, lambda_min)
        report.bound_44, report.gamma3 = bound_thm44(A, dec, spec, interval, lambda_min)
    return report
