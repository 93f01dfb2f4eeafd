"""Run configurations, matrix sources and convergence-trace drivers."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .bounds import DEFAULT_NT, bound_report, estimate_interval
from .dense_funm import FunctionKind, MatrixFunctionSpec
from .errors import InputError
from .estimates import ConvergenceRecord, expansion_terms, ritz_nodes, xi_estimates
from .krylov import ArnoldiProcess, LanczosProcess
from .oracle import reference_fAv
from .report import write_svg, write_trace_csv
from .restart import restarted_approx
from .sparse_ops import (SparseMatrix, SpectralInterval, build_convection_diffusion,
                         build_diag_spectrum, log_norm_neg, read_matrix_market, read_vector)

__all__ = [
    "DEFAULT_SEED",
    "RunConfig",
    "MatrixSource",
    "TraceResult",
    "load_matrix",
    "start_vector",
    "run_trace",
    "run_bounds_trace",
    "experiment_runs",
    "run_experiment",
    "save_trace",
]

DEFAULT_SEED = 20130401
_DEFAULT_MAX_DIM = 500
_DEFAULT_CYCLES = 60
# zeta stays fixed when the grid size changes
_ZETA = (3.2, 128.0 / 30.0)


@dataclass
class RunConfig:
    """Settings for one family of runs.

    ``method`` is ``"arnoldi"``, ``"lanczos"`` or ``"restart:<m>"``.
    ``max_dim`` caps the Krylov dimension; for restarts it caps the total
    dimension (cycles = ``max_dim // m``, 60 cycles by default).
    """

    matrix: str
    function: FunctionKind = FunctionKind.EXP
    taus: tuple = (1.0,)
    method: str = "arnoldi"
    eps: float = 1e-12
    max_dim: Optional[int] = None
    seed: int = DEFAULT_SEED
    oracle: bool = True
    nodes: str = "confluent"
    n_t: int = DEFAULT_NT
    out: Path = Path("out")
    vector: str = "auto"
    estimator: str = "xi2"

    def __post_init__(self):
        self.function = FunctionKind(self.function)
        self.taus = tuple(float(t) for t in self.taus)
        if not self.taus:
            raise InputError("at least one tau is required")
        if any(not math.isfinite(t) or t < 0 for t in self.taus):
            raise InputError("tau must be finite and nonnegative")
        if not self.eps > 0:
            raise InputError("eps must be positive")
        if self.nodes not in ("confluent", "ritz"):
            raise InputError(f"unknown node policy '{self.nodes}'")
        if self.estimator not in ("xi1", "xi2"):
            raise InputError(f"unknown estimator '{self.estimator}'")
        if self.max_dim is not None and self.max_dim < 1:
            raise InputError("max-dim must be positive")
        if self.n_t < 2:
            raise InputError("nt must be at least 2")
        self.restart_length  # validates method
        self.out = Path(self.out)

    @property
    def restart_length(self) -> Optional[int]:
        if self.method in ("arnoldi", "lanczos"):
            return None
        if self.method.startswith("restart:"):
            try:
                m = int(self.method.split(":", 1)[1])
            except ValueError:
                m = 0
            if m >= 2:
                return m
        raise InputError(f"unknown method '{self.method}' (arnoldi, lanczos or restart:<m>, m >= 2)")

    def spec(self, tau: float) -> MatrixFunctionSpec:
        return MatrixFunctionSpec(self.function, tau)


@dataclass
class MatrixSource:
    A: SparseMatrix
    label: str
    kind: str  # "diag", "convdiff", "identity" or "file"
    interval: Optional[SpectralInterval] = None
    lambda_min: Optional[float] = None
    h: Optional[float] = None


def _parse_params(text: str) -> dict:
    out = {}
    if not text:
        return out
    for item in text.split(","):
        key, sep, val = item.partition("=")
        if not sep:
            raise InputError(f"generator parameter '{item}' is not key=value")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise InputError(f"generator parameter '{item}' is not numeric") from None
    return out


def _int_param(p, key, default=None):
    if key not in p:
        if default is None:
            raise InputError(f"generator needs parameter '{key}'")
        return default
    v = p[key]
    if v != int(v) or v < 1:
        raise InputError(f"parameter '{key}' must be a positive integer")
    return int(v)


def load_matrix(source: str) -> MatrixSource:
    """Resolve ``gen:<name>:<k=v,...>`` or a Matrix Market path.

    Generators: ``diag`` (``N``, ``a``, ``b``), ``convdiff`` (``n`` plus
    ``delta1``/``delta2`` or ``zeta1``/``zeta2``), ``identity`` (``N``).
    """
    if not source.startswith("gen:"):
        A = read_matrix_market(source)
        return MatrixSource(A, Path(source).stem, "file")
    _, _, rest = source.partition(":")
    name, _, params = rest.partition(":")
    p = _parse_params(params)
    if name == "diag":
        N = _int_param(p, "N")
        interval = SpectralInterval(p.get("a", 0.0), p.get("b", 40.0))
        A = build_diag_spectrum(N, interval)
        return MatrixSource(A, f"diag{N}", "diag", interval, interval.a)
    if name == "convdiff":
        n = _int_param(p, "n", 8)
        h = 1.0 / (n + 1)
        d1 = p["delta1"] if "delta1" in p else 2 * p.get("zeta1", _ZETA[0]) / h
        d2 = p["delta2"] if "delta2" in p else 2 * p.get("zeta2", _ZETA[1]) / h
        return MatrixSource(build_convection_diffusion(n, d1, d2), f"convdiff{n}", "convdiff", h=h)
    if name == "identity":
        N = _int_param(p, "N")
        A = SparseMatrix.from_dense(np.eye(N))
        return MatrixSource(A, f"identity{N}", "identity", SpectralInterval(1.0, 1.0), 1.0)
    raise InputError(f"unknown generator '{name}'")


def start_vector(src: MatrixSource, how: str = "auto", seed: int = DEFAULT_SEED) -> np.ndarray:
    """``ones``, ``random`` (seeded uniform, unit norm) or a vector file.

    ``auto`` picks ones for convection-diffusion and random otherwise.
    """
    N = src.A.n
    if how == "auto":
        how = "ones" if src.kind == "convdiff" else "random"
    if how == "ones":
        return np.ones(N)
    if how == "random":
        v = np.random.default_rng(seed).random(N)
        return v / np.linalg.norm(v)
    v = read_vector(how)
    if v.shape != (N,):
        raise InputError(f"vector file has {v.size} entries, matrix has N = {N}")
    if np.iscomplexobj(v):
        raise InputError("starting vector must be real")
    return v


@dataclass
class TraceResult:
    label: str
    spec: MatrixFunctionSpec
    method: str
    approx: np.ndarray
    records: list
    converged: bool
    exact: Optional[np.ndarray] = None
    node_terms: list = field(default_factory=list)


def _reference(src, v, spec, cfg):
    return reference_fAv(src.A, v, spec).exact if cfg.oracle else None


def run_trace(src: MatrixSource, v, cfg: RunConfig, tau: float, stop_on_true: bool = True,
              bounds: bool = False) -> TraceResult:
    """One convergence trace for ``kind(-tau A) v``.

    With the oracle on and ``stop_on_true`` set, iteration stops on the true
    relative error; otherwise on the configured estimate.  ``bounds``
    attaches a bound report to each record (exponential, plain methods).
    """
    spec = cfg.spec(tau)
    A = src.A
    exact = _reference(src, v, spec, cfg)
    m_restart = cfg.restart_length
    if m_restart is not None:
        if bounds:
            raise InputError("bounds need a plain Arnoldi or Lanczos run")
        cycles = _DEFAULT_CYCLES if cfg.max_dim is None else max(1, cfg.max_dim // m_restart)
        res = restarted_approx(A, v, spec, m_restart, max_cycles=cycles, eps=cfg.eps,
                               estimator=cfg.estimator, reference=exact,
                               stop_on_true=stop_on_true)
        return TraceResult(_label(src, spec, cfg.method), spec, cfg.method, res.approx,
                           res.records, res.converged, exact)
    if bounds:
        ctx = _bound_context(src, cfg.method)
    max_dim = min(A.n, cfg.max_dim or _DEFAULT_MAX_DIM)
    if cfg.method == "lanczos":
        proc = LanczosProcess(A, v, max_steps=max_dim)
    else:
        proc = ArnoldiProcess(A, v, max_steps=max_dim)
    ref_norm = None if exact is None else float(np.linalg.norm(exact))
    records: list[ConvergenceRecord] = []
    converged = False
    approx = None
    dec = None
    t0 = time.perf_counter()
    while proc.m < max_dim and not proc.exact:
        proc.step()
        dec = proc.decomposition()
        approx, est = xi_estimates(dec, spec)
        rec = ConvergenceRecord(step=dec.m, xi1=est.xi1, xi2=est.xi2,
                                xi1_rel=est.xi1_rel, xi2_rel=est.xi2_rel)
        if exact is not None:
            err = float(np.linalg.norm(exact - approx))
            rec.true_abs = err
            rec.true_rel = err / ref_norm if ref_norm > 0 else err
        if bounds:
            rec.bounds = bound_report(A, dec, spec, ctx["mu2"], ctx["interval"],
                                      ctx["lambda_min"], cfg.n_t)
        rec.wall_ms = (time.perf_counter() - t0) * 1e3
        records.append(rec)
        use_true = exact is not None and stop_on_true
        measure = rec.true_rel if use_true else getattr(rec, f"{cfg.estimator}_rel")
        if measure <= cfg.eps:
            converged = True
            break
        if dec.exact:
            converged = not use_true
            break
    result = TraceResult(_label(src, spec, cfg.method), spec, cfg.method,
                         approx, records, converged, exact)
    if dec is not None and dec.h_next > 0 and spec.tau > 0:
        result.node_terms = _node_terms(A, dec, spec, cfg.nodes)
    return result


def _node_terms(A, dec, spec, policy, K=3):
    nodes = ritz_nodes(dec.H) if policy == "ritz" else np.array([dec.z0])
    terms = expansion_terms(A, dec, spec, nodes, K, early_stop=False)
    return [t.term_norm for t in terms]


def _bound_context(src: MatrixSource, method: str) -> dict:
    A = src.A
    ctx = {"mu2": log_norm_neg(A), "interval": None, "lambda_min": None}
    if method == "lanczos":
        if src.interval is not None:
            ctx["interval"], ctx["lambda_min"] = src.interval, src.lambda_min
        else:
            interval = estimate_interval(A)
            ctx["interval"] = interval
            ctx["lambda_min"] = -log_norm_neg(A)
    return ctx


def run_bounds_trace(src: MatrixSource, v, cfg: RunConfig, tau: float) -> TraceResult:
    if cfg.function is not FunctionKind.EXP:
        raise InputError("bounds are exponential-only")
    return run_trace(src, v, cfg, tau, stop_on_true=cfg.oracle, bounds=True)


def _label(src, spec, method):
    return f"{src.label}_{spec.kind.value}_tau{spec.tau:g}_{method.replace(':', '')}"


def save_trace(result: TraceResult, out: Path, prefix: str = "", with_bounds: bool = False):
    """Write ``<prefix><label>.csv`` and ``.svg``; returns both paths."""
    out = Path(out)
    stem = f"{prefix}{result.label}"
    csv_path = write_trace_csv(result.records, out / f"{stem}.csv", with_bounds=with_bounds)
    series = {
        "xi1_rel": [(r.step, r.xi1_rel) for r in result.records],
        "xi2_rel": [(r.step, r.xi2_rel) for r in result.records],
    }
    if any(r.true_rel is not None for r in result.records):
        series["true_rel"] = [(r.step, r.true_rel) for r in result.records]
    svg_path = write_svg(series, out / f"{stem}.svg", title=stem)
    return csv_path, svg_path


def experiment_runs(name: str, cfg_overrides: dict, paper_scale: bool = False):
    """The ``(MatrixSource, RunConfig)`` pairs making up a named experiment.

    ``cfg_overrides`` holds RunConfig fields given explicitly by the user.
    """
    n = 14 if paper_scale else 8
    convdiff = f"gen:convdiff:n={n}"
    if paper_scale:
        convdiff += ",delta1=96,delta2=128"
    h2 = (1.0 / (n + 1)) ** 2
    ex1 = dict(matrix="gen:diag:N=1001,a=0,b=40", method="lanczos", taus=(0.1, 0.5, 1.0))
    ex2 = dict(matrix=convdiff, method="arnoldi", taus=(h2,))
    if name == "ex1":
        plans = [dict(ex1, function=FunctionKind.EXP)]
    elif name == "ex2":
        plans = [dict(ex2, function=FunctionKind.EXP)]
    elif name == "ex3":
        plans = [dict(base, function=k) for k in (FunctionKind.COS, FunctionKind.SIN)
                 for base in (ex1, ex2)]
    elif name == "ex4":
        plans = [dict(ex2, function=k, method=f"restart:{m}")
                 for k in (FunctionKind.EXP, FunctionKind.COS, FunctionKind.SIN) for m in (5, 10)]
    else:
        raise InputError(f"unknown experiment '{name}' (ex1, ex2, ex3 or ex4)")
    out = []
    seen = set()
    for plan in plans:
        cfg = RunConfig(**{**plan, **cfg_overrides})
        key = (cfg.matrix, cfg.function, cfg.method, cfg.taus)
        if key in seen:
            continue
        seen.add(key)
        out.append((load_matrix(cfg.matrix), cfg))
    return out


def run_experiment(name: str, cfg_overrides: Optional[dict] = None, paper_scale: bool = False,
                   write: bool = True) -> list[TraceResult]:
    """Run every trace of a named experiment, writing CSV/SVG artifacts."""
    cfg_overrides = dict(cfg_overrides or {})
    results = []
    for src, cfg in experiment_runs(name, cfg_overrides, paper_scale):
        v = start_vector(src, cfg.vector, cfg.seed)
        for tau in cfg.taus:
            res = run_trace(src, v, cfg, tau)
            if write:
                save_trace(res, cfg.out, prefix=f"{name}_")
            results.append(res)
    return results
