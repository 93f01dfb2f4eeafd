"""Command-line driver: ``experiment``, ``approx`` and ``bounds``.

Exit status is 0 when every run converged, 2 when some run did not, and
1 on usage, validation or I/O errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .dense_funm import FunctionKind
from .errors import ConvergenceError, DimensionError, InputError, MatrixMarketError
from .experiments import (RunConfig, load_matrix, run_bounds_trace,
                          run_experiment, run_trace, save_trace, start_vector)
from .sparse_ops import write_vector

__all__ = ["main", "build_parser", "config_from_args"]

EXIT_OK, EXIT_ERROR, EXIT_UNCONVERGED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _tau_list(text: str) -> tuple:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid tau list '{text}'") from None


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def _common(p: argparse.ArgumentParser, matrix_required: bool):
    p.add_argument("--matrix", required=matrix_required,
                   help="Matrix Market path or gen:diag:N=..,a=..,b=.. | "
                        "gen:convdiff:n=..,delta1=..,delta2=.. | gen:identity:N=..")
    p.add_argument("--function", choices=[k.value for k in FunctionKind])
    p.add_argument("--tau", type=_tau_list, help="comma-separated tau values")
    p.add_argument("--method", help="arnoldi, lanczos or restart:<m>")
    p.add_argument("--eps", type=float, help="stopping tolerance (default 1e-12)")
    p.add_argument("--max-dim", type=int)
    p.add_argument("--seed", type=int, help="seed for the random start vector (default 20130401)")
    p.add_argument("--oracle", type=_on_off, help="on or off")
    p.add_argument("--nodes", choices=["confluent", "ritz"])
    p.add_argument("--nt", type=int, help="samples for maxima over t")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--vector", help="ones, random, auto, or a vector file")
    p.add_argument("--estimator", choices=["xi1", "xi2"])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="krylov-errest",
                     description="Krylov approximations to f(A)v with a posteriori error estimates.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("experiment", help="reproduce one of the numbered examples")
    p.add_argument("name", choices=["ex1", "ex2", "ex3", "ex4"])
    p.add_argument("--paper-scale", action="store_true",
                   help="use n = 14 for the convection-diffusion matrix")
    _common(p, matrix_required=False)
    p = sub.add_parser("approx", help="approximate f(A)v until the estimate meets eps")
    _common(p, matrix_required=True)
    p = sub.add_parser("bounds", help="tabulate the exponential error bounds per step")
    _common(p, matrix_required=True)
    return parser


_FIELD_OF = {"matrix": "matrix", "function": "function", "tau": "taus", "method": "method",
             "eps": "eps", "max_dim": "max_dim", "seed": "seed", "oracle": "oracle",
             "nodes": "nodes", "nt": "n_t", "out": "out", "vector": "vector",
             "estimator": "estimator"}


def _overrides(args) -> dict:
    return {field: getattr(args, name) for name, field in _FIELD_OF.items()
            if getattr(args, name, None) is not None}


def config_from_args(args) -> RunConfig:
    return RunConfig(**_overrides(args))


def _report(results, stream) -> int:
    status = EXIT_OK
    for r in results:
        last = r.records[-1] if r.records else None
        true = "" if last is None or last.true_rel is None else f" true_rel={last.true_rel:.3e}"
        est = "" if last is None else f" xi2_rel={last.xi2_rel:.3e}"
        steps = 0 if last is None else last.step
        flag = "converged" if r.converged else "NOT converged"
        print(f"{r.label}: {flag} at m={steps}{est}{true}", file=stream)
        if not r.converged:
            status = EXIT_UNCONVERGED
    return status


def cmd_experiment(args, stream) -> int:
    results = run_experiment(args.name, _overrides(args), paper_scale=args.paper_scale)
    return _report(results, stream)


def cmd_approx(args, stream) -> int:
    cfg = config_from_args(args)
    src = load_matrix(cfg.matrix)
    v = start_vector(src, cfg.vector, cfg.seed)
    results = []
    for tau in cfg.taus:
        res = run_trace(src, v, cfg, tau, stop_on_true=False)
        save_trace(res, cfg.out)
        write_vector(res.approx, cfg.out / f"{res.label}.vec")
        if res.node_terms:
            terms = ", ".join(f"{t:.3e}" for t in res.node_terms)
            print(f"{res.label}: leading expansion terms ({cfg.nodes} nodes): {terms}", file=stream)
        results.append(res)
    return _report(results, stream)


def cmd_bounds(args, stream) -> int:
    cfg = config_from_args(args)
    if cfg.function is not FunctionKind.EXP:
        raise InputError("bounds are exponential-only")
    src = load_matrix(cfg.matrix)
    v = start_vector(src, cfg.vector, cfg.seed)
    results = []
    for tau in cfg.taus:
        res = run_bounds_trace(src, v, cfg, tau)
        save_trace(res, cfg.out, prefix="bounds_", with_bounds=True)
        results.append(res)
    return _report(results, stream)


_COMMANDS = {"experiment": cmd_experiment, "approx": cmd_approx, "bounds": cmd_bounds}


def main(argv: Optional[Sequence[str]] = None, stream=None) -> int:
    stream = sys.stdout if stream is None else stream
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args, stream)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
    except (InputError, DimensionError, MatrixMarketError, ConvergenceError,
            OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
