"""Print a priori bounds next to the true error along an exponential trace."""

import argparse

from krylov_errest.experiments import RunConfig, load_matrix, run_trace, start_vector


def _cell(x):
    return f"{'-':>10}" if x is None else f"{x:10.2e}"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--matrix", default="gen:convdiff:n=4")
    ap.add_argument("--tau", type=float, default=0.04)
    ap.add_argument("--method", default="arnoldi")
    args = ap.parse_args()
    src = load_matrix(args.matrix)
    cfg = RunConfig(matrix=args.matrix, function="exp", taus=(args.tau,), method=args.method)
    res = run_trace(src, start_vector(src, cfg.vector, cfg.seed), cfg, args.tau, bounds=True)
    print(f"{'m':>4} {'true_err':>10} {'bound41':>10} {'bound42':>10} {'bound43':>10} {'bound44':>10}")
    for r in res.records:
        b = r.bounds
        cells = (r.true_abs, b.bound_41, b.bound_42, b.bound_43, b.bound_44)
        print(f"{r.step:>4} " + " ".join(_cell(x) for x in cells))


if __name__ == "__main__":
    main()
