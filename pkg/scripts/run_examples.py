"""Run the four worked examples and print a one-line summary per trace."""

import argparse
from pathlib import Path

from krylov_errest.experiments import run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--paper-scale", action="store_true",
                    help="use the larger convection-diffusion grid (slow)")
    ap.add_argument("names", nargs="*", default=["ex1", "ex2", "ex3", "ex4"])
    args = ap.parse_args()
    for name in args.names:
        for res in run_experiment(name, {"out": args.out}, paper_scale=args.paper_scale):
            last = res.records[-1]
            true = "n/a" if last.true_rel is None else f"{last.true_rel:.2e}"
            print(f"{name} {res.label}: m={last.step} xi2_rel={last.xi2_rel:.2e} "
                  f"true_rel={true} converged={res.converged}")


if __name__ == "__main__":
    main()
