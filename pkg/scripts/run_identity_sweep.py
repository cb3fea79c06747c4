"""Pathwise log-identity residual of geometric Brownian motion across dt
halvings, with the fitted convergence order.

Usage: python scripts/run_identity_sweep.py [--levels L] [--paths N]
"""
import argparse
import sys

from sdestab.cli import load_config, run_experiment, emit_report


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out/identity")
    ap.add_argument("--levels", type=int, default=11)
    ap.add_argument("--paths", type=int, default=100)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    cfg = load_config(None)
    cfg["experiment"].update(kind="identity_residual", levels=args.levels)
    cfg["model"]["name"] = "gbm"
    cfg["query"].update(T=1.0, x=[1.0], y=[2.0], r=2.0, p=2.0)
    cfg["mc"].update(n_paths=args.paths, dt=1e-2, seed=args.seed)
    cfg["output"]["dir"] = args.out
    rows, ok, path = run_experiment(cfg)
    for row in rows:
        print(f"dt={row['dt']:.3e} median residual={row['empirical']:.4e} "
              f"{row['verdict']}")
    print(emit_report([path], args.out))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
