"""Run the coupled-pair bound-domination experiment for every SODE zoo
model and write one CSV per model plus a combined report.

Usage: python scripts/run_zoo_domination.py [--out OUT] [--paths N] [--seed S]
"""
import argparse
import sys

from sdestab.cli import emit_report, load_config, run_experiment

MODELS = ["van_der_pol", "duffing_vdp", "lorenz", "langevin",
          "brownian_dynamics", "sir", "psychology", "brusselator"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out/zoo")
    ap.add_argument("--paths", type=int, default=10_000)
    ap.add_argument("--dt", type=float, default=5e-4)
    ap.add_argument("--seed", type=int, default=77)
    args = ap.parse_args()

    csvs = []
    all_ok = True
    for name in MODELS:
        cfg = load_config(None)
        cfg["model"]["name"] = name
        cfg["mc"].update(n_paths=args.paths, dt=args.dt, seed=args.seed)
        cfg["output"].update(dir=args.out, prefix=f"lipschitz_{name}")
        rows, ok, path = run_experiment(cfg)
        all_ok &= ok
        csvs.append(path)
        for row in rows:
            print(f"{name:18s} {row['experiment']:20s} "
                  f"empirical={row['empirical']:.4g} bound={row['bound']:.4g} "
                  f"{row['verdict']}")
    print(emit_report(csvs, args.out))
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
