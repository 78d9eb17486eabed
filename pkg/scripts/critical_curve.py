"""Trace λ*(σ) on a log-spaced σ grid and write the curve CSV/JSON.

Usage: python3 scripts/critical_curve.py --dim 3 --n 200 --points 17 --out runs/curve3
"""

import argparse

import numpy as np

from gelfand.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--points", type=int, default=17)
    ap.add_argument("--sigma-max", type=float, default=8.0)
    ap.add_argument("--out", default="runs/curve")
    args = ap.parse_args()
    # Symmetric in log σ so every point has its swap partner on the grid.
    half = np.geomspace(1.0, args.sigma_max, (args.points + 1) // 2)
    grid = sorted(set(np.concatenate([1.0 / half, half]).round(12)))
    code = cli_main(["curve", "--dim", str(args.dim), "--n", str(args.n), "--sigmas", ",".join(repr(float(s)) for s in grid), "--out", args.out])
    print(f"wrote {args.out}/curve.csv ({len(grid)} points), exit {code}")
    raise SystemExit(code)


if __name__ == "__main__":
    main()
