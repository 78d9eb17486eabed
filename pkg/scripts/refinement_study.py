"""Mesh refinement study: λ*, extremal sup u and the energy identity residual order.

For each (N, σ) the critical value and the branch sample at depth 10 are
recomputed on n, 2n, 4n.  Prints a table; nothing is written to disk.

Usage: python3 scripts/refinement_study.py --n 100
"""

import argparse
import math

import numpy as np

from gelfand.analysis import energy_report, select_t
from gelfand.continuation import bracket_lambda_star, sweep_ray
from gelfand.core import ProblemParams, minimal_solution
from gelfand.mesh import build_mesh
from gelfand.stability import stability_certificate

CASES = [(3, 1.0), (5, 0.6), (9, 0.9), (10, 1.0)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--depth", type=int, default=10)
    args = ap.parse_args()
    np.seterr(over="ignore")
    print(f"{'N':>3} {'sigma':>6} {'n':>6} {'lambda*':>12} {'sup_u(depth)':>13} {'class':>12} {'zz res':>10} {'order':>6}")
    for N, sigma in CASES:
        prev = None
        for n in (args.n, 2 * args.n, 4 * args.n):
            mesh = build_mesh(N, n)
            b = bracket_lambda_star(sigma, mesh)
            sw = sweep_ray(sigma, mesh, args.depth, bracket=b)
            zz, order = float("nan"), float("nan")
            if 3 <= N <= 9:
                # Same λ on every mesh so the residuals are comparable.
                lam = bracket_lambda_star(sigma, build_mesh(N, args.n)).lambda_star * 0.99
                params = ProblemParams.on_ray(lam, sigma, mesh)
                pair = minimal_solution(params)
                zz = energy_report(params, pair, stability_certificate(params, pair), select_t(N, min(sigma, 1 / sigma))).identity_zz_residual
                if prev is not None:
                    order = math.log2(prev / zz)
                prev = zz
            print(f"{N:>3} {sigma:>6} {n:>6} {b.lambda_star:>12.6f} {sw.final_sup_u:>13.5f} {sw.classification:>12} {zz:>10.2e} {order:>6.2f}")


if __name__ == "__main__":
    main()
