"""Reference values computed independently of the package solver.

Two oracles:

* Emden shooting for the diagonal case σ = 1 (u = v).  If U solves
  U'' + (N-1)/ρ U' + e^U = 0, U(0) = U'(0) = 0, then w(r) = U(sr) - U(s)
  solves -Δw = λ e^w on the unit ball with λ = s^2 e^{U(s)}, so
  λ* = max_s s^2 e^{U(s)} and u*(0) = -U at the maximiser.
* A fold finder for general σ: Newton on (u, v, λ) with u(0) prescribed,
  using plain central differences (not the package's finite-volume scheme)
  and scipy.sparse.  λ as a function of u(0) peaks at the fold.

Usage: python3 scripts/fold_oracle.py
"""

import argparse
import warnings

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spl
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize_scalar


def _emden(N, s_max):
    def rhs(rho, y):
        U, dU = y
        if rho == 0.0:
            return [dU, -np.exp(U) / N]
        return [dU, -np.exp(U) - (N - 1) / rho * dU]

    return solve_ivp(rhs, (0.0, s_max), [0.0, 0.0], method="DOP853", rtol=1e-12, atol=1e-14, dense_output=True)


def shooting_lambda_star(N, s_max=60.0):
    """(λ*, u*(0)) for -Δu = λ e^u on the unit ball in R^N (N <= 9)."""
    sol = _emden(N, s_max)
    grid = np.linspace(1e-3, s_max, 20000)
    vals = grid**2 * np.exp(sol.sol(grid)[0])
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(lambda s: -(s * s * np.exp(sol.sol(s)[0])), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    s = res.x
    return float(-res.fun), float(-sol.sol(s)[0])


def scalar_branch_point(N, lam, s_max=60.0):
    """Minimal solution of -Δw = λ e^w sampled as a callable in r, from shooting."""
    sol = _emden(N, s_max)
    grid = np.linspace(1e-4, s_max, 20000)
    vals = grid**2 * np.exp(sol.sol(grid)[0])
    k = int(np.argmax(vals >= lam))
    s = brentq(lambda t: t * t * np.exp(sol.sol(t)[0]) - lam, grid[k - 1], grid[k], xtol=1e-14)
    Us = sol.sol(s)[0]
    return lambda r: sol.sol(s * np.asarray(r))[0] - Us


def _fd_operator(N, n):
    h = 1.0 / n
    r = np.arange(n) * h
    main = np.full(n, 2.0 / h**2)
    up = np.zeros(n - 1)
    lo = np.zeros(n - 1)
    up[1:] = -(1.0 / h**2 + (N - 1) / (2 * h * r[1:-1]))
    lo[:] = -(1.0 / h**2 - (N - 1) / (2 * h * r[1:]))
    # Centre: -N u''(0) with a symmetric ghost point.
    main[0] = 2.0 * N / h**2
    up[0] = -2.0 * N / h**2
    return sp.diags([lo, main, up], [-1, 0, 1], format="csc")


def fold_point(N, sigma, n=400, s_values=None):
    """(λ at the fold, u(0) at the fold) for γ = σλ, γ <= λ."""
    if s_values is None:
        s_values = np.linspace(0.05, 12.0, 240)
    A = _fd_operator(N, n)
    m = n
    x = np.zeros(2 * m + 1)
    pin = sp.csr_matrix(([1.0], ([0], [0])), shape=(1, m))
    path = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for s in s_values:
            for _ in range(60):
                u, v, lam = x[:m], x[m : 2 * m], x[-1]
                F = np.concatenate([A @ u - lam * np.exp(v), A @ v - sigma * lam * np.exp(u), [u[0] - s]])
                J = sp.bmat(
                    [
                        [A, -sp.diags(lam * np.exp(v)), -np.exp(v)[:, None]],
                        [-sp.diags(sigma * lam * np.exp(u)), A, -sigma * np.exp(u)[:, None]],
                        [pin, None, None],
                    ],
                    format="csc",
                )
                dx = spl.spsolve(J, -F)
                x = x + dx
                if np.max(np.abs(dx)) < 1e-12:
                    break
            path.append((s, x[-1]))
    path = np.array(path)
    i = int(np.argmax(path[:, 1]))
    return float(path[i, 1]), float(path[i, 0])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=400)
    args = ap.parse_args()
    print("diagonal case, Emden shooting")
    for N in (1, 2, 3, 5, 9):
        lam, u0 = shooting_lambda_star(N)
        print(f"  N={N}: lambda*={lam:.8f}  u*(0)={u0:.6f}")
    print(f"fold finder, central differences, n={args.n}")
    for N, sigma in ((3, 1.0), (5, 0.6), (9, 0.9), (3, 0.5), (6, 0.5)):
        lam, u0 = fold_point(N, sigma, args.n)
        print(f"  N={N} sigma={sigma}: lambda*={lam:.6f}  u(0) at fold={u0:.4f}")


if __name__ == "__main__":
    main()
