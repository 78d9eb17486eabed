"""Banded direct solves and principal eigenpairs.

Block (2x2) operators are stored with the unknowns interleaved as
(u_0, v_0, u_1, v_1, ...).  A tridiagonal diagonal block then gives a
pentadiagonal band (kl = ku = 2), so one LAPACK band factorization covers
both the Newton matrix and the cooperative eigenproblem.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .errors import NoConvergence, NonPositiveEigenvector, SingularMatrix
from .mesh import BandedMatrix

EPS = np.finfo(float).eps
MAX_EIG_ITER = 10_000


class BandedLU:
    """LU factorization of a BandedMatrix, reusable for many right-hand sides."""

    def __init__(self, a, pivot_tol=64 * EPS):
        self.matrix = a
        kl, ku = a.kl, a.ku
        ab = np.zeros((2 * kl + ku + 1, a.size))
        ab[kl:] = a.band
        lu, ipiv, info = lapack.dgbtrf(ab, kl, ku)
        if info < 0:
            raise ValueError(f"dgbtrf: illegal argument {-info}")
        pivots = np.abs(lu[kl + ku])
        scale = max(a.norm_inf(), np.finfo(float).tiny)
        if info > 0 or np.min(pivots) <= pivot_tol * scale:
            raise SingularMatrix(f"zero pivot in banded LU (min |pivot| = {np.min(pivots):.3e})")
        self._lu = lu
        self._ipiv = ipiv
        self.min_pivot = float(np.min(pivots))

    def solve(self, b):
        x, info = lapack.dgbtrs(self._lu, self.matrix.kl, self.matrix.ku, np.asarray(b, dtype=float), self._ipiv)
        if info != 0:
            raise ValueError(f"dgbtrs failed with info={info}")
        return x


def solve_banded(a, b):
    """Solve ``a x = b`` for a BandedMatrix ``a``."""
    b = np.asarray(b, dtype=float)
    x = BandedLU(a).solve(b)
    res = np.max(np.abs(a.matvec(x) - b))
    bound = 1e-10 * (a.norm_inf() * np.max(np.abs(x)) + np.max(np.abs(b)))
    if not np.isfinite(res) or res > bound:
        raise SingularMatrix(f"banded solve residual {res:.3e} exceeds {bound:.3e}")
    return x


def gershgorin_lower(a):
    d = a.diagonal(0)
    return float(np.min(d - (a.row_abs_sums() - np.abs(d))))


def _inverse_iteration(a, residual_tol, max_iter=MAX_EIG_ITER):
    """Smallest eigenpair of a matrix with M-matrix sign pattern.

    Fixed-shift inverse iteration from below the Gershgorin bound; the
    shifted inverse is entrywise nonnegative, so the iterates stay positive
    and the Collatz-Wielandt quotients bracket the Perron root.  Once the
    bracket is tight the shift is moved up to the estimate, which finishes
    the job in a couple of steps.
    """
    m = a.size
    shift = gershgorin_lower(a) - 1.0
    lu = BandedLU(a.shifted(-shift), pivot_tol=0.0)
    x = np.ones(m)
    est = np.inf
    refined = False
    for it in range(1, max_iter + 1):
        y = lu.solve(x)
        q = y / x
        qmin, qmax = np.min(q), np.max(q)
        if not (qmin > 0 and np.isfinite(qmax)):
            raise NonPositiveEigenvector("inverse iterate lost positivity")
        new = shift + 2.0 / (qmin + qmax)
        x = y / np.max(y)
        gap = (qmax - qmin) / qmax
        if not refined and gap < 1e-8:
            # Keep the new shift strictly below the eigenvalue.
            delta = max(1e-7 * max(1.0, abs(new)), 4.0 * gap * abs(new - shift))
            shift = new - delta
            lu = BandedLU(a.shifted(-shift), pivot_tol=0.0)
            refined = True
            est = new
            continue
        converged = abs(new - est) < 1e-10 * max(1.0, abs(new))
        est = new
        if refined and converged:
            ax = a.matvec(x)
            k = float(np.dot(x, ax) / np.dot(x, x))
            res = np.max(np.abs(ax - k * x))
            if res <= residual_tol:
                return k, x, it
    raise NoConvergence(f"inverse iteration did not converge in {max_iter} iterations")


def _residual_tol(a, rel):
    # Below ~eps*||A|| the residual is roundoff, not iteration error.
    return max(rel, 64 * EPS * a.norm_inf())


def smallest_eigenpair(a):
    """(λ1, e1) of the discrete -Δ; e1 > 0 with max(e1) = 1."""
    lam, e, _ = _inverse_iteration(a, _residual_tol(a, 1e-9))
    if np.any(e <= 0):
        raise NonPositiveEigenvector("first eigenvector is not strictly positive")
    return lam, e


@dataclass
class BlockOperator:
    """M = diag(A, A) - [[0, c_uv], [c_vu, 0]] + shift*I acting on (φ, ψ)."""

    laplacian: BandedMatrix
    c_uv: np.ndarray
    c_vu: np.ndarray
    shift: float = 0.0

    def __post_init__(self):
        self.c_uv = np.asarray(self.c_uv, dtype=float)
        self.c_vu = np.asarray(self.c_vu, dtype=float)
        m = self.laplacian.size
        if self.c_uv.shape != (m,) or self.c_vu.shape != (m,):
            raise ValueError(f"coupling weights must have length {m}")
        if np.any(self.c_uv < 0) or np.any(self.c_vu < 0):
            raise ValueError("coupling weights must be nonnegative (cooperative system)")

    def to_banded(self):
        return interleaved_block(self.laplacian, self.c_uv, self.c_vu, self.shift)


def interleaved_block(a, c_uv, c_vu, shift=0.0):
    """Band form of [[A, -diag(c_uv)], [-diag(c_vu), A]] + shift*I, interleaved."""
    if a.kl != 1 or a.ku != 1:
        raise ValueError("diagonal block must be tridiagonal")
    m = a.size
    d = a.diagonal(0) + shift
    up, lo = a.diagonal(1), a.diagonal(-1)
    main = np.repeat(d, 2)
    off2_up = np.repeat(up, 2)
    off2_lo = np.repeat(lo, 2)
    off1_up = np.zeros(2 * m - 1)
    off1_up[0::2] = -np.asarray(c_uv)
    off1_lo = np.zeros(2 * m - 1)
    off1_lo[0::2] = -np.asarray(c_vu)
    return BandedMatrix.from_diagonals({-2: off2_lo, -1: off1_lo, 0: main, 1: off1_up, 2: off2_up})


def split(x):
    """Interleaved vector -> (first component, second component)."""
    return x[0::2].copy(), x[1::2].copy()


def join(u, v):
    x = np.empty(2 * len(u))
    x[0::2] = u
    x[1::2] = v
    return x


def principal_block_eigenpair(op):
    """(K, φ, ψ): smallest eigenvalue of the cooperative block and its positive eigenvector."""
    m = op.to_banded()
    k, x, _ = _inverse_iteration(m, _residual_tol(m, 1e-8))
    phi, psi = split(x)
    if np.any(phi <= 0) or np.any(psi <= 0):
        raise NonPositiveEigenvector("principal block eigenvector is not strictly positive")
    scale = np.max(phi)
    return k, phi / scale, psi / scale
