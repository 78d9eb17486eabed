"""Radial finite-volume discretization of -Δ on the unit ball of R^N.

Radial functions are stored as grid values at r_i = i/n, i = 0..n.  The
operator is the vertex-centred finite-volume form

    (A u)_i = (1/V_i) * sum_{j = i±1} w_ij (u_i - u_j),

with dual cells [r_{i-1/2}, r_{i+1/2}] (clipped to [0, 1]), cell volumes
V_i = (r_{i+1/2}^N - r_{i-1/2}^N)/N and edge weights w_ij = r_mid^{N-1}/h.
At r = 0 this collapses to -2N(u_1 - u_0)/h^2, the limit -N u''(0) with a
symmetric ghost point.  The scheme is exact on 1 - r^2, has the M-matrix sign
pattern for every N, and is symmetric with respect to the V-weighted inner
product, so the discrete Hardy (Picone) inequality holds exactly.

Every integral omits the surface area of S^{N-1}.  All inequalities checked
by :mod:`gelfand.analysis` are homogeneous in that constant.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDimension, LengthMismatch, MeshTooCoarse


@dataclass(frozen=True, eq=False)
class RadialMesh:
    dim: int
    n: int
    radii: np.ndarray = field(repr=False)
    quad_weights: np.ndarray = field(repr=False)
    edge_weights: np.ndarray = field(repr=False)

    @property
    def h(self):
        return 1.0 / self.n

    @property
    def midpoints(self):
        return 0.5 * (self.radii[:-1] + self.radii[1:])

    @property
    def interior(self):
        """Radii of the unknown nodes (centre included, r = 1 excluded)."""
        return self.radii[:-1]

    def same_as(self, other):
        return self.dim == other.dim and self.n == other.n

    def descriptor(self):
        return {"dim": self.dim, "n": self.n}


class BandedMatrix:
    """Square band matrix in LAPACK general-band layout.

    ``band[ku + i - j, j] == A[i, j]`` for ``-ku <= i - j <= kl``; row ``ku``
    holds the main diagonal.
    """

    def __init__(self, band, kl, ku):
        band = np.asarray(band, dtype=float)
        if band.ndim != 2 or band.shape[0] != kl + ku + 1:
            raise ValueError(f"band storage must have {kl + ku + 1} rows, got shape {band.shape}")
        self.band = band
        self.kl = int(kl)
        self.ku = int(ku)

    @property
    def size(self):
        return self.band.shape[1]

    @classmethod
    def from_diagonals(cls, diagonals):
        """Build from a mapping ``offset -> values`` (offset = j - i)."""
        ku = max(max(diagonals), 0)
        kl = max(-min(diagonals), 0)
        m = len(diagonals[0])
        band = np.zeros((kl + ku + 1, m))
        for k, vals in diagonals.items():
            vals = np.asarray(vals, dtype=float)
            if len(vals) != m - abs(k):
                raise LengthMismatch(f"diagonal {k} has {len(vals)} entries, expected {m - abs(k)}")
            if k >= 0:
                band[ku - k, k:] = vals
            else:
                band[ku - k, : m + k] = vals
        return cls(band, kl, ku)

    @classmethod
    def from_dense(cls, a, kl, ku):
        a = np.asarray(a, dtype=float)
        m = a.shape[0]
        band = np.zeros((kl + ku + 1, m))
        for j in range(m):
            lo, hi = max(0, j - ku), min(m, j + kl + 1)
            band[ku + lo - j : ku + hi - j, j] = a[lo:hi, j]
        return cls(band, kl, ku)

    def diagonal(self, k=0):
        m = self.size
        if k > self.ku or -k > self.kl:
            return np.zeros(m - abs(k))
        row = self.band[self.ku - k]
        return row[k:].copy() if k >= 0 else row[: m + k].copy()

    def entry(self, i, j):
        if i - j > self.kl or j - i > self.ku:
            return 0.0
        return float(self.band[self.ku + i - j, j])

    def to_dense(self):
        m = self.size
        a = np.zeros((m, m))
        for j in range(m):
            lo, hi = max(0, j - self.ku), min(m, j + self.kl + 1)
            a[lo:hi, j] = self.band[self.ku + lo - j : self.ku + hi - j, j]
        return a

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.size:
            raise LengthMismatch(f"vector of length {x.shape[0]} for matrix of size {self.size}")
        y = np.zeros(self.size)
        for k in range(-self.kl, self.ku + 1):
            d = self.diagonal(k)
            if k >= 0:
                y[: self.size - k] += d * x[k:]
            else:
                y[-k:] += d * x[: self.size + k]
        return y

    __matmul__ = matvec

    def norm_inf(self):
        return float(np.max(self.row_abs_sums()))

    def row_abs_sums(self):
        s = np.zeros(self.size)
        for k in range(-self.kl, self.ku + 1):
            d = np.abs(self.diagonal(k))
            if k >= 0:
                s[: self.size - k] += d
            else:
                s[-k:] += d
        return s

    def shifted(self, c):
        """Return ``A + c I``."""
        band = self.band.copy()
        band[self.ku] += c
        return BandedMatrix(band, self.kl, self.ku)

    def __repr__(self):
        return f"BandedMatrix(size={self.size}, kl={self.kl}, ku={self.ku})"


def build_mesh(N, n):
    if int(N) != N or N < 1:
        raise InvalidDimension(f"dimension must be an integer >= 1, got {N}")
    if int(n) != n or n < 8:
        raise MeshTooCoarse(f"need at least 8 intervals, got {n}")
    N, n = int(N), int(n)
    h = 1.0 / n
    radii = np.arange(n + 1) * h
    radii[-1] = 1.0
    cell_edges = np.concatenate(([0.0], radii[:-1] + 0.5 * h, [1.0]))
    powers = cell_edges**N
    quad_weights = np.diff(powers) / N
    edge_weights = (radii[:-1] + 0.5 * h) ** (N - 1) / h
    return RadialMesh(N, n, radii, quad_weights, edge_weights)


def laplacian_operator(mesh):
    """Discrete -Δ on the n unknowns r_0..r_{n-1} (Dirichlet row at r=1 eliminated)."""
    n = mesh.n
    vol = mesh.quad_weights[:n]
    w = mesh.edge_weights
    diag = w.copy()
    diag[1:] += w[:-1]
    diag /= vol
    upper = -w[:-1] / vol[:-1]
    lower = -w[:-1] / vol[1:]
    return BandedMatrix.from_diagonals({-1: lower, 0: diag, 1: upper})


def _check_len(mesh, f):
    f = np.asarray(f, dtype=float)
    if f.shape != (mesh.n + 1,):
        raise LengthMismatch(f"expected {mesh.n + 1} grid values, got shape {f.shape}")
    return f


def apply_laplacian(mesh, f):
    """-Δf at nodes 0..n-1, using the boundary value f_n as given.

    For f_n = 0 this equals ``laplacian_operator(mesh) @ f[:-1]``.
    """
    f = _check_len(mesh, f)
    flux = mesh.edge_weights * (f[:-1] - f[1:])
    out = flux.copy()
    out[1:] -= flux[:-1]
    return out / mesh.quad_weights[:-1]


def integrate(mesh, f):
    """Σ w_i f_i ≈ ∫_0^1 f(r) r^{N-1} dr."""
    f = _check_len(mesh, f)
    return float(np.dot(mesh.quad_weights, f))


def gradient_energy(mesh, f, weight=None):
    """≈ ∫_0^1 weight(r) f'(r)^2 r^{N-1} dr from cell differences.

    ``weight`` is given at the nodes and averaged onto each cell.
    """
    f = _check_len(mesh, f)
    df = np.diff(f)
    terms = mesh.edge_weights * df * df
    if weight is not None:
        weight = _check_len(mesh, weight)
        terms = terms * 0.5 * (weight[:-1] + weight[1:])
    return float(np.sum(terms))


def with_boundary(values):
    """Append the Dirichlet zero at r = 1 to a vector of unknowns."""
    return np.append(np.asarray(values, dtype=float), 0.0)
