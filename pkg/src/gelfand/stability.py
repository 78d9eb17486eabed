"""Semi-stability certificates for minimal solutions.

The certificate is the principal eigenpair (K, φ, ψ) of the linearized block
operator

    -Δφ - λ f'(v) ψ = K φ,    -Δψ - γ f'(u) φ = K ψ,

together with λ1 of -Δ on the same mesh, so that 0 <= K < λ1 and the ratio
bound ψ/φ >= γ/λ (for γ <= λ) can be checked directly.
"""

from dataclasses import dataclass

import numpy as np

from .core import _operator
from .errors import WrongOrdering
from .linalg import BlockOperator, principal_block_eigenpair, smallest_eigenpair
from .mesh import with_boundary

K_TOL = 1e-6
RATIO_TOL = 1e-6


@dataclass
class StabilityCertificate:
    K: float
    phi: np.ndarray
    psi: np.ndarray
    lambda1: float
    ratio_min: float

    def below_lambda1(self):
        return self.K < self.lambda1


def _ratio_min(phi, psi):
    # r = 1 is excluded: φ = ψ = 0 there.
    return float(np.min(psi[:-1] / phi[:-1]))


def stability_certificate(params, pair):
    a, _ = _operator(params.mesh)
    fp = params.nonlinearity.fprime
    op = BlockOperator(a, params.lam * fp(pair.v[:-1]), params.gam * fp(pair.u[:-1]))
    K, phi, psi = principal_block_eigenpair(op)
    lam1, _ = _lambda1(params.mesh)
    phi, psi = with_boundary(phi), with_boundary(psi)
    return StabilityCertificate(K, phi, psi, lam1, _ratio_min(phi, psi))


_LAMBDA1 = {}


def _lambda1(mesh):
    key = (mesh.dim, mesh.n)
    if key not in _LAMBDA1:
        a, _ = _operator(mesh)
        _LAMBDA1[key] = smallest_eigenpair(a)
    return _LAMBDA1[key]


def rescaled(cert, factor):
    """Same certificate with (φ, ψ) multiplied by ``factor`` > 0."""
    phi, psi = cert.phi * factor, cert.psi * factor
    return StabilityCertificate(cert.K, phi, psi, cert.lambda1, _ratio_min(phi, psi))


def semistability_margin(cert):
    return cert.K


def lemma2_margin(cert, sigma):
    """min ψ/φ - σ; only meaningful for σ = γ/λ <= 1."""
    if sigma > 1:
        raise WrongOrdering(f"σ = {sigma} > 1: swap the components so that γ <= λ first")
    return cert.ratio_min - sigma
