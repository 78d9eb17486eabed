"""Checks of the inequality chain behind the regularity result.

For a minimal solution with γ = σλ, σ <= 1, and an exponent t with
(N-2)/4 < t < 2σ the following are evaluated with the mesh quadrature:

    Hardy bound, with E = φ and β = e^{tu} - 1:
        σλ ∫ e^v (e^{tu} - 1)^2  <=  t^2 ∫ e^{2tu} |∇u|^2
    energy identity, testing -Δu = λ e^v against e^{2tu} - 1:
        2t ∫ e^{2tu} |∇u|^2  =  λ ∫ e^v (e^{2tu} - 1)
    and, combining both with Cauchy-Schwarz,
        (σ/t - 1/2)^2 ∫ e^{2tu} e^v  <=  (4σ^2/t^2) ∫ e^v,

which bounds e^v in L^{2t+1} because v <= u.  Since 2t + 1 > N/2 that is
enough for an L-infinity bound on u.

Tolerances are 10 h^2 relative: the statements are exact in the continuum.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyWindow, InvalidDimension, InvalidParameter, InvalidT, NonpositiveE
from .mesh import apply_laplacian, gradient_energy, integrate
from .stability import StabilityCertificate

COMPARISON_TOL = 1e-8
THIN_WINDOW = 0.05


def _oriented(pair, cert=None):
    if pair.params.gam > pair.params.lam:
        pair = pair.swapped()
        if cert is not None:
            cert = StabilityCertificate(cert.K, cert.psi, cert.phi, cert.lambda1, float(np.min(cert.phi[:-1] / cert.psi[:-1])))
    return pair, cert


def select_t(N, sigma):
    """Midpoint of the admissible window (N-2)/4 < t < 2σ."""
    lo, hi = (N - 2) / 4.0, 2.0 * sigma
    if not sigma > (N - 2) / 8.0:
        raise EmptyWindow(f"σ = {sigma} <= (N-2)/8 = {(N - 2) / 8.0}: no admissible t for N = {N}")
    return 0.5 * (lo + hi)


def exponent_window(N, sigma):
    """(N-2)/8 < σ < 8/(N-2)."""
    if N < 3:
        raise InvalidDimension(f"the window is stated for N >= 3, got {N}")
    return (N - 2) / 8.0 < sigma < 8.0 / (N - 2)


def comparison_margins(pair):
    """(min(v - σu), min(u - v)) after orienting so that γ <= λ."""
    pair, _ = _oriented(pair)
    s = pair.params.sigma
    return float(np.min(pair.v - s * pair.u)), float(np.min(pair.u - pair.v))


def hardy_check(mesh, E, beta):
    """Both sides of ∫ (-ΔE)/E β^2 <= ∫ |∇β|^2."""
    E = np.asarray(E, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if np.any(E[:-1] <= 0):
        raise NonpositiveE("E must be positive at every node inside the ball")
    if beta[-1] != 0:
        raise InvalidParameter("β must vanish at r = 1")
    ratio = np.append(apply_laplacian(mesh, E) / E[:-1], 0.0)
    return integrate(mesh, ratio * beta * beta), gradient_energy(mesh, beta)


@dataclass
class EnergyReport:
    t: float
    sigma: float
    lhs_z: float
    rhs_z: float
    identity_zz_residual: float
    lhs_final: float
    rhs_final: float
    norm_exp_v: float
    window_ok: bool
    hardy_lhs: float
    hardy_rhs: float
    h: float
    thin_window: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def tol(self):
        return 10.0 * self.h**2

    @property
    def z_slack(self):
        """(rhs - lhs)/rhs for the Hardy bound; >= -10h^2 required."""
        return (self.rhs_z - self.lhs_z) / self.rhs_z if self.rhs_z > 0 else 0.0

    @property
    def final_slack(self):
        return (self.rhs_final - self.lhs_final) / self.rhs_final

    @property
    def z_ok(self):
        return self.lhs_z <= self.rhs_z + self.tol * self.rhs_z

    @property
    def final_ok(self):
        return self.lhs_final <= self.rhs_final + self.tol * self.rhs_final

    @property
    def ok(self):
        return self.z_ok and self.final_ok and self.window_ok


def energy_report(params, pair, cert, t):
    if params.nonlinearity.kind != "exp":
        raise InvalidParameter("the energy chain is implemented for the exponential nonlinearity only")
    pair, cert = _oriented(pair, cert)
    mesh = params.mesh
    N = mesh.dim
    lam = pair.params.lam
    sigma = pair.params.sigma
    lo, hi = (N - 2) / 4.0, 2.0 * sigma
    if not lo < t < hi:
        raise InvalidT(f"t = {t} outside ({lo}, {hi})")
    u, v = pair.u, pair.v
    ev = np.exp(v)
    etu = np.exp(t * u)
    e2tu = etu * etu
    beta = etu - 1.0

    grad_weighted = gradient_energy(mesh, u, weight=e2tu)
    lhs_z = sigma * lam * integrate(mesh, ev * beta * beta)
    rhs_z = t * t * grad_weighted

    zz_left = 2.0 * t * grad_weighted
    zz_right = lam * integrate(mesh, ev * (e2tu - 1.0))
    scale = max(abs(zz_left), abs(zz_right))
    zz_res = abs(zz_left - zz_right) / scale if scale > 0 else 0.0

    int_ev = integrate(mesh, ev)
    lhs_final = (sigma / t - 0.5) ** 2 * integrate(mesh, e2tu * ev)
    rhs_final = 4.0 * sigma**2 / t**2 * int_ev
    q = 2.0 * t + 1.0
    norm = integrate(mesh, np.exp(q * v)) ** (1.0 / q)

    hardy_lhs, hardy_rhs = hardy_check(mesh, cert.phi, beta)
    return EnergyReport(
        t=t,
        sigma=sigma,
        lhs_z=lhs_z,
        rhs_z=rhs_z,
        identity_zz_residual=zz_res,
        lhs_final=lhs_final,
        rhs_final=rhs_final,
        norm_exp_v=norm,
        window_ok=q > N / 2.0,
        hardy_lhs=hardy_lhs,
        hardy_rhs=hardy_rhs,
        h=mesh.h,
        thin_window=(hi - lo) < THIN_WINDOW,
    )
