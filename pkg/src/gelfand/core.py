"""The coupled Gelfand system on the radial mesh.

    -Δu = λ f(v),   -Δv = γ f(u)   in the unit ball,   u = v = 0 on the boundary,

with f(s) = e^s, or f(s) = (1 + s)^p for the power variant (same exponent in
both equations).
"""

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .errors import (
    Diverged,
    InvalidParameter,
    MeshMismatch,
    NoConvergence,
    NotMonotone,
    SingularJacobian,
    SingularMatrix,
)
from .linalg import EPS, BandedLU, interleaved_block, join, split
from .mesh import RadialMesh, laplacian_operator, with_boundary

DEFAULT_CAP = 50.0
DEFAULT_MAX_ITER = 5000
MONOTONE_TOL = 1e-10
NEWTON_MAX_ITER = 50


@dataclass(frozen=True)
class Nonlinearity:
    kind: str = "exp"
    p: float = 1.0

    def __post_init__(self):
        if self.kind not in ("exp", "power"):
            raise InvalidParameter(f"unknown nonlinearity {self.kind!r}")
        if self.kind == "power" and not self.p > 1:
            raise InvalidParameter(f"power nonlinearity needs p > 1, got {self.p}")

    @classmethod
    def parse(cls, text):
        """'exp' or 'power:p'."""
        text = text.strip()
        if text == "exp":
            return cls("exp")
        if text.startswith("power:"):
            try:
                p = float(text.split(":", 1)[1])
            except ValueError:
                raise InvalidParameter(f"bad power exponent in {text!r}") from None
            return cls("power", p)
        raise InvalidParameter(f"nonlinearity must be 'exp' or 'power:p', got {text!r}")

    def __str__(self):
        return "exp" if self.kind == "exp" else f"power:{self.p!r}"

    def f(self, s):
        if self.kind == "exp":
            return np.exp(s)
        return (1.0 + s) ** self.p

    def fprime(self, s):
        if self.kind == "exp":
            return np.exp(s)
        return self.p * (1.0 + s) ** (self.p - 1.0)


EXPONENTIAL = Nonlinearity("exp")


def Power(p):
    return Nonlinearity("power", float(p))


@dataclass(frozen=True)
class ProblemParams:
    lam: float
    gam: float
    mesh: RadialMesh
    nonlinearity: Nonlinearity = EXPONENTIAL

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise InvalidParameter(f"λ must be positive, got {self.lam}")
        if not (np.isfinite(self.gam) and self.gam > 0):
            raise InvalidParameter(f"γ must be positive, got {self.gam}")

    @property
    def sigma(self):
        return self.gam / self.lam

    def swapped(self):
        return replace(self, lam=self.gam, gam=self.lam)

    @classmethod
    def on_ray(cls, lam, sigma, mesh, nonlinearity=EXPONENTIAL):
        return cls(lam, sigma * lam, mesh, nonlinearity)


@dataclass
class SolutionPair:
    """Grid values of (u, v) at r_0..r_n together with how they were obtained."""

    u: np.ndarray
    v: np.ndarray
    params: ProblemParams
    iterations: int = 0
    residual_norm: float = float("nan")
    minimal: bool = False
    newton_iterations: int = 0
    info: dict = field(default_factory=dict)

    @property
    def sup_u(self):
        return float(np.max(np.abs(self.u)))

    @property
    def sup_v(self):
        return float(np.max(np.abs(self.v)))

    def swapped(self):
        return replace(self, u=self.v.copy(), v=self.u.copy(), params=self.params.swapped(), info=dict(self.info))


@lru_cache(maxsize=16)
def _operator(mesh):
    a = laplacian_operator(mesh)
    return a, BandedLU(a)


def _residual(params, u, v):
    a, _ = _operator(params.mesh)
    f = params.nonlinearity.f
    return a.matvec(u) - params.lam * f(v), a.matvec(v) - params.gam * f(u)


def residual(params, pair):
    """(A u - λ f(v), A v - γ f(u)) at the unknown nodes r_0..r_{n-1}."""
    return _residual(params, pair.u[:-1], pair.v[:-1])


def _jacobian(params, u, v):
    a, _ = _operator(params.mesh)
    fp = params.nonlinearity.fprime
    return interleaved_block(a, params.lam * fp(v), params.gam * fp(u))


def jacobian(params, pair):
    """Interleaved band form of diag(A, A) - offdiag(λ f'(v), γ f'(u))."""
    return _jacobian(params, pair.u[:-1], pair.v[:-1])


def residual_tolerance(params, u, v):
    """1e-10 max(λ, γ), floored at the level where rounding u itself dominates."""
    a, _ = _operator(params.mesh)
    scale = max(1.0, float(np.max(np.abs(u))), float(np.max(np.abs(v))))
    return max(1e-10 * max(params.lam, params.gam), 2 * EPS * a.norm_inf() * scale)


def newton_solve(params, initial, max_iter=NEWTON_MAX_ITER):
    u = np.array(initial.u[:-1], dtype=float)
    v = np.array(initial.v[:-1], dtype=float)
    ru, rv = _residual(params, u, v)
    norm = float(max(np.max(np.abs(ru)), np.max(np.abs(rv))))
    steps = []
    it = 0
    while norm > residual_tolerance(params, u, v):
        if it == max_iter:
            raise NoConvergence(f"Newton did not converge in {max_iter} iterations (residual {norm:.3e})")
        try:
            lu = BandedLU(_jacobian(params, u, v))
        except SingularMatrix as exc:
            raise SingularJacobian(str(exc)) from exc
        du, dv = split(lu.solve(-join(ru, rv)))
        u, v = u + du, v + dv
        steps.append(float(max(np.max(np.abs(du)), np.max(np.abs(dv)))))
        it += 1
        with np.errstate(over="ignore", invalid="ignore"):
            ru, rv = _residual(params, u, v)
            norm = float(max(np.max(np.abs(ru)), np.max(np.abs(rv))))
        if not np.isfinite(norm):
            raise NoConvergence("Newton iterate overflowed")
        if steps[-1] <= 1e-13 * max(1.0, float(np.max(np.abs(u)))):
            # Update at rounding level: the residual cannot drop further.
            break
    info = dict(initial.info)
    if len(steps) >= 2 and steps[-2] > 0:
        info["newton_increment_ratio"] = steps[-1] / steps[-2]
    return replace(
        initial,
        u=with_boundary(u),
        v=with_boundary(v),
        params=params,
        residual_norm=norm,
        newton_iterations=it,
        info=info,
    )


def minimal_solution(params, cap=DEFAULT_CAP, max_iter=DEFAULT_MAX_ITER):
    """Minimal solution by monotone iteration from zero, polished by Newton.

    Raises Diverged when the sup norm passes ``cap`` or the budget runs out;
    continuation reads that as "(λ, γ) lies outside the existence region".
    """
    if params.gam > params.lam:
        # Always iterate with γ <= λ so (λ, γ) and (γ, λ) give mirror-identical runs.
        return minimal_solution(params.swapped(), cap, max_iter).swapped()
    _, lu = _operator(params.mesh)
    f = params.nonlinearity.f
    n = params.mesh.n
    u = np.zeros(n)
    v = np.zeros(n)
    inc = np.inf
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, max_iter + 1):
            u_new = lu.solve(params.lam * f(v))
            v_new = lu.solve(params.gam * f(u_new))
            sup = max(np.max(u_new), np.max(v_new))
            if not np.isfinite(sup) or sup > cap:
                raise Diverged(f"sup norm passed cap {cap} after {k} sweeps", float(sup), k)
            du, dv = u_new - u, v_new - v
            floor = -1e-11 * max(1.0, sup)
            if np.min(du) < floor or np.min(dv) < floor:
                raise NotMonotone(f"iterate decreased by {min(np.min(du), np.min(dv)):.3e} at sweep {k}")
            inc = max(np.max(du), np.max(dv))
            u, v = u_new, v_new
            if inc < MONOTONE_TOL:
                break
        else:
            raise Diverged(f"no convergence in {max_iter} sweeps (last increment {inc:.3e})", float(max(np.max(u), np.max(v))), max_iter)

    ru, rv = _residual(params, u, v)
    pair = SolutionPair(
        with_boundary(u),
        with_boundary(v),
        params,
        iterations=k,
        residual_norm=float(max(np.max(np.abs(ru)), np.max(np.abs(rv)))),
        minimal=True,
    )
    try:
        polished = newton_solve(params, pair)
    except (NoConvergence, SingularJacobian):
        pair.info["polished"] = False
        return pair
    # The minimal solution dominates every monotone iterate.
    slack = 1e-8 * max(1.0, pair.sup_u)
    if np.min(polished.u - pair.u) < -slack or np.min(polished.v - pair.v) < -slack:
        pair.info["polished"] = False
        return pair
    polished.info["polished"] = True
    return polished


def branch_monotonicity_check(pairs):
    """Smallest nodewise increase of (u, v) between consecutive branch points."""
    pairs = list(pairs)
    if len(pairs) < 2:
        return 0.0
    first = pairs[0].params
    for p in pairs[1:]:
        if not p.params.mesh.same_as(first.mesh):
            raise MeshMismatch("branch points live on different meshes")
        if not np.isclose(p.params.sigma, first.sigma, rtol=1e-12):
            raise InvalidParameter("branch points lie on different rays")
    margin = np.inf
    for a, b in zip(pairs, pairs[1:]):
        margin = min(margin, float(np.min(b.u - a.u)), float(np.min(b.v - a.v)))
    return margin
