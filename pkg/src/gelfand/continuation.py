"""Rays γ = σλ: the critical λ*(σ), minimal branches, and the critical curve.

λ*(σ) is located by existence bisection: monotone iteration from zero either
converges (a minimal solution exists) or passes the cap.  The minimal branch
is then sampled at λ_k = λ*(1 - 2^-k).
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analysis import comparison_margins
from .core import DEFAULT_CAP, DEFAULT_MAX_ITER, EXPONENTIAL, ProblemParams, minimal_solution
from .errors import CapTooLow, Diverged, GelfandError, InvalidParameter, MismatchedParams
from .stability import lemma2_margin, stability_certificate

BOUNDED = "Bounded"
BLOWUP = "Blowup"
INCONCLUSIVE = "Inconclusive"

PLATEAU_TOL = 0.05
# Increments of sup u over successive depth steps: a fold approach (bounded
# extremal) shrinks them by 2^{-1/2} per step, logarithmic blow-up keeps them
# constant.  0.95 leaves room for the bisection error in λ*.
BLOWUP_RATIO = 0.95
FIT_SAMPLES = 5


@dataclass(frozen=True)
class ContinuationOptions:
    tol: float = 1e-4
    cap: float = DEFAULT_CAP
    max_iter: int = DEFAULT_MAX_ITER
    lam_start: float = 1e-3
    nonlinearity: object = EXPONENTIAL
    max_doublings: int = 60


@dataclass
class LambdaStarBracket:
    sigma: float
    lower: float
    upper: float
    lower_solution: object
    upper_sup_norm: float
    evaluations: int

    @property
    def lambda_star(self):
        return self.lower

    @property
    def bracket_width(self):
        return self.upper - self.lower


def _exists(lam, sigma, mesh, opts, max_iter):
    params = ProblemParams.on_ray(lam, sigma, mesh, opts.nonlinearity)
    try:
        return minimal_solution(params, cap=opts.cap, max_iter=max_iter), None
    except Diverged as exc:
        return None, exc


def bracket_lambda_star(sigma, mesh, opts=ContinuationOptions()):
    if not sigma > 0:
        raise InvalidParameter(f"σ must be positive, got {sigma}")
    evals = 0
    lam = opts.lam_start
    lower = None
    lower_sol = None
    fail = None
    for _ in range(opts.max_doublings):
        sol, exc = _exists(lam, sigma, mesh, opts, opts.max_iter)
        evals += 1
        if sol is None:
            fail = exc
            break
        lower, lower_sol = lam, sol
        lam *= 2.0
    else:
        raise InvalidParameter(f"no divergence found up to λ = {lam}")
    upper = lam
    if lower is None:
        # The start value already fails: walk down instead.
        for _ in range(opts.max_doublings):
            lam *= 0.5
            sol, exc = _exists(lam, sigma, mesh, opts, opts.max_iter)
            evals += 1
            if sol is not None:
                lower, lower_sol = lam, sol
                break
            upper, fail = lam, exc
        else:
            raise InvalidParameter("no existence found for any λ tried")

    while (upper - lower) / upper > opts.tol:
        rounds_left = math.ceil(math.log2((upper - lower) / (opts.tol * lower)))
        budget = opts.max_iter * (2 if rounds_left <= 2 else 1)
        mid = 0.5 * (lower + upper)
        sol, exc = _exists(mid, sigma, mesh, opts, budget)
        evals += 1
        if sol is None:
            upper, fail = mid, exc
        else:
            lower, lower_sol = mid, sol
    if lower_sol.sup_u > 0.5 * opts.cap or lower_sol.sup_v > 0.5 * opts.cap:
        raise CapTooLow(f"converged sup norm {max(lower_sol.sup_u, lower_sol.sup_v):.3g} is within a factor 2 of the cap {opts.cap}")
    return LambdaStarBracket(sigma, lower, upper, lower_sol, fail.last_sup_norm, evals)


def find_lambda_star(sigma, mesh, opts=ContinuationOptions()):
    """(λ*, bracket width); λ* is the largest λ at which existence was confirmed."""
    b = bracket_lambda_star(sigma, mesh, opts)
    return b.lambda_star, b.bracket_width


@dataclass
class BranchSample:
    k: int
    lam: float
    gam: float
    status: str = "ok"
    sup_u: float = float("nan")
    sup_v: float = float("nan")
    K: float = float("nan")
    lambda1: float = float("nan")
    m1: float = float("nan")
    m2: float = float("nan")
    ratio_min: float = float("nan")
    ratio_margin: float = float("nan")
    pair: object = field(default=None, repr=False)
    certificate: object = field(default=None, repr=False)

    @property
    def ok(self):
        return self.status == "ok"


@dataclass
class GrowthFit:
    slope: float = float("nan")
    intercept: float = float("nan")
    increment_ratio: float = float("nan")
    samples: int = 0


@dataclass
class RaySweepResult:
    sigma: float
    mesh: object
    samples: list
    lambda_star: float
    bracket_width: float
    extremal_snapshot: object
    classification: str
    growth_fit: GrowthFit

    @property
    def converged(self):
        return [s for s in self.samples if s.ok]

    @property
    def final_sup_u(self):
        good = self.converged
        return good[-1].sup_u if good else float("nan")

    def truncated(self, depth):
        """The same sweep cut at a smaller depth (samples do not depend on depth)."""
        samples = [s for s in self.samples if s.k <= depth]
        return RaySweepResult(
            self.sigma, self.mesh, samples, self.lambda_star, self.bracket_width,
            self.extremal_snapshot, _classify_single(samples), _growth_fit(samples, self.lambda_star),
        )


def _sample(k, lam, sigma, mesh, opts, keep_pairs):
    params = ProblemParams.on_ray(lam, sigma, mesh, opts.nonlinearity)
    out = BranchSample(k, lam, params.gam)
    try:
        pair = minimal_solution(params, cap=opts.cap, max_iter=4 * opts.max_iter)
        cert = stability_certificate(params, pair)
    except GelfandError as exc:
        out.status = f"failed: {type(exc).__name__}: {exc}"
        return out
    out.sup_u, out.sup_v = pair.sup_u, pair.sup_v
    out.K, out.lambda1 = cert.K, cert.lambda1
    out.m1, out.m2 = comparison_margins(pair)
    if sigma <= 1:
        out.ratio_min = cert.ratio_min
        out.ratio_margin = lemma2_margin(cert, sigma)
    else:
        out.ratio_min = float(np.min(cert.phi[:-1] / cert.psi[:-1]))
        out.ratio_margin = out.ratio_min - 1.0 / sigma
    if keep_pairs:
        out.pair, out.certificate = pair, cert
    return out


def _growth_fit(samples, lambda_star):
    good = [s for s in samples if s.ok][-FIT_SAMPLES:]
    if len(good) < 2:
        return GrowthFit(samples=len(good))
    x = np.array([-math.log(lambda_star - s.lam) for s in good])
    y = np.array([s.sup_u for s in good])
    slope, intercept = np.polyfit(x, y, 1)
    return GrowthFit(float(slope), float(intercept), _increment_ratio(good), len(good))


def _plateau(samples):
    good = {s.k: s for s in samples if s.ok}
    if not good:
        return False
    last = max(good)
    if last - 2 not in good:
        return False
    return abs(good[last].sup_u - good[last - 2].sup_u) <= PLATEAU_TOL * good[last].sup_u


def _classify_single(samples):
    good = [s for s in samples if s.ok]
    if len(good) < 3:
        return INCONCLUSIVE
    if _plateau(samples):
        return BOUNDED
    ratio = _increment_ratio(good)
    if ratio >= BLOWUP_RATIO:
        return BLOWUP
    return INCONCLUSIVE


def _increment_ratio(good):
    y = np.array([s.sup_u for s in good[-FIT_SAMPLES:]])
    inc = np.diff(y)
    if len(inc) < 2 or inc[0] <= 0 or inc[-1] <= 0:
        return float("nan")
    return float((inc[-1] / inc[0]) ** (1.0 / (len(inc) - 1)))


def sweep_ray(sigma, mesh, depth=10, opts=ContinuationOptions(), keep_pairs=False, bracket=None):
    if depth < 0:
        raise InvalidParameter(f"depth must be >= 0, got {depth}")
    if bracket is None:
        bracket = bracket_lambda_star(sigma, mesh, opts)
    lam_star = bracket.lambda_star
    samples = [_sample(k, lam_star * (1.0 - 2.0**-k), sigma, mesh, opts, keep_pairs) for k in range(1, depth + 1)]
    return RaySweepResult(
        sigma=sigma,
        mesh=mesh,
        samples=samples,
        lambda_star=lam_star,
        bracket_width=bracket.bracket_width,
        extremal_snapshot=bracket.lower_solution,
        classification=_classify_single(samples),
        growth_fit=_growth_fit(samples, lam_star),
    )


def classify_extremal(sweep, refinement):
    """Combine a sweep with its mesh-doubled twin into one verdict."""
    if sweep.mesh.dim != refinement.mesh.dim or not math.isclose(sweep.sigma, refinement.sigma, rel_tol=1e-12):
        raise MismatchedParams("sweeps differ in N or σ")
    a, b = sweep.final_sup_u, refinement.final_sup_u
    if not (np.isfinite(a) and np.isfinite(b)):
        return INCONCLUSIVE
    if _plateau(sweep.samples) and _plateau(refinement.samples) and abs(a - b) <= PLATEAU_TOL * max(a, b):
        return BOUNDED
    if sweep.classification == BLOWUP and refinement.classification == BLOWUP:
        return BLOWUP
    return INCONCLUSIVE


@dataclass
class CurvePoint:
    sigma: float
    lambda_star: float = float("nan")
    gamma_star: float = float("nan")
    bracket_width: float = float("nan")
    status: str = "ok"


@dataclass
class CriticalCurve:
    points: list
    mesh: dict
    tol: float

    def ok_points(self):
        return [p for p in self.points if p.status == "ok"]

    def swap_defects(self):
        """|λ*(σ) - γ*(1/σ)| minus the combined bracket width, per reciprocal pair."""
        by_sigma = {p.sigma: p for p in self.ok_points()}
        out = []
        for s, p in by_sigma.items():
            q = by_sigma.get(1.0 / s)
            if q is None or s > 1.0 / s:
                continue
            d1 = abs(p.lambda_star - q.gamma_star) - (p.bracket_width + q.sigma * q.bracket_width)
            d2 = abs(p.gamma_star - q.lambda_star) - (p.sigma * p.bracket_width + q.bracket_width)
            out.append((s, d1, d2))
        return out

    def is_antichain(self):
        """No point strictly dominates another beyond their bracket widths."""
        pts = self.ok_points()
        for p in pts:
            for q in pts:
                if p is q:
                    continue
                if q.lambda_star > p.lambda_star + p.bracket_width + q.bracket_width and q.gamma_star > p.gamma_star + p.sigma * p.bracket_width + q.sigma * q.bracket_width:
                    return False
        return True


def _curve_task(args):
    sigma, mesh, opts = args
    try:
        lam, width = find_lambda_star(sigma, mesh, opts)
    except GelfandError as exc:
        return CurvePoint(sigma, status=f"failed: {type(exc).__name__}: {exc}")
    return CurvePoint(sigma, lam, sigma * lam, width)


def default_workers():
    env = os.environ.get("GELFAND_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def trace_critical_curve(sigma_grid, mesh, opts=ContinuationOptions(), workers=1):
    sigma_grid = [float(s) for s in sigma_grid]
    if any(not s > 0 for s in sigma_grid):
        raise InvalidParameter("σ values must be positive")
    if sorted(sigma_grid) != sigma_grid:
        raise InvalidParameter("σ grid must be sorted")
    tasks = [(s, mesh, opts) for s in sigma_grid]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            points = list(pool.map(_curve_task, tasks))
    else:
        points = [_curve_task(t) for t in tasks]
    return CriticalCurve(points, mesh.descriptor(), opts.tol)
