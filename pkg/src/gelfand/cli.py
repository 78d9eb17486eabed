"""Command-line front end: solve, curve, sweep, verify.

Exit codes: 0 success, 1 usage/validation, 2 divergence (no solution),
3 verification failure, 4 numerical failure.
"""

import argparse
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import analysis, continuation
from .artifacts import write_csv, write_json
from .core import Nonlinearity, ProblemParams, branch_monotonicity_check, minimal_solution
from .errors import (
    CapTooLow,
    Diverged,
    EmptyWindow,
    GelfandError,
    InvalidDimension,
    InvalidParameter,
    MeshTooCoarse,
    WrongOrdering,
)
from .mesh import build_mesh
from .stability import K_TOL, RATIO_TOL, stability_certificate

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED, EXIT_VERIFY, EXIT_NUMERIC = 0, 1, 2, 3, 4

VALIDATION_ERRORS = (InvalidParameter, InvalidDimension, MeshTooCoarse, EmptyWindow, WrongOrdering)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    dim: int = 3
    n: int = 200
    sigma: float = 1.0
    sigmas: tuple = (1.0,)
    lam: float = None
    depth: int = 10
    tol: float = 1e-4
    cap: float = 50.0
    max_iter: int = 5000
    nonlinearity: Nonlinearity = Nonlinearity()
    out: Path = Path("gelfand-out")
    certify: bool = False
    perturb: bool = False

    def validate(self):
        if self.dim < 1:
            raise UsageError("dimension must be >= 1")
        if self.n < 8:
            raise UsageError("n must be >= 8")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise UsageError("σ must be positive")
        if not self.sigmas or any(not (math.isfinite(s) and s > 0) for s in self.sigmas):
            raise UsageError("every σ must be positive")
        if self.lam is not None and not (math.isfinite(self.lam) and self.lam > 0):
            raise UsageError("λ must be positive")
        if self.depth < 0:
            raise UsageError("depth must be >= 0")
        if not 0 < self.tol < 1:
            raise UsageError("tol must lie in (0, 1)")
        if not self.cap > 0:
            raise UsageError("cap must be positive")
        if self.max_iter < 1:
            raise UsageError("max-iter must be >= 1")
        if self.command == "solve" and self.lam is None:
            raise UsageError("solve needs --lambda")
        return self

    def options(self):
        return continuation.ContinuationOptions(tol=self.tol, cap=self.cap, max_iter=self.max_iter, nonlinearity=self.nonlinearity)

    def describe(self):
        return {
            "dim": self.dim,
            "n": self.n,
            "sigma": self.sigma,
            "sigmas": list(self.sigmas),
            "lambda": self.lam,
            "depth": self.depth,
            "tol": self.tol,
            "cap": self.cap,
            "max_iter": self.max_iter,
            "nonlinearity": str(self.nonlinearity),
        }


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _float_list(text):
    try:
        return tuple(float(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--dim", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--sigma", type=float)
    common.add_argument("--sigmas", type=_float_list)
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--depth", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--cap", type=float)
    common.add_argument("--max-iter", dest="max_iter", type=int)
    common.add_argument("--nonlinearity", help="exp or power:p")
    common.add_argument("--out", help="output directory")
    common.add_argument("--certify", action="store_const", const=True)
    common.add_argument("--perturb", action="store_const", const=True, help="test hook: corrupt one sample before verifying")
    common.add_argument("--config", help="key=value file; flags take precedence")

    p = _Parser(prog="gelfand", description="Minimal branches and extremal solutions of the Gelfand system.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("solve", parents=[common], help="minimal solution at one (λ, γ = σλ)")
    sub.add_parser("curve", parents=[common], help="critical curve points λ*(σ)")
    sub.add_parser("sweep", parents=[common], help="minimal branch along one ray")
    sub.add_parser("verify", parents=[common], help="check the inequality chain along one ray")
    return p


_CONFIG_KEYS = {
    "dim": int,
    "n": int,
    "sigma": float,
    "sigmas": _float_list,
    "lambda": float,
    "lam": float,
    "depth": int,
    "tol": float,
    "cap": float,
    "max_iter": int,
    "max-iter": int,
    "nonlinearity": str,
    "out": str,
    "certify": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
    "perturb": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
}


def read_config(path):
    """Flat ``key = value`` file; blank lines and ``#`` comments ignored."""
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            parsed = _CONFIG_KEYS[key](value)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
        key = {"lambda": "lam", "max-iter": "max_iter"}.get(key, key)
        values[key] = parsed
    return values


def make_config(args):
    merged = read_config(args.config) if args.config else {}
    for f in fields(RunConfig):
        if f.name == "command":
            continue
        v = getattr(args, f.name, None)
        if v is not None:
            merged[f.name] = v
    try:
        if "nonlinearity" in merged and isinstance(merged["nonlinearity"], str):
            merged["nonlinearity"] = Nonlinearity.parse(merged["nonlinearity"])
    except InvalidParameter as exc:
        raise UsageError(str(exc)) from None
    if "out" in merged:
        merged["out"] = Path(merged["out"])
    if "sigmas" in merged:
        merged["sigmas"] = tuple(merged["sigmas"])
    elif "sigma" in merged:
        merged["sigmas"] = (merged["sigma"],)
    return RunConfig(command=args.command, **merged).validate()


def cmd_solve(cfg, err):
    mesh = build_mesh(cfg.dim, cfg.n)
    params = ProblemParams.on_ray(cfg.lam, cfg.sigma, mesh, cfg.nonlinearity)
    try:
        pair = minimal_solution(params, cap=cfg.cap, max_iter=cfg.max_iter)
    except Diverged as exc:
        err(f"diverged: {exc} (last sup norm {exc.last_sup_norm:.6g}); (λ, γ) lies above the critical curve at this resolution")
        write_json(cfg.out / "solution.json", "solution", {"config": cfg.describe(), "status": "diverged", "last_sup_norm": exc.last_sup_norm, "iterations": exc.iterations})
        return EXIT_DIVERGED
    meta = {
        "config": cfg.describe(),
        "status": "converged",
        "lambda": params.lam,
        "gamma": params.gam,
        "iterations": pair.iterations,
        "newton_iterations": pair.newton_iterations,
        "residual_norm": pair.residual_norm,
        "sup_u": pair.sup_u,
        "sup_v": pair.sup_v,
    }
    header = ["r", "u", "v"]
    cols = [mesh.radii, pair.u, pair.v]
    if cfg.certify:
        cert = stability_certificate(params, pair)
        meta["certificate"] = {"K": cert.K, "lambda1": cert.lambda1, "ratio_min": cert.ratio_min}
        header += ["phi", "psi"]
        cols += [cert.phi, cert.psi]
    write_csv(cfg.out / "solution.csv", header, zip(*(map(float, c) for c in cols)))
    write_json(cfg.out / "solution.json", "solution", meta)
    return EXIT_OK


def cmd_curve(cfg, err):
    mesh = build_mesh(cfg.dim, cfg.n)
    sigmas = sorted(cfg.sigmas)
    curve = continuation.trace_critical_curve(sigmas, mesh, cfg.options(), workers=continuation.default_workers())
    rows = [(p.sigma, p.lambda_star, p.gamma_star, p.bracket_width, p.status) for p in curve.points]
    write_csv(cfg.out / "curve.csv", ["sigma", "lambda_star", "gamma_star", "bracket_width", "status"], rows)
    write_json(cfg.out / "curve.json", "curve", {"config": cfg.describe(), "mesh": curve.mesh, "tol": curve.tol, "points": len(rows), "failures": sum(p.status != "ok" for p in curve.points)})
    for p in curve.points:
        if p.status != "ok":
            err(f"σ = {p.sigma}: {p.status}")
    return EXIT_OK if curve.ok_points() else EXIT_NUMERIC


def _sweep(cfg, keep_pairs=False):
    mesh = build_mesh(cfg.dim, cfg.n)
    return continuation.sweep_ray(cfg.sigma, mesh, cfg.depth, cfg.options(), keep_pairs=keep_pairs)


def cmd_sweep(cfg, err):
    sw = _sweep(cfg)
    rows = [(s.lam, s.sup_u, s.sup_v, s.K, s.m1, s.m2) for s in sw.samples if s.ok]
    write_csv(cfg.out / "sweep.csv", ["lambda", "sup_u", "sup_v", "K", "m1", "m2"], rows)
    failures = [{"k": s.k, "lambda": s.lam, "status": s.status} for s in sw.samples if not s.ok]
    gf = sw.growth_fit
    write_json(cfg.out / "sweep.json", "sweep", {
        "config": cfg.describe(),
        "sigma": sw.sigma,
        "lambda_star": sw.lambda_star,
        "bracket_width": sw.bracket_width,
        "classification": sw.classification,
        "growth_fit": {"slope": gf.slope, "intercept": gf.intercept, "increment_ratio": gf.increment_ratio, "samples": gf.samples},
        "extremal_sup_u": sw.extremal_snapshot.sup_u,
        "extremal_sup_v": sw.extremal_snapshot.sup_v,
        "failures": failures,
    })
    for f in failures:
        err(f"sample k={f['k']}: {f['status']}")
    return EXIT_OK


def _check(checks, name, k, value, threshold, passed):
    checks.append({"check": name, "sample": k, "value": value, "threshold": threshold, "pass": bool(passed)})


def cmd_verify(cfg, err):
    if cfg.nonlinearity.kind != "exp":
        raise UsageError("verify supports the exponential nonlinearity only")
    N = cfg.dim
    if not 3 <= N <= 9:
        raise UsageError(f"the regularity window is stated for 3 <= N <= 9, got N = {N}")
    sigma = cfg.sigma if cfg.sigma <= 1 else 1.0 / cfg.sigma
    t = analysis.select_t(N, sigma)
    checks = []
    _check(checks, "exponent_window", None, cfg.sigma, [(N - 2) / 8.0, 8.0 / (N - 2)], analysis.exponent_window(N, cfg.sigma))
    _check(checks, "integrability 2t+1 > N/2", None, 2 * t + 1, N / 2.0, 2 * t + 1 > N / 2.0)

    sw = _sweep(cfg, keep_pairs=True)
    bad = [s for s in sw.samples if not s.ok]
    if bad:
        for s in bad:
            err(f"sample k={s.k}: {s.status}")
        return EXIT_NUMERIC
    if cfg.perturb and sw.samples:
        target = sw.samples[0].pair
        mid = cfg.n // 2
        target.v = target.v.copy()
        target.v[mid] -= 0.1
    h2 = sw.mesh.h**2
    for s in sw.samples:
        pair, cert = s.pair, s.certificate
        m1, m2 = analysis.comparison_margins(pair)
        _check(checks, "comparison v - σu >= 0", s.k, m1, -1e-8, m1 >= -1e-8)
        _check(checks, "comparison u - v >= 0", s.k, m2, -1e-8, m2 >= -1e-8)
        _check(checks, "semistability K >= 0", s.k, cert.K, -K_TOL, cert.K >= -K_TOL)
        _check(checks, "K < lambda1", s.k, cert.lambda1 - cert.K, 0.0, cert.K < cert.lambda1)
        _check(checks, "ratio psi/phi >= σ", s.k, s.ratio_margin, -RATIO_TOL, s.ratio_margin >= -RATIO_TOL)
        rep = analysis.energy_report(pair.params, pair, cert, t)
        _check(checks, "hardy bound relative slack", s.k, rep.z_slack, -10 * h2, rep.z_ok)
        _check(checks, "final bound relative slack", s.k, rep.final_slack, -10 * h2, rep.final_ok)
        _check(checks, "energy identity residual finite", s.k, rep.identity_zz_residual, None, math.isfinite(rep.identity_zz_residual))
    pairs = [s.pair for s in sw.samples]
    if len(pairs) >= 2:
        margin = branch_monotonicity_check(pairs)
        _check(checks, "branch monotone in λ", None, margin, -1e-9, margin >= -1e-9)
    if sw.samples:
        # The energy identity is exact in the continuum: its discrete residual must fall at second order.
        deepest = sw.samples[-1]
        fine = build_mesh(N, 2 * cfg.n)
        fparams = ProblemParams(deepest.lam, deepest.gam, fine)
        fpair = minimal_solution(fparams, cap=cfg.cap, max_iter=4 * cfg.max_iter)
        fcert = stability_certificate(fparams, fpair)
        coarse = analysis.energy_report(deepest.pair.params, deepest.pair, deepest.certificate, t)
        finer = analysis.energy_report(fparams, fpair, fcert, t)
        order = math.log2(coarse.identity_zz_residual / finer.identity_zz_residual)
        _check(checks, "energy identity refinement order", deepest.k, order, 1.8, order >= 1.8)

    failed = [c for c in checks if not c["pass"]]
    write_json(cfg.out / "verify.json", "verify", {
        "config": cfg.describe(),
        "t": t,
        "lambda_star": sw.lambda_star,
        "bracket_width": sw.bracket_width,
        "checks": checks,
        "all_pass": not failed,
    })
    for c in failed:
        err(f"FAILED {c['check']} (sample {c['sample']}): value {c['value']!r} vs threshold {c['threshold']!r}")
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {"solve": cmd_solve, "curve": cmd_curve, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv=None):
    def err(msg):
        print(msg, file=sys.stderr)

    try:
        args = build_parser().parse_args(argv)
        cfg = make_config(args)
        with np.errstate(over="ignore"):
            return COMMANDS[cfg.command](cfg, err)
    except UsageError as exc:
        err(f"gelfand: error: {exc}")
        return EXIT_USAGE
    except VALIDATION_ERRORS as exc:
        err(f"gelfand: error: {exc}")
        return EXIT_USAGE
    except Diverged as exc:
        err(f"gelfand: diverged: {exc}")
        return EXIT_DIVERGED
    except CapTooLow as exc:
        err(f"gelfand: {exc}; raise --cap")
        return EXIT_NUMERIC
    except GelfandError as exc:
        err(f"gelfand: numerical failure: {type(exc).__name__}: {exc}")
        return EXIT_NUMERIC


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
