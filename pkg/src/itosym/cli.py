"""Command-line interface: ``itosym {classify,verify,simulate,convergence}``.

Exit codes: 0 symmetric / pass, 1 no symmetry / fail, 2 usage or runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import convergence as conv
from .errors import ItosymError, SpecError
from .kozlov import exact_solution
from .model import ItoEquation, equation_from_json
from .paths import euler_maruyama, sample_wiener, save_path, uniform_grid
from . import expr as E
from .symmetry import (
    DEFAULT_X0,
    DEFAULTS,
    FAMILIES,
    NoSymmetry,
    classify,
    fit_drift,
    make_family,
    residual_first_order,
    residual_noise_eqs,
    residual_second_order,
)

EXIT_OK, EXIT_NO, EXIT_ERR = 0, 1, 2


class CLIError(Exception):
    pass


def _params(items) -> dict[str, float]:
    out = {}
    for item in items or []:
        for part in item.split(","):
            if not part:
                continue
            key, sep, val = part.partition("=")
            if not sep:
                raise CLIError(f"--params expects k=v, got {part!r}")
            try:
                out[key.strip()] = float(val)
            except ValueError:
                raise CLIError(f"--params {key}: {val!r} is not a number") from None
    return out


def _family(args):
    try:
        return make_family(args.family, **_params(args.params))
    except (ValueError, TypeError) as exc:
        raise CLIError(str(exc)) from exc


def _positive(name, v):
    if not (v > 0 and math.isfinite(v)):
        raise CLIError(f"{name} must be positive, got {v}")


def _emit(obj, dest):
    text = json.dumps(obj, indent=2, allow_nan=True)
    if dest:
        Path(dest).write_text(text + "\n")
    else:
        print(text)


# -- classify ----------------------------------------------------------------


def _load_spec(path):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CLIError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        return equation_from_json(obj)
    except SpecError as exc:
        raise CLIError(f"{path}: {exc}") from exc


def cmd_classify(args) -> int:
    eq = _load_spec(args.spec)
    res = classify(eq.noises, tol=args.tol)
    if isinstance(res, NoSymmetry):
        _emit({"no_symmetry": res.reason}, args.out)
        return EXIT_NO
    order = list(res.noise_order)
    fam_cls = FAMILIES[res.family]
    free = fit_drift(res, eq.drift)
    if free is None:
        _emit({"no_symmetry": "DriftOutsideFamily", "candidate_family": res.family,
               "noise_params": res.noise_params, "free": list(res.free),
               "noise_order": order}, args.out)
        return EXIT_NO
    fam = res.instantiate(**free)
    _emit({
        "family": res.family,
        "noise_params": res.noise_params,
        "constraints": dict(fam_cls.constraints),
        "free": list(res.free),
        "drift": free,
        "phi": str(fam.phi),
        "noise_order": order,
        "domain": [None if math.isinf(v) else v for v in fam_cls.domain],
    }, args.out)
    return EXIT_OK


# -- verify ------------------------------------------------------------------


def cmd_verify(args) -> int:
    fam = _family(args)
    if args.points < 1:
        raise CLIError("--points must be at least 1")
    _positive("--tol", args.tol)
    eq = fam.equation
    if args.drift_shift:
        eq = ItoEquation(E._sum([eq.drift, E.Const(args.drift_shift)]), eq.noises, eq.domain)
    phi = fam.phi
    rng = np.random.default_rng(args.seed)
    lo, hi = (0.5, 1.5) if fam.domain[0] == 0.0 else (-0.5, 0.5)
    worst = {"second_order": 0.0, "first_order": 0.0, "noise": 0.0, "equivalence": 0.0}
    for _ in range(args.points):
        pt = (rng.uniform(lo, hi), rng.uniform(0.0, 0.5), *rng.uniform(-0.5, 0.5, len(eq.noises)))
        r2 = residual_second_order(eq, phi, pt)
        r1 = residual_first_order(eq, phi, pt)
        rn = residual_noise_eqs(eq, phi, pt)
        worst["second_order"] = max(worst["second_order"], abs(r2))
        worst["first_order"] = max(worst["first_order"], abs(r1))
        worst["noise"] = max(worst["noise"], *map(abs, rn))
        worst["equivalence"] = max(worst["equivalence"], abs(r1 - r2))
    max_res = max(worst["second_order"], worst["first_order"], worst["noise"])
    ok = max_res <= args.tol
    _emit({"family": fam.tag, "params": fam.params, "points": args.points, "seed": args.seed,
           "drift_shift": args.drift_shift, "max_residuals": worst, "max_residual": max_res,
           "tol": args.tol, "pass": ok}, args.out)
    return EXIT_OK if ok else EXIT_NO


# -- simulate ----------------------------------------------------------------


def cmd_simulate(args) -> int:
    fam = _family(args)
    _positive("--dt", args.dt)
    if args.T < 0:
        raise CLIError("--T must be non-negative")
    x0 = DEFAULT_X0[fam.tag] if args.x0 is None else args.x0
    try:
        grid = uniform_grid(args.T, args.dt)
    except ItosymError as exc:
        raise CLIError(str(exc)) from exc
    path = sample_wiener(len(fam.noises), grid, args.seed)
    if args.save_path:
        save_path(path, args.save_path)
    ex = exact_solution(fam, None, x0, path)
    em = euler_maruyama(fam.equation, x0, path)
    n = min(len(ex.times), len(em.times))
    w = path.values()
    rows = [[repr(float(grid[i])), repr(float(ex.states[i])), repr(float(em.states[i])),
             repr(float(ex.transformed[i]))] + [repr(float(v)) for v in w[:, i]] for i in range(n)]
    header = ["t", "x_exact", "x_em", "y"] + [f"w_{k + 1}" for k in range(path.n_noises)]
    status = "complete" if ex.complete and em.complete else "domain_exit"
    summary = {
        "family": fam.tag, "params": fam.params, "x0": x0, "seed": args.seed, "dt": args.dt,
        "T": args.T, "rows": n, "status": status,
        "exact_status": ex.status, "exact_exit_time": ex.exit_time,
        "em_status": em.status, "em_exit_time": em.exit_time,
        "terminal_time": float(grid[n - 1]),
        "terminal_exact": float(ex.states[n - 1]), "terminal_em": float(em.states[n - 1]),
        "terminal_error": abs(float(ex.states[n - 1]) - float(em.states[n - 1])),
    }
    if args.format == "csv":
        fh = open(args.out, "w", newline="") if args.out else sys.stdout
        try:
            out = csv.writer(fh)
            out.writerow(header)
            out.writerows(rows)
        finally:
            if args.out:
                fh.close()
        if args.out:
            print(json.dumps(summary, indent=2))
        else:
            print(json.dumps(summary), file=sys.stderr)
    else:
        _emit({**summary, "columns": header, "data": [[float(v) for v in r] for r in rows]}, args.out)
    return EXIT_OK


# -- convergence -------------------------------------------------------------


def cmd_convergence(args) -> int:
    fam = _family(args)
    if args.paths < 1:
        raise CLIError("--paths must be at least 1")
    _positive("--T", args.T)
    x0 = DEFAULT_X0[fam.tag] if args.x0 is None else args.x0
    if args.dts:
        try:
            dts = [float(v) for v in args.dts.split(",") if v.strip()]
        except ValueError:
            raise CLIError(f"--dts must be a comma-separated list of numbers, got {args.dts!r}") from None
    else:
        dts = conv.halving_levels(args.dt, args.levels)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", conv.HighVarianceWarning)
            rep = conv.convergence_study(fam, x0, dts, args.paths, args.seed, args.T)
    except conv.InsufficientLevels as exc:
        raise CLIError(str(exc)) from exc
    for wmsg in caught:
        print(f"warning: {wmsg.message}", file=sys.stderr)
    _emit({**rep.to_json(), "params": fam.params, "x0": x0}, args.out)
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def _family_args(p):
    p.add_argument("--family", required=True, choices=sorted(FAMILIES),
                   help="symmetric family tag")
    p.add_argument("--params", action="append", metavar="k=v",
                   help="override family parameters (repeatable or comma separated); defaults: "
                   + "; ".join(f"{k}: " + ", ".join(f"{n}={v}" for n, v in d.items())
                               for k, d in DEFAULTS.items()))
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--out", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="itosym",
        description="Classify Ito equations with several noises by their standard symmetries "
                    "and check the exact solutions against Euler-Maruyama.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify an equation JSON spec",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--spec", required=True, help="equation JSON file ('-' for stdin)")
    p.add_argument("--tol", type=float, default=1e-8, help="relative J/K constancy tolerance")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=["json"], default="json", help="output format")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify", help="determining-equation residuals at random points",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _family_args(p)
    p.add_argument("--points", type=int, default=32, help="number of random sample points")
    p.add_argument("--tol", type=float, default=1e-9, help="pass threshold on the max residual")
    p.add_argument("--drift-shift", type=float, default=0.0,
                   help="add this constant to the drift before checking")
    p.add_argument("--format", choices=["json"], default="json", help="output format")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="exact and Euler-Maruyama solutions on one path",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _family_args(p)
    p.add_argument("--x0", type=float, default=None, help="initial state (family default)")
    p.add_argument("--dt", type=float, default=1e-3, help="time step")
    p.add_argument("--T", type=float, default=1.0, help="final time")
    p.add_argument("--format", choices=["csv", "json"], default="csv", help="output format")
    p.add_argument("--save-path", help="also write the Wiener path (.npz or .csv)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("convergence", help="empirical strong order of Euler-Maruyama",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _family_args(p)
    p.add_argument("--x0", type=float, default=None, help="initial state (family default)")
    p.add_argument("--dts", help="comma-separated halving step sizes (overrides --dt/--levels)")
    p.add_argument("--dt", type=float, default=1e-2, help="coarsest step size")
    p.add_argument("--levels", type=int, default=4, help="number of halving levels")
    p.add_argument("--T", type=float, default=1.0, help="final time")
    p.add_argument("--paths", type=int, default=200, help="Monte Carlo paths")
    p.add_argument("--format", choices=["json"], default="json", help="output format")
    p.set_defaults(func=cmd_convergence)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (CLIError, ItosymError, ValueError, OSError) as exc:
        print(f"itosym {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERR


if __name__ == "__main__":
    sys.exit(main())
