"""Command-line front end: ``genopt {laws,optimize,statemap,flowcheck,experiment}``.

Exit codes: 0 success, 1 a check failed, 2 usage error, 3 numeric divergence.
Every command echoes its fully resolved configuration at the top of its output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import experiment, flow, laws, optim, statemap
from .poly import PolyMap, format_poly
from .ring import parse_scalar
from .smooth import ExprMap

OK, CHECK_FAILED, USAGE, DIVERGED = 0, 1, 2, 3
SEED_ENV = "GENOPT_SEED"
METHODS = ("gd", "momentum", "adagrad", "newton", "integer-gd")


class UsageError(Exception):
    pass


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args, skip=("func",)) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# laws --------------------------------------------------------------------------

def cmd_laws(args) -> int:
    ids = laws.ALL_LAWS if args.law == "all" else (args.law,)
    reports = [laws.check_law(law, args.instance, args.cases, args.seed) for law in ids]
    passed = all(r.passed for r in reports)
    body = {"config": _config(args), "passed": passed, "reports": [r.to_json() for r in reports]}
    _emit(json.dumps(body, indent=2) + "\n", args.out)
    return OK if passed else CHECK_FAILED


# optimize ----------------------------------------------------------------------

def _parse_objective(text: str, domain: str, nvars: int | None):
    try:
        P = PolyMap.parse(text, nvars)
    except Exception as e:
        raise UsageError(f"cannot parse objective: {e}") from None
    if P.cod != 1:
        raise UsageError("objective must have a single component")
    if domain == "poly-int" and any(not isinstance(c, int) for p in P.comps for c in p.terms.values()):
        raise UsageError("poly-int objectives need integer coefficients")
    return P if domain != "smooth" else ExprMap.from_poly(P)


def _scalars(text: str, exact: bool) -> list:
    try:
        return [parse_scalar(v, exact=exact) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_optimize(args) -> int:
    exact = args.domain != "smooth"
    start = _scalars(args.start, exact)
    alpha = parse_scalar(args.alpha, exact=exact)
    if args.domain == "poly-int" and args.method != "integer-gd" and not isinstance(alpha, int):
        raise UsageError("poly-int needs an integer step size; use --domain poly-rat")
    if args.steps < 0:
        raise UsageError("--steps must be non-negative")
    l = _parse_objective(args.objective, args.domain, None)
    n = l.dom
    header = [f"config: {json.dumps(_config(args))}", f"objective: {args.objective}"]

    if args.method == "integer-gd":
        if args.domain != "poly-int":
            raise UsageError("integer-gd runs on --domain poly-int")
        if len(start) != n or not all(isinstance(v, int) for v in start):
            raise UsageError(f"integer-gd needs {n} integer start values")
        obj = optim.as_objective(l)
        states, x = [list(start)], list(start)
        for _ in range(args.steps):
            x = optim.integer_gd_step(obj, x)
            states.append(x)
        traj = optim.Trajectory(states, [obj(s) for s in states], 1, "integer-gd")
        _emit(traj.to_csv(header), args.out)
        return OK

    try:
        obj = optim.as_objective(l)
        if args.method == "newton":
            obj = optim.with_affine_inverse(obj)
        opt = optim.FUNCTORS[args.method](obj)
    except optim.UnsupportedDomain as e:
        raise UsageError(f"{e} (domain {args.domain})") from None
    except optim.NotAnObjective as e:
        raise UsageError(str(e)) from None

    if len(start) == n and opt.dimension == 2:
        fill = 1 if args.method == "adagrad" else 0
        start = start + [float(fill) if not exact else fill] * n
    if len(start) != n * opt.dimension:
        raise UsageError(f"{args.method} needs {n} or {n * opt.dimension} start values, got {len(start)}")
    try:
        traj = optim.iterate(opt, start, alpha, args.steps)
    except optim.Diverged as e:
        _emit(e.trajectory.to_csv(header + [f"diverged: {e}"]), args.out)
        print(f"diverged: {e}", file=sys.stderr)
        return DIVERGED
    _emit(traj.to_csv(header), args.out)
    return OK


# statemap ----------------------------------------------------------------------

def cmd_statemap(args) -> int:
    if args.m < 1:
        raise UsageError("--m must be at least 1")
    x0 = args.x0
    try:
        if x0 is None:
            x0 = statemap.smallest_anchor(args.a, args.b, args.m)
        sol = statemap.solve(statemap.build_system(args.a, args.b, args.c, args.m, x0))
    except statemap.Infeasible as e:
        hint = ""
        try:
            r, d = statemap.feasible_anchors(args.a, args.b, args.m)
            hint = f"; feasible anchors are x0 = {r} mod {d}" if d else f"; the only feasible anchor is x0 = {r}"
        except statemap.Infeasible:
            hint = "; no anchor admits an integer state map for this objective"
        print(f"infeasible: {e}{hint}", file=sys.stderr)
        return CHECK_FAILED
    _emit(statemap.to_csv(sol), args.out)
    return OK


# flowcheck ---------------------------------------------------------------------

def _flow_report(path: str, delta) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = statemap.read_csv(fh.read())
    f = flow.gradient_flow(data["objective"], data["state_map"], data["tau"])
    checks = [flow.verify_flow(f), flow.check_descending(f, 1), flow.inner_product_identity(f)]
    report = {
        "file": path,
        "objective": format_poly(data["objective"][0]),
        "state_map": format_poly(data["state_map"][0]),
        "checks": [c.to_json() for c in checks],
        "passed": all(c.passed for c in checks),
    }
    if delta is not None:
        report["convergence"] = flow.check_convergence(f, delta).to_json()
    return report


def cmd_flowcheck(args) -> int:
    delta = None
    if args.delta is not None:
        delta = parse_scalar(args.delta)
        if not delta > 0:
            raise UsageError("--delta must be positive")
    try:
        reports = [_flow_report(p, delta) for p in args.flow]
    except (OSError, KeyError, ValueError) as e:
        raise UsageError(f"cannot read flow file: {e}") from None
    passed = all(r["passed"] for r in reports)
    body = {"config": _config(args), "passed": passed, "flows": reports}
    _emit(json.dumps(body, indent=2) + "\n", args.out)
    return OK if passed else CHECK_FAILED


# experiment --------------------------------------------------------------------

def cmd_experiment(args) -> int:
    try:
        cfg = experiment.ExperimentConfig(
            steps=tuple(args.steps),
            experiments=args.experiments,
            polys_per_experiment=args.polys,
            bound=args.bound,
            seed=args.seed,
            magnitude=args.magnitude,
        )
    except ValueError as e:
        raise UsageError(str(e)) from None
    report = experiment.run_table1(cfg)
    _emit(report.to_json() + "\n", args.out)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(report.per_experiment_csv())
    return OK


# parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    seed = default_seed()
    p = argparse.ArgumentParser(prog="genopt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("laws", help="property-check the derivative axioms")
    s.add_argument("--instance", choices=sorted(laws.INSTANCES), default="poly-int")
    s.add_argument("--law", choices=list(laws.ALL_LAWS) + ["all"], default="all")
    s.add_argument("--cases", type=int, default=100)
    s.add_argument("--seed", type=int, default=seed)
    s.add_argument("--out")
    s.set_defaults(func=cmd_laws)

    s = sub.add_parser("optimize", help="iterate an optimizer and write its trajectory as CSV")
    s.add_argument("--domain", choices=("poly-int", "poly-rat", "smooth"), default="poly-rat")
    s.add_argument("--objective", required=True, help="polynomial text, e.g. 'x1^2 + 2*x2^2'")
    s.add_argument("--method", choices=METHODS, default="gd")
    s.add_argument("--start", required=True, help="comma-separated start state")
    s.add_argument("--alpha", default="1/10")
    s.add_argument("--steps", type=int, default=10)
    s.add_argument("--out")
    s.set_defaults(func=cmd_optimize)

    s = sub.add_parser("statemap", help="solve for an integer polynomial state map")
    s.add_argument("--a", type=int, default=1)
    s.add_argument("--b", type=int, default=0)
    s.add_argument("--c", type=int, default=0)
    s.add_argument("--m", type=int, default=6)
    s.add_argument("--x0", type=int, default=None, help="anchor s(1); defaults to the smallest feasible one")
    s.add_argument("--out")
    s.set_defaults(func=cmd_statemap)

    s = sub.add_parser("flowcheck", help="check statemap CSV files as gradient flows")
    s.add_argument("--flow", nargs="+", required=True)
    s.add_argument("--delta", default=None, help="also scan for convergence at this tolerance")
    s.add_argument("--out")
    s.set_defaults(func=cmd_flowcheck)

    s = sub.add_parser("experiment", help="run an experiment")
    esub = s.add_subparsers(dest="name", required=True)
    t = esub.add_parser("table1", help="integer gradient descent vs random search")
    d = experiment.ExperimentConfig()
    t.add_argument("--steps", type=int, nargs="+", default=list(d.steps))
    t.add_argument("--experiments", type=int, default=d.experiments)
    t.add_argument("--polys", type=int, default=d.polys_per_experiment)
    t.add_argument("--bound", type=int, default=d.bound)
    t.add_argument("--magnitude", type=int, default=d.magnitude)
    t.add_argument("--seed", type=int, default=seed)
    t.add_argument("--out")
    t.add_argument("--csv", help="also write per-experiment frequencies here")
    t.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return USAGE
    except SystemExit as e:
        return USAGE if e.code else OK
    try:
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
