"""Command-line experiment runner.

Subcommands: ``run`` (one solver on one instance, trace to CSV), ``sweep``
(grid over initial-curvature fractions and solvers with a summary table),
``check`` (apply diagnostics to a written trace; exit 1 on violation),
``parse`` (validate a LIBSVM file) and ``gen`` (emit a synthetic dataset).

All randomness flows from ``--seed``; per-component seeds are derived with
fixed offsets.  Exit codes: 0 success, 1 check/validation failure, 2 usage.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import dataio, diagnostics, instances, solvers
from .oracles import euclidean_kernel

THETA_GRID = (0.05, 0.01, 0.005, 0.001)

_X0_OFFSET = 1000003
_PROBE_OFFSET = 2000003

_FAMILY_OF_SOLVER = {
    "ac-pgm": "pgm",
    "pgm-constant": None,
    "ac-bpgm": "bpgm",
    "ac-cgm": "cgm",
    "ac-rgm": "rgm",
    "armijo": "armijo",
    "reduced-armijo": "armijo",
}

_DEFAULT_ALPHA = {"pgm": 1.1, "bpgm": 1.1, "cgm": 0.6, "rgm": 0.6}
_DEFAULT_TOL = {"pgm": 1e-6, "bpgm": 1e-6, "cgm": 1e-6, "rgm": 1e-4,
                "armijo": 1e-4, None: 1e-6}


class UsageError(Exception):
    pass


def _build_instance(args):
    """Returns (kind, problem, x0, kernel, curvature_ref)."""
    seed = args.seed
    name = args.instance
    if name == "logreg-trimmed":
        if args.data:
            dataset = dataio.load_libsvm(args.data)
            m = dataset.features.n_rows
            lam1 = args.lambda1 if args.lambda1 is not None else 1e-2 / m
            lam2 = args.lambda2 if args.lambda2 is not None else 10.0 / m
            model = instances.LogisticTrimmedL1(
                dataset.features, dataset.labels, lam1, lam2, args.kappa,
                provenance={"instance": "logreg-trimmed", "data": str(args.data),
                            "m": m, "n": dataset.features.n_cols,
                            "lambda1": lam1, "lambda2": lam2, "kappa": args.kappa})
        else:
            if args.m is None or args.n is None:
                raise UsageError("logreg-trimmed needs --data or --m/--n")
            model = instances.synthetic_logreg(args.m, args.n, seed,
                                               lambda1=args.lambda1,
                                               lambda2=args.lambda2,
                                               kappa=args.kappa)
        problem = model.composite()
        if args.paper_l:
            problem = instances.CompositeProblem(
                smooth_value=problem.smooth_value,
                smooth_gradient=problem.smooth_gradient,
                nonsmooth_value=problem.nonsmooth_value,
                prox=problem.prox,
                known_L=model.smooth_constant(literal_nonsmooth_weight=True),
                provenance=problem.provenance)
        return "composite", problem, np.zeros(model.n), None, problem.known_L
    if name in ("quadratic", "quad-trimmed"):
        if args.n is None:
            raise UsageError(f"{name} needs --n")
        trimmed = None
        if name == "quad-trimmed":
            lam2 = args.lambda2 if args.lambda2 is not None else 0.1
            trimmed = (lam2, args.kappa)
        problem = instances.quadratic_problem(args.n, seed, trimmed=trimmed)
        return "composite", problem, np.zeros(args.n), None, problem.known_L
    if name == "holder":
        if args.n is None:
            raise UsageError("holder needs --n")
        problem = instances.holder_toy(args.nu, args.n)
        rng = np.random.default_rng(seed + _X0_OFFSET)
        x0 = rng.standard_normal(args.n)
        x0 /= np.linalg.norm(x0)
        return "composite", problem, x0, None, None
    if name == "quartic-bregman":
        if args.n is None:
            raise UsageError("quartic-bregman needs --n")
        sensors = args.m if args.m is not None else 2 * args.n
        problem = instances.rel_smooth_quartic(args.n, sensors, seed)
        rng = np.random.default_rng(seed + _X0_OFFSET)
        x0 = rng.standard_normal(args.n) / np.sqrt(args.n)
        return "bregman", problem, x0, instances.quartic_kernel(), problem.known_L
    if name == "simplex-quadratic":
        if args.n is None:
            raise UsageError("simplex-quadratic needs --n")
        problem = instances.nonconvex_quadratic_simplex(args.n, seed)
        return "lmo", problem, np.full(args.n, 1.0 / args.n), None, problem.known_L
    if name == "stiefel":
        if args.n is None or args.r is None:
            raise UsageError("stiefel needs --n and --r")
        problem = instances.stiefel_brockett(args.n, args.r, seed)
        x0 = instances.random_stiefel_point(args.n, args.r, seed + _X0_OFFSET)
        probe = instances.stiefel_initial_curvature(problem, x0, seed + _PROBE_OFFSET)
        return "riemannian", problem, x0, None, probe
    if name == "sphere":
        if args.n is None:
            raise UsageError("sphere needs --n")
        problem = instances.sphere_rayleigh(args.n, seed)
        x0 = instances.random_sphere_point(args.n, seed + _X0_OFFSET)
        probe = instances.stiefel_initial_curvature(problem, x0, seed + _PROBE_OFFSET)
        return "riemannian", problem, x0, None, probe
    raise UsageError(f"unknown instance {name!r}")


_COMPATIBLE = {
    "composite": ("ac-pgm", "pgm-constant", "ac-bpgm"),
    "bregman": ("ac-bpgm",),
    "lmo": ("ac-cgm",),
    "riemannian": ("ac-rgm", "armijo", "reduced-armijo"),
}


def _resolve_l0(args, curvature_ref):
    if args.l0_abs is not None:
        return args.l0_abs
    if curvature_ref is None:
        raise UsageError("instance has no curvature reference; use --l0-abs")
    return args.l0_theta * curvature_ref


def _run_solver(solver, kind, problem, x0, kernel, curvature_ref, args):
    family = _FAMILY_OF_SOLVER[solver]
    tol = args.tol if args.tol is not None else _DEFAULT_TOL[family]
    if solver == "pgm-constant":
        if curvature_ref is None and args.gamma_abs is None:
            raise UsageError("pgm-constant needs a curvature reference or --gamma-abs")
        gamma = args.gamma_abs if args.gamma_abs is not None \
            else args.gamma_scale * curvature_ref
        return solvers.pgm_constant(problem, x0, gamma, max_iter=args.max_iter, tol=tol)
    if family == "armijo":
        s = args.s_abs if args.s_abs is not None else args.s_scale * curvature_ref
        cfg = solvers.SolverConfig(family="armijo", max_iter=args.max_iter,
                                   residual_tol=tol, sigma=args.sigma,
                                   t=args.t, s=s)
        return solvers.rgm_armijo(problem, x0, cfg, reduced=(solver == "reduced-armijo"))
    alpha = args.alpha if args.alpha is not None else _DEFAULT_ALPHA[family]
    cfg = solvers.SolverConfig(family=family, alpha=alpha,
                               l0=_resolve_l0(args, curvature_ref),
                               max_iter=args.max_iter, residual_tol=tol)
    if solver == "ac-pgm":
        return solvers.ac_pgm(problem, x0, cfg)
    if solver == "ac-bpgm":
        kern = kernel if kernel is not None else euclidean_kernel(problem.prox)
        return solvers.ac_bpgm(problem, kern, x0, cfg)
    if solver == "ac-cgm":
        return solvers.ac_cgm(problem, x0, cfg)
    if solver == "ac-rgm":
        return solvers.ac_rgm(problem, x0, cfg)
    raise UsageError(f"unknown solver {solver!r}")


def _cmd_run(args):
    kind, problem, x0, kernel, curvature_ref = _build_instance(args)
    if args.solver not in _COMPATIBLE[kind]:
        raise UsageError(f"solver {args.solver!r} cannot run on a {kind} instance")
    trace = _run_solver(args.solver, kind, problem, x0, kernel, curvature_ref, args)
    dataio.write_trace_csv(trace, args.out)
    summary = trace.summary()
    print(f"{args.solver} on {args.instance}: {summary['iterations']} iterations, "
          f"min residual {summary['min_residual']:.3e}, "
          f"final objective {summary['final_objective']:.6e} -> {args.out}")
    return 0


def _summary_from_csv(path):
    trace = dataio.read_trace_csv(path)
    summary = trace.summary()
    summary["time_s"] = sum(r.wall_ns for r in trace.records) / 1e9
    return summary


def _cmd_sweep(args):
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    thetas = [float(t) for t in args.thetas.split(",")]
    cells = []
    if args.experiment == "stiefel":
        base = argparse.Namespace(**vars(args))
        base.instance = "stiefel"
        kind, problem, x0, kernel, ref = _build_instance(base)
        plan = [("armijo", None), ("reduced-armijo", None)]
        plan += [("ac-rgm", theta) for theta in thetas]
    elif args.experiment == "logreg":
        base = argparse.Namespace(**vars(args))
        base.instance = "logreg-trimmed"
        kind, problem, x0, kernel, ref = _build_instance(base)
        plan = [("pgm-constant", None)]
        plan += [("ac-pgm", theta) for theta in thetas]
    else:
        raise UsageError(f"unknown experiment {args.experiment!r}")
    for solver, theta in plan:
        cell = argparse.Namespace(**vars(base))
        cell.solver = solver
        if theta is not None:
            cell.l0_theta = theta
        label = solver if theta is None else f"{solver}-theta{theta:g}"
        trace = _run_solver(solver, kind, problem, x0, kernel, ref, cell)
        path = out_dir / f"{label}.csv"
        dataio.write_trace_csv(trace, path)
        cells.append((label, path))
    rows = []
    for label, path in cells:
        summary = _summary_from_csv(path)
        rows.append({"algorithm": label, "time_s": summary["time_s"],
                     "iterations": summary["iterations"],
                     "retractions": summary["total_retractions"],
                     "min_residual": summary["min_residual"],
                     "final_objective": summary["final_objective"],
                     "trace": str(path)})
    header = f"{'Algorithm':<24} {'Time (s)':>10} {'#Iter.':>8} {'#Retr.':>8} {'Min resid.':>12}"
    lines = [header, "-" * len(header)]
    for row in rows:
        lines.append(f"{row['algorithm']:<24} {row['time_s']:>10.4f} "
                     f"{row['iterations']:>8d} {row['retractions']:>8d} "
                     f"{row['min_residual']:>12.3e}")
    table = "\n".join(lines)
    (out_dir / "summary.txt").write_text(table + "\n", encoding="utf-8")
    (out_dir / "summary.json").write_text(
        json.dumps(rows, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(table)
    return 0


def _cmd_check(args):
    trace = dataio.read_trace_csv(args.trace)
    failures = 0
    ran = 0

    fstar = args.fstar
    if fstar is None:
        # conservative surrogate: the best objective the trace observed
        observed = [r.objective for r in trace.records]
        if math.isfinite(trace.header.initial_objective):
            observed.append(trace.header.initial_objective)
        fstar = min(observed)

    def report(name, passed, extra=""):
        nonlocal failures, ran
        ran += 1
        print(f"{name}: {'PASS' if passed else 'FAIL'}{extra}")
        if not passed:
            failures += 1

    if args.lemma1:
        report("lemma1", diagnostics.lemma1_check(trace).passed)
    if args.theorem1:
        if args.known_l is None:
            raise UsageError("--theorem1 needs --L")
        report("theorem1",
               diagnostics.theorem1_bound_check(trace, args.known_l, fstar).passed)
    if args.theorem5:
        if args.known_l is None or args.dg is None:
            raise UsageError("--theorem5 needs --L and --dg")
        report("theorem5",
               diagnostics.theorem5_bound_check(trace, args.known_l, args.dg,
                                                fstar).passed)
    if args.theorem6:
        if args.known_l is None:
            raise UsageError("--theorem6 needs --L")
        report("theorem6",
               diagnostics.theorem6_bound_check(trace, args.known_l, fstar).passed)
    if args.census:
        if args.known_l is None:
            raise UsageError("--census needs --L")
        count, bound = diagnostics.failure_census(trace, args.known_l)
        report("failure-census", count <= bound, f" (count={count}, bound={bound})")
    if ran == 0:
        raise UsageError("no checks selected")
    return 1 if failures else 0


def _cmd_parse(args):
    try:
        dataset = dataio.load_libsvm(args.data)
    except dataio.ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    features = dataset.features
    positives = int(np.sum(dataset.labels > 0))
    print(f"{args.data}: m={features.n_rows} n={features.n_cols} "
          f"nnz={features.nnz} positives={positives}")
    return 0


def _cmd_gen(args):
    if args.instance != "logreg-trimmed":
        raise UsageError("gen supports only logreg-trimmed (LIBSVM output)")
    if args.m is None or args.n is None:
        raise UsageError("gen needs --m and --n")
    model = instances.synthetic_logreg(args.m, args.n, args.seed, kappa=args.kappa)
    dataset = dataio.SparseDataset(features=model.features, labels=model.labels)
    Path(args.out).write_text(dataio.serialize_libsvm(dataset), encoding="utf-8")
    print(f"wrote {args.m}x{args.n} dataset (seed {args.seed}) -> {args.out}")
    return 0


def _add_instance_flags(parser):
    parser.add_argument("--instance", default=None)
    parser.add_argument("--data", default=None)
    parser.add_argument("--m", type=int, default=None)
    parser.add_argument("--n", type=int, default=None)
    parser.add_argument("--r", type=int, default=None)
    parser.add_argument("--nu", type=float, default=0.5)
    parser.add_argument("--kappa", type=int, default=10)
    parser.add_argument("--lambda1", type=float, default=None)
    parser.add_argument("--lambda2", type=float, default=None)
    parser.add_argument("--paper-l", action="store_true",
                        help="use the nonsmooth weight in the closed-form L")
    parser.add_argument("--seed", type=int, default=0)


def _add_solver_flags(parser):
    parser.add_argument("--alpha", type=float, default=None)
    parser.add_argument("--l0-theta", dest="l0_theta", type=float, default=0.01)
    parser.add_argument("--l0-abs", dest="l0_abs", type=float, default=None)
    parser.add_argument("--gamma-scale", dest="gamma_scale", type=float, default=1.1)
    parser.add_argument("--gamma-abs", dest="gamma_abs", type=float, default=None)
    parser.add_argument("--sigma", type=float, default=1e-4)
    parser.add_argument("--t", type=float, default=0.5)
    parser.add_argument("--s-scale", dest="s_scale", type=float, default=0.001)
    parser.add_argument("--s-abs", dest="s_abs", type=float, default=None)
    parser.add_argument("--max-iter", dest="max_iter", type=int, default=20000)
    parser.add_argument("--tol", type=float, default=None)


def build_parser():
    parser = argparse.ArgumentParser(prog="autocond",
                                     description="linesearch-free first-order solvers")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one solver on one instance")
    run.add_argument("--solver", required=True, choices=sorted(_FAMILY_OF_SOLVER))
    _add_instance_flags(run)
    _add_solver_flags(run)
    run.add_argument("--out", required=True)

    sweep = sub.add_parser("sweep", help="theta/solver grid with summary table")
    sweep.add_argument("--experiment", required=True, choices=("logreg", "stiefel"))
    _add_instance_flags(sweep)
    _add_solver_flags(sweep)
    sweep.add_argument("--thetas", default="0.05,0.01,0.005,0.001")
    sweep.add_argument("--out", required=True)

    check = sub.add_parser("check", help="apply diagnostics to a trace CSV")
    check.add_argument("--trace", required=True)
    check.add_argument("--lemma1", action="store_true")
    check.add_argument("--theorem1", action="store_true")
    check.add_argument("--theorem5", action="store_true")
    check.add_argument("--theorem6", action="store_true")
    check.add_argument("--census", action="store_true")
    check.add_argument("--L", dest="known_l", type=float, default=None)
    check.add_argument("--dg", type=float, default=None)
    check.add_argument("--fstar", type=float, default=None)

    parse = sub.add_parser("parse", help="validate a LIBSVM file")
    parse.add_argument("--data", required=True)

    gen = sub.add_parser("gen", help="emit a synthetic instance to file")
    gen.add_argument("--instance", default="logreg-trimmed")
    gen.add_argument("--m", type=int, default=None)
    gen.add_argument("--n", type=int, default=None)
    gen.add_argument("--kappa", type=int, default=10)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": _cmd_run, "sweep": _cmd_sweep, "check": _cmd_check,
                "parse": _cmd_parse, "gen": _cmd_gen}
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except (dataio.ParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def console_entry():
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
