"""Command-line entry point.

    doublephase solve-ground cfg.json --out run/
    doublephase solve-nodal cfg.json --seed 3
    doublephase eigen cfg.json
    doublephase lemma1 cfg.json --t-min 10 --t-max 1e4
    doublephase fibering cfg.json
    doublephase check-hypotheses cfg.json --ar --theta 3

Exit codes: 0 success, 2 invalid configuration, 3 no convergence.
"""
from __future__ import annotations

import argparse
import copy
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .eigen import EigenOptions, first_eigenpair, lemma1_diagnostic
from .fibering import ProjectionError, fibering_curve, project_to_nehari
from .problem import (
    ConfigError,
    check_ar_condition,
    check_hypotheses_f,
    problem_from_config,
    validate_exponents,
)
from .solver import DegenerateIterateError, SolveOptions, random_field, solve_ground_state, solve_nodal

EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED = 0, 2, 3

SOLVER_KEYS = ("max_iters", "tol", "initial", "restarts", "armijo", "projection_tol", "metric_floor")


def _load(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be an object")
    return cfg


def resolve(cfg: dict, args) -> dict:
    """Config with command-line overrides applied; embedded in every report."""
    cfg = copy.deepcopy(cfg)
    solver = dict(cfg.get("solver", {}))
    for key, val in (("tol", args.tol), ("max_iters", args.max_iters), ("restarts", args.restarts)):
        if val is not None:
            solver[key] = val
    cfg["solver"] = solver
    if args.seed is not None:
        cfg["seed"] = args.seed
    cfg.setdefault("seed", 0)
    cfg["command"] = args.command
    return cfg


def _validate(problem) -> None:
    rx = problem.reaction
    rep = validate_exponents(problem.p, problem.q, rx.r, rx.tau, problem.mesh.dimension)
    failed = [c for c in rep.checks if not c.passed]
    if failed:
        c = failed[0]
        field = "q" if c.name == "1<q<p" else "reaction.params"
        raise ConfigError(field, f"exponent check {c.name} failed ({c.detail})")


def _solve_options(cfg: dict) -> SolveOptions:
    s = cfg.get("solver", {})
    unknown = set(s) - set(SOLVER_KEYS)
    if unknown:
        raise ConfigError("solver." + sorted(unknown)[0], "unknown option")
    kw = {k: s[k] for k in SOLVER_KEYS if k in s}
    try:
        return SolveOptions(seed=int(cfg.get("seed", 0)), **kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError("solver", str(exc)) from None


def _report(cfg, body: dict, wall: float, timing: bool) -> dict:
    rep = {"config": cfg}
    rep.update(body)
    rep["wall_time_s"] = wall if timing else None
    return rep


def _finish(out: Path, cfg, body, t0, timing) -> None:
    wall = time.perf_counter() - t0
    io.write_json(out / "report.json", _report(cfg, body, wall, timing))
    io.write_json(out / "timing.json", {"wall_time_s": wall})


def cmd_solve(cfg, problem, out: Path, nodal: bool):
    opt = _solve_options(cfg)
    rep = (solve_nodal if nodal else solve_ground_state)(problem, opt)
    body = {
        "energy": rep.energy,
        "residual_inf": rep.residual_inf,
        "defects": rep.defects,
        "sign_class": rep.sign_class,
        "iterations": rep.iterations,
        "converged": rep.converged,
        "partial": not rep.converged,
    }
    extra = rep.to_dict()
    for k in body:
        extra.pop(k, None)
    body.update(extra)
    io.write_field_csv(out / "solution.csv", rep.solution)
    return body, EXIT_OK if rep.converged else EXIT_NOT_CONVERGED


def cmd_eigen(cfg, problem, out: Path):
    eig = first_eigenpair(problem.mesh, problem.p, EigenOptions())
    io.write_field_csv(out / "u1.csv", eig.u1)
    body = {
        "p": problem.p,
        "lambda1": eig.lambda1,
        "iterations": eig.iterations,
        "converged": eig.converged,
        "boundary_slope": eig.boundary_slope,
    }
    return body, EXIT_OK if eig.converged else EXIT_NOT_CONVERGED


def cmd_lemma1(cfg, problem, out: Path, args):
    grid = np.geomspace(args.t_min, args.t_max, args.n_t)
    tab = lemma1_diagnostic(problem, grid)
    io.write_table_csv(out / "lemma1.csv", ["t", "theta", "gap"], tab.rows)
    body = {"lambda1": tab.lambda1, "slope": tab.slope, "expected_slope": -(problem.p - problem.q)}
    return body, EXIT_OK


def cmd_fibering(cfg, problem, out: Path, args):
    kind = cfg.get("fibering", {}).get("field", "eigenfunction")
    if kind == "random":
        u = random_field(problem.mesh, np.random.default_rng(int(cfg.get("seed", 0))))
    elif kind == "eigenfunction":
        u = first_eigenpair(problem.mesh, problem.p).u1
    else:
        raise ConfigError("fibering.field", f"unknown field {kind!r} (eigenfunction | random)")
    res = project_to_nehari(problem, u)
    grid = np.geomspace(args.t_min, args.t_max, args.n_t)
    rows = fibering_curve(problem, u, grid)
    io.write_table_csv(out / "fibering.csv", ["t", "mu", "dmu"], rows)
    sign_changes = int(np.count_nonzero(np.diff(np.sign(rows[:, 2])) != 0))
    body = {"field": kind, "t_u": res.t_u, "defect_at_root": res.defect_at_root,
            "bracket": list(res.bracket), "dmu_sign_changes": sign_changes}
    return body, EXIT_OK


def cmd_check(cfg, problem, out: Path, args):
    rx = problem.reaction
    exps = validate_exponents(problem.p, problem.q, rx.r, rx.tau, problem.mesh.dimension)
    hyp = check_hypotheses_f(rx, problem.p, problem.q, zs=problem.mesh.centroids[:: max(1, problem.mesh.n_elements // 16)])
    body = {
        "exponents": exps.to_dict(),
        "weight": problem.weight.check(problem.mesh),
        "reaction": {"kind": rx.kind, "params": rx.params, "r": rx.r, "tau": rx.tau, "beta0": rx.beta0, "a0": rx.a0},
        "hypotheses_f": hyp.to_dict(),
    }
    if args.ar:
        theta = args.theta if args.theta is not None else problem.p + 1
        ar = check_ar_condition(rx, theta, problem.p)
        body["ambrosetti_rabinowitz"] = ar.to_dict()
        body["ambrosetti_rabinowitz"]["note"] = (
            "holds on samples" if ar.passed else "fails: witness x with theta*F(x) > f(x)*x"
        )
    return body, EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="doublephase", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    names = ("solve-ground", "solve-nodal", "eigen", "lemma1", "fibering", "check-hypotheses")
    for name in names:
        sp = sub.add_parser(name)
        sp.add_argument("config")
        sp.add_argument("--out", default="out")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--max-iters", type=int)
        sp.add_argument("--restarts", type=int)
        sp.add_argument("--timing", action="store_true", help="embed wall time in report.json")
        if name == "lemma1":
            sp.add_argument("--t-min", type=float, default=10.0)
            sp.add_argument("--t-max", type=float, default=1e4)
            sp.add_argument("--n-t", type=int, default=13)
        if name == "fibering":
            sp.add_argument("--t-min", type=float, default=1e-4)
            sp.add_argument("--t-max", type=float, default=1e4)
            sp.add_argument("--n-t", type=int, default=65)
        if name == "check-hypotheses":
            sp.add_argument("--ar", action="store_true", help="also test the Ambrosetti-Rabinowitz condition")
            sp.add_argument("--theta", type=float)
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    out = Path(args.out)
    try:
        cfg = resolve(_load(args.config), args)
        problem = problem_from_config(cfg)
        _validate(problem)
        out.mkdir(parents=True, exist_ok=True)
        if args.command in ("solve-ground", "solve-nodal"):
            body, code = cmd_solve(cfg, problem, out, nodal=args.command == "solve-nodal")
        elif args.command == "eigen":
            body, code = cmd_eigen(cfg, problem, out)
        elif args.command == "lemma1":
            body, code = cmd_lemma1(cfg, problem, out, args)
        elif args.command == "fibering":
            body, code = cmd_fibering(cfg, problem, out, args)
        else:
            body, code = cmd_check(cfg, problem, out, args)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ProjectionError, DegenerateIterateError) as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        out.mkdir(parents=True, exist_ok=True)
        _finish(out, cfg, {"error": str(exc), "converged": False, "partial": True}, t0, args.timing)
        return EXIT_NOT_CONVERGED
    _finish(out, cfg, body, t0, args.timing)
    if code == EXIT_NOT_CONVERGED:
        print("warning: not converged; artifacts are partial", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
