"""kinlb command line: run, convergence, compare-eo, list.

Exit codes: 0 success, 1 usage error, 2 solver error. CSV files go to
``--out``, else $KINLB_OUT, else the config file's ``out``, else the
working directory.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import problems as pb
from .convergence import convergence_study
from .eo import eo_run
from .errors import InvalidInputError, KinlbError, UnknownProblemError
from .lattice import make_config
from .source import solve

EXIT_OK, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2

# config-file keys and how to convert them
_CONFIG_KEYS = {
    "problem": str, "points": pb.parse_points, "omega": float, "lam": float,
    "safety": float, "t_end": str, "steady_tol": float, "max_steps": int,
    "mu": float, "out": str, "tol": float, "ladder": str,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(v) -> str:
    return "%.17g" % v


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, (int, np.integer, str)) else _fmt(v) for v in row])


def field_rows(field):
    """Row-major (x..., u) rows of a ScalarField."""
    x = field.x
    cols = [np.ravel(c) for c in x] + [np.ravel(field.values)]
    return list(zip(*cols))


def field_header(dim):
    return ["x", "u"] if dim == 1 else ["x1", "x2", "u"]


def _add_common(p, ladder=False):
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--problem")
    if ladder:
        p.add_argument("--ladder", help="comma-separated lattice sizes, e.g. 40,80,160,320")
    else:
        p.add_argument("--points", help="lattice size, e.g. 81 or 65x33")
    p.add_argument("--omega", type=float)
    p.add_argument("--lam", type=float, help="lattice speed (checked against the wave-speed bound)")
    p.add_argument("--safety", type=float, help="lambda safety factor (>= 1)")
    p.add_argument("--t-end", dest="t_end", help="end time, or 'steady'")
    p.add_argument("--steady-tol", dest="steady_tol", type=float)
    p.add_argument("--max-steps", dest="max_steps", type=int)
    p.add_argument("--mu", type=float, help="stiffness of the leveque-yee source")
    p.add_argument("--out", help="output directory")


def build_parser():
    parser = _Parser(prog="kinlb", description="Flux-decomposition lattice Boltzmann solver")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add_common(sub.add_parser("run", help="run a catalog problem"))
    _add_common(sub.add_parser("convergence", help="grid-refinement study"), ladder=True)
    cmp = sub.add_parser("compare-eo", help="lattice Boltzmann against Engquist-Osher")
    _add_common(cmp)
    cmp.add_argument("--tol", type=float, help="pass threshold on the max difference (inf allowed)")
    sub.add_parser("list", help="list catalog problems")
    return parser


def resolve(args) -> dict:
    """Merge config file and flags (flags win)."""
    opts = {}
    if getattr(args, "config", None):
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        for key, value in pb.parse_kv(text).items():
            if key not in _CONFIG_KEYS:
                raise UsageError(f"unknown config key {key!r}")
            try:
                opts[key] = _CONFIG_KEYS[key](value)
            except ValueError as exc:
                raise UsageError(f"bad value for {key}: {value!r}") from exc
    env_out = os.environ.get("KINLB_OUT")
    if env_out:
        opts["out"] = env_out
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        if key == "points":
            value = pb.parse_points(value)
        opts[key] = value
    if "problem" not in opts:
        raise UsageError("--problem is required")
    if "omega" in opts and not 0.0 < opts["omega"] < 2.0:
        raise UsageError(f"omega must lie in (0, 2), got {opts['omega']}")
    return opts


def _t_end(opts, problem):
    raw = opts.get("t_end")
    if raw is None:
        return problem.t_end
    if str(raw).strip().lower() == "steady":
        return None
    try:
        t = float(raw)
    except ValueError:
        raise UsageError(f"bad end time {raw!r}") from None
    if not t > 0:
        raise UsageError("end time must be positive")
    return t


def _problem(opts, with_points=True):
    params = {}
    if "mu" in opts:
        params["mu"] = opts["mu"]
    if with_points and "points" in opts:
        params["points"] = opts["points"]
    problem = pb.get_problem(opts["problem"], **params)
    t_end = _t_end(opts, problem)
    if t_end != problem.t_end:
        problem = pb.get_problem(opts["problem"], t_end=t_end, **params)
    return problem


def _config(opts, problem):
    kw = {k: opts[k] for k in ("omega", "lam", "safety", "steady_tol", "max_steps") if k in opts}
    return make_config(problem, t_end=problem.t_end, **kw)


def _out_dir(opts) -> Path:
    out = Path(opts.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(opts) -> int:
    problem = _problem(opts)
    cfg = _config(opts, problem)
    field, report = solve(problem, cfg)
    out = _out_dir(opts)
    write_csv(out / f"{problem.id}_final.csv", field_header(problem.dim), field_rows(field))
    write_csv(out / f"{problem.id}_report.csv", report.header(), report.rows())
    print(f"{problem.id}: {report.n_steps} steps, t = {report.t[-1]:.6g}, lambda = {cfg.lam:.6g}")
    return EXIT_OK


def _ladder(opts, problem):
    raw = opts.get("ladder")
    if raw is None:
        ladder = problem.hints.get("ladder")
        if ladder is None:
            n = problem.points[0]
            ladder = (n, 2 * n, 4 * n)
        return list(ladder)
    try:
        return [int(v) for v in str(raw).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad ladder {raw!r}") from None


def cmd_convergence(opts) -> int:
    problem = _problem(opts, with_points=False)
    ladder = _ladder(opts, problem)
    if len(set(ladder)) != len(ladder):
        raise UsageError(f"ladder {ladder} repeats a grid")
    t_end = problem.t_end if "t_end" in opts else problem.hints.get("convergence_t_end", problem.t_end)
    params = {"mu": opts["mu"]} if "mu" in opts else {}
    rows = convergence_study(problem.id, ladder, t_end=t_end, omega=opts.get("omega"),
                             safety=opts.get("safety"), **params)
    out = _out_dir(opts)
    table = [(r.points, r.h, r.l2, math.nan if r.eoc is None else r.eoc) for r in rows]
    write_csv(out / f"{problem.id}_convergence.csv", ["points", "h", "l2", "eoc"], table)
    for r in rows:
        rate = "-" if r.eoc is None else f"{r.eoc:.4f}"
        print(f"{r.points:6d}  {r.h:.6g}  {r.l2:.6e}  {rate}")
    return EXIT_OK


def cmd_compare_eo(opts) -> int:
    problem = _problem(opts)
    if problem.source is not None:
        raise UsageError(f"{problem.id} has a source term; the Engquist-Osher oracle is homogeneous only")
    cfg = _config(opts, problem)
    lb, eo = [], []
    solve(problem, cfg, callback=lambda s, t, u: lb.append((s, t, u.copy())))
    eo_run(problem, cfg, callback=lambda s, t, u: eo.append(u.copy()))
    if len(lb) != len(eo):
        print(f"step counts differ: lattice {len(lb)}, EO {len(eo)}", file=sys.stderr)
    rows = [(s, t, float(np.max(np.abs(u - v)))) for (s, t, u), v in zip(lb, eo)]
    out = _out_dir(opts)
    write_csv(out / f"{problem.id}_compare_eo.csv", ["step", "t", "linf_diff"], rows)
    worst = max(r[2] for r in rows)
    tol = opts.get("tol", 1e-10)
    print(f"{problem.id}: omega = {cfg.omega}, max |LB - EO| = {worst:.3e} over {len(rows)} steps")
    return EXIT_OK if worst <= tol and len(lb) == len(eo) else EXIT_SOLVER


def cmd_list(_args) -> int:
    for problem in pb.catalog():
        print(f"{problem.id:28s} {problem.origin}")
    return EXIT_OK


_COMMANDS = {"run": cmd_run, "convergence": cmd_convergence, "compare-eo": cmd_compare_eo}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        return cmd_list(args)
    try:
        return _COMMANDS[args.command](resolve(args))
    except (UsageError, UnknownProblemError, InvalidInputError) as exc:
        print(f"kinlb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KinlbError as exc:
        print(f"kinlb: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
