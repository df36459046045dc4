"""Command line entry point ``optspline``.

Exit codes: 0 success, 2 invalid input, 3 numeric tolerance failure,
4 admissibility failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

from . import errors
from .constants import c_p_plus, optimize_shape
from .experiments import appendix_check, convergence_study, report_write
from .fields import parse_field, parse_weight
from .geometry import Triangulation
from .meshgen import DEFAULT_EPSILON, build_mesh
from .norms import global_error
from .quadform import QuadraticForm, optimal_triangle

EXIT_OK, EXIT_INPUT, EXIT_TOLERANCE, EXIT_ADMISSIBILITY = 0, 2, 3, 4


def _dump(obj):
    print(json.dumps(obj, indent=1, sort_keys=True))


def _weight_arg(spec):
    w = parse_weight(spec)
    return None if w.name == "1" else w


def cmd_constant(args):
    c = c_p_plus(args.p)
    if args.json:
        _dump(c.to_dict())
    else:
        print(repr(c.value))
    return EXIT_OK


def cmd_shape_scan(args):
    r = optimize_shape(args.p, args.grid, keep_table=args.out is not None)
    if args.out:
        r.write_csv(args.out)
    _dump(r.to_dict())
    return EXIT_OK


def cmd_optimal_triangle(args):
    Q = QuadraticForm(args.A, args.B, args.C)
    T = optimal_triangle(Q, args.area, args.orientation)
    _dump({"vertices": T.vertices.tolist(), "area": T.area})
    return EXIT_OK


def cmd_mesh(args):
    field = parse_field(args.field)
    mesh, plan = build_mesh(field, _weight_arg(args.weight), args.p, args.N, args.epsilon,
                            args.orientation, return_plan=True)
    out = Path(args.out)
    out.write_text(mesh.to_off() if out.suffix.lower() == ".off" else mesh.to_json())
    plan_path = Path(args.plan) if args.plan else out.with_suffix(".plan.json")
    plan_path.write_text(plan.to_json())
    _dump({"N_requested": args.N, "N_actual": len(mesh), "m": plan.m,
           "mesh": str(out), "plan": str(plan_path)})
    return EXIT_OK


def _read_mesh(path):
    text = Path(path).read_text()
    if text.lstrip().startswith("OFF"):
        return Triangulation.from_off(text)
    return Triangulation.from_json(text)


def cmd_error(args):
    field = parse_field(args.field)
    mesh = _read_mesh(args.mesh)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", errors.ToleranceNotReached)
        e = global_error(field, mesh, args.p, _weight_arg(args.weight))
    _dump(e.to_dict())
    return EXIT_OK if e.converged else EXIT_TOLERANCE


def cmd_converge(args):
    field = parse_field(args.field)
    Ns = [int(s) for s in args.Ns.split(",") if s.strip()]
    rep = convergence_study(field, _weight_arg(args.weight), args.p, Ns, args.epsilon)
    fmt = args.format or ("json" if str(args.out).lower().endswith(".json") else "csv")
    data = report_write(rep, fmt)
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.write(data.decode())
    failed = [r for r in rep.rows if r.failure]
    if failed:
        for r in failed:
            print(f"N={r.N_requested}: {r.failure}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_appendix_check(args):
    res = appendix_check(args.p)
    _dump(res)
    keys = ["L_nonincreasing", "S_tilde_nonincreasing", "S_argmin_near_pi_3"]
    keys += [k for k in ("prop1_ok", "prop2_ok") if k in res]
    ok = all(res[k] for k in keys) and res["q_quarter"] <= 0
    return EXIT_OK if ok else EXIT_TOLERANCE


def _positive(s):
    v = float(s)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="optspline", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("constant", help="the optimal constant C_p^+")
    s.add_argument("--p", type=_positive, required=True)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_constant)

    s = sub.add_parser("shape-scan", help="brute-force search over triangle angles")
    s.add_argument("--p", type=_positive, required=True)
    s.add_argument("--grid", type=int, default=400)
    s.add_argument("--out", help="CSV file for the full table (A,B,d_value)")
    s.set_defaults(func=cmd_shape_scan)

    s = sub.add_parser("optimal-triangle", help="optimal triangle for A x^2 + B y^2 + 2C xy")
    s.add_argument("--A", type=float, required=True)
    s.add_argument("--B", type=float, required=True)
    s.add_argument("--C", type=float, required=True)
    s.add_argument("--area", type=_positive, default=1.0)
    s.add_argument("--orientation", type=float, default=0.0)
    s.set_defaults(func=cmd_optimal_triangle)

    s = sub.add_parser("mesh", help="build an adaptive triangulation")
    s.add_argument("--field", required=True, help="builtin:NAME or expr:SOURCE")
    s.add_argument("--weight", default="expr:1")
    s.add_argument("--p", type=_positive, required=True)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    s.add_argument("--orientation", type=float, default=0.0)
    s.add_argument("--out", required=True, help="mesh file, .json or .off")
    s.add_argument("--plan", help="plan JSON path (default: next to the mesh)")
    s.set_defaults(func=cmd_mesh)

    s = sub.add_parser("error", help="interpolation error of a field on a mesh")
    s.add_argument("--field", required=True)
    s.add_argument("--mesh", required=True)
    s.add_argument("--p", type=_positive, required=True)
    s.add_argument("--weight", default="expr:1")
    s.set_defaults(func=cmd_error)

    s = sub.add_parser("converge", help="convergence study against the asymptotic limit")
    s.add_argument("--field", required=True)
    s.add_argument("--weight", default="expr:1")
    s.add_argument("--p", type=_positive, required=True)
    s.add_argument("--Ns", default="250,500,1000,2000,4000,8000")
    s.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    s.add_argument("--out")
    s.add_argument("--format", choices=("csv", "json"))
    s.set_defaults(func=cmd_converge)

    s = sub.add_parser("appendix-check", help="profile monotonicity and sign scans")
    s.add_argument("--p", type=_positive, required=True)
    s.set_defaults(func=cmd_appendix_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (errors.NotAdmissible, errors.NotPositiveDefinite, errors.ModulusTooRough) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ADMISSIBILITY
    except (errors.InvalidArgument, errors.ParseError, errors.EvalError, ValueError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except errors.OptSplineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE


if __name__ == "__main__":
    sys.exit(main())
