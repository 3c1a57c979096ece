"""Command-line front end: ``nodal-atlas <command> ...``.

Commands
--------
analyze       census, spectral index, ratios, mesh bound and (torus) nodal graph
ratio-table   one CSV row per member of a family of eigenfunctions
lattice       lattice-circle solutions, gaps and sector membership
mesh-verify   the mesh counting argument with every per-line count
graph-check   the Euler relation on a torus nodal graph, or on random graphs

Eigenfunctions are given as a path, ``-`` for stdin, or inline JSON::

    {"domain": "square", "n_or_m": 18, "terms": [[3, 3, 1.0, 0.0]]}

Exit status is 0 on success, 1 when an asserted inequality fails and 2 on
invalid input or when the computation cannot be completed.  JSON output is
byte-reproducible: fixed key order, floats at 12 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    EmptyCircleWarning,
    GraphInconsistency,
    NodalAtlasError,
    NotInSectorClass,
)
from .lattice import r2, sector_membership, sum_two_squares
from .meshbound import (
    DEFAULT_DELTA,
    square_bound,
    verify_square_counting,
    verify_torus_counting,
)
from .nodal import analyze, sample_grid
from .nodalgraph import build_nodal_graph, euler_defect, random_embedded_graph, singular_budget
from .signmap import write_signmap
from .spectra import (
    PI,
    PLEIJEL_CONSTANT,
    POLTEROVICH_CONSTANT,
    SQUARE,
    TORUS,
    deformation_family,
    from_json,
    index_of,
    make_torus_eigenfunction,
    square_product,
    to_json,
    torus_plane_wave,
)

SCHEMA = "nodal-atlas/1"
LAMBDA_LIMIT = 800 * PI * PI
DEFAULT_THETA = PI / 9
DEFAULT_EPSILON = PI / 18
SIG_DIGITS = 12

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

CSV_HEADER = (
    "member", "lambda", "j_min", "j_max", "N", "N_over_j_max", "bound", "polterovich",
    "C", "N_s", "N_c", "singular_points", "identity_ok", "euler_ok",
)


class InputError(ValueError):
    """Invalid command-line input; maps to exit status 2."""


# ---------------------------------------------------------------------------
# formatting


def _round(x: float):
    if not math.isfinite(x):
        return None
    return float(f"{x:.{SIG_DIGITS}g}")


def canonical(obj):
    """Copy of ``obj`` with floats rounded to 12 significant digits and numpy scalars unwrapped."""
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    return obj


def dump_json(obj) -> str:
    return json.dumps(canonical(obj), indent=2, ensure_ascii=True) + "\n"


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        r = _round(float(v))
        return "" if r is None else repr(r)
    return str(v)


def dump_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_csv_cell(row.get(h)) for h in header])
    return buf.getvalue()


def _emit(text: str, output):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# parsing helpers

_ANGLE = re.compile(r"^\s*([0-9]*\.?[0-9]*)\s*\*?\s*pi\s*(?:/\s*([0-9]*\.?[0-9]+))?\s*$")


def parse_angle(text: str) -> float:
    """Angles such as ``0.35``, ``pi/9``, ``2pi/9`` or ``2*pi/9``."""
    s = str(text).strip().lower().replace("π", "pi")
    m = _ANGLE.match(s)
    try:
        if m:
            num = float(m.group(1)) if m.group(1) else 1.0
            den = float(m.group(2)) if m.group(2) else 1.0
            value = num * PI / den
        else:
            value = float(s)
    except ValueError:
        raise InputError(f"cannot parse angle {text!r}") from None
    if not math.isfinite(value):
        raise InputError(f"cannot parse angle {text!r}")
    return value


def parse_pair(text: str):
    try:
        a, b = (int(t) for t in str(text).replace(" ", "").split(","))
    except ValueError:
        raise InputError(f"expected a pair 'a,b', got {text!r}") from None
    return a, b


def load_eigenfunction(source: str):
    if source is None:
        raise InputError("an eigenfunction is required")
    if source == "-":
        text = sys.stdin.read()
    elif source.lstrip().startswith("{"):
        text = source
    else:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise InputError(f"cannot read {source!r}: {exc.strerror}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise InputError("eigenfunction JSON must be an object")
    try:
        f = from_json(obj)
    except (NodalAtlasError, TypeError, ValueError, OverflowError) as exc:
        raise InputError(f"invalid eigenfunction: {exc}") from None
    _check_lambda(f.lam)
    return f


def _check_lambda(lam: float):
    if lam > LAMBDA_LIMIT * (1 + 1e-12):
        raise InputError(f"lambda={lam:.6g} exceeds the limit 800 pi^2")


def _tol_kwargs(args):
    return {} if args.tol_singular is None else {"tol_singular": args.tol_singular}


def _grid(f, args):
    if args.resolution is None:
        return sample_grid(f)
    return sample_grid(f, args.resolution, override=True)


# ---------------------------------------------------------------------------
# report pieces


def _input_block(f):
    d = to_json(f)
    return {"domain": d["domain"], "n_or_m": d["n_or_m"], "lambda": f.lam, "terms": d["terms"]}


def _census_block(st):
    c = st.census()
    return {
        "N": c.N, "C": c.C, "C_connected": c.C_connected, "N_s": c.N_s, "N_c": c.N_c,
        "C_interior": c.C_interior, "boundary_endpoints": c.boundary_endpoints,
        "singular_count": c.singular_count, "order_sum": c.order_sum,
        "decomposition_holds": (
            c.decomposition_holds if st.domain == SQUARE and not st.singular_points else None
        ),
        "euler_identity_holds": c.euler_identity_holds if st.domain == SQUARE else None,
    }


def _singular_block(st):
    return [
        {"x": p.position[0], "y": p.position[1], "order": p.order, "residual": p.residual}
        for p in st.singular_points
    ]


def _index_block(idx):
    return {
        "lambda": idx.lam, "j_min": idx.j_min, "j_max": idx.j_max,
        "multiplicity": idx.multiplicity, "weyl_estimate": idx.weyl_estimate,
    }


def _ratio_block(N, idx):
    return {
        "N_over_j_min": N / idx.j_min, "N_over_j_max": N / idx.j_max,
        "polterovich": POLTEROVICH_CONSTANT, "pleijel": PLEIJEL_CONSTANT,
    }


def bound_block(rep):
    return {
        "lambda": rep.lam,
        "bound_value": rep.bound_value,
        "measured_N": rep.measured_N,
        "measured_C": rep.measured_C,
        "satisfied": rep.satisfied,
        "advisory": rep.advisory,
        "checks": dict(rep.checks),
        "per_line_sign_changes": list(rep.per_line_sign_changes),
        "intersections_per_component": list(rep.intersections_per_component),
        "details": dict(rep.details),
    }


def _bound_assertions(rep):
    """Inequalities asserted from a bound report.

    The bound and the line sign-change count hold unconditionally; the
    remaining steps of the counting argument are asserted only without
    singular points.
    """
    out = {"main_bound": rep.satisfied}
    for name, ok in rep.checks.items():
        if not rep.advisory or name in ("line_sign_changes", "geodesic_sign_changes", "E_sign_changes"):
            out[name] = ok
    return out


def _mesh_report(f, args, grid=None):
    """``(report or None, reason)``; the torus needs ``n`` in the sector class."""
    kw = _tol_kwargs(args)
    if f.domain == SQUARE:
        return verify_square_counting(f, grid=grid, delta=args.delta, **kw), None
    if f.n == 0:
        return None, "constant function"
    try:
        return verify_torus_counting(f, args.theta, args.epsilon, grid=grid, **kw), None
    except NotInSectorClass as exc:
        return None, str(exc)


def _write_signmap(grid, path):
    try:
        write_signmap(grid.values, path)
    except NodalAtlasError as exc:
        raise InputError(str(exc)) from None


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(args):
    f = load_eigenfunction(args.input)
    grid = _grid(f, args)
    st = analyze(grid, **_tol_kwargs(args))
    idx = index_of(f)
    N = st.N
    asserted = {"courant": N <= idx.j_max}

    bound = None
    if not args.no_mesh:
        rep, reason = _mesh_report(f, args, grid)
        if rep is not None:
            bound = bound_block(rep)
            asserted.update(_bound_assertions(rep))
        else:
            bound = {"skipped": reason}

    graph = None
    if f.domain == TORUS and not args.no_graph and f.n > 0:
        try:
            g = build_nodal_graph(f, grid=grid, **_tol_kwargs(args))
        except GraphInconsistency as exc:
            graph = {"error": str(exc)}
            asserted["euler_defect"] = False
        else:
            order_sum, cap = singular_budget(g)
            graph = g.to_dict()
            graph["defect_in_range"] = euler_defect(g.graph)[1]
            graph["singular_budget"] = cap
            asserted["euler_defect"] = graph["defect_in_range"]
            asserted["singular_budget"] = order_sum <= cap

    if args.emit_signmap:
        _write_signmap(grid, args.emit_signmap)

    report = {
        "schema": SCHEMA,
        "command": "analyze",
        "input": _input_block(f),
        "resolution": grid.resolution,
        "resolution_overridden": grid.overridden,
        "census": _census_block(st),
        "singular_points": _singular_block(st),
        "index": _index_block(idx),
        "ratios": _ratio_block(N, idx),
        "bound": bound,
        "graph": graph,
        "assertions": asserted,
        "ok": all(asserted.values()),
    }
    if args.format == "csv":
        _emit(dump_csv(CSV_HEADER, [_row_from(f.domain, f, st, idx)]), args.output)
    else:
        _emit(dump_json(report), args.output)
    return EXIT_OK if report["ok"] else EXIT_FAIL


def _row_from(label, f, st, idx):
    c = st.census()
    bound = square_bound(f.lam) if f.domain == SQUARE else None
    return {
        "member": label,
        "lambda": f.lam,
        "j_min": idx.j_min,
        "j_max": idx.j_max,
        "N": c.N,
        "N_over_j_max": c.N / idx.j_max,
        "bound": bound,
        "polterovich": POLTEROVICH_CONSTANT,
        "C": c.C,
        "N_s": c.N_s,
        "N_c": c.N_c,
        "singular_points": c.singular_count,
        "identity_ok": c.decomposition_holds if f.domain == SQUARE and c.singular_count == 0 else None,
        "euler_ok": c.euler_identity_holds if f.domain == SQUARE else None,
    }


def _family_members(args):
    fam = args.family
    if fam == "diagonal":
        if args.k_min < 1 or args.k_max < args.k_min:
            raise InputError("need 1 <= k-min <= k-max")
        for k in range(args.k_min, args.k_max + 1):
            _check_lambda(2 * k * k * PI * PI)
        return [(f"k={k}", square_product(k, k)) for k in range(args.k_min, args.k_max + 1)]
    a, b = parse_pair(args.pair)
    if fam == "deformation":
        if args.t_count < 1:
            raise InputError("t-count must be positive")
        ts = np.linspace(args.t_min, args.t_max, args.t_count) if args.t_count > 1 else [args.t_min]
        try:
            members = [(f"t={float(t):.6g}", deformation_family(a, b, float(t))) for t in ts]
        except NodalAtlasError as exc:
            raise InputError(str(exc)) from None
        _check_lambda(members[0][1].lam)
        return members
    # torus-plane: amplitude scalings k cos(2 pi (a x + b y))
    if (a, b) == (0, 0):
        raise InputError("torus-plane needs (a, b) != (0, 0)")
    if args.k_min < 1 or args.k_max < args.k_min:
        raise InputError("need 1 <= k-min <= k-max")
    base = torus_plane_wave(a, b)
    _check_lambda(base.lam)
    return [
        (f"k={k}", make_torus_eigenfunction([(p, q, k * c) for p, q, c in base.terms]))
        for k in range(args.k_min, args.k_max + 1)
    ]


def cmd_ratio_table(args):
    members = _family_members(args)
    rows = []
    failed = False
    for label, f in members:
        grid = _grid(f, args)
        st = analyze(grid, **_tol_kwargs(args))
        idx = index_of(f)
        row = _row_from(label, f, st, idx)
        if f.domain == TORUS:
            rep, _ = _mesh_report(f, args, grid)
            row["bound"] = rep.bound_value if rep is not None else None
        if row["N"] > idx.j_max or (row["bound"] is not None and row["N"] > row["bound"]):
            failed = True
        rows.append(row)
    if args.family == "diagonal":
        ratios = [r["N_over_j_max"] for r in rows]
        ks = range(args.k_min, args.k_max + 1)
        drops = [k for k, r0, r1 in zip(list(ks)[1:], ratios, ratios[1:]) if k - 1 >= 3 and r1 < r0]
        if drops:
            print(f"note: N/j_max is not nondecreasing; it drops at k={','.join(map(str, drops))}",
                  file=sys.stderr)
    if args.format == "json":
        _emit(dump_json({"schema": SCHEMA, "command": "ratio-table", "family": args.family,
                         "header": list(CSV_HEADER), "rows": rows}), args.output)
    else:
        _emit(dump_csv(CSV_HEADER, rows), args.output)
    return EXIT_FAIL if failed else EXIT_OK


def _n_values(args):
    if args.n:
        ns = list(args.n)
    elif args.n_min is not None:
        hi = args.n_max if args.n_max is not None else args.n_min
        ns = list(range(args.n_min, hi + 1))
    else:
        raise InputError("give --n or --n-min/--n-max")
    if not ns or min(ns) < 1:
        raise InputError("n must be a positive integer")
    if max(ns) > 10**7:
        raise InputError("n too large")
    return ns


def cmd_lattice(args):
    ns = _n_values(args)
    thetas = [(t, parse_angle(t)) for t in (args.theta_list or [])]
    for text, th in thetas:
        if not 0.0 < th < 2 * PI:
            raise InputError(f"theta {text!r} must lie in (0, 2 pi)")
    reports = []
    ok = True
    for n in ns:
        circle = sum_two_squares(n)
        jacobi = r2(n)
        ok &= jacobi == circle.count
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EmptyCircleWarning)
            member = {text: sector_membership(circle, th) for text, th in thetas}
        reports.append({
            "n": n,
            "count": circle.count,
            "r2": jacobi,
            "empty": circle.count == 0,
            "solutions": [list(s) for s in circle.solutions],
            "max_gap_rad": circle.max_gap,
            "membership": member,
        })
    if args.format == "csv":
        header = ["n", "count", "r2", "empty", "max_gap_rad"] + [f"member[{t}]" for t, _ in thetas]
        rows = []
        for r in reports:
            row = {k: r[k] for k in header[:5]}
            row.update({f"member[{t}]": r["membership"][t] for t, _ in thetas})
            rows.append(row)
        _emit(dump_csv(header, rows), args.output)
    else:
        _emit(dump_json({"schema": SCHEMA, "command": "lattice", "reports": reports}), args.output)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_mesh_verify(args):
    f = load_eigenfunction(args.input)
    grid = _grid(f, args)
    rep, reason = _mesh_report(f, args, grid)
    if rep is None:
        raise InputError(f"no mesh for this eigenfunction: {reason}")
    asserted = _bound_assertions(rep)
    if args.emit_signmap:
        _write_signmap(grid, args.emit_signmap)
    out = {
        "schema": SCHEMA,
        "command": "mesh-verify",
        "input": _input_block(f),
        "resolution": grid.resolution,
        "bound": bound_block(rep),
        "assertions": asserted,
        "ok": all(asserted.values()),
    }
    _emit(dump_json(out), args.output)
    return EXIT_OK if out["ok"] else EXIT_FAIL


def _random_graphs(args):
    if args.trials < 1 or not 0 <= args.max_genus <= 10:
        raise InputError("need trials >= 1 and 0 <= max-genus <= 10")
    rng = np.random.default_rng(args.seed)
    stats = {g: {"trials": 0, "defect_min": None, "defect_max": None, "violations": 0}
             for g in range(args.max_genus + 1)}
    for _ in range(args.trials):
        genus = int(rng.integers(0, args.max_genus + 1))
        g = random_embedded_graph(genus, rng)
        d, ok = euler_defect(g)
        s = stats[genus]
        s["trials"] += 1
        s["defect_min"] = d if s["defect_min"] is None else min(s["defect_min"], d)
        s["defect_max"] = d if s["defect_max"] is None else max(s["defect_max"], d)
        s["violations"] += 0 if ok else 1
    violations = sum(s["violations"] for s in stats.values())
    out = {
        "schema": SCHEMA,
        "command": "graph-check",
        "mode": "random",
        "seed": args.seed,
        "trials": args.trials,
        "by_genus": [{"genus": g, **s} for g, s in stats.items()],
        "violations": violations,
        "ok": violations == 0,
    }
    _emit(dump_json(out), args.output)
    return EXIT_OK if out["ok"] else EXIT_FAIL


def cmd_graph_check(args):
    if args.random:
        return _random_graphs(args)
    f = load_eigenfunction(args.input)
    if f.domain != TORUS:
        raise InputError("graph-check takes a torus eigenfunction")
    if f.n == 0:
        raise InputError("the constant function has an empty nodal set")
    grid = _grid(f, args)
    try:
        g = build_nodal_graph(f, grid=grid, **_tol_kwargs(args))
    except GraphInconsistency as exc:
        out = {"schema": SCHEMA, "command": "graph-check", "mode": "eigenfunction",
               "input": _input_block(f), "error": str(exc), "ok": False}
        _emit(dump_json(out), args.output)
        return EXIT_FAIL
    _, in_range = euler_defect(g.graph)
    order_sum, cap = singular_budget(g)
    out = {
        "schema": SCHEMA,
        "command": "graph-check",
        "mode": "eigenfunction",
        "input": _input_block(f),
        "graph": g.to_dict(),
        "defect_range": [1 - 2 * g.graph.genus, 1],
        "defect_in_range": in_range,
        "singular_budget": cap,
        "ok": in_range and order_sum <= cap,
    }
    _emit(dump_json(out), args.output)
    return EXIT_OK if out["ok"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--resolution", type=int, default=None,
                        help="grid resolution (overrides the default and its floor)")
    common.add_argument("--tol-singular", type=float, default=None,
                        help="residual tolerance for singular points")
    common.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default=None)

    mesh = argparse.ArgumentParser(add_help=False)
    mesh.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="square mesh offset, tau = lambda (1 + delta)")
    mesh.add_argument("--theta", type=parse_angle, default=DEFAULT_THETA, help="torus sector half-width (default pi/9)")
    mesh.add_argument("--epsilon", type=parse_angle, default=DEFAULT_EPSILON, help="torus net precision (default pi/18)")

    p = argparse.ArgumentParser(prog="nodal-atlas", description="Nodal domain counts and bounds for eigenfunctions "
                                "of the unit square and the flat torus.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common, mesh], help="full report for one eigenfunction")
    a.add_argument("input", help="eigenfunction JSON: a path, '-' or an inline object")
    a.add_argument("--no-mesh", action="store_true", help="skip mesh verification")
    a.add_argument("--no-graph", action="store_true", help="skip the torus nodal graph")
    a.add_argument("--emit-signmap", metavar="PATH", default=None, help="write a .pgm/.ppm/.png sign map")
    a.add_argument("--seed", type=int, default=0, help=argparse.SUPPRESS)
    a.set_defaults(func=cmd_analyze, fmt_default="json")

    r = sub.add_parser("ratio-table", parents=[common, mesh], help="N/j rows for a family")
    r.add_argument("family", choices=("diagonal", "deformation", "torus-plane"))
    r.add_argument("--k-min", type=int, default=1)
    r.add_argument("--k-max", type=int, default=10)
    r.add_argument("--pair", default="1,2", help="(a, b) for deformation and torus-plane")
    r.add_argument("--t-min", type=float, default=-1.0)
    r.add_argument("--t-max", type=float, default=1.0)
    r.add_argument("--t-count", type=int, default=21)
    r.set_defaults(func=cmd_ratio_table, fmt_default="csv")

    lt = sub.add_parser("lattice", parents=[common], help="solutions of a^2 + b^2 = n")
    lt.add_argument("--n", type=int, action="append", help="repeatable")
    lt.add_argument("--n-min", type=int)
    lt.add_argument("--n-max", type=int)
    lt.add_argument("--theta", dest="theta_list", action="append", help="sector width, e.g. 2pi/9; repeatable")
    lt.set_defaults(func=cmd_lattice, fmt_default="json")

    m = sub.add_parser("mesh-verify", parents=[common, mesh], help="mesh counting argument with per-line counts")
    m.add_argument("input")
    m.add_argument("--emit-signmap", metavar="PATH", default=None)
    m.set_defaults(func=cmd_mesh_verify, fmt_default="json")

    g = sub.add_parser("graph-check", parents=[common], help="Euler relation for nodal or random graphs")
    g.add_argument("input", nargs="?")
    g.add_argument("--random", action="store_true", help="check random embedded graphs instead")
    g.add_argument("--trials", type=int, default=10000)
    g.add_argument("--max-genus", type=int, default=3)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_graph_check, fmt_default="json")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.format is None:
        args.format = args.fmt_default
    if args.format == "csv" and args.func in (cmd_mesh_verify, cmd_graph_check):
        print("error: csv output is not available for this command", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NodalAtlasError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
