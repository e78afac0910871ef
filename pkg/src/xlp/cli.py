"""Command-line interface: solve, differentiate, attribute, occlude, check
properties, and rebuild the full reproduction bundle.

Exit codes: 0 success, 1 solver failure (infeasible/unbounded), 2 usage or
input errors.  The default pivot rule is ``dantzig``; the ``XLP_PIVOT``
environment variable overrides it.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import energy as energy_mod
from . import reference_values as ref
from .attribution import METHODS, NEAR_ZERO, attribute, occlusion
from .errors import XlpError
from .findings import findings_matrix, verify_matrix
from .gradients import (
    OBJECTIVE,
    SOLUTION,
    ilp_relaxation_gradients,
    objective_gradients,
    solution_jacobians,
)
from .model import parse_problem
from .mrf import edge_occlusion_states, map_showcase, parse_mrf
from .problems import CASE_IDS, case
from .properties import (
    IMPLEMENTATION_INVARIANCE,
    _jsonable,
    implementation_invariance_report,
)
from .reproduce import compare_reference_row, reproduce_all, reproduce_case
from .solver import BLAND, DANTZIG, OPTIMAL, solve, solve_ilp, solve_problem

USAGE_ERROR = 2
SOLVER_ERROR = 1


def _default_rule():
    return os.environ.get("XLP_PIVOT", DANTZIG)


def _load_problem(args):
    if getattr(args, "case", None) and getattr(args, "file", None):
        raise XlpError("--case and --file are mutually exclusive")
    if getattr(args, "case", None):
        return case(args.case)
    if getattr(args, "file", None):
        try:
            with open(args.file, encoding="utf-8") as fh:
                return parse_problem(fh.read())
        except OSError as exc:
            raise XlpError(f"cannot read {args.file}: {exc.strerror}") from exc
    raise XlpError("one of --case or --file is required")


def _emit(doc, fmt, table_rows=None, table_headers=None):
    if fmt == "json":
        print(json.dumps(_jsonable(doc), indent=2, sort_keys=True))
    elif fmt == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        if table_headers:
            writer.writerow(table_headers)
        for row in table_rows or []:
            writer.writerow(row)
    else:
        _print_table(table_headers, table_rows or [])


def _print_table(headers, rows):
    cells = [list(map(str, headers))] if headers else []
    cells += [[str(c) for c in row] for row in rows]
    if not cells:
        return
    widths = [max(len(r[i]) for r in cells if i < len(r)) for i in range(max(map(len, cells)))]
    for k, row in enumerate(cells):
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if k == 0 and headers:
            print("  ".join("-" * w for w in widths))


def _fmt(v, nd=4):
    if v is None:
        return "none"
    if isinstance(v, float) and np.isnan(v):
        return "none"
    return f"{v:.{nd}g}" if isinstance(v, float) else str(v)


def _scores_rows(att):
    rows = []
    if att.scores_structures is not None:
        for name, val in att.scores_structures.items():
            if val is None:
                rows.append([name, "none"])
            elif isinstance(val, np.ndarray):
                rows.append([name, " ".join(_fmt(float(x)) for x in val)])
            else:
                rows.append([name, _fmt(float(val))])
        return ["structure", "score"], rows
    for label, arr in (("A", att.scores_A), ("b", att.scores_b), ("w", att.scores_w)):
        flat = np.asarray(arr)
        for idx in np.ndindex(flat.shape):
            rows.append([f"{label}{list(idx)}", _fmt(float(flat[idx]))])
    return ["entry", "score"], rows


def cmd_solve(args):
    p = _load_problem(args)
    sol = solve(p, args.rule)
    doc = sol.to_dict()
    headers = ["field", "value"]
    rows = [[k, _fmt(v) if not isinstance(v, list) else " ".join(map(_fmt, v))]
            for k, v in doc.items()]
    _emit(doc, args.format, rows, headers)
    return 0 if sol.status == OPTIMAL else SOLVER_ERROR


def cmd_grad(args):
    p = _load_problem(args)
    if p.is_integer:
        sol = solve_ilp(p, args.rule)
        if sol.status != OPTIMAL:
            raise XlpError(f"problem is {sol.status}")
        bundle = ilp_relaxation_gradients(p, sol, args.map)
    else:
        sol = solve_problem(p, args.rule)
        if sol.status != OPTIMAL:
            raise XlpError(f"problem is {sol.status}")
        bundle = (
            objective_gradients(p, sol) if args.map == OBJECTIVE else solution_jacobians(p, sol)
        )
    doc = {
        "map": bundle.map_kind,
        "degenerate": bundle.degenerate,
        "surrogate": bundle.surrogate,
    }
    for name in ("dO_dw", "dO_db", "dO_dA", "dS_db", "dS_dA", "dS_dw"):
        arr = getattr(bundle, name)
        if arr is not None:
            doc[name] = {"shape": list(np.asarray(arr).shape), "values": arr}
    print(json.dumps(_jsonable(doc), indent=2, sort_keys=True))
    return 0


def cmd_attribute(args, method=None):
    p = _load_problem(args)
    att = attribute(
        p,
        method or args.method,
        map_kind=args.map,
        target=args.target,
        baseline_kind=args.baseline,
        steps=args.steps,
        rule=args.rule,
    )
    headers, rows = _scores_rows(att)
    _emit(att.to_dict(), args.format, rows, headers)
    return 0


def cmd_occlude(args):
    return cmd_attribute(args, method="occlusion")


def cmd_check(args):
    if args.all:
        reports = findings_matrix(rule=args.rule)
        mismatches, checked = verify_matrix(reports)
        doc = {
            "reports": [r.to_dict() for r in reports],
            "expected_verdicts_checked": checked,
            "mismatches": [list(map(str, m)) for m in mismatches],
        }
        if args.format == "json":
            print(json.dumps(_jsonable(doc), indent=2, sort_keys=True))
        else:
            rows = [[r.property, r.case, r.method, r.verdict] for r in reports]
            _print_table(["property", "case", "method", "verdict"], rows)
            print(f"\nexpected verdicts checked: {checked}; mismatches: {len(mismatches)}")
        return 0 if not mismatches else SOLVER_ERROR
    if not args.case or not args.property:
        raise XlpError("check needs --all or both --case and --property")
    if args.property != IMPLEMENTATION_INVARIANCE:
        raise XlpError(
            "per-case checks support implementation_invariance; "
            "sensitivity/completeness diagnostics run under 'check --all'"
        )
    report = implementation_invariance_report(case(args.case))
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def cmd_reproduce(args):
    if args.all:
        if not args.out:
            raise XlpError("reproduce --all needs --out DIR")
        summary = reproduce_all(args.out, rule=args.rule, seed=args.seed)
        _print_table(
            ["row", "provenance", "status"],
            [[r["row"], r["provenance"], r["status"]] for r in summary["rows"]],
        )
        bad = [r for r in summary["rows"] if r["status"] == ref.STATUS_MISMATCH]
        return 0 if not bad else SOLVER_ERROR
    if not args.case:
        raise XlpError("reproduce needs a case id or --all")
    doc = reproduce_case(args.case, rule=args.rule)
    rows = []
    for row in ref.ROWS:
        if row["case"] != args.case:
            continue
        if args.method and row["method"] != args.method:
            continue
        cmp = compare_reference_row(row, rule=args.rule)
        rows.append([row["key"], row["provenance"], cmp["status"],
                     _fmt(cmp["max_abs_difference"])])
    if args.format == "json":
        doc["reference_rows"] = [
            compare_reference_row(row, rule=args.rule)
            for row in ref.ROWS
            if row["case"] == args.case and (not args.method or row["method"] == args.method)
        ]
        print(json.dumps(_jsonable(doc), indent=2, sort_keys=True))
        return 0
    print(f"case {args.case}: objective {_fmt(doc['solution']['objective'])} "
          f"({doc['solution']['status']})")
    for key, att in doc["attributions"].items():
        method, map_kind = key.split("/")
        if args.method and method != args.method:
            continue
        if map_kind != OBJECTIVE:
            continue
        print(f"\n{method} ({map_kind} map)")
        if "structures" in att:
            _print_table(["structure", "score"],
                         [[k, _fmt(v) if not isinstance(v, list) else v]
                          for k, v in att["structures"].items()])
        else:
            for label in ("A", "b"):
                print(f"  {label}: {att[label]}")
    if rows:
        print("\nreference rows")
        _print_table(["row", "provenance", "status", "max|diff|"], rows)
    return 0


def cmd_energy(args):
    if args.csv:
        inst = energy_mod.load_energy_csv(args.csv)
    else:
        inst = energy_mod.synth_energy(args.seed, args.horizon_hours)
    if args.months:
        base, scores = energy_mod.month_occlusion_cap_bat(inst)
        rows = [[m, _fmt(scores[m])] for m in energy_mod.MONTH_NAMES if m in scores]
        doc = {"cap_pv": base.cap_pv, "cap_bat": base.cap_bat,
               "objective": base.objective, "month_occlusion_cap_bat": scores}
        _emit(doc, args.format, rows, ["month", "cap_bat influence"])
        return 0
    sol = energy_mod.solve_energy(inst)
    doc = {"cap_pv": sol.cap_pv, "cap_bat": sol.cap_bat,
           "objective": sol.objective, "bought_kwh": sol.bought_kwh,
           "status": sol.status}
    rows = [[k, _fmt(v)] for k, v in doc.items()]
    _emit(doc, args.format, rows, ["field", "value"])
    return 0 if sol.status == "optimal" else SOLVER_ERROR


def cmd_map(args):
    if args.file:
        with open(args.file, encoding="utf-8") as fh:
            mrf = parse_mrf(fh.read())
    else:
        mrf = map_showcase()
    states, occ = edge_occlusion_states(mrf, rule=args.rule)
    doc = {
        "states": {mrf.nodes[k][0]: s for k, s in enumerate(states)},
        "edge_occlusion": {k: (None if v is None else list(v)) for k, v in occ.items()},
    }
    node_names = [n for n, _ in mrf.nodes]
    rows = [["states", *[str(s) for s in states]]] + [
        [name, *(["none"] * len(states) if diff is None else [str(d) for d in diff])]
        for name, diff in occ.items()
    ]
    _emit(doc, args.format, rows, ["", *node_names])
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="xlp",
        description="Solve linear/integer programs and explain them with "
                    "attribution scores.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, case_arg=True):
        if case_arg:
            sp.add_argument("--case", choices=CASE_IDS, help="catalog case id")
            sp.add_argument("--file", help="problem JSON file")
        sp.add_argument("--rule", choices=(DANTZIG, BLAND), default=_default_rule())
        sp.add_argument("--format", choices=("json", "csv", "table"), default="table")

    sp = sub.add_parser("solve", help="solve an LP/ILP")
    common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("grad", help="analytic derivative bundle")
    common(sp)
    sp.add_argument("--map", choices=(OBJECTIVE, SOLUTION), default=OBJECTIVE)
    sp.set_defaults(func=cmd_grad)

    sp = sub.add_parser("attribute", help="attribution scores for one method")
    common(sp)
    sp.add_argument("--method", choices=METHODS, required=True)
    sp.add_argument("--map", choices=(OBJECTIVE, SOLUTION), default=OBJECTIVE)
    sp.add_argument("--target", type=int, default=None,
                    help="solution-map output component")
    sp.add_argument("--baseline", default=NEAR_ZERO)
    sp.add_argument("--steps", type=int, default=100)
    sp.set_defaults(func=cmd_attribute)

    sp = sub.add_parser("occlude", help="occlusion over meaningful structures")
    common(sp)
    sp.add_argument("--map", choices=(OBJECTIVE, SOLUTION), default=OBJECTIVE)
    sp.add_argument("--target", type=int, default=None)
    sp.add_argument("--baseline", default=NEAR_ZERO)
    sp.add_argument("--steps", type=int, default=100)
    sp.set_defaults(func=cmd_occlude)

    sp = sub.add_parser("check", help="property diagnostics")
    sp.add_argument("--case", choices=CASE_IDS)
    sp.add_argument("--property")
    sp.add_argument("--all", action="store_true", help="full findings matrix")
    sp.add_argument("--rule", choices=(DANTZIG, BLAND), default=_default_rule())
    sp.add_argument("--format", choices=("json", "csv", "table"), default="json")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("reproduce", help="rebuild reference tables/bundles")
    sp.add_argument("case", nargs="?", choices=CASE_IDS)
    sp.add_argument("--method", choices=METHODS)
    sp.add_argument("--all", action="store_true")
    sp.add_argument("--out", help="bundle output directory (with --all)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--rule", choices=(DANTZIG, BLAND), default=_default_rule())
    sp.add_argument("--format", choices=("json", "csv", "table"), default="table")
    sp.set_defaults(func=cmd_reproduce)

    sp = sub.add_parser("energy", help="household PV/battery sizing case")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--horizon-hours", type=int, default=336)
    sp.add_argument("--csv", help="hour,demand_kwh,pv_availability file")
    sp.add_argument("--months", action="store_true",
                    help="month occlusion on the battery capacity")
    sp.add_argument("--format", choices=("json", "csv", "table"), default="table")
    sp.set_defaults(func=cmd_energy)

    sp = sub.add_parser("map", help="MAP-inference showcase / MRF file")
    sp.add_argument("--file", help="MRF JSON file")
    sp.add_argument("--rule", choices=(DANTZIG, BLAND), default=_default_rule())
    sp.add_argument("--format", choices=("json", "csv", "table"), default="table")
    sp.set_defaults(func=cmd_map)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except XlpError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return USAGE_ERROR
    except Exception as exc:  # solver-side failures
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return SOLVER_ERROR


if __name__ == "__main__":
    sys.exit(main())
