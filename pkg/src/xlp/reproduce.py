"""Reproduction bundle: every catalog case x applicable method x map, the
property-findings matrix and the MAP showcase, compared against the frozen
reference rows and written out as deterministic JSON/CSV artifacts."""

import csv
import io
import json
import os

import numpy as np

from . import reference_values as ref
from .attribution import (
    GXI,
    INTEGRATED_GRADIENTS,
    NEAR_ZERO,
    OCCLUSION,
    SALIENCY,
    attribute,
)
from .findings import findings_matrix, verify_matrix
from .gradients import OBJECTIVE, SOLUTION
from .mrf import edge_occlusion_states, map_showcase
from .problems import CASE_IDS, case
from .properties import _jsonable
from .solver import DANTZIG, OPTIMAL, solve, solve_problem, verify_kkt

MF_CAPACITY_ROW_BASE = 3


def _computed_for_row(row, rule):
    p = case(row["case"])
    att = attribute(
        p,
        row["method"],
        map_kind=row["map"],
        baseline_kind=row.get("baseline", NEAR_ZERO),
        rule=rule,
    )
    param = row["param"]
    if param == "structures":
        return [att.scores_structures[name] for name in p.structure_names()]
    if param == "b-capacity":
        return list(att.scores_b[MF_CAPACITY_ROW_BASE:])
    return {"A": att.scores_A, "b": att.scores_b, "w": att.scores_w}[param]


def _within(values, expected, tol):
    a = np.asarray(values, dtype=float)
    b = np.asarray(expected, dtype=float)
    if a.shape != b.shape:
        return False, float("inf")
    worst = float(np.max(np.abs(a - b))) if a.size else 0.0
    return worst <= tol, worst


def compare_reference_row(row, rule=DANTZIG):
    computed = _computed_for_row(row, rule)
    ok, worst = _within(computed, row["values"], row["tol"])
    if ok:
        status = ref.STATUS_EXACT
    elif row["expect"] == "divergent":
        status = ref.STATUS_DIVERGENT
    else:
        status = ref.STATUS_MISMATCH
    out = {
        "key": row["key"],
        "case": row["case"],
        "method": row["method"],
        "map": row["map"],
        "param": row["param"],
        "provenance": row["provenance"],
        "expected": row["values"],
        "computed": _jsonable(computed),
        "max_abs_difference": worst,
        "tolerance": row["tol"],
        "status": status,
    }
    if status == ref.STATUS_DIVERGENT and row.get("substitute") == "kkt":
        p = case(row["case"])
        out["substitute_check"] = verify_kkt(p, solve_problem(p, rule))
    return out


def reproduce_case(case_id, rule=DANTZIG, ig_steps=100):
    """Solve one case and compute every applicable attribution."""
    p = case(case_id)
    sol = solve(p, rule)
    doc = {
        "case": case_id,
        "pivot_rule": rule,
        "solution": sol.to_dict(),
    }
    expected = ref.SOLUTIONS[case_id]
    doc["objective_matches_derived_value"] = (
        sol.status == OPTIMAL and abs(sol.objective - expected["objective"]) <= 1e-8
    )
    atts = {}
    for method in (SALIENCY, GXI, INTEGRATED_GRADIENTS, OCCLUSION):
        for map_kind in (OBJECTIVE, SOLUTION):
            if method == INTEGRATED_GRADIENTS and map_kind == SOLUTION:
                continue
            att = attribute(p, method, map_kind=map_kind, rule=rule, steps=ig_steps)
            atts[f"{method}/{map_kind}"] = att.to_dict()
    doc["attributions"] = atts
    return doc


def reproduce_all(out_dir, rule=DANTZIG, seed=0, ig_steps=100):
    """Write the full bundle; byte-identical across runs for fixed inputs."""
    os.makedirs(out_dir, exist_ok=True)

    summary_rows = []
    for case_id in CASE_IDS:
        doc = reproduce_case(case_id, rule=rule, ig_steps=ig_steps)
        _write_json(os.path.join(out_dir, f"case_{case_id}.json"), doc)
        summary_rows.append(
            {
                "row": f"{case_id}/solution",
                "provenance": ref.SOLUTIONS[case_id]["provenance"],
                "status": ref.STATUS_DERIVED
                if doc["objective_matches_derived_value"]
                else ref.STATUS_MISMATCH,
                "detail": f"objective {doc['solution']['objective']!r}",
            }
        )

    for row in ref.ROWS:
        cmp = compare_reference_row(row, rule=rule)
        _write_json(os.path.join(out_dir, f"reference_{_slug(row['key'])}.json"), cmp)
        summary_rows.append(
            {
                "row": row["key"],
                "provenance": row["provenance"],
                "status": cmp["status"],
                "detail": f"max|diff|={cmp['max_abs_difference']:.6g} tol={row['tol']:g}",
            }
        )

    states, occ = edge_occlusion_states(map_showcase(), rule=rule)
    map_doc = {
        "states": list(states),
        "edge_occlusion": {k: list(v) for k, v in occ.items()},
    }
    _write_json(os.path.join(out_dir, "map_showcase.json"), map_doc)
    map_ok = (
        map_doc["states"] == ref.MAP_SHOWCASE["states"]
        and map_doc["edge_occlusion"] == ref.MAP_SHOWCASE["edge_occlusion"]
    )
    summary_rows.append(
        {
            "row": "MAP/showcase",
            "provenance": ref.MAP_SHOWCASE["provenance"],
            "status": ref.STATUS_EXACT if map_ok else ref.STATUS_MISMATCH,
            "detail": f"states={map_doc['states']}",
        }
    )

    reports = findings_matrix(rule=rule)
    mismatches, checked = verify_matrix(reports)
    _write_json(
        os.path.join(out_dir, "property_findings.json"),
        {
            "reports": [r.to_dict() for r in reports],
            "expected_verdicts_checked": checked,
            "mismatches": [list(map(str, m)) for m in mismatches],
        },
    )
    summary_rows.append(
        {
            "row": "properties/findings-matrix",
            "provenance": "derived",
            "status": ref.STATUS_DERIVED if not mismatches else ref.STATUS_MISMATCH,
            "detail": f"{checked} verdicts checked",
        }
    )

    summary = {"pivot_rule": rule, "seed": seed, "rows": summary_rows}
    _write_json(os.path.join(out_dir, "summary.json"), summary)
    _write_summary_csv(os.path.join(out_dir, "summary.csv"), summary_rows)
    return summary


def _slug(key):
    return key.replace("/", "_").replace(":", "-")


def _write_json(path, doc):
    payload = json.dumps(_jsonable(doc), indent=2, sort_keys=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(payload)
        fh.write("\n")


def _write_summary_csv(path, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["row", "provenance", "status", "detail"])
    for r in rows:
        writer.writerow([r["row"], r["provenance"], r["status"], r["detail"]])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
