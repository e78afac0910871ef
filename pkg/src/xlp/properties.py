"""Executable diagnostics for the classic attribution-method properties:
sensitivity (both parts), completeness and implementation invariance.

Each check returns a :class:`PropertyReport` whose evidence embeds the exact
inputs needed to reproduce a "violated" verdict with an independent
re-solve.  Influence and irrelevance are always certified by re-solving, not
by gradients, so the diagnostics do not presuppose what they test.
"""

from dataclasses import dataclass, replace as dc_replace

import numpy as np

from .attribution import (
    GXI,
    INTEGRATED_GRADIENTS,
    NEAR_ZERO,
    OCCLUSION,
    SALIENCY,
    Baseline,
    attribute,
    integrated_gradients,
    make_baseline,
    occlusion,
)
from .errors import CertificationFailed, PathInfeasible, SolveFailed
from .gradients import OBJECTIVE, SOLUTION
from .model import Problem, _frozen, mask_structure
from .solver import BLAND, DANTZIG, OPTIMAL, solve

SENSITIVITY_PART1 = "sensitivity_part1"
SENSITIVITY_PART2 = "sensitivity_part2"
COMPLETENESS = "completeness"
IMPLEMENTATION_INVARIANCE = "implementation_invariance"

HOLDS = "holds"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"

OUTPUT_CHANGE_TOL = 1e-6
ZERO_ATTRIBUTION_TOL = 1e-9
NONZERO_ATTRIBUTION_TOL = 1e-6
IRRELEVANCE_TOL = 1e-9


@dataclass(frozen=True)
class Probe:
    """A declarative parameter perturbation: set param[index] = value."""

    param: str
    index: tuple
    value: float

    def apply(self, p: Problem) -> Problem:
        base = {"A": p.A, "b": p.b, "w": p.w}[self.param]
        arr = np.array(base)
        arr[self.index] = self.value
        return dc_replace(p, **{self.param: _frozen(arr)})

    def to_dict(self):
        return {"param": self.param, "index": list(self.index), "value": self.value}


@dataclass(frozen=True)
class PropertyReport:
    property: str
    case: str
    method: str
    verdict: str
    evidence: dict
    tolerance: dict

    def to_dict(self):
        return {
            "property": self.property,
            "case": self.case,
            "method": self.method,
            "verdict": self.verdict,
            "evidence": _jsonable(self.evidence),
            "tolerance": self.tolerance,
        }


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return None if np.isnan(f) else f
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def _model_output(p: Problem, map_kind: str, rule: str):
    sol = solve(p, rule)
    if sol.status != OPTIMAL:
        return None, sol
    return (sol.objective if map_kind == OBJECTIVE else sol.x), sol


def _output_change(before, after):
    if before is None or after is None:
        return np.inf
    return float(np.max(np.abs(np.asarray(after) - np.asarray(before))))


def _structure_footprint(p: Problem, name: str):
    """Parameter entries a structure owns: (A pairs, b rows, w cols)."""
    s = p.structure(name)
    a_pairs = set(s.entries)
    for r in s.rows:
        a_pairs.update((r, j) for j in range(p.n_vars))
    for c in s.cols:
        a_pairs.update((i, c) for i in range(p.n_rows))
    return sorted(a_pairs), sorted(s.rows), sorted(s.cols)


def _attribution_magnitude(p, att, structure_or_entry):
    """Largest absolute score the attribution assigns to the target."""
    if att.scores_structures is not None:
        val = att.scores_structures.get(structure_or_entry)
        if val is None:
            return 0.0
        if isinstance(val, np.ndarray):
            finite = val[~np.isnan(val)]
            return float(np.max(np.abs(finite))) if finite.size else 0.0
        return abs(float(val))
    if isinstance(structure_or_entry, str):
        a_pairs, b_rows, w_cols = _structure_footprint(p, structure_or_entry)
    else:
        param, index = structure_or_entry
        a_pairs = [index] if param == "A" else []
        b_rows = [index[0]] if param == "b" else []
        w_cols = [index[0]] if param == "w" else []
    mags = [0.0]
    for i, j in a_pairs:
        mags.append(float(np.max(np.abs(att.scores_A[..., i, j]))))
    for i in b_rows:
        mags.append(float(np.max(np.abs(att.scores_b[..., i]))))
    for j in w_cols:
        mags.append(float(np.max(np.abs(att.scores_w[..., j]))))
    return max(mags)


def _compute_attribution(p, method, map_kind, rule, steps=100, baseline_kind=NEAR_ZERO):
    return attribute(p, method, map_kind=map_kind, rule=rule,
                     baseline_kind=baseline_kind, steps=steps)


def check_sensitivity_part1(
    p: Problem,
    method: str,
    structure_or_entry,
    influence_probe: Probe,
    map_kind: str = OBJECTIVE,
    rule: str = DANTZIG,
) -> PropertyReport:
    """Influential feature must receive a nonzero attribution.

    The probe is applied and both programs re-solved; if the output does not
    move, the probe proves nothing and the verdict is inconclusive.
    """
    base_out, _ = _model_output(p, map_kind, rule)
    probe_out, _ = _model_output(influence_probe.apply(p), map_kind, rule)
    change = _output_change(base_out, probe_out)

    att = _compute_attribution(p, method, map_kind, rule)
    magnitude = _attribution_magnitude(p, att, structure_or_entry)

    if change <= OUTPUT_CHANGE_TOL:
        verdict = INCONCLUSIVE  # probe ineffective
    elif magnitude <= ZERO_ATTRIBUTION_TOL:
        verdict = VIOLATED
    else:
        verdict = HOLDS
    return PropertyReport(
        property=SENSITIVITY_PART1,
        case=p.name,
        method=method,
        verdict=verdict,
        evidence={
            "target": _target_doc(structure_or_entry),
            "probe": influence_probe.to_dict(),
            "output_change": change,
            "attribution_magnitude": magnitude,
            "map": map_kind,
            "pivot_rule": rule,
            "caveats": list(att.caveats),
        },
        tolerance={"output_change": OUTPUT_CHANGE_TOL, "zero_attribution": ZERO_ATTRIBUTION_TOL},
    )


def check_sensitivity_part2(
    p: Problem,
    method: str,
    irrelevant_entry,
    map_kind: str = OBJECTIVE,
    rule: str = DANTZIG,
    certification_probe: Probe = None,
) -> PropertyReport:
    """Certified-irrelevant feature must receive a zero attribution.

    Irrelevance is certified by re-solving with the structure removed (or the
    entry perturbed) and demanding an unchanged objective; a moved objective
    raises :class:`CertificationFailed`.
    """
    base_obj, base_sol = _model_output(p, OBJECTIVE, rule)
    if isinstance(irrelevant_entry, str) and certification_probe is None:
        modified = mask_structure(p, irrelevant_entry)
        cert_kind = "structure_removed"
    else:
        if certification_probe is None:
            raise CertificationFailed("entry targets need a certification probe")
        modified = certification_probe.apply(p)
        cert_kind = "entry_perturbed"
    mod_obj, _ = _model_output(modified, OBJECTIVE, rule)
    cert_change = _output_change(base_obj, mod_obj)
    if cert_change > IRRELEVANCE_TOL:
        raise CertificationFailed(
            f"target {_target_doc(irrelevant_entry)} changes the objective by {cert_change:.3g}"
        )

    att = _compute_attribution(p, method, map_kind, rule)
    magnitude = _attribution_magnitude(p, att, irrelevant_entry)
    verdict = VIOLATED if magnitude > NONZERO_ATTRIBUTION_TOL else HOLDS
    return PropertyReport(
        property=SENSITIVITY_PART2,
        case=p.name,
        method=method,
        verdict=verdict,
        evidence={
            "target": _target_doc(irrelevant_entry),
            "certification": cert_kind,
            "objective_change_under_certification": cert_change,
            "attribution_magnitude": magnitude,
            "map": map_kind,
            "pivot_rule": rule,
            "caveats": list(att.caveats),
        },
        tolerance={"irrelevance": IRRELEVANCE_TOL, "nonzero_attribution": NONZERO_ATTRIBUTION_TOL},
    )


def completeness_residual(
    p: Problem,
    baseline: Baseline,
    steps: int = 100,
    map_kind: str = OBJECTIVE,
    rule: str = DANTZIG,
    target=None,
) -> PropertyReport:
    """Scores must sum to the output difference between input and baseline."""
    att = integrated_gradients(p, baseline, steps=steps, map_kind=map_kind,
                               target=target, rule=rule)
    total = float(np.sum(att.scores_A) + np.sum(att.scores_b) + np.sum(att.scores_w))

    base_out, _ = _model_output(p, map_kind, rule)
    ref_problem = dc_replace(p, A=baseline.A_bar, b=baseline.b_bar, w=baseline.w_bar)
    ref_out, ref_sol = _model_output(ref_problem, map_kind, rule)
    if base_out is None or ref_out is None:
        raise PathInfeasible(0.0, ref_sol.status)
    if map_kind == SOLUTION:
        base_out = base_out[target]
        ref_out = ref_out[target]
    delta = float(base_out - ref_out)
    residual = abs(total - delta)
    tol = max(1e-6, 1e-4 * abs(delta))
    return PropertyReport(
        property=COMPLETENESS,
        case=p.name,
        method=INTEGRATED_GRADIENTS,
        verdict=HOLDS if residual <= tol else VIOLATED,
        evidence={
            "score_sum": total,
            "output_delta": delta,
            "residual": residual,
            "baseline": baseline.kind,
            "steps": steps,
            "map": map_kind,
            "pivot_rule": rule,
            "caveats": list(att.caveats),
        },
        tolerance={"residual": tol},
    )


def implementation_invariance_report(
    p: Problem,
    methods=(SALIENCY, GXI, INTEGRATED_GRADIENTS, OCCLUSION),
    rules=(DANTZIG, BLAND),
    maps=(OBJECTIVE, SOLUTION),
) -> PropertyReport:
    """Attributions must agree across pivot rules on the same program.

    Both rules must reach optimality with equal objectives (else
    :class:`SolveFailed`); the verdict is violated as soon as any method's
    scores differ beyond tolerance, with per-method diffs and both solutions
    attached as evidence.
    """
    sols = {}
    for rule in rules:
        sol = solve(p, rule)
        if sol.status != OPTIMAL:
            raise SolveFailed(f"{p.name}: rule {rule} ended with status {sol.status}")
        sols[rule] = sol
    objs = [s.objective for s in sols.values()]
    if abs(objs[0] - objs[1]) > 1e-8:
        raise SolveFailed(f"{p.name}: rules disagree on the optimal objective")

    diffs = {}
    for method in methods:
        for map_kind in maps:
            if method == INTEGRATED_GRADIENTS and map_kind == SOLUTION:
                continue  # objective-map IG is diagnostic enough and 100x cheaper
            atts = {r: _compute_attribution(p, method, map_kind, r) for r in rules}
            diffs[f"{method}/{map_kind}"] = _attribution_diff(*[atts[r] for r in rules])

    worst = max(diffs.values())
    verdict = VIOLATED if worst > 1e-6 else HOLDS
    evidence = {
        "per_method_diff": diffs,
        "solutions": {r: _solution_doc(s) for r, s in sols.items()},
        "rules": list(rules),
    }
    return PropertyReport(
        property=IMPLEMENTATION_INVARIANCE,
        case=p.name,
        method="+".join(methods),
        verdict=verdict,
        evidence=evidence,
        tolerance={"attribution_diff": 1e-6},
    )


def _solution_doc(s):
    doc = {"x": s.x, "objective": s.objective}
    node = getattr(s, "lp_relaxation_solution", None)
    inner = s if node is None else node
    if getattr(inner, "duals", None) is not None:
        doc["duals"] = inner.duals
        doc["active_set"] = [list(t) for t in inner.basis]
    return doc


def _attribution_diff(a, b):
    if a.scores_structures is not None:
        worst = 0.0
        for k in a.scores_structures:
            va, vb = a.scores_structures[k], b.scores_structures[k]
            if va is None or vb is None:
                if (va is None) != (vb is None):
                    return np.inf
                continue
            va, vb = np.atleast_1d(va), np.atleast_1d(vb)
            mask = ~(np.isnan(va) & np.isnan(vb))
            if np.isnan(va[mask]).any() or np.isnan(vb[mask]).any():
                return np.inf
            if mask.any():
                worst = max(worst, float(np.max(np.abs(va[mask] - vb[mask]))))
        return worst
    return max(
        float(np.max(np.abs(a.scores_A - b.scores_A))),
        float(np.max(np.abs(a.scores_b - b.scores_b))),
        float(np.max(np.abs(a.scores_w - b.scores_w))),
    )


def _target_doc(structure_or_entry):
    if isinstance(structure_or_entry, str):
        return {"structure": structure_or_entry}
    param, index = structure_or_entry
    return {"param": param, "index": list(index)}
