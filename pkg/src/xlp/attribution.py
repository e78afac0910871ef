"""Attribution methods over the objective and solution maps.

Four methods are provided: saliency (raw partial derivatives), gradient
times input, integrated gradients along a straight path from a baseline, and
occlusion over named meaningful structures.  Occlusion doubles as the
Granger-style causal effect: the score of a structure is the difference
between the model output with and without it.
"""

from dataclasses import dataclass, replace as dc_replace

import numpy as np

from .errors import BaselineInapplicable, MapMismatch, PathInfeasible
from .gradients import (
    OBJECTIVE,
    SOLUTION,
    GradientBundle,
    ilp_relaxation_gradients,
    objective_gradients,
    solution_jacobians,
)
from .model import Problem, _frozen, mask_structure, masked_index_map
from .solver import DANTZIG, OPTIMAL, solve, solve_ilp, solve_problem

SALIENCY = "saliency"
GXI = "gxi"
INTEGRATED_GRADIENTS = "integrated_gradients"
OCCLUSION = "occlusion"

METHODS = (SALIENCY, GXI, INTEGRATED_GRADIENTS, OCCLUSION)

NEAR_ZERO = "near_zero"
EQUAL_EDGES = "equal_edges"
ITEM_AVERAGE_TENTH = "item_average_tenth"
CONSTRAINT1_ACTIVE = "constraint1_active"
CONSTRAINT2_ACTIVE = "constraint2_active"
BOTH_ACTIVE = "both_active"
CUSTOM = "custom"

CAVEAT_DEGENERATE = "degenerate optimum: derivatives depend on the solver's basis choice"
CAVEAT_SURROGATE = "integer program: scores come from the LP-relaxation surrogate"
CAVEAT_MULTIPLE = "multiple optima: scores depend on which solution the solver returned"


@dataclass(frozen=True)
class Baseline:
    """Reference parameter point for integrated gradients."""

    kind: str
    A_bar: np.ndarray
    b_bar: np.ndarray
    w_bar: np.ndarray


@dataclass(frozen=True)
class Attribution:
    """Per-parameter (or per-structure) relevance scores.

    Gradient-based methods populate ``scores_A``/``scores_b``/``scores_w``;
    occlusion populates ``scores_structures`` only.  For the solution map
    with ``target_component=None`` the score arrays keep a leading output
    axis (one slice per component of the optimal point).
    """

    method: str
    map_kind: str
    target_component: int = None
    scores_A: np.ndarray = None
    scores_b: np.ndarray = None
    scores_w: np.ndarray = None
    scores_structures: dict = None
    baseline_used: Baseline = None
    caveats: tuple = ()

    def to_dict(self):
        def arr(a):
            if a is None:
                return None
            out = np.asarray(a, dtype=float)
            return np.where(np.isnan(out), None, out).tolist() if np.isnan(out).any() else out.tolist()

        doc = {
            "method": self.method,
            "map": self.map_kind,
            "target_component": self.target_component,
            "caveats": list(self.caveats),
        }
        if self.scores_structures is not None:
            doc["structures"] = {
                k: (arr(v) if isinstance(v, np.ndarray) else v)
                for k, v in self.scores_structures.items()
            }
        else:
            doc["A"] = arr(self.scores_A)
            doc["b"] = arr(self.scores_b)
            doc["w"] = arr(self.scores_w)
        if self.baseline_used is not None:
            doc["baseline"] = self.baseline_used.kind
        return doc


def compute_gradients(p: Problem, map_kind: str, rule: str = DANTZIG):
    """Solve ``p`` and build the right gradient bundle for the map.

    Integer problems go through the LP-relaxation surrogate.  Returns
    ``(solution, bundle, caveats)``.
    """
    caveats = []
    if p.is_integer:
        sol = solve_ilp(p, rule)
        if sol.status != OPTIMAL:
            return sol, None, caveats
        bundle = ilp_relaxation_gradients(p, sol, map_kind)
        caveats.append(CAVEAT_SURROGATE)
    else:
        sol = solve_problem(p, rule)
        if sol.status != OPTIMAL:
            return sol, None, caveats
        bundle = objective_gradients(p, sol) if map_kind == OBJECTIVE else solution_jacobians(p, sol)
    if bundle.degenerate:
        caveats.append(CAVEAT_DEGENERATE)
    if getattr(sol, "multiple_optima", False):
        caveats.append(CAVEAT_MULTIPLE)
    return sol, bundle, caveats


def _pick(bundle: GradientBundle, param: str, map_kind: str, target):
    g = bundle.grad(param)
    if map_kind == SOLUTION and target is not None:
        return np.asarray(g)[target]
    return np.asarray(g)


def saliency(p, sol, grads: GradientBundle, map_kind=OBJECTIVE, target=None) -> Attribution:
    """Raw partial derivatives of the map w.r.t. every parameter entry."""
    if grads.map_kind != map_kind:
        raise MapMismatch(f"gradient bundle is for map {grads.map_kind!r}")
    caveats = _bundle_caveats(grads, sol)
    return Attribution(
        method=SALIENCY,
        map_kind=map_kind,
        target_component=target,
        scores_A=_pick(grads, "A", map_kind, target),
        scores_b=_pick(grads, "b", map_kind, target),
        scores_w=_pick(grads, "w", map_kind, target),
        caveats=caveats,
    )


def gradient_times_input(p, sol, grads: GradientBundle, map_kind=OBJECTIVE, target=None) -> Attribution:
    """Partial derivatives multiplied elementwise by the parameter values."""
    sal = saliency(p, sol, grads, map_kind, target)
    full = map_kind == SOLUTION and target is None
    mul = (lambda v, g: np.asarray(v)[None] * g) if full else (lambda v, g: np.asarray(v) * g)
    return dc_replace(
        sal,
        method=GXI,
        scores_A=mul(p.A, sal.scores_A),
        scores_b=mul(p.b, sal.scores_b),
        scores_w=mul(p.w, sal.scores_w),
    )


def _bundle_caveats(grads, sol):
    caveats = []
    if grads.surrogate:
        caveats.append(CAVEAT_SURROGATE)
    if grads.degenerate:
        caveats.append(CAVEAT_DEGENERATE)
    if getattr(sol, "multiple_optima", False) and CAVEAT_MULTIPLE not in caveats:
        caveats.append(CAVEAT_MULTIPLE)
    return tuple(dict.fromkeys(caveats))


def make_baseline(p: Problem, kind: str, A_bar=None, b_bar=None, w_bar=None) -> Baseline:
    """Build a baseline from the catalog.

    near_zero: every parameter divided by 100 (any problem).
    equal_edges: one shared value (the mean) for all edge capacities/weights;
        needs per-edge structures.
    item_average_tenth: all item values/weights replaced by a tenth of their
        mean; needs per-item structures.
    constraint{1,2}_active / both_active: two-row resource problems only; b
        is rescaled so that the named constraint(s) bind at the optimum.
    """
    if kind == CUSTOM:
        if A_bar is None or b_bar is None or w_bar is None:
            raise BaselineInapplicable("custom baseline needs A_bar, b_bar and w_bar")
        A_bar, b_bar, w_bar = np.asarray(A_bar, float), np.asarray(b_bar, float), np.asarray(w_bar, float)
        if A_bar.shape != p.A.shape or b_bar.shape != p.b.shape or w_bar.shape != p.w.shape:
            raise BaselineInapplicable("custom baseline shapes do not match the problem")
        return Baseline(CUSTOM, _frozen(A_bar), _frozen(b_bar), _frozen(w_bar))

    if kind == NEAR_ZERO:
        return Baseline(kind, _frozen(p.A / 100.0), _frozen(p.b / 100.0), _frozen(p.w / 100.0))

    edge_structs = [s for s in p.structures if s.name.startswith("edge")]
    item_structs = [s for s in p.structures if s.name.startswith("item")]

    if kind == EQUAL_EDGES:
        if not edge_structs:
            raise BaselineInapplicable("equal_edges needs a problem with per-edge structures")
        A_bar, b_bar, w_bar = np.array(p.A), np.array(p.b), np.array(p.w)
        cap_rows = [r for s in edge_structs for r in s.rows]
        if cap_rows:  # capacities live in b
            b_bar[cap_rows] = p.b[cap_rows].mean()
        else:  # weights live in w
            cols = [c for s in edge_structs for c in s.cols]
            w_bar[cols] = p.w[cols].mean()
        return Baseline(kind, _frozen(A_bar), _frozen(b_bar), _frozen(w_bar))

    if kind == ITEM_AVERAGE_TENTH:
        if not item_structs:
            raise BaselineInapplicable("item_average_tenth needs a problem with per-item structures")
        A_bar = np.full_like(p.A, p.A.mean() / 10.0)
        w_bar = np.full_like(p.w, p.w.mean() / 10.0)
        return Baseline(kind, _frozen(A_bar), _frozen(np.array(p.b)), _frozen(w_bar))

    if kind in (CONSTRAINT1_ACTIVE, CONSTRAINT2_ACTIVE, BOTH_ACTIVE):
        if p.n_rows != 2 or not any(s.name.startswith("resource") for s in p.structures):
            raise BaselineInapplicable(f"{kind} applies to two-constraint resource problems")
        b_bar = np.array(p.b)
        loose = 10.0 * float(np.max(np.abs(p.b)))
        if kind == CONSTRAINT1_ACTIVE:
            b_bar[1] = loose
        elif kind == CONSTRAINT2_ACTIVE:
            b_bar[0] = loose
        else:
            b_bar[:] = float(np.min(p.b))
        return Baseline(kind, _frozen(np.array(p.A)), _frozen(b_bar), _frozen(np.array(p.w)))

    raise BaselineInapplicable(f"unknown baseline kind {kind!r}")


def integrated_gradients(
    p: Problem,
    baseline: Baseline,
    steps: int = 100,
    map_kind: str = OBJECTIVE,
    target=None,
    rule: str = DANTZIG,
) -> Attribution:
    """Midpoint-rule integral of the map gradient along the straight path
    from the baseline to the input, jointly interpolating A, b and w.

    Raises :class:`PathInfeasible` (with the offending interpolation point)
    when any program along the path fails to solve; skipping points would
    silently corrupt the integral.
    """
    dA = p.A - baseline.A_bar
    db = p.b - baseline.b_bar
    dw = p.w - baseline.w_bar

    sum_A = sum_b = sum_w = None
    caveats = []
    for k in range(steps):
        alpha = (k + 0.5) / steps
        interp = dc_replace(
            p,
            A=_frozen(baseline.A_bar + alpha * dA),
            b=_frozen(baseline.b_bar + alpha * db),
            w=_frozen(baseline.w_bar + alpha * dw),
        )
        sol, bundle, step_caveats = compute_gradients(interp, map_kind, rule)
        if bundle is None:
            raise PathInfeasible(alpha, sol.status)
        gA = _pick(bundle, "A", map_kind, target)
        gb = _pick(bundle, "b", map_kind, target)
        gw = _pick(bundle, "w", map_kind, target)
        if sum_A is None:
            sum_A, sum_b, sum_w = np.zeros_like(gA), np.zeros_like(gb), np.zeros_like(gw)
        sum_A += gA
        sum_b += gb
        sum_w += gw
        for c in step_caveats:
            if c not in caveats:
                caveats.append(c)

    full = map_kind == SOLUTION and target is None
    mul = (lambda d, s: np.asarray(d)[None] * s) if full else (lambda d, s: np.asarray(d) * s)
    return Attribution(
        method=INTEGRATED_GRADIENTS,
        map_kind=map_kind,
        target_component=target,
        scores_A=mul(dA, sum_A / steps),
        scores_b=mul(db, sum_b / steps),
        scores_w=mul(dw, sum_w / steps),
        baseline_used=baseline,
        caveats=tuple(caveats),
    )


def occlusion(
    p: Problem,
    structures=None,
    map_kind: str = OBJECTIVE,
    target=None,
    rule: str = DANTZIG,
) -> Attribution:
    """Difference between the model output with and without each structure.

    Both the full and each masked program are solved with the same pivot
    rule.  Objective-map scores are scalars.  Solution-map scores are vectors
    aligned on the original variable ids; variables removed by the mask get
    ``nan`` (rendered as "none").  A masked program that fails to solve is
    recorded as ``None`` rather than raised.
    """
    names = list(structures) if structures is not None else p.structure_names()
    base = solve(p, rule)
    if base.status != OPTIMAL:
        raise RuntimeError(f"cannot occlude: base problem is {base.status!r}")
    caveats = []
    if getattr(base, "multiple_optima", False):
        caveats.append(CAVEAT_MULTIPLE)

    scores = {}
    for name in names:
        masked = mask_structure(p, name)
        msol = solve(masked, rule)
        if msol.status != OPTIMAL:
            scores[name] = None
            continue
        if map_kind == OBJECTIVE:
            scores[name] = float(base.objective - msol.objective) + 0.0
            continue
        _, kept_cols = masked_index_map(p, name)
        vec = np.full(p.n_vars, np.nan)
        for new_j, old_j in enumerate(kept_cols):
            vec[old_j] = base.x[old_j] - msol.x[new_j]
        if target is not None:
            scores[name] = None if np.isnan(vec[target]) else float(vec[target])
        else:
            scores[name] = vec
    return Attribution(
        method=OCCLUSION,
        map_kind=map_kind,
        target_component=target,
        scores_structures=scores,
        caveats=tuple(caveats),
    )


# The Granger-style causal effect of a structure is computed exactly like
# occlusion: output of the full program minus output of the program with the
# structure removed.
granger_causal_effects = occlusion


def attribute(
    p: Problem,
    method: str,
    map_kind: str = OBJECTIVE,
    target=None,
    baseline_kind: str = NEAR_ZERO,
    steps: int = 100,
    rule: str = DANTZIG,
) -> Attribution:
    """One-call dispatcher used by the CLI and the reproduction bundle."""
    if method == OCCLUSION:
        return occlusion(p, map_kind=map_kind, target=target, rule=rule)
    if method == INTEGRATED_GRADIENTS:
        baseline = make_baseline(p, baseline_kind)
        return integrated_gradients(p, baseline, steps=steps, map_kind=map_kind, target=target, rule=rule)
    sol, bundle, _ = compute_gradients(p, map_kind, rule)
    if bundle is None:
        raise RuntimeError(f"problem is {sol.status!r}")
    if method == SALIENCY:
        return saliency(p, sol, bundle, map_kind, target)
    if method == GXI:
        return gradient_times_input(p, sol, bundle, map_kind, target)
    raise ValueError(f"unknown method {method!r}")
