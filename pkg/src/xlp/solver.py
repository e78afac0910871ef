"""Two-phase revised simplex with pluggable pivot rules, plus branch-and-bound.

The kernel solves ``maximize c.x  s.t.  A x <= b,  x >= 0`` (the standard
form produced by :func:`xlp.model.to_standard_form`).  Slack variables turn
the rows into equalities; rows with negative right-hand sides are negated and
receive phase-1 artificials.  Two entering rules are provided on purpose:
``dantzig`` (most positive reduced cost) and ``bland`` (least index).  Ratio
ties always leave the lowest-index basic variable, which keeps both rules
deterministic and cycle-free in practice; after a long stall the entering
rule falls back to Bland as an anti-cycling guarantee.
"""

import heapq
from dataclasses import dataclass, replace as dc_replace

import numpy as np

from .errors import CycleDetected
from .model import EQ, GE, LE, Problem, StandardProblem, to_standard_form

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

DANTZIG = "dantzig"
BLAND = "bland"

FEAS_TOL = 1e-8
RC_TOL = 1e-9
PIV_TOL = 1e-9
INT_TOL = 1e-6


@dataclass(frozen=True)
class LpSolution:
    """Solver output mapped back to the original problem's rows/variables.

    ``duals[i]`` is d(optimal objective)/d(b_i) in the problem's own
    objective sense.  ``basis`` is the active set selected by the terminal
    simplex basis: a tuple of ``("row", i)``, ``("lb", j)`` or ``("ub", j)``
    markers.  ``multiple_optima`` is set when the terminal vertex has a
    zero-reduced-cost nonbasic column or more tight constraints than
    variables (either way the solver's answer is not the unique story).
    """

    x: np.ndarray
    duals: np.ndarray
    basis: tuple
    objective: float
    status: str
    multiple_optima: bool
    pivot_rule: str
    iterations: int = 0

    def to_dict(self):
        return {
            "x": [float(v) for v in self.x],
            "duals": [float(v) for v in self.duals],
            "basis": [list(t) for t in self.basis],
            "objective": float(self.objective),
            "status": self.status,
            "multiple_optima": bool(self.multiple_optima),
            "pivot_rule": self.pivot_rule,
        }


@dataclass(frozen=True)
class IlpSolution:
    """Branch-and-bound output; integer entries are snapped exactly."""

    x: np.ndarray
    objective: float
    status: str
    node_count: int
    lp_relaxation_solution: LpSolution
    pivot_rule: str

    def to_dict(self):
        d = {
            "x": [float(v) for v in self.x],
            "objective": float(self.objective),
            "status": self.status,
            "node_count": self.node_count,
            "pivot_rule": self.pivot_rule,
        }
        if self.lp_relaxation_solution is not None:
            d["duals"] = [float(v) for v in self.lp_relaxation_solution.duals]
        return d


class _Kernel:
    """Mutable simplex state over the slack/artificial extension of a
    standard-form problem."""

    def __init__(self, sp: StandardProblem):
        self.sp = sp
        M, N = sp.n_rows, sp.n_cols
        self.M, self.N = M, N

        A = np.asarray(sp.A, dtype=float)
        b = np.asarray(sp.b, dtype=float)
        self.negated = b < 0

        rows = np.where(self.negated[:, None], -A, A)
        rhs = np.where(self.negated, -b, b)
        slack = np.diag(np.where(self.negated, -1.0, 1.0))

        art_rows = np.where(self.negated)[0]
        art = np.zeros((M, len(art_rows)))
        for k, r in enumerate(art_rows):
            art[r, k] = 1.0

        self.T = np.hstack([rows, slack, art])
        self.rhs = rhs
        self.n_art = len(art_rows)
        self.art_start = N + M
        self.total = self.T.shape[1]

        self.basis = np.empty(M, dtype=int)
        for r in range(M):
            self.basis[r] = N + r
        for k, r in enumerate(art_rows):
            self.basis[r] = self.art_start + k

        self.B_inv = np.eye(M)
        self.in_basis = np.zeros(self.total, dtype=bool)
        self.in_basis[self.basis] = True
        self.iterations = 0

    def x_basic(self):
        return self.B_inv @ self.rhs

    def _pivot(self, j, r, d):
        pivot_row = self.B_inv[r] / d[r]
        self.B_inv -= np.outer(d, pivot_row)
        self.B_inv[r] = pivot_row
        self.in_basis[self.basis[r]] = False
        self.in_basis[j] = True
        self.basis[r] = j
        self.iterations += 1
        if self.iterations % 64 == 0:
            self.B_inv = np.linalg.inv(self.T[:, self.basis])

    def _leave(self, d, x_b):
        ok = d > PIV_TOL
        if not np.any(ok):
            return None, None
        ratios = np.full(self.M, np.inf)
        ratios[ok] = x_b[ok] / d[ok]
        theta = ratios.min()
        near = np.where(ratios <= theta + 1e-10)[0]
        r = near[np.argmin(self.basis[near])]  # lowest basic index breaks ties
        return r, theta

    def run(self, c, rule, allow_art=False):
        """Maximize ``c.x`` from the current basis; returns a status string."""
        stall_limit = 10 * (self.M + self.N)
        hard_limit = 200 * (self.M + self.N) + 20000
        stall = 0
        cur_rule = rule
        last_obj = -np.inf
        eligible = np.ones(self.total, dtype=bool)
        if not allow_art:
            eligible[self.art_start:] = False

        while True:
            if self.iterations > hard_limit:
                raise CycleDetected("simplex iteration limit exceeded")
            x_b = self.x_basic()
            y = c[self.basis] @ self.B_inv
            rc = c - y @ self.T
            rc[self.in_basis] = 0.0
            rc[~eligible] = -np.inf

            if cur_rule == BLAND:
                cand = np.where(rc > RC_TOL)[0]
                if cand.size == 0:
                    return OPTIMAL
                j = int(cand[0])
            else:
                j = int(np.argmax(rc))
                if rc[j] <= RC_TOL:
                    return OPTIMAL

            d = self.B_inv @ self.T[:, j]
            r, theta = self._leave(d, x_b)
            if r is None:
                return UNBOUNDED
            self._pivot(j, r, d)

            obj = c[self.basis] @ self.x_basic()
            if obj > last_obj + 1e-12:
                last_obj = obj
                stall = 0
            else:
                stall += 1
                if stall > stall_limit:
                    cur_rule = BLAND  # anti-cycling fallback

    def drive_out_artificials(self):
        """Pivot zero-level artificials out of the basis where possible."""
        for r in range(self.M):
            if self.basis[r] < self.art_start:
                continue
            d_row = self.B_inv[r] @ self.T[:, : self.art_start]
            cand = np.where(np.abs(d_row) > 1e-7)[0]
            cand = [j for j in cand if not self.in_basis[j]]
            if not cand:
                continue  # redundant row; artificial stays basic at zero
            j = int(cand[0])
            d = self.B_inv @ self.T[:, j]
            self._pivot(j, r, d)

    def solve(self, rule):
        c1 = np.zeros(self.total)
        c1[self.art_start:] = -1.0
        if self.n_art:
            status = self.run(c1, rule, allow_art=True)
            if status != OPTIMAL:
                raise CycleDetected("phase 1 did not terminate at an optimum")
            if c1[self.basis] @ self.x_basic() < -1e-7:
                return INFEASIBLE
            self.drive_out_artificials()

        c2 = np.zeros(self.total)
        c2[: self.N] = self.sp.c
        self.c2 = c2
        return self.run(c2, rule)

    # -- terminal-state queries ------------------------------------------

    def reduced_costs(self):
        y = self.c2[self.basis] @ self.B_inv
        rc = self.c2 - y @ self.T
        return rc, y

    def x_standard(self):
        x = np.zeros(self.N)
        x_b = self.x_basic()
        for r, v in enumerate(self.basis):
            if v < self.N:
                x[v] = x_b[r]
        return x

    def duals_standard(self):
        _, y = self.reduced_costs()
        return np.where(self.negated, -y, y)

    def has_zero_rc_nonbasic(self):
        rc, _ = self.reduced_costs()
        for j in range(self.art_start):
            if not self.in_basis[j] and abs(rc[j]) <= 1e-9:
                return True
        return False

    def chosen_active_set(self):
        """Active constraints selected by the terminal basis, in original
        coordinates: nonbasic structural column -> variable at lower bound,
        nonbasic slack -> its row (upper-bound rows map to ("ub", j))."""
        sp = self.sp
        active = []
        split_vars = {j for j, coef in sp.col_var if coef < 0}
        for t in range(self.N):
            if self.in_basis[t]:
                continue
            j, coef = sp.col_var[t]
            if j in split_vars:
                continue  # halves of a split free variable carry no bound
            active.append(("lb", j))
        for k in range(self.M):
            if self.in_basis[self.N + k]:
                continue
            kind, idx, _ = sp.row_origin[k]
            active.append((kind, idx))
        seen = set()
        ordered = []
        for item in sorted(active, key=lambda t: ({"row": 0, "lb": 1, "ub": 2}[t[0]], t[1])):
            if item not in seen:
                seen.add(item)
                ordered.append(item)
        return tuple(ordered)


def _tight_count(p: Problem, x) -> int:
    """Number of constraints and bounds active at x, equalities once each."""
    count = 0
    act = p.A @ x
    for i in range(p.n_rows):
        if p.senses[i] == EQ or abs(act[i] - p.b[i]) <= 1e-7:
            count += 1
    for j in range(p.n_vars):
        if np.isfinite(p.lower_bounds[j]) and abs(x[j] - p.lower_bounds[j]) <= 1e-9:
            count += 1
        if np.isfinite(p.upper_bounds[j]) and abs(x[j] - p.upper_bounds[j]) <= 1e-9:
            count += 1
    return count


def solve_lp(sp: StandardProblem, rule: str = DANTZIG) -> LpSolution:
    """Solve a standard-form LP; returns statuses instead of raising."""
    if rule not in (DANTZIG, BLAND):
        raise ValueError(f"unknown pivot rule {rule!r}")
    p = sp.problem
    kern = _Kernel(sp)
    status = kern.solve(rule)
    if status != OPTIMAL:
        nan_x = np.full(p.n_vars, np.nan)
        nan_y = np.full(p.n_rows, np.nan)
        return LpSolution(
            x=nan_x, duals=nan_y, basis=(), objective=np.nan, status=status,
            multiple_optima=False, pivot_rule=rule, iterations=kern.iterations,
        )

    x = sp.map_x(kern.x_standard())
    duals = sp.map_duals(kern.duals_standard())
    objective = float(p.w @ x)
    multiple = kern.has_zero_rc_nonbasic() or _tight_count(p, x) > p.n_vars
    return LpSolution(
        x=x,
        duals=duals,
        basis=kern.chosen_active_set(),
        objective=objective,
        status=OPTIMAL,
        multiple_optima=bool(multiple),
        pivot_rule=rule,
        iterations=kern.iterations,
    )


def solve_problem(p: Problem, rule: str = DANTZIG, backend: str = "simplex") -> LpSolution:
    """Solve the LP relaxation of a problem (bounds kept, integrality ignored)."""
    if backend == "highs":
        return _solve_highs(p)
    return solve_lp(to_standard_form(p), rule)


def solve_ilp(p: Problem, rule: str = DANTZIG) -> IlpSolution:
    """Best-bound branch-and-bound on fractional integer variables.

    Branching variable: most fractional, ties to the lowest index; the
    down-branch is queued before the up-branch.  Deterministic for a fixed
    pivot rule.
    """
    if not p.is_integer:
        raise ValueError("solve_ilp requires at least one integrality flag")
    int_idx = np.where(p.integrality)[0]
    better = (lambda a, b: a > b + 1e-9) if p.objective_sense == "maximize" else (
        lambda a, b: a < b - 1e-9
    )
    bound_key = (lambda v: -v) if p.objective_sense == "maximize" else (lambda v: v)

    incumbent = None
    incumbent_node = None
    node_count = 0
    counter = 0
    root_unbounded = False

    heap = []

    def push(bound, lb, ub):
        nonlocal counter
        heapq.heappush(heap, (bound_key(bound), counter, lb, ub))
        counter += 1

    inf_bound = np.inf if p.objective_sense == "maximize" else -np.inf
    push(inf_bound, np.array(p.lower_bounds), np.array(p.upper_bounds))

    while heap:
        key, _, lb, ub = heapq.heappop(heap)
        if incumbent is not None and not better(-key if p.objective_sense == "maximize" else key, incumbent.objective):
            continue
        sub = dc_replace(
            p,
            lower_bounds=lb,
            upper_bounds=ub,
            structures=(),
        )
        rel = solve_problem(sub, rule)
        node_count += 1
        if rel.status == UNBOUNDED and node_count == 1:
            root_unbounded = True
            break
        if rel.status != OPTIMAL:
            continue
        if incumbent is not None and not better(rel.objective, incumbent.objective):
            continue

        frac = rel.x[int_idx] - np.floor(rel.x[int_idx] + INT_TOL)
        frac = np.where(frac < INT_TOL, 0.0, frac)
        fractional = np.where(frac > INT_TOL)[0]
        if fractional.size == 0:
            x_int = rel.x.copy()
            x_int[int_idx] = np.round(rel.x[int_idx])
            obj = float(p.w @ x_int)
            cand = dc_replace(rel, x=x_int, objective=obj)
            if incumbent is None or better(obj, incumbent.objective):
                incumbent = cand
                incumbent_node = rel
            continue

        dist = np.abs(frac[fractional] - 0.5)
        pick = fractional[np.lexsort((int_idx[fractional], dist))[0]]
        j = int(int_idx[pick])
        floor_v = np.floor(rel.x[j] + INT_TOL)

        lb_down, ub_down = lb.copy(), ub.copy()
        ub_down[j] = floor_v
        push(rel.objective, lb_down, ub_down)
        lb_up, ub_up = lb.copy(), ub.copy()
        lb_up[j] = floor_v + 1.0
        push(rel.objective, lb_up, ub_up)

    if root_unbounded:
        status = UNBOUNDED
    elif incumbent is None:
        status = INFEASIBLE
    else:
        status = OPTIMAL
    if incumbent is None:
        return IlpSolution(
            x=np.full(p.n_vars, np.nan),
            objective=np.nan,
            status=status,
            node_count=node_count,
            lp_relaxation_solution=None,
            pivot_rule=rule,
        )
    return IlpSolution(
        x=incumbent.x,
        objective=incumbent.objective,
        status=OPTIMAL,
        node_count=node_count,
        lp_relaxation_solution=incumbent_node,
        pivot_rule=rule,
    )


def solve(p: Problem, rule: str = DANTZIG, backend: str = "simplex"):
    """Dispatch to the ILP or LP solver depending on integrality flags."""
    if p.is_integer and backend == "simplex":
        return solve_ilp(p, rule)
    return solve_problem(p, rule, backend=backend)


def multiplicity_probe(p: Problem, sol: LpSolution, k: int = 10, budget: int = 60):
    """Search for alternative optimal vertices near the returned one.

    Explores pivots that keep the objective unchanged: entering columns with
    zero reduced cost, and degenerate (zero-ratio) pivots.  Returns up to
    ``k`` solutions whose point or active set differs from ``sol``; an empty
    list means no alternative vertex was found (unique optimum detected).
    """
    if sol.status != OPTIMAL:
        raise ValueError("multiplicity_probe requires an optimal solution")
    sp = to_standard_form(p)
    kern = _Kernel(sp)
    if kern.solve(sol.pivot_rule) != OPTIMAL:
        return []

    base_key = _vertex_key(sp, kern)
    seen = {tuple(sorted(kern.basis))}
    found = {}
    frontier = [(kern.basis.copy(), kern.B_inv.copy(), kern.in_basis.copy())]
    examined = 0

    while frontier and len(found) < k and examined < budget:
        basis, B_inv, in_basis = frontier.pop(0)
        kern.basis, kern.B_inv, kern.in_basis = basis, B_inv, in_basis
        examined += 1
        rc, _ = kern.reduced_costs()
        x_b = kern.x_basic()
        for j in range(kern.art_start):
            if kern.in_basis[j]:
                continue
            d = kern.B_inv @ kern.T[:, j]
            r, theta = kern._leave(d, x_b)
            if r is None:
                continue
            step_obj = rc[j] * theta
            zero_rc = abs(rc[j]) <= 1e-9
            degenerate = theta <= 1e-10
            if not (zero_rc or (degenerate and rc[j] < 0)):
                continue
            if abs(step_obj) > 1e-9:
                continue
            nb, nBi, nib = basis.copy(), B_inv.copy(), in_basis.copy()
            k2 = kern
            k2.basis, k2.B_inv, k2.in_basis = nb, nBi, nib
            k2._pivot(j, r, d)
            key = tuple(sorted(k2.basis))
            if key in seen:
                continue
            seen.add(key)
            vkey = _vertex_key(sp, k2)
            if vkey != base_key and vkey not in found:
                found[vkey] = _solution_from_kernel(sp, k2, sol.pivot_rule)
            frontier.append((k2.basis.copy(), k2.B_inv.copy(), k2.in_basis.copy()))
            kern.basis, kern.B_inv, kern.in_basis = basis, B_inv, in_basis
    return list(found.values())


def _vertex_key(sp, kern):
    x = sp.map_x(kern.x_standard())
    return (tuple(np.round(x, 9)), kern.chosen_active_set())


def _solution_from_kernel(sp, kern, rule):
    p = sp.problem
    x = sp.map_x(kern.x_standard())
    return LpSolution(
        x=x,
        duals=sp.map_duals(kern.duals_standard()),
        basis=kern.chosen_active_set(),
        objective=float(p.w @ x),
        status=OPTIMAL,
        multiple_optima=True,
        pivot_rule=rule,
        iterations=kern.iterations,
    )


def verify_kkt(p: Problem, sol: LpSolution, tol: float = 1e-8) -> dict:
    """Optimality certificate from first principles: primal feasibility,
    dual sign conditions, complementary slackness, stationarity of the
    reduced costs at the bounds, and the implied strong-duality gap."""
    x, y = sol.x, sol.duals
    s = 1.0 if p.objective_sense == "maximize" else -1.0
    act = p.A @ x

    primal = 0.0
    for i in range(p.n_rows):
        resid = act[i] - p.b[i]
        if p.senses[i] == LE:
            primal = max(primal, resid)
        elif p.senses[i] == GE:
            primal = max(primal, -resid)
        else:
            primal = max(primal, abs(resid))
    primal = max(
        primal,
        float(np.max(np.maximum(p.lower_bounds - x, 0.0), initial=0.0)),
        float(np.max(np.maximum(x - p.upper_bounds, 0.0), initial=0.0)),
    )

    dual_sign = 0.0
    comp_slack = 0.0
    for i in range(p.n_rows):
        if p.senses[i] == LE:
            dual_sign = max(dual_sign, -s * y[i])
            comp_slack = max(comp_slack, abs(y[i] * (p.b[i] - act[i])))
        elif p.senses[i] == GE:
            dual_sign = max(dual_sign, s * y[i])
            comp_slack = max(comp_slack, abs(y[i] * (act[i] - p.b[i])))

    r = p.w - p.A.T @ y
    stationarity = 0.0
    bound_term = 0.0
    for j in range(p.n_vars):
        at_lb = np.isfinite(p.lower_bounds[j]) and x[j] - p.lower_bounds[j] <= 1e-7
        at_ub = np.isfinite(p.upper_bounds[j]) and p.upper_bounds[j] - x[j] <= 1e-7
        if at_lb and at_ub:
            bound_term += r[j] * x[j]
        elif at_lb:
            stationarity = max(stationarity, s * r[j])
            bound_term += r[j] * p.lower_bounds[j]
        elif at_ub:
            stationarity = max(stationarity, -s * r[j])
            bound_term += r[j] * p.upper_bounds[j]
        else:
            stationarity = max(stationarity, abs(r[j]))

    dual_objective = float(y @ p.b + bound_term)
    gap = abs(sol.objective - dual_objective)
    return {
        "primal_feasibility": float(primal),
        "dual_sign": float(dual_sign),
        "complementary_slackness": float(comp_slack),
        "stationarity": float(stationarity),
        "duality_gap": float(gap),
        "ok": bool(
            primal <= tol and dual_sign <= tol and comp_slack <= tol
            and stationarity <= 1e-7 and gap <= 1e-7
        ),
    }


def _solve_highs(p: Problem) -> LpSolution:
    """scipy/HiGHS backend for instances too large for the dense kernel."""
    from scipy import sparse
    from scipy.optimize import linprog

    sign = 1.0 if p.objective_sense == "minimize" else -1.0
    c = sign * p.w

    le_rows = [i for i in range(p.n_rows) if p.senses[i] == LE]
    ge_rows = [i for i in range(p.n_rows) if p.senses[i] == GE]
    eq_rows = [i for i in range(p.n_rows) if p.senses[i] == EQ]

    A = sparse.csr_matrix(p.A)
    A_ub = sparse.vstack([A[le_rows], -A[ge_rows]]) if le_rows or ge_rows else None
    b_ub = np.concatenate([p.b[le_rows], -p.b[ge_rows]]) if le_rows or ge_rows else None
    A_eq = A[eq_rows] if eq_rows else None
    b_eq = p.b[eq_rows] if eq_rows else None

    bounds = [
        (
            None if not np.isfinite(p.lower_bounds[j]) else float(p.lower_bounds[j]),
            None if not np.isfinite(p.upper_bounds[j]) else float(p.upper_bounds[j]),
        )
        for j in range(p.n_vars)
    ]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                  method="highs")
    status = {0: OPTIMAL, 2: INFEASIBLE, 3: UNBOUNDED}.get(res.status, INFEASIBLE)
    if status != OPTIMAL:
        return LpSolution(
            x=np.full(p.n_vars, np.nan), duals=np.full(p.n_rows, np.nan), basis=(),
            objective=np.nan, status=status, multiple_optima=False,
            pivot_rule="highs",
        )
    duals = np.zeros(p.n_rows)
    if le_rows or ge_rows:
        marg = np.asarray(res.ineqlin.marginals)
        for pos, i in enumerate(le_rows):
            duals[i] = sign * marg[pos]
        for pos, i in enumerate(ge_rows):
            duals[i] = -sign * marg[len(le_rows) + pos]
    if eq_rows:
        marg = np.asarray(res.eqlin.marginals)
        for pos, i in enumerate(eq_rows):
            duals[i] = sign * marg[pos]
    x = np.asarray(res.x)
    return LpSolution(
        x=x,
        duals=duals,
        basis=(),
        objective=float(p.w @ x),
        status=OPTIMAL,
        multiple_optima=False,
        pivot_rule="highs",
    )
