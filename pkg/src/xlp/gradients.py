"""Analytic derivatives of the objective and solution maps, plus an
independent finite-difference oracle.

Objective-map derivatives come from LP duality: with optimal point ``x*``
and shadow prices ``y`` (one per row),

    dO/dw = x*        dO/db = y        dO/dA[i, j] = -y[i] * x*[j].

Solution-map derivatives come from the active set selected by the terminal
simplex basis: stacking the active rows and bounds into a square system
``A_B x* = b_B`` gives ``dx*/db_B = inv(A_B)`` and
``dx*/dA[i, j] = -inv(A_B) e_i x*[j]`` for active rows i, zero elsewhere.
At degenerate vertices the duals (and hence every quantity here) depend on
the solver's basis choice; such bundles are flagged rather than repaired.
"""

from dataclasses import dataclass, replace as dc_replace

import numpy as np

from .errors import MapMismatch, NotOptimal, ProbeInfeasible
from .model import Problem, _frozen
from .solver import (
    DANTZIG,
    OPTIMAL,
    IlpSolution,
    LpSolution,
    _tight_count,
    solve_problem,
)

OBJECTIVE = "objective"
SOLUTION = "solution"


@dataclass(frozen=True)
class GradientBundle:
    """Derivatives of one map (objective or solution) w.r.t. A, b and w."""

    map_kind: str
    degenerate: bool
    surrogate: bool = False
    dO_dw: np.ndarray = None
    dO_db: np.ndarray = None
    dO_dA: np.ndarray = None
    dS_db: np.ndarray = None
    dS_dA: np.ndarray = None
    dS_dw: np.ndarray = None

    def grad(self, param):
        """Derivative array for parameter 'A' | 'b' | 'w' on this bundle's map."""
        key = {"A": ("dO_dA", "dS_dA"), "b": ("dO_db", "dS_db"), "w": ("dO_dw", "dS_dw")}[param]
        value = getattr(self, key[0] if self.map_kind == OBJECTIVE else key[1])
        if value is None:
            raise MapMismatch(f"bundle carries no {param} derivative for map {self.map_kind}")
        return value


def _require_optimal(sol):
    if sol.status != OPTIMAL:
        raise NotOptimal(f"solution status is {sol.status!r}")


def is_degenerate(p: Problem, sol: LpSolution) -> bool:
    """More tight constraints than variables, or a non-unique optimum."""
    return bool(sol.multiple_optima or _tight_count(p, sol.x) > p.n_vars)


def objective_gradients(p: Problem, sol: LpSolution) -> GradientBundle:
    """Envelope-theorem derivatives of the optimal objective value."""
    _require_optimal(sol)
    return GradientBundle(
        map_kind=OBJECTIVE,
        degenerate=is_degenerate(p, sol),
        dO_dw=sol.x.copy(),
        dO_db=sol.duals.copy(),
        dO_dA=-np.outer(sol.duals, sol.x) + 0.0,  # normalize -0.0 entries
    )


def _active_matrix(p: Problem, basis):
    """Stack the basis-selected active rows/bounds into one linear system."""
    rows = []
    row_pos = {}
    for kind, idx in basis:
        if kind == "row":
            rows.append(np.asarray(p.A[idx], dtype=float))
            row_pos[idx] = len(rows) - 1
        elif kind == "lb":
            e = np.zeros(p.n_vars)
            e[idx] = -1.0
            rows.append(e)
        else:  # upper bound
            e = np.zeros(p.n_vars)
            e[idx] = 1.0
            rows.append(e)
    A_B = np.array(rows) if rows else np.zeros((0, p.n_vars))
    return A_B, row_pos


def solution_jacobians(p: Problem, sol: LpSolution) -> GradientBundle:
    """Implicit differentiation of the returned vertex through its active set.

    When the active set is not square and nonsingular, a least-squares
    pseudo-inverse is used and the bundle is flagged degenerate (never
    silently).
    """
    _require_optimal(sol)
    n, m = p.n_vars, p.n_rows
    A_B, row_pos = _active_matrix(p, sol.basis)

    degenerate = is_degenerate(p, sol)
    square = A_B.shape[0] == n
    if square:
        try:
            inv = np.linalg.inv(A_B)
        except np.linalg.LinAlgError:
            inv = np.linalg.pinv(A_B)
            degenerate = True
    else:
        inv = np.linalg.pinv(A_B)
        degenerate = True

    dS_db = np.zeros((n, m))
    for i, pos in row_pos.items():
        dS_db[:, i] = inv[:, pos]

    dS_dA = np.zeros((n, m, n))
    for i, pos in row_pos.items():
        dS_dA[:, i, :] = -np.outer(inv[:, pos], sol.x)

    return GradientBundle(
        map_kind=SOLUTION,
        degenerate=degenerate,
        dS_db=dS_db,
        dS_dA=dS_dA,
        dS_dw=np.zeros((n, n)),
    )


def ilp_relaxation_gradients(p: Problem, sol: IlpSolution, map_kind=OBJECTIVE) -> GradientBundle:
    """Surrogate derivatives for integer programs.

    The integer objective map is piecewise constant, so the contribution of
    each parameter is read off the LP relaxation instead: the relaxation is
    solved once (fixed dantzig rule, keeping the surrogate independent of the
    caller's pivot rule) and differentiated at its own optimum.  The bundle
    is flagged ``surrogate=True``; it reproduces the qualitative anomalies of
    gradient attributions on integer problems rather than hiding them.
    """
    if not p.is_integer:
        raise MapMismatch("ilp_relaxation_gradients requires integrality flags")
    _require_optimal(sol)
    relaxed = solve_problem(p, DANTZIG)
    if relaxed.status != OPTIMAL:
        raise NotOptimal(f"LP relaxation is {relaxed.status!r}")
    if map_kind == OBJECTIVE:
        bundle = objective_gradients(p, relaxed)
    else:
        bundle = solution_jacobians(p, relaxed)
    return dc_replace(bundle, surrogate=True)


@dataclass(frozen=True)
class FdResult:
    """Central differences with one-sided disagreement (kink) flags.

    ``values`` has the parameter's shape for the objective map and a leading
    output axis for the solution map.  Entries flagged in ``kinks`` sit on a
    non-differentiable point and must not be compared against analytic
    values; ``infeasible`` marks probes that broke the program (only when
    ``on_infeasible="flag"``).
    """

    values: np.ndarray
    kinks: np.ndarray
    infeasible: np.ndarray


def _one_sided_disagree(dp, dm, atol=1e-7):
    hi = max(abs(dp), abs(dm))
    lo = min(abs(dp), abs(dm))
    if hi <= atol:
        return False
    if dp * dm < 0:
        return True
    if lo <= atol:
        return hi > 10.0 * atol
    return hi / lo > 10.0


def _map_value(p: Problem, map_kind, rule):
    sol = solve_problem(p, rule)
    if sol.status != OPTIMAL:
        return None
    return sol.objective if map_kind == OBJECTIVE else sol.x


def finite_difference_oracle(
    p: Problem,
    map_kind: str,
    param: str,
    h: float = 1e-5,
    rule: str = DANTZIG,
    on_infeasible: str = "raise",
) -> FdResult:
    """Entry-wise central differences of the chosen map w.r.t. A, b or w.

    Integer problems are probed through their LP relaxation.  Raises
    :class:`ProbeInfeasible` when a perturbed program fails to solve, unless
    ``on_infeasible="flag"``.
    """
    if param not in ("A", "b", "w"):
        raise ValueError(f"param must be 'A', 'b' or 'w', not {param!r}")
    base = {"A": p.A, "b": p.b, "w": p.w}[param]
    shape = base.shape

    f0 = _map_value(p, map_kind, rule)
    if f0 is None:
        raise ProbeInfeasible("problem not solvable at the base point")
    out_shape = shape if map_kind == OBJECTIVE else (p.n_vars,) + shape

    values = np.zeros(out_shape)
    kinks = np.zeros(shape, dtype=bool)
    infeasible = np.zeros(shape, dtype=bool)

    for idx in np.ndindex(shape):
        probes = {}
        bad = False
        for sign in (+1.0, -1.0):
            arr = np.array(base)
            arr[idx] += sign * h
            probe = dc_replace(p, **{param: _frozen(arr)})
            val = _map_value(probe, map_kind, rule)
            if val is None:
                if on_infeasible == "flag":
                    bad = True
                    break
                raise ProbeInfeasible(
                    f"perturbing {param}{list(idx)} by {sign * h:+g} made the program unsolvable"
                )
            probes[sign] = val
        if bad:
            infeasible[idx] = True
            kinks[idx] = True
            continue

        d_plus = (probes[1.0] - f0) / h
        d_minus = (f0 - probes[-1.0]) / h
        central = (probes[1.0] - probes[-1.0]) / (2.0 * h)
        if map_kind == OBJECTIVE:
            values[idx] = central
            kinks[idx] = _one_sided_disagree(d_plus, d_minus)
        else:
            values[(slice(None),) + idx] = central
            kinks[idx] = any(
                _one_sided_disagree(dp, dm) for dp, dm in zip(np.ravel(d_plus), np.ravel(d_minus))
            )
    return FdResult(values=values, kinks=kinks, infeasible=infeasible)
