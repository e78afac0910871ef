import numpy as np
import pytest
from dataclasses import replace as dc_replace

from xlp.errors import NotOptimal, ProbeInfeasible
from xlp.gradients import (
    OBJECTIVE,
    SOLUTION,
    finite_difference_oracle,
    ilp_relaxation_gradients,
    objective_gradients,
    solution_jacobians,
)
from xlp.model import _frozen, build_problem
from xlp.problems import case
from xlp.solver import solve_ilp, solve_problem


def grads(cid):
    p = case(cid)
    sol = solve_problem(p)
    return p, sol, objective_gradients(p, sol)


def test_ro1_objective_gradients_exact():
    _, sol, g = grads("RO1")
    np.testing.assert_allclose(g.dO_dA, [[0.0, -16.0], [0.0, 0.0]], atol=0)
    np.testing.assert_allclose(g.dO_db, [2.0, 0.0], atol=0)
    np.testing.assert_allclose(g.dO_dw, [0.0, 8.0], atol=0)  # envelope: dO/dw = x*
    assert not g.degenerate


def test_objective_gradients_requires_optimal():
    p = build_problem([[1.0]], [-1.0], [1.0])
    sol = solve_problem(p)
    with pytest.raises(NotOptimal):
        objective_gradients(p, sol)


def test_dual_sign_and_complementary_slackness_across_cases():
    for cid in ("RO1", "RO2", "RO3", "RO4", "RO5", "MF1", "MF2"):
        p, sol, g = grads(cid)
        # maximize/<= rows: shadow prices nonnegative
        for i, s in enumerate(p.senses):
            if s == "<=":
                assert g.dO_db[i] >= -1e-9
        slackness = p.b - p.A @ sol.x
        for i, s in enumerate(p.senses):
            if s == "<=" and slackness[i] > 1e-7:
                assert abs(g.dO_db[i]) <= 1e-9, (cid, i)


def test_ro1_solution_jacobian_matches_active_set_inverse():
    p, sol, _ = grads("RO1")
    j = solution_jacobians(p, sol)
    assert not j.degenerate
    # active set {x1 >= 0, row 1}: moving b1 moves x2 one-for-one
    np.testing.assert_allclose(j.dS_db[:, 0], [0.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(j.dS_db[:, 1], [0.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(j.dS_dw, np.zeros((2, 2)), atol=0)


def test_solution_jacobian_first_order_prediction():
    for cid in ("RO1", "RO2", "RO3"):
        p = case(cid)
        sol = solve_problem(p)
        j = solution_jacobians(p, sol)
        for i in range(p.n_rows):
            delta = 1e-4
            b2 = np.array(p.b)
            b2[i] += delta
            moved = solve_problem(dc_replace(p, b=_frozen(b2)))
            predicted = sol.x + j.dS_db[:, i] * delta
            np.testing.assert_allclose(moved.x, predicted, atol=1e-8)


def test_solution_jacobian_flags_degenerate_cases():
    p = case("MF1")
    sol = solve_problem(p)
    j = solution_jacobians(p, sol)
    assert j.degenerate  # 9 tight constraints on 7 variables


def test_fd_oracle_matches_duals_on_ro1():
    p = case("RO1")
    fd = finite_difference_oracle(p, OBJECTIVE, "b")
    assert not fd.kinks.any()
    np.testing.assert_allclose(fd.values, [2.0, 0.0], atol=1e-6)
    fd_w = finite_difference_oracle(p, OBJECTIVE, "w")
    np.testing.assert_allclose(fd_w.values, [0.0, 8.0], atol=1e-6)


def test_fd_oracle_flags_kink_on_ro4_row1():
    p = case("RO4")
    fd = finite_difference_oracle(p, OBJECTIVE, "b")
    assert fd.kinks[0]  # one-sided slopes 2 vs 0 at the degenerate vertex


def test_fd_oracle_raises_on_infeasible_probe():
    p = case("SP1")  # perturbing the node-balance vector breaks conservation
    with pytest.raises(ProbeInfeasible):
        finite_difference_oracle(p, OBJECTIVE, "b")
    fd = finite_difference_oracle(p, OBJECTIVE, "b", on_infeasible="flag")
    assert fd.infeasible.all()


def test_fd_oracle_solution_map_ro1():
    p = case("RO1")
    sol = solve_problem(p)
    j = solution_jacobians(p, sol)
    fd = finite_difference_oracle(p, SOLUTION, "b")
    for i in range(p.n_rows):
        if fd.kinks[i]:
            continue
        np.testing.assert_allclose(fd.values[:, i], j.dS_db[:, i], atol=1e-6)


def test_fd_oracle_flags_mf1_capacity_kink_for_edge7_flow():
    # edge 7 saturated while its feeders are capacity-pinned: raising the
    # capacity cannot raise the flow but lowering it must lower it
    p = case("MF1")
    fd = finite_difference_oracle(p, SOLUTION, "b", on_infeasible="flag")
    cap7_row = 3 + 6
    assert fd.kinks[cap7_row]


def test_ilp_surrogate_equals_plain_lp_gradients_when_relaxation_tight():
    p = case("SP1")
    isol = solve_ilp(p)
    surrogate = ilp_relaxation_gradients(p, isol)
    relax = solve_problem(p)
    plain = objective_gradients(p, relax)
    assert surrogate.surrogate
    np.testing.assert_allclose(surrogate.dO_dw, plain.dO_dw, atol=1e-9)
    np.testing.assert_allclose(surrogate.dO_db, plain.dO_db, atol=1e-9)
    np.testing.assert_allclose(surrogate.dO_dA, plain.dO_dA, atol=1e-9)


def test_ilp_surrogate_ks3_sign_pattern_vs_fd_on_relaxation():
    p = case("KS3")
    isol = solve_ilp(p)
    g = ilp_relaxation_gradients(p, isol)
    # relaxation packs half of heavy item 1; its weight hurts the value
    assert g.dO_dA[0, 0] < 0
    assert np.all(g.dO_dA <= 1e-12)
    fd = finite_difference_oracle(p, OBJECTIVE, "A", h=1e-4)
    mask = ~fd.kinks
    np.testing.assert_allclose(g.dO_dA[mask], fd.values[mask], atol=1e-6)


def test_ilp_surrogate_is_pivot_rule_independent():
    p = case("KS1")
    a = ilp_relaxation_gradients(p, solve_ilp(p, "dantzig"))
    b = ilp_relaxation_gradients(p, solve_ilp(p, "bland"))
    np.testing.assert_array_equal(a.dO_dw, b.dO_dw)
    np.testing.assert_array_equal(a.dO_db, b.dO_db)


@pytest.mark.parametrize("cid", ["RO1", "RO2", "RO3"])
def test_analytic_gradients_match_fd_at_nondegenerate_optima(cid):
    p = case(cid)
    sol = solve_problem(p)
    g = objective_gradients(p, sol)
    assert not g.degenerate
    for param in ("A", "b", "w"):
        fd = finite_difference_oracle(p, OBJECTIVE, param)
        analytic = g.grad(param)
        assert not fd.kinks.any()
        np.testing.assert_allclose(
            analytic, fd.values, rtol=1e-5, atol=1e-7,
            err_msg=f"{cid}/{param}",
        )
