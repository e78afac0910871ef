import numpy as np
import pytest

from xlp.attribution import (
    CONSTRAINT1_ACTIVE,
    EQUAL_EDGES,
    ITEM_AVERAGE_TENTH,
    NEAR_ZERO,
    Baseline,
    attribute,
    gradient_times_input,
    granger_causal_effects,
    integrated_gradients,
    make_baseline,
    occlusion,
    saliency,
)
from xlp.errors import BaselineInapplicable, MapMismatch, PathInfeasible
from xlp.gradients import OBJECTIVE, SOLUTION, objective_gradients, solution_jacobians
from xlp.model import _frozen, build_problem
from xlp.problems import case
from xlp.solver import solve_problem

MF_CAP_BASE = 3  # capacity rows follow the three conservation rows


def _obj_setup(cid):
    p = case(cid)
    sol = solve_problem(p)
    return p, sol, objective_gradients(p, sol)


def test_saliency_ro1_objective_map_reference_values():
    p, sol, g = _obj_setup("RO1")
    att = saliency(p, sol, g, OBJECTIVE)
    np.testing.assert_allclose(att.scores_A, [[0, -16], [0, 0]], atol=0)
    np.testing.assert_allclose(att.scores_b, [2, 0], atol=0)
    np.testing.assert_allclose(att.scores_w, [0, 8], atol=0)


def test_saliency_rejects_map_mismatch():
    p, sol, g = _obj_setup("RO1")
    with pytest.raises(MapMismatch):
        saliency(p, sol, g, SOLUTION)


def test_gxi_ro1_reference_values():
    p, sol, g = _obj_setup("RO1")
    att = gradient_times_input(p, sol, g, OBJECTIVE)
    np.testing.assert_allclose(att.scores_b, [16, 0], atol=0)
    np.testing.assert_allclose(att.scores_A, [[0, -16], [0, 0]], atol=0)


def test_gxi_is_saliency_times_parameter_everywhere():
    rng = np.random.default_rng(11)
    for _ in range(15):
        m, n = rng.integers(1, 4), rng.integers(1, 4)
        p = build_problem(
            rng.uniform(0.2, 2, size=(m, n)), rng.uniform(1, 5, size=m),
            rng.uniform(0.1, 2, size=n),
        )
        sol = solve_problem(p)
        if sol.status != "optimal":
            continue
        g = objective_gradients(p, sol)
        sal = saliency(p, sol, g, OBJECTIVE)
        gxi = gradient_times_input(p, sol, g, OBJECTIVE)
        np.testing.assert_array_equal(gxi.scores_A, np.asarray(p.A) * sal.scores_A)
        np.testing.assert_array_equal(gxi.scores_b, np.asarray(p.b) * sal.scores_b)
        np.testing.assert_array_equal(gxi.scores_w, np.asarray(p.w) * sal.scores_w)


def test_zero_parameter_entry_gives_zero_gxi_score():
    p = case("MF1")  # w has many structural zeros
    sol = solve_problem(p)
    g = objective_gradients(p, sol)
    gxi = gradient_times_input(p, sol, g, OBJECTIVE)
    zero_w = np.asarray(p.w) == 0
    assert np.all(gxi.scores_w[zero_w] == 0)


def test_make_baseline_near_zero_divides_everything_by_100():
    p = case("RO1")
    b = make_baseline(p, NEAR_ZERO)
    np.testing.assert_array_equal(b.A_bar, np.asarray(p.A) / 100)
    np.testing.assert_array_equal(b.b_bar, np.asarray(p.b) / 100)
    np.testing.assert_array_equal(b.w_bar, np.asarray(p.w) / 100)


def test_make_baseline_item_average_tenth():
    p = case("KS1")
    b = make_baseline(p, ITEM_AVERAGE_TENTH)
    np.testing.assert_allclose(b.w_bar, np.full(5, np.mean([3, 2, 4, 2, 2]) / 10))
    np.testing.assert_allclose(b.A_bar, np.full((1, 5), np.mean([5, 3, 6, 2, 4]) / 10))
    np.testing.assert_array_equal(b.b_bar, p.b)


def test_make_baseline_kind_problem_mismatch():
    with pytest.raises(BaselineInapplicable):
        make_baseline(case("RO1"), EQUAL_EDGES)
    with pytest.raises(BaselineInapplicable):
        make_baseline(case("MF1"), CONSTRAINT1_ACTIVE)


def test_ig_with_input_baseline_is_identically_zero():
    p = case("RO1")
    b = Baseline("custom", _frozen(np.array(p.A)), _frozen(np.array(p.b)),
                 _frozen(np.array(p.w)))
    att = integrated_gradients(p, b, steps=10)
    assert np.all(att.scores_A == 0)
    assert np.all(att.scores_b == 0)
    assert np.all(att.scores_w == 0)


def test_ig_near_zero_on_ro1_is_099_times_gxi():
    # uniform rescaling keeps the basis, so the integrand is constant
    p = case("RO1")
    att = integrated_gradients(p, make_baseline(p, NEAR_ZERO), steps=100)
    np.testing.assert_allclose(att.scores_b, [16 * 0.99, 0], atol=1e-9)
    np.testing.assert_allclose(att.scores_A, [[0, -16 * 0.99], [0, 0]], atol=1e-9)


def test_ig_step_convergence_on_lp_catalog():
    for cid in ("RO1", "RO2", "RO3", "RO4", "RO5", "MF1", "MF2"):
        p = case(cid)
        base = make_baseline(p, NEAR_ZERO)
        a = integrated_gradients(p, base, steps=500)
        b = integrated_gradients(p, base, steps=1000)
        for fa, fb in ((a.scores_A, b.scores_A), (a.scores_b, b.scores_b),
                       (a.scores_w, b.scores_w)):
            assert np.max(np.abs(fa - fb)) < 1e-3, cid


def test_ig_path_infeasible_reports_alpha():
    # near-zero baseline of an equality row with nonzero rhs stays solvable,
    # so force infeasibility with a crafted baseline instead
    p = build_problem([[1.0], [-1.0]], [2.0, -1.0], [1.0])  # 1 <= x <= 2
    bad = Baseline(
        "custom",
        _frozen(np.array(p.A)),
        _frozen(np.array([0.5, -1.0])),  # x <= 0.5 and x >= 1: empty
        _frozen(np.array(p.w)),
    )
    with pytest.raises(PathInfeasible) as err:
        integrated_gradients(p, bad, steps=10)
    assert 0 <= err.value.alpha <= 1


def test_mf1_ig_equal_edges_concentrates_on_last_two():
    p = case("MF1")
    att = integrated_gradients(p, make_baseline(p, EQUAL_EDGES), steps=100)
    caps = att.scores_b[MF_CAP_BASE:]
    assert np.all(np.abs(caps[:5]) < 0.01)
    assert abs(caps[5]) + abs(caps[6]) > 0.01


def test_occlusion_ks3_reference_row():
    att = occlusion(case("KS3"))
    expected = {"item1": 0, "item2": 8, "item3": 0, "item4": 0, "item5": 0,
                "item6": 0, "item7": 0}
    assert {k: v for k, v in att.scores_structures.items()} == expected


def test_occlusion_null_case_solution_map():
    # unique optimum, masked problems keep it: shared entries must be zero
    att = occlusion(case("RO1"), map_kind=SOLUTION)
    vec = att.scores_structures["resource2"]
    np.testing.assert_array_equal(vec, [0.0, 0.0])


def test_occlusion_deterministic_bit_for_bit():
    a = occlusion(case("MF1"), map_kind=SOLUTION)
    b = occlusion(case("MF1"), map_kind=SOLUTION)
    for k in a.scores_structures:
        va, vb = a.scores_structures[k], b.scores_structures[k]
        assert np.array_equal(va, vb, equal_nan=True)


def test_occlusion_records_infeasible_masks_as_none():
    att = occlusion(case("SP2"), map_kind=SOLUTION)
    assert att.scores_structures["edge1"] is None  # every route uses edge1


def test_occlusion_sp2_tie_switch_vector():
    att = occlusion(case("SP2"), map_kind=SOLUTION)
    vec = att.scores_structures["edge4"]
    assert np.isnan(vec[3])
    np.testing.assert_array_equal(vec[[0, 1, 4]], [0, 0, 0])
    np.testing.assert_array_equal(vec[[2, 5]], [-1, -1])


def test_granger_effects_are_occlusion():
    assert granger_causal_effects is occlusion


def test_attribute_dispatcher_matches_direct_calls():
    p = case("RO1")
    a = attribute(p, "saliency")
    sol = solve_problem(p)
    b = saliency(p, sol, objective_gradients(p, sol), OBJECTIVE)
    np.testing.assert_array_equal(a.scores_A, b.scores_A)


def test_solution_map_attribution_with_target_component():
    p = case("RO1")
    sol = solve_problem(p)
    j = solution_jacobians(p, sol)
    att = saliency(p, sol, j, SOLUTION, target=1)
    np.testing.assert_allclose(att.scores_b, [1.0, 0.0], atol=1e-12)
    full = saliency(p, sol, j, SOLUTION)
    assert full.scores_b.shape == (2, 2)
