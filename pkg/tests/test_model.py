import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xlp.errors import DimensionMismatch, InvalidStructure, ParseError, UnknownStructure
from xlp.model import (
    EQ,
    GE,
    LE,
    MeaningfulStructure,
    build_problem,
    mask_structure,
    parse_problem,
    serialize_problem,
    to_standard_form,
)
from xlp.problems import case
from xlp.solver import OPTIMAL, solve_ilp, solve_lp, solve_problem

from oracles import max_flow_min_cut


def test_build_problem_ro1():
    p = build_problem([[1, 1], [2, 1]], [8, 10], [1, 2], name="RO1")
    assert p.n_rows == 2 and p.n_vars == 2
    assert p.senses == (LE, LE)
    np.testing.assert_array_equal(p.lower_bounds, [0.0, 0.0])
    assert np.all(np.isinf(p.upper_bounds))
    assert not p.is_integer


def test_build_problem_rejects_empty_variable_set():
    with pytest.raises(DimensionMismatch):
        build_problem(np.zeros((1, 0)), [1.0], [])


def test_build_problem_rejects_bad_lengths():
    with pytest.raises(DimensionMismatch):
        build_problem([[1, 1]], [1, 2], [1, 1])
    with pytest.raises(DimensionMismatch):
        build_problem([[1, 1]], [1], [1])
    with pytest.raises(DimensionMismatch):
        build_problem([[1, 1]], [1], [1, 1], senses=("<=", "<="))
    with pytest.raises(DimensionMismatch):
        build_problem([[1, 1]], [1], [1, 1], lower_bounds=[2, 2], upper_bounds=[1, 1])


def test_structure_with_dangling_row_rejected():
    s = MeaningfulStructure(name="bad", rows=(99,))
    with pytest.raises(InvalidStructure):
        build_problem([[1, 1], [2, 1]], [8, 10], [1, 2], structures=(s,))


def test_standard_form_noop_for_le_problem():
    p = case("RO1")
    sp = to_standard_form(p)
    np.testing.assert_array_equal(sp.A, p.A)
    np.testing.assert_array_equal(sp.b, p.b)
    np.testing.assert_array_equal(sp.c, p.w)
    assert sp.obj_shift == 0.0


def test_standard_form_splits_equalities_and_round_trips():
    p = case("MF1")  # carries Ax = 0 conservation rows
    sp = to_standard_form(p)
    eq_rows = sum(1 for s in p.senses if s == EQ)
    assert sp.n_rows == p.n_rows + eq_rows  # each equality doubled
    sol_std = solve_lp(sp)
    sol_orig = solve_problem(p)
    assert sol_std.status == sol_orig.status == OPTIMAL
    assert abs(sol_std.objective - sol_orig.objective) <= 1e-9


def test_standard_form_minimize_sign_restored():
    p = case("SP1")
    sp = to_standard_form(p)
    assert sp.sense == -1.0
    sol = solve_lp(sp)
    assert sol.objective == pytest.approx(4.4, abs=1e-9)  # min-cost value, not negated


def test_standard_form_preserves_feasible_region_on_random_points():
    rng = np.random.default_rng(5)
    for _ in range(25):
        m, n = rng.integers(1, 5), rng.integers(1, 5)
        A = rng.normal(size=(m, n))
        senses = tuple(rng.choice([LE, GE, EQ]) for _ in range(m))
        lb = rng.uniform(-2, 0, size=n)
        ub = lb + rng.uniform(0.5, 3, size=n)
        x0 = rng.uniform(lb, ub)
        slack = rng.uniform(0.1, 1.0, size=m)
        b = A @ x0 + np.where([s == LE for s in senses], slack,
                              np.where([s == GE for s in senses], -slack, 0.0))
        w = rng.normal(size=n)
        p = build_problem(A, b, w, senses, lower_bounds=lb, upper_bounds=ub)
        sp = to_standard_form(p)
        # map x0 into standard coordinates and check A'x' <= b'
        x_std = []
        for j, coef in sp.col_var:
            val = x0[j] - sp.shift[j]
            x_std.append(max(val, 0.0) if coef > 0 else max(-val, 0.0))
        x_std = np.array(x_std)
        assert np.all(sp.A @ x_std <= sp.b + 1e-9)
        assert sp.map_objective(sp.c @ x_std) == pytest.approx(w @ x0, abs=1e-9)


def test_mask_structure_deletes_item_column_only():
    p = case("KS3")
    masked = mask_structure(p, "item2")
    assert masked.n_vars == 6
    assert masked.n_rows == 1  # capacity row stays
    np.testing.assert_array_equal(masked.w, [50, 3, 2, 4, 2, 3])
    sol = solve_ilp(masked)
    assert sol.objective == pytest.approx(7.0)


def test_mask_structure_identity_for_empty_structure():
    base = case("RO1")
    p = build_problem(
        base.A, base.b, base.w,
        structures=(MeaningfulStructure(name="empty"),), name="RO1+empty",
    )
    masked = mask_structure(p, "empty")
    np.testing.assert_array_equal(masked.A, p.A)
    np.testing.assert_array_equal(masked.b, p.b)
    np.testing.assert_array_equal(masked.w, p.w)


def test_mask_structure_mf1_edge6_drops_flow_to_half():
    p = case("MF1")
    masked = mask_structure(p, "edge6")
    assert masked.n_vars == 6 and masked.n_rows == 9
    sol = solve_problem(masked)
    # independent oracle on the residual graph
    from xlp.problems import MF_EDGES, MF_NODES

    edges = [e for k, e in enumerate(MF_EDGES) if k != 5]
    caps = [c for k, c in enumerate([0.8, 0.2, 0.6, 0.1, 0.4, 0.4, 0.5]) if k != 5]
    expected, _ = max_flow_min_cut(MF_NODES, edges, caps, "n1", "n5")
    assert expected == pytest.approx(0.5)
    assert sol.objective == pytest.approx(expected, abs=1e-9)


def test_mask_structure_unknown_name():
    with pytest.raises(UnknownStructure):
        mask_structure(case("RO1"), "nope")


def test_mask_structure_dimensions_consistent_with_index_map():
    from xlp.model import masked_index_map

    p = case("MF1")
    for name in p.structure_names():
        masked = mask_structure(p, name)
        rows, cols = masked_index_map(p, name)
        assert masked.n_rows == len(rows)
        assert masked.n_vars == len(cols)
        sol = solve_problem(masked)
        assert sol.x.shape == (len(cols),)


def test_serialize_parse_round_trip_ro1():
    p = case("RO1")
    q = parse_problem(serialize_problem(p))
    assert q.name == p.name
    np.testing.assert_array_equal(q.A, p.A)
    np.testing.assert_array_equal(q.b, p.b)
    np.testing.assert_array_equal(q.w, p.w)
    assert q.senses == p.senses
    np.testing.assert_array_equal(q.integrality, p.integrality)
    assert [s.name for s in q.structures] == [s.name for s in p.structures]


def test_parse_rejects_wrong_b_length():
    text = '{"A": [[1, 1]], "b": [1, 2], "w": [1, 1]}'
    with pytest.raises(ParseError):
        parse_problem(text)


def test_parse_ks1_fixture_values():
    p = case("KS1")
    q = parse_problem(serialize_problem(p))
    np.testing.assert_array_equal(q.w, [3, 2, 4, 2, 2])
    np.testing.assert_array_equal(q.A, [[5, 3, 6, 2, 4]])
    np.testing.assert_array_equal(q.b, [10])


@settings(max_examples=40, deadline=None)
@given(
    m=st.integers(1, 4),
    n=st.integers(1, 4),
    data=st.data(),
)
def test_round_trip_is_identity_on_random_problems(m, n, data):
    elems = st.floats(-50, 50, allow_nan=False, width=32)
    A = [[data.draw(elems) for _ in range(n)] for _ in range(m)]
    b = [data.draw(elems) for _ in range(m)]
    w = [data.draw(elems) for _ in range(n)]
    senses = tuple(data.draw(st.sampled_from([LE, GE, EQ])) for _ in range(m))
    integer = [data.draw(st.booleans()) for _ in range(n)]
    p = build_problem(A, b, w, senses, integrality=integer, name="rand")
    q = parse_problem(serialize_problem(p))
    np.testing.assert_array_equal(q.A, p.A)
    np.testing.assert_array_equal(q.b, p.b)
    np.testing.assert_array_equal(q.w, p.w)
    assert q.senses == p.senses
    np.testing.assert_array_equal(q.integrality, p.integrality)
    np.testing.assert_array_equal(q.lower_bounds, p.lower_bounds)
    np.testing.assert_array_equal(q.upper_bounds, p.upper_bounds)
