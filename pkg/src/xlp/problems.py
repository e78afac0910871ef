"""Builders for the evaluation catalog: resource optimization (RO1-RO5),
maximum flow (MF1, MF2), 0/1 knapsack (KS1-KS3) and shortest path (SP1, SP2).

Each case ships its meaningful structures: one per resource constraint, per
edge, or per item.  Graph cases store their edge lists explicitly so the
capacity/weight tables bind to the right edges.
"""

import numpy as np

from .errors import DimensionMismatch, InvalidGraph, Unreachable
from .model import (
    DELETE_ROWS_AND_COLS,
    EQ,
    LE,
    MAXIMIZE,
    MINIMIZE,
    MeaningfulStructure,
    Problem,
    build_problem,
)

RO1, RO2, RO3, RO4, RO5 = "RO1", "RO2", "RO3", "RO4", "RO5"
MF1, MF2 = "MF1", "MF2"
KS1, KS2, KS3 = "KS1", "KS2", "KS3"
SP1, SP2 = "SP1", "SP2"

CASE_IDS = (RO1, RO2, RO3, RO4, RO5, MF1, MF2, KS1, KS2, KS3, SP1, SP2)

# Unique optimum / multiple optima / edge cases.
TYPE_I = (RO1, RO2, RO3, MF1, KS1, SP1)
TYPE_II = (RO4, MF2, KS2, SP2)
TYPE_III = (RO5, KS3)

_RO_TABLE = {
    RO1: ([[1.0, 1.0], [2.0, 1.0]], [8.0, 10.0]),
    RO2: ([[1.0, 1.0], [2.0, 1.5]], [10.0, 10.0]),
    RO3: ([[1.0, 2.25], [2.0, 1.0]], [10.0, 10.0]),
    RO4: ([[1.0, 1.0], [2.0, 1.0]], [10.0, 10.0]),
    RO5: ([[1.0, 2.0], [2.0, 1.0]], [10.0, 10.0]),
}

# Five-node flow network; n1 is the source, n5 the target.
MF_NODES = ("n1", "n2", "n3", "n4", "n5")
MF_EDGES = (
    ("n1", "n2"),  # edge1
    ("n1", "n3"),  # edge2
    ("n2", "n3"),  # edge3
    ("n2", "n4"),  # edge4
    ("n3", "n4"),  # edge5
    ("n3", "n5"),  # edge6
    ("n4", "n5"),  # edge7
)
_MF_CAPS = {
    MF1: [0.8, 0.2, 0.6, 0.1, 0.4, 0.4, 0.5],
    MF2: [0.8, 0.2, 0.6, 0.3, 0.4, 0.2, 0.3],
}

_KS_TABLE = {
    KS1: ([3.0, 2.0, 4.0, 2.0, 2.0], [5.0, 3.0, 6.0, 2.0, 4.0], 10.0),
    KS2: ([4.0, 4.0, 1.0, 3.0], [4.0, 6.0, 3.0, 3.0], 10.0),
    KS3: ([50.0, 15.0, 3.0, 2.0, 4.0, 2.0, 3.0], [20.0, 10.0, 5.0, 3.0, 6.0, 2.0, 4.0], 10.0),
}

# Five-node route network; n1 is the source, n5 the target.  Both cheap
# routes leave through edge1: edge3+edge6 via n3, or edge4 straight from n2.
# Edges 5 and 2 form a detour through n4 that never pays off.
SP_NODES = ("n1", "n2", "n3", "n4", "n5")
SP_EDGES = (
    ("n1", "n2"),  # edge1
    ("n4", "n3"),  # edge2
    ("n2", "n3"),  # edge3
    ("n2", "n5"),  # edge4
    ("n2", "n4"),  # edge5
    ("n3", "n5"),  # edge6
)
_SP_WEIGHTS = {
    SP1: [0.5, 2.0, 1.8, 4.2, 1.2, 2.1],
    SP2: [0.5, 2.0, 1.8, 3.9, 1.2, 2.1],
}


def _check_graph(nodes, edges):
    seen = set()
    for u, v in edges:
        if u == v:
            raise InvalidGraph(f"self-loop on node {u!r}")
        if (u, v) in seen:
            raise InvalidGraph(f"duplicate edge {(u, v)!r}")
        if u not in nodes or v not in nodes:
            raise InvalidGraph(f"edge {(u, v)!r} references an unknown node")
        seen.add((u, v))


def build_max_flow(nodes, edges, capacities, source, target) -> Problem:
    """Maximum-flow LP: conservation equalities on interior nodes, one
    capacity row per edge, objective = flow entering the target."""
    _check_graph(nodes, edges)
    if source == target:
        raise InvalidGraph("source and target must differ")
    capacities = np.asarray(capacities, dtype=float)
    if capacities.shape != (len(edges),):
        raise DimensionMismatch("one capacity per edge required")
    if np.any(capacities < 0):
        raise InvalidGraph("capacities must be nonnegative")

    interior = [v for v in nodes if v not in (source, target)]
    n_e = len(edges)
    A = np.zeros((len(interior) + n_e, n_e))
    for k, (u, v) in enumerate(edges):
        if u in interior:
            A[interior.index(u), k] = 1.0
        if v in interior:
            A[interior.index(v), k] = -1.0
    A[len(interior):, :] = np.eye(n_e)

    b = np.concatenate([np.zeros(len(interior)), capacities])
    senses = (EQ,) * len(interior) + (LE,) * n_e
    w = np.zeros(n_e)
    for k, (u, v) in enumerate(edges):
        if v == target:
            w[k] = 1.0
        elif u == target:
            w[k] = -1.0

    structures = tuple(
        MeaningfulStructure(
            name=f"edge{k + 1}",
            rows=(len(interior) + k,),
            cols=(k,),
            removal_mode=DELETE_ROWS_AND_COLS,
        )
        for k in range(n_e)
    )
    return build_problem(
        A, b, w, senses, objective_sense=MAXIMIZE, structures=structures, name="max-flow"
    )


def build_shortest_path(nodes, edges, weights, source, target) -> Problem:
    """Shortest-path ILP over the full node-edge incidence matrix."""
    _check_graph(nodes, edges)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (len(edges),):
        raise DimensionMismatch("one weight per edge required")

    reachable = {source}
    frontier = [source]
    while frontier:
        u = frontier.pop()
        for a, bnode in edges:
            if a == u and bnode not in reachable:
                reachable.add(bnode)
                frontier.append(bnode)
    if target not in reachable:
        raise Unreachable(f"no directed path from {source!r} to {target!r}")

    n_e = len(edges)
    A = np.zeros((len(nodes), n_e))
    for k, (u, v) in enumerate(edges):
        A[nodes.index(u), k] = 1.0
        A[nodes.index(v), k] = -1.0
    b = np.zeros(len(nodes))
    b[nodes.index(source)] = 1.0
    b[nodes.index(target)] = -1.0

    structures = tuple(
        MeaningfulStructure(name=f"edge{k + 1}", cols=(k,), removal_mode=DELETE_ROWS_AND_COLS)
        for k in range(n_e)
    )
    return build_problem(
        A,
        b,
        weights,
        (EQ,) * len(nodes),
        objective_sense=MINIMIZE,
        upper_bounds=np.ones(n_e),
        integrality=np.ones(n_e, dtype=bool),
        structures=structures,
        name="shortest-path",
    )


def build_knapsack(values, weights, capacity) -> Problem:
    """0/1 knapsack: one capacity row, binary item variables, per-item
    structures that remove only the item's column (capacity row stays)."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.shape != weights.shape:
        raise DimensionMismatch("values and weights must have equal length")
    if np.any(weights <= 0):
        raise ValueError("item weights must be positive")
    if capacity <= 0:
        raise ValueError("capacity must be positive")
    n = values.size
    structures = tuple(
        MeaningfulStructure(name=f"item{j + 1}", cols=(j,), removal_mode=DELETE_ROWS_AND_COLS)
        for j in range(n)
    )
    return build_problem(
        weights.reshape(1, n),
        [capacity],
        values,
        (LE,),
        objective_sense=MAXIMIZE,
        upper_bounds=np.ones(n),
        integrality=np.ones(n, dtype=bool),
        structures=structures,
        name="knapsack",
    )


def case(case_id: str) -> Problem:
    """Build one catalog case exactly as tabulated, structures included."""
    if case_id in _RO_TABLE:
        A, b = _RO_TABLE[case_id]
        structures = tuple(
            MeaningfulStructure(name=f"resource{i + 1}", rows=(i,), removal_mode=DELETE_ROWS_AND_COLS)
            for i in range(2)
        )
        p = build_problem(A, b, [1.0, 2.0], objective_sense=MAXIMIZE,
                          structures=structures, name=case_id)
        return p
    if case_id in _MF_CAPS:
        p = build_max_flow(MF_NODES, MF_EDGES, _MF_CAPS[case_id], "n1", "n5")
        return _rename(p, case_id)
    if case_id in _KS_TABLE:
        values, weights, cap = _KS_TABLE[case_id]
        return _rename(build_knapsack(values, weights, cap), case_id)
    if case_id in _SP_WEIGHTS:
        p = build_shortest_path(SP_NODES, SP_EDGES, _SP_WEIGHTS[case_id], "n1", "n5")
        return _rename(p, case_id)
    raise KeyError(f"unknown case id {case_id!r}")


def _rename(p: Problem, name: str) -> Problem:
    from dataclasses import replace

    return replace(p, name=name)
