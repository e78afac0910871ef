"""MAP inference for pairwise Markov random fields as a linear program.

The program optimizes node beliefs ``mu_i(s)`` and edge beliefs
``mu_ij(s,t)`` over the local consistency relaxation: per-node normalization
plus marginalization rows tying each edge belief block to both endpoint
nodes.  Potentials enter through their logs, so they must be strictly
positive.  On trees the relaxation is tight and decoding the node beliefs by
argmax recovers the exact MAP assignment.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import NonIntegralSolution, ParseError
from .model import EQ, MAXIMIZE, MeaningfulStructure, Problem, build_problem, mask_structure
from .solver import DANTZIG, OPTIMAL, solve_problem


@dataclass(frozen=True)
class Mrf:
    """Pairwise MRF: ``nodes`` are (name, unary potentials), ``edges`` are
    (i, j, pairwise potential table with shape states_i x states_j)."""

    nodes: tuple
    edges: tuple

    def __post_init__(self):
        nodes = tuple((str(n), np.asarray(phi, dtype=float)) for n, phi in self.nodes)
        edges = tuple((int(i), int(j), np.asarray(t, dtype=float)) for i, j, t in self.edges)
        for name, phi in nodes:
            if phi.ndim != 1 or phi.size == 0:
                raise ParseError(f"node {name!r} needs a 1-d potential vector")
            if np.any(phi <= 0):
                raise ParseError(f"node {name!r} has non-positive potentials")
        for i, j, t in edges:
            if not (0 <= i < len(nodes) and 0 <= j < len(nodes)) or i == j:
                raise ParseError(f"edge ({i},{j}) references bad nodes")
            if t.shape != (nodes[i][1].size, nodes[j][1].size):
                raise ParseError(f"edge ({i},{j}) potential table has shape {t.shape}")
            if np.any(t <= 0):
                raise ParseError(f"edge ({i},{j}) has non-positive potentials")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)

    @property
    def state_counts(self):
        return tuple(phi.size for _, phi in self.nodes)

    def edge_name(self, k):
        i, j, _ = self.edges[k]
        return f"E{i + 1}{j + 1}"


def node_offsets(mrf: Mrf):
    """Start index of each node's belief block in the variable vector."""
    offsets = []
    pos = 0
    for _, phi in mrf.nodes:
        offsets.append(pos)
        pos += phi.size
    return offsets, pos


def build_map_lp(mrf: Mrf) -> Problem:
    """Belief LP with one structure per edge (its belief block plus its
    marginalization rows), so occlusion can cut an edge out cleanly."""
    offsets, n_node_vars = node_offsets(mrf)
    counts = mrf.state_counts

    edge_offsets = []
    pos = n_node_vars
    for i, j, _ in mrf.edges:
        edge_offsets.append(pos)
        pos += counts[i] * counts[j]
    n_vars = pos

    w = np.zeros(n_vars)
    for k, (_, phi) in enumerate(mrf.nodes):
        w[offsets[k]: offsets[k] + phi.size] = np.log(phi)
    for k, (i, j, table) in enumerate(mrf.edges):
        w[edge_offsets[k]: edge_offsets[k] + table.size] = np.log(table).ravel()

    rows = []
    rhs = []
    for k in range(len(mrf.nodes)):
        row = np.zeros(n_vars)
        row[offsets[k]: offsets[k] + counts[k]] = 1.0
        rows.append(row)
        rhs.append(1.0)

    edge_rows = {k: [] for k in range(len(mrf.edges))}
    for k, (i, j, table) in enumerate(mrf.edges):
        si, sj = counts[i], counts[j]
        block = edge_offsets[k]
        for s in range(si):
            row = np.zeros(n_vars)
            row[offsets[i] + s] = 1.0
            row[block + s * sj: block + (s + 1) * sj] = -1.0
            edge_rows[k].append(len(rows))
            rows.append(row)
            rhs.append(0.0)
        for t in range(sj):
            row = np.zeros(n_vars)
            row[offsets[j] + t] = 1.0
            row[block + t: block + table.size: sj] = -1.0
            edge_rows[k].append(len(rows))
            rows.append(row)
            rhs.append(0.0)

    structures = tuple(
        MeaningfulStructure(
            name=mrf.edge_name(k),
            rows=tuple(edge_rows[k]),
            cols=tuple(range(edge_offsets[k], edge_offsets[k] + mrf.edges[k][2].size)),
        )
        for k in range(len(mrf.edges))
    )
    return build_problem(
        np.array(rows),
        rhs,
        w,
        (EQ,) * len(rows),
        objective_sense=MAXIMIZE,
        upper_bounds=np.ones(n_vars),
        structures=structures,
        name="map-lp",
    )


def decode_map_solution(mrf: Mrf, x) -> tuple:
    """Argmax state per node; fractional node beliefs are an error."""
    offsets, _ = node_offsets(mrf)
    states = []
    for k, count in enumerate(mrf.state_counts):
        block = np.asarray(x[offsets[k]: offsets[k] + count])
        if np.any(np.abs(block - np.round(block)) > 1e-6):
            raise NonIntegralSolution(
                f"node {mrf.nodes[k][0]!r} beliefs are fractional: {block}"
            )
        states.append(int(np.argmax(block)))
    return tuple(states)


def solve_map(mrf: Mrf, rule: str = DANTZIG):
    """Solve the belief LP and decode; returns (states, LpSolution)."""
    p = build_map_lp(mrf)
    sol = solve_problem(p, rule)
    if sol.status != OPTIMAL:
        raise NonIntegralSolution(f"belief LP is {sol.status!r}")
    return decode_map_solution(mrf, sol.x), sol


def edge_occlusion_states(mrf: Mrf, rule: str = DANTZIG):
    """Occlusion on decoded states: remove each edge and report, per node,
    original state minus state without the edge."""
    p = build_map_lp(mrf)
    base_states, _ = solve_map(mrf, rule)
    out = {}
    for k in range(len(mrf.edges)):
        masked = mask_structure(p, mrf.edge_name(k))
        sol = solve_problem(masked, rule)
        if sol.status != OPTIMAL:
            out[mrf.edge_name(k)] = None
            continue
        masked_states = decode_map_solution(mrf, sol.x)  # node blocks keep offsets
        out[mrf.edge_name(k)] = tuple(
            b - m for b, m in zip(base_states, masked_states)
        )
    return base_states, out


def map_showcase() -> Mrf:
    """Three binary variables in a chain; both edges prefer equal states."""
    same = [[20.0, 1.0], [1.0, 20.0]]
    return Mrf(
        nodes=(("X1", [10.0, 2.0]), ("X2", [8.0, 8.0]), ("X3", [5.0, 10.0])),
        edges=((0, 1, same), (1, 2, same)),
    )


def serialize_mrf(mrf: Mrf) -> str:
    doc = {
        "nodes": [
            {"name": name, "states": int(phi.size), "phi": [float(v) for v in phi]}
            for name, phi in mrf.nodes
        ],
        "edges": [
            {"i": i, "j": j, "phi": [[float(v) for v in row] for row in t]}
            for i, j, t in mrf.edges
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def parse_mrf(text: str) -> Mrf:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    try:
        nodes = tuple((nd["name"], nd["phi"]) for nd in doc["nodes"])
        edges = tuple((ed["i"], ed["j"], ed["phi"]) for ed in doc["edges"])
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed MRF document: {exc}") from exc
    for k, nd in enumerate(doc["nodes"]):
        if "states" in nd and nd["states"] != len(nd["phi"]):
            raise ParseError("states does not match phi length", field=f"nodes[{k}]")
    return Mrf(nodes=nodes, edges=edges)
