"""Problem representation, standard-form conversion, masking and JSON I/O.

A :class:`Problem` stores a linear or integer-linear program in the
``(A, b, w)`` parameterization together with row senses, variable bounds,
integrality flags and a catalog of named meaningful structures.  Values are
immutable after construction; every operation returns a new value.
"""

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionMismatch, InvalidStructure, ParseError, UnknownStructure

MAXIMIZE = "maximize"
MINIMIZE = "minimize"

LE = "<="
EQ = "="
GE = ">="

DELETE_ROWS_AND_COLS = "delete_rows_and_cols"
ZERO_ENTRIES = "zero_entries"
ZERO_B_ENTRIES = "zero_b_entries"

_MODES = (DELETE_ROWS_AND_COLS, ZERO_ENTRIES, ZERO_B_ENTRIES)


def _frozen(a, dtype=float):
    out = np.array(a, dtype=dtype)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class MeaningfulStructure:
    """A named, semantically coherent subset of problem parameters.

    ``rows``/``cols`` index constraints/variables, ``entries`` are (row, col)
    pairs into A.  ``removal_mode`` says how :func:`mask_structure` removes it.
    """

    name: str
    rows: tuple = ()
    cols: tuple = ()
    entries: tuple = ()
    removal_mode: str = DELETE_ROWS_AND_COLS

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(int(r) for r in self.rows))
        object.__setattr__(self, "cols", tuple(int(c) for c in self.cols))
        object.__setattr__(
            self, "entries", tuple((int(i), int(j)) for i, j in self.entries)
        )
        if self.removal_mode not in _MODES:
            raise InvalidStructure(
                f"structure {self.name!r}: unknown removal mode {self.removal_mode!r}"
            )


@dataclass(frozen=True)
class Problem:
    """An LP/ILP ``opt w.x  s.t.  A x (<=,=,>=) b,  lb <= x <= ub``."""

    objective_sense: str
    A: np.ndarray
    b: np.ndarray
    w: np.ndarray
    senses: tuple
    lower_bounds: np.ndarray
    upper_bounds: np.ndarray
    integrality: np.ndarray
    structures: tuple = ()
    name: str = ""

    @property
    def n_rows(self):
        return self.A.shape[0]

    @property
    def n_vars(self):
        return self.A.shape[1]

    @property
    def is_integer(self):
        return bool(np.any(self.integrality))

    def structure(self, name):
        for s in self.structures:
            if s.name == name:
                return s
        raise UnknownStructure(f"problem {self.name!r} has no structure {name!r}")

    def structure_names(self):
        return [s.name for s in self.structures]


def build_problem(
    A,
    b,
    w,
    senses=None,
    *,
    objective_sense=MAXIMIZE,
    lower_bounds=None,
    upper_bounds=None,
    integrality=None,
    structures=(),
    name="",
):
    """Validate raw arrays and assemble an immutable :class:`Problem`.

    Raises :class:`DimensionMismatch` for inconsistent shapes and
    :class:`InvalidStructure` for structures with dangling indices.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    w = np.asarray(w, dtype=float).ravel()
    m, n = A.shape
    if n == 0:
        raise DimensionMismatch("problem must have at least one variable")
    if b.shape != (m,):
        raise DimensionMismatch(f"b has length {b.size}, expected {m}")
    if w.shape != (n,):
        raise DimensionMismatch(f"w has length {w.size}, expected {n}")

    if senses is None:
        senses = (LE,) * m
    senses = tuple(senses)
    if len(senses) != m:
        raise DimensionMismatch(f"senses has length {len(senses)}, expected {m}")
    for s in senses:
        if s not in (LE, EQ, GE):
            raise DimensionMismatch(f"unknown row sense {s!r}")

    lb = np.zeros(n) if lower_bounds is None else np.asarray(lower_bounds, dtype=float).ravel()
    ub = np.full(n, np.inf) if upper_bounds is None else np.asarray(upper_bounds, dtype=float).ravel()
    if lb.shape != (n,) or ub.shape != (n,):
        raise DimensionMismatch("bound vectors must have one entry per variable")
    if np.any(lb > ub):
        raise DimensionMismatch("lower bound exceeds upper bound")

    integ = (
        np.zeros(n, dtype=bool)
        if integrality is None
        else np.asarray(integrality, dtype=bool).ravel()
    )
    if integ.shape != (n,):
        raise DimensionMismatch("integrality flags must have one entry per variable")

    if objective_sense not in (MAXIMIZE, MINIMIZE):
        raise DimensionMismatch(f"unknown objective sense {objective_sense!r}")

    structures = tuple(structures)
    seen = set()
    for s in structures:
        if s.name in seen:
            raise InvalidStructure(f"duplicate structure name {s.name!r}")
        seen.add(s.name)
        for r in s.rows:
            if not 0 <= r < m:
                raise InvalidStructure(f"structure {s.name!r} references row {r}")
        for c in s.cols:
            if not 0 <= c < n:
                raise InvalidStructure(f"structure {s.name!r} references column {c}")
        for i, j in s.entries:
            if not (0 <= i < m and 0 <= j < n):
                raise InvalidStructure(f"structure {s.name!r} references entry ({i},{j})")

    return Problem(
        objective_sense=objective_sense,
        A=_frozen(A),
        b=_frozen(b),
        w=_frozen(w),
        senses=senses,
        lower_bounds=_frozen(lb),
        upper_bounds=_frozen(ub),
        integrality=_frozen(integ, dtype=bool),
        structures=structures,
        name=name,
    )


@dataclass(frozen=True)
class StandardProblem:
    """``maximize c.x'  s.t.  A x' <= b,  x' >= 0`` plus index maps back.

    ``row_origin[k]`` is ``("row", i, sign)`` for a (possibly negated or
    split) original row, or ``("ub", j, 1.0)`` for an upper-bound row.
    ``col_var[t]`` is ``(j, coef)``: standard column t contributes
    ``coef * x'_t`` to original variable j, which is further offset by
    ``shift[j]``.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    row_origin: tuple
    col_var: tuple
    shift: np.ndarray
    sense: float
    obj_shift: float
    problem: Problem

    @property
    def n_rows(self):
        return self.A.shape[0]

    @property
    def n_cols(self):
        return self.A.shape[1]

    def map_x(self, x_std):
        """Map a standard-form point back to original variables."""
        x = self.shift.copy()
        for t, (j, coef) in enumerate(self.col_var):
            x[j] += coef * x_std[t]
        return x

    def map_duals(self, y_std):
        """Aggregate standard-row duals into one dual per original row.

        The result is d(optimal original objective)/d(b_i).
        """
        duals = np.zeros(self.problem.n_rows)
        for k, (kind, idx, sign) in enumerate(self.row_origin):
            if kind == "row":
                duals[idx] += sign * y_std[k]
        return self.sense * duals

    def map_objective(self, obj_std):
        return self.sense * obj_std + self.obj_shift


def to_standard_form(p: Problem) -> StandardProblem:
    """Rewrite a problem as ``maximize c.x' s.t. A'x' <= b', x' >= 0``.

    Finite lower bounds are shifted out, free variables are split into
    positive/negative parts, upper bounds become extra rows, ``>=`` rows are
    negated and equality rows are split into a ``<=`` pair.  Total on valid
    problems.
    """
    m, n = p.n_rows, p.n_vars
    lb, ub = p.lower_bounds, p.upper_bounds

    shift = np.where(np.isfinite(lb), lb, 0.0)
    col_var = []
    for j in range(n):
        if np.isfinite(lb[j]):
            col_var.append((j, 1.0))
        else:
            col_var.append((j, 1.0))
            col_var.append((j, -1.0))
    N = len(col_var)

    # Column t of the standard matrix is coef * (original column j).
    cols = np.zeros((n, N))
    for t, (j, coef) in enumerate(col_var):
        cols[j, t] = coef

    A_vars = p.A @ cols  # rows in terms of standard columns
    b_shifted = p.b - p.A @ shift

    rows = []
    rhs = []
    origin = []
    for i in range(m):
        if p.senses[i] in (LE, EQ):
            rows.append(A_vars[i])
            rhs.append(b_shifted[i])
            origin.append(("row", i, 1.0))
        if p.senses[i] in (GE, EQ):
            rows.append(-A_vars[i])
            rhs.append(-b_shifted[i])
            origin.append(("row", i, -1.0))
    for j in range(n):
        if np.isfinite(ub[j]):
            rows.append(cols[j])
            rhs.append(ub[j] - shift[j])
            origin.append(("ub", j, 1.0))

    A_std = np.array(rows) if rows else np.zeros((0, N))
    b_std = np.array(rhs)
    sense = 1.0 if p.objective_sense == MAXIMIZE else -1.0
    c = sense * (p.w @ cols)

    return StandardProblem(
        c=_frozen(c),
        A=_frozen(A_std),
        b=_frozen(b_std),
        row_origin=tuple(origin),
        col_var=tuple(col_var),
        shift=_frozen(shift),
        sense=sense,
        obj_shift=float(p.w @ shift),
        problem=p,
    )


def mask_structure(p: Problem, name: str) -> Problem:
    """Return a new problem with the named structure removed.

    ``delete_rows_and_cols`` drops the referenced rows and columns and
    renumbers the survivors; other structures are kept when all their
    references survive, and dropped otherwise.  ``zero_entries`` zeroes the
    referenced A entries (full rows/cols plus explicit pairs).
    ``zero_b_entries`` zeroes b on the referenced rows.
    """
    s = p.structure(name)

    if s.removal_mode == ZERO_ENTRIES:
        A = np.array(p.A)
        for r in s.rows:
            A[r, :] = 0.0
        for c in s.cols:
            A[:, c] = 0.0
        for i, j in s.entries:
            A[i, j] = 0.0
        return replace(p, A=_frozen(A), name=_masked_name(p, s))

    if s.removal_mode == ZERO_B_ENTRIES:
        b = np.array(p.b)
        for r in s.rows:
            b[r] = 0.0
        return replace(p, b=_frozen(b), name=_masked_name(p, s))

    keep_rows = [i for i in range(p.n_rows) if i not in set(s.rows)]
    keep_cols = [j for j in range(p.n_vars) if j not in set(s.cols)]
    if not keep_cols:
        raise InvalidStructure(
            f"removing structure {s.name!r} would leave no variables"
        )
    row_new = {old: new for new, old in enumerate(keep_rows)}
    col_new = {old: new for new, old in enumerate(keep_cols)}

    kept_structures = []
    for other in p.structures:
        if other.name == s.name:
            continue
        if any(r not in row_new for r in other.rows):
            continue
        if any(c not in col_new for c in other.cols):
            continue
        if any(i not in row_new or j not in col_new for i, j in other.entries):
            continue
        kept_structures.append(
            MeaningfulStructure(
                name=other.name,
                rows=tuple(row_new[r] for r in other.rows),
                cols=tuple(col_new[c] for c in other.cols),
                entries=tuple((row_new[i], col_new[j]) for i, j in other.entries),
                removal_mode=other.removal_mode,
            )
        )

    return Problem(
        objective_sense=p.objective_sense,
        A=_frozen(p.A[np.ix_(keep_rows, keep_cols)]),
        b=_frozen(p.b[keep_rows]),
        w=_frozen(p.w[keep_cols]),
        senses=tuple(p.senses[i] for i in keep_rows),
        lower_bounds=_frozen(p.lower_bounds[keep_cols]),
        upper_bounds=_frozen(p.upper_bounds[keep_cols]),
        integrality=_frozen(p.integrality[keep_cols], dtype=bool),
        structures=tuple(kept_structures),
        name=_masked_name(p, s),
    )


def masked_index_map(p: Problem, name: str):
    """Kept (rows, cols) of ``mask_structure(p, name)`` in original indices."""
    s = p.structure(name)
    if s.removal_mode != DELETE_ROWS_AND_COLS:
        return list(range(p.n_rows)), list(range(p.n_vars))
    rows = [i for i in range(p.n_rows) if i not in set(s.rows)]
    cols = [j for j in range(p.n_vars) if j not in set(s.cols)]
    return rows, cols


def _masked_name(p, s):
    base = p.name or "problem"
    return f"{base}/minus-{s.name}"


def _bound_to_json(v, infinite):
    return None if v == infinite else float(v)


def serialize_problem(p: Problem) -> str:
    """Serialize a problem to its JSON wire format (round-trip exact)."""
    doc = {
        "name": p.name,
        "sense": p.objective_sense,
        "A": [[float(v) for v in row] for row in p.A],
        "b": [float(v) for v in p.b],
        "w": [float(v) for v in p.w],
        "senses": list(p.senses),
        "lb": [_bound_to_json(v, -np.inf) for v in p.lower_bounds],
        "ub": [_bound_to_json(v, np.inf) for v in p.upper_bounds],
        "integer": [bool(v) for v in p.integrality],
        "structures": [
            {
                "name": s.name,
                "rows": list(s.rows),
                "cols": list(s.cols),
                "entries": [list(e) for e in s.entries],
                "mode": s.removal_mode,
            }
            for s in p.structures
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def parse_problem(text: str) -> Problem:
    """Parse the JSON wire format back into a :class:`Problem`.

    Raises :class:`ParseError` carrying the offending field for schema
    violations (wrong types, inconsistent lengths, bad senses or structures).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ParseError("top-level JSON value must be an object")

    def get(key, default=None, required=False):
        if key not in doc:
            if required:
                raise ParseError("missing required field", field=key)
            return default
        return doc[key]

    A = get("A", required=True)
    b = get("b", required=True)
    w = get("w", required=True)
    try:
        A = np.array(A, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError("A must be a rectangular numeric matrix", field="A") from exc
    if A.ndim != 2:
        raise ParseError("A must be a matrix (list of equal-length rows)", field="A")

    lb = get("lb")
    ub = get("ub")
    if lb is not None:
        lb = [(-np.inf if v is None else v) for v in lb]
    if ub is not None:
        ub = [(np.inf if v is None else v) for v in ub]

    structures = []
    for k, sdoc in enumerate(get("structures", [])):
        try:
            structures.append(
                MeaningfulStructure(
                    name=sdoc["name"],
                    rows=sdoc.get("rows", ()),
                    cols=sdoc.get("cols", ()),
                    entries=sdoc.get("entries", ()),
                    removal_mode=sdoc.get("mode", DELETE_ROWS_AND_COLS),
                )
            )
        except (KeyError, TypeError, InvalidStructure) as exc:
            raise ParseError(f"bad structure: {exc}", field=f"structures[{k}]") from exc

    try:
        return build_problem(
            A,
            b,
            w,
            senses=get("senses"),
            objective_sense=get("sense", MAXIMIZE),
            lower_bounds=lb,
            upper_bounds=ub,
            integrality=get("integer"),
            structures=structures,
            name=get("name", ""),
        )
    except (DimensionMismatch, InvalidStructure, TypeError, ValueError) as exc:
        raise ParseError(str(exc)) from exc
