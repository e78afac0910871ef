"""Sizing LP for a small house with photovoltaics, a battery and grid buys.

Decision variables are the PV and battery capacities plus, per hour, the
bought energy, produced PV energy, battery level and charge/discharge flows.
The battery level row wraps around from the last hour back to the first.
Month structures blank the demand of one month (b entries of its balance
rows), which keeps the battery-continuity chain intact.

Hour-resolution instances over a full year have ~44k variables, far past
what the dense in-house kernel should chew on, so the year-scale entry
points assemble sparse matrices and call the HiGHS backend directly; the
dense :class:`Problem` builder is capped to shorter horizons where the
generic attribution machinery applies as-is.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import NegativeDemand, ParseError
from .model import EQ, LE, MINIMIZE, MeaningfulStructure, Problem, build_problem

MONTH_NAMES = ("jan", "feb", "mar", "apr", "may", "jun",
               "jul", "aug", "sep", "oct", "nov", "dec")
_MONTH_DAYS = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)

DENSE_HORIZON_LIMIT = 1500  # hours; beyond this use the sparse entry points

DEFAULT_CO_PV = 700.0
DEFAULT_CO_BAT = 20.0
DEFAULT_CO_BUY = 1.0


@dataclass(frozen=True)
class EnergyInstance:
    demand: np.ndarray
    pv_availability: np.ndarray
    co_pv: float = DEFAULT_CO_PV
    co_bat: float = DEFAULT_CO_BAT
    co_buy: float = DEFAULT_CO_BUY

    def __post_init__(self):
        demand = np.asarray(self.demand, dtype=float)
        avail = np.asarray(self.pv_availability, dtype=float)
        if demand.shape != avail.shape or demand.ndim != 1:
            raise ParseError("demand and pv_availability must be equal-length series")
        if np.any(demand < 0):
            raise NegativeDemand("demand series contains negative entries")
        if np.any((avail < 0) | (avail > 1)):
            raise ParseError("pv_availability must lie in [0, 1]")
        object.__setattr__(self, "demand", demand)
        object.__setattr__(self, "pv_availability", avail)

    @property
    def horizon_hours(self):
        return self.demand.size


def month_of_hour(h: int) -> int:
    day = (h // 24) % 365
    acc = 0
    for m, days in enumerate(_MONTH_DAYS):
        acc += days
        if day < acc:
            return m
    return 11


def hours_by_month(horizon: int):
    out = {}
    for h in range(horizon):
        out.setdefault(month_of_hour(h), []).append(h)
    return out


# Variable layout: cap_pv, cap_bat, then per hour [buy, pv, bat, in, out].
CAP_PV, CAP_BAT = 0, 1


def var_index(hour, which):
    return 2 + 5 * hour + {"buy": 0, "pv": 1, "bat": 2, "in": 3, "out": 4}[which]


def _assemble(e: EnergyInstance):
    """Sparse blocks shared by the dense builder and the HiGHS path."""
    H = e.horizon_hours
    n = 2 + 5 * H

    rows_ub, cols_ub, vals_ub = [], [], []
    for i in range(H):  # pv production cap
        rows_ub += [i, i]
        cols_ub += [var_index(i, "pv"), CAP_PV]
        vals_ub += [1.0, -float(e.pv_availability[i])]
    for i in range(H):  # battery level cap
        rows_ub += [H + i, H + i]
        cols_ub += [var_index(i, "bat"), CAP_BAT]
        vals_ub += [1.0, -1.0]
    A_ub = sparse.coo_matrix((vals_ub, (rows_ub, cols_ub)), shape=(2 * H, n)).tocsr()
    b_ub = np.zeros(2 * H)

    rows_eq, cols_eq, vals_eq = [], [], []
    for i in range(H):  # battery continuity, wrapping at hour 0
        prev = H - 1 if i == 0 else i - 1
        rows_eq += [i] * 4
        cols_eq += [var_index(i, "bat"), var_index(prev, "bat"),
                    var_index(i, "out"), var_index(i, "in")]
        vals_eq += [1.0, -1.0, 1.0, -1.0]
    for i in range(H):  # hourly demand balance
        rows_eq += [H + i] * 4
        cols_eq += [var_index(i, "buy"), var_index(i, "pv"),
                    var_index(i, "out"), var_index(i, "in")]
        vals_eq += [1.0, 1.0, 1.0, -1.0]
    A_eq = sparse.coo_matrix((vals_eq, (rows_eq, cols_eq)), shape=(2 * H, n)).tocsr()
    b_eq = np.concatenate([np.zeros(H), e.demand])

    c = np.zeros(n)
    c[CAP_PV] = e.co_pv
    c[CAP_BAT] = e.co_bat
    for i in range(H):
        c[var_index(i, "buy")] = e.co_buy
    return c, A_ub, b_ub, A_eq, b_eq


def build_energy_lp(e: EnergyInstance) -> Problem:
    """Dense problem with per-month demand-blanking structures."""
    H = e.horizon_hours
    if H > DENSE_HORIZON_LIMIT:
        raise ValueError(
            f"dense builder is capped at {DENSE_HORIZON_LIMIT} hours; "
            "use solve_energy/month_occlusion_cap_bat for longer horizons"
        )
    c, A_ub, b_ub, A_eq, b_eq = _assemble(e)
    A = np.vstack([A_ub.toarray(), A_eq.toarray()])
    b = np.concatenate([b_ub, b_eq])
    senses = (LE,) * A_ub.shape[0] + (EQ,) * A_eq.shape[0]

    balance_row_base = A_ub.shape[0] + H  # balance rows sit after the chain rows
    structures = tuple(
        MeaningfulStructure(
            name=f"month:{MONTH_NAMES[m]}",
            rows=tuple(balance_row_base + h for h in hrs),
            removal_mode="zero_b_entries",
        )
        for m, hrs in sorted(hours_by_month(H).items())
    )
    return build_problem(
        A, b, c, senses,
        objective_sense=MINIMIZE,
        structures=structures,
        name="energy",
    )


def month_structures(p: Problem):
    return [s for s in p.structures if s.name.startswith("month:")]


@dataclass(frozen=True)
class EnergySolution:
    cap_pv: float
    cap_bat: float
    objective: float
    bought_kwh: float
    x: np.ndarray
    status: str


def solve_energy(e: EnergyInstance, demand_override=None) -> EnergySolution:
    """Solve the sizing LP through sparse HiGHS at any horizon."""
    c, A_ub, b_ub, A_eq, b_eq = _assemble(e)
    if demand_override is not None:
        b_eq = np.concatenate([np.zeros(e.horizon_hours), demand_override])
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=(0, None), method="highs")
    if res.status != 0:
        return EnergySolution(np.nan, np.nan, np.nan, np.nan,
                              np.full(c.size, np.nan),
                              {2: "infeasible", 3: "unbounded"}.get(res.status, "failed"))
    x = np.asarray(res.x)
    bought = float(sum(x[var_index(i, "buy")] for i in range(e.horizon_hours)))
    return EnergySolution(
        cap_pv=float(x[CAP_PV]),
        cap_bat=float(x[CAP_BAT]),
        objective=float(res.fun),
        bought_kwh=bought,
        x=x,
        status="optimal",
    )


def month_occlusion_cap_bat(e: EnergyInstance):
    """Influence of each month on the battery capacity: blank the month's
    demand and report the drop in optimal cap_bat."""
    base = solve_energy(e)
    if base.status != "optimal":
        raise RuntimeError(f"energy base solve is {base.status!r}")
    scores = {}
    for m, hrs in sorted(hours_by_month(e.horizon_hours).items()):
        demand = np.array(e.demand)
        demand[hrs] = 0.0
        masked = solve_energy(e, demand_override=demand)
        name = MONTH_NAMES[m]
        scores[name] = (
            None if masked.status != "optimal" else float(base.cap_bat - masked.cap_bat)
        )
    return base, scores


def synth_energy(seed: int, horizon_hours: int,
                 co_pv: float = DEFAULT_CO_PV,
                 co_bat: float = DEFAULT_CO_BAT,
                 co_buy: float = DEFAULT_CO_BUY) -> EnergyInstance:
    """Seeded synthetic household profile.

    PV availability follows a clear-sky arc; day length and intensity sit on
    a clipped seasonal plateau covering the summer months.  Demand has
    morning and evening peaks, the evening (lighting) component growing with
    darkness, plus a winter heating term.  Net effect: summer evenings are
    sun-covered, winter days cannot fill the battery, so battery capacity is
    earned on spring and autumn days.
    """
    rng = np.random.default_rng(seed)
    hours = np.arange(horizon_hours)
    day = (hours // 24) % 365
    tod = hours % 24

    season = np.clip(1.15 * 0.5 * (1.0 + np.cos(2.0 * np.pi * (day - 187) / 365.0)), 0.0, 1.0)
    day_len = 8.0 + 11.0 * season
    rise = 12.0 - day_len / 2.0
    arc = np.sin(np.pi * np.clip((tod - rise) / day_len, 0.0, 1.0))
    intensity = 0.22 + 0.78 * season
    avail = intensity * arc * (1.0 + 0.05 * rng.standard_normal(horizon_hours))
    avail = np.clip(avail, 0.0, 1.0)

    lighting = 0.4 + 1.1 * (1.0 - season)
    evening = lighting * np.exp(-0.5 * ((tod - 18.0) / 1.0) ** 2)
    morning = 0.3 * np.exp(-0.5 * ((tod - 7.5) / 1.0) ** 2)
    heating = 0.25 * 0.5 * (1.0 + np.cos(2.0 * np.pi * (day - 355) / 365.0))
    demand = 0.05 + evening + morning + heating
    demand = demand * (1.0 + 0.05 * np.abs(rng.standard_normal(horizon_hours)))

    return EnergyInstance(demand=demand, pv_availability=avail,
                          co_pv=co_pv, co_bat=co_bat, co_buy=co_buy)


def load_energy_csv(path) -> EnergyInstance:
    """Read ``hour,demand_kwh,pv_availability`` rows (UTF-8, dot decimals)."""
    demand, avail = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["hour", "demand_kwh", "pv_availability"]:
            raise ParseError("expected header 'hour,demand_kwh,pv_availability'", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 columns, found {len(row)}", line=lineno)
            try:
                hour = int(row[0])
                d = float(row[1])
                a = float(row[2])
            except ValueError as exc:
                raise ParseError(f"bad number: {exc}", line=lineno) from exc
            if hour != len(demand):
                raise ParseError(f"hour column must count 0,1,2,...; found {hour}", line=lineno)
            if d < 0:
                raise NegativeDemand(f"negative demand at line {lineno}")
            demand.append(d)
            avail.append(a)
    if not demand:
        raise ParseError("CSV contains no data rows")
    return EnergyInstance(demand=np.array(demand), pv_availability=np.array(avail))


def save_energy_csv(e: EnergyInstance, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["hour", "demand_kwh", "pv_availability"])
        for h in range(e.horizon_hours):
            writer.writerow([h, repr(float(e.demand[h])), repr(float(e.pv_availability[h]))])
