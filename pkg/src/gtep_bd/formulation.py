"""Solver-agnostic LP/MILP construction for the planning problem.

Programs are plain sparse matrices plus per-row :class:`ConstraintTag`
records, so duals can be pulled out by role (``copy_y``, ``flowdef_cand``,
...) after a solve.  Three flow representations are supported:

* ``transport``: nodal balance and (build-dependent) line limits only;
* ``dcopf_bigm``: DC power flow with big-M disjunctions on candidate and
  replaceable lines, investments entering as variables;
* ``dcopf_fixed_bilinear``: the bilinear DC flow definitions with the build
  decisions substituted as numbers, which leaves a linear program.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .model import (
    CANDIDATE_KINDS,
    FIXED,
    FIXED_RECONDUCTORABLE,
    REPLACEABLE,
    InvestmentDecision,
    InvestmentSpace,
    PlanningSystem,
    RepresentativePeriod,
    TransmissionLine,
    connected_components,
    resolve_replacements,
)

TRANSPORT = "transport"
DCOPF_BIGM = "dcopf_bigm"
DCOPF_FIXED_BILINEAR = "dcopf_fixed_bilinear"
FLOW_MODES = (TRANSPORT, DCOPF_BIGM, DCOPF_FIXED_BILINEAR)

ROLES = (
    "nodal_balance", "flowdef_fixed", "flowdef_cand", "flowdef_rep", "flow_limit",
    "angle_limit", "gen_link", "ramp", "commitment", "copy_y", "copy_z", "copy_r",
    "cut", "reg_budget",
)

ANGLE_LIMIT = math.pi / 4


class BoundOrderViolation(ValueError):
    pass


@dataclass(frozen=True)
class ConstraintTag:
    role: str
    subject: tuple = ()


@dataclass
class ProgramInstance:
    """A minimisation LP/MILP: ``min c x`` s.t. ``A x (<=|>=|==) rhs``, ``lb <= x <= ub``."""

    name: str
    var_names: list[str]
    lb: np.ndarray
    ub: np.ndarray
    cost: np.ndarray
    integer: np.ndarray
    A: sp.csr_matrix
    sense: np.ndarray  # "L", "G" or "E" per row
    rhs: np.ndarray
    tags: list[ConstraintTag]
    investment_cols: dict[str, np.ndarray] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    objective_offset: float = 0.0
    _role_rows: dict[str, np.ndarray] | None = field(default=None, repr=False)
    _var_index: dict[str, int] | None = field(default=None, repr=False)

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    @property
    def n_rows(self) -> int:
        return len(self.tags)

    @property
    def has_integers(self) -> bool:
        return bool(np.any(self.integer))

    def var(self, name: str) -> int:
        if self._var_index is None:
            self._var_index = {n: i for i, n in enumerate(self.var_names)}
        return self._var_index[name]

    def rows(self, role: str) -> np.ndarray:
        if self._role_rows is None:
            grouped: dict[str, list[int]] = {}
            for i, t in enumerate(self.tags):
                grouped.setdefault(t.role, []).append(i)
            self._role_rows = {k: np.array(v, dtype=int) for k, v in grouped.items()}
        return self._role_rows.get(role, np.zeros(0, dtype=int))

    def relaxed(self) -> "ProgramInstance":
        return self.replace(integer=np.zeros_like(self.integer))

    def replace(self, **changes) -> "ProgramInstance":
        data = {k: getattr(self, k) for k in (
            "name", "var_names", "lb", "ub", "cost", "integer", "A", "sense", "rhs", "tags",
            "investment_cols", "meta", "objective_offset")}
        data.update(changes)
        out = ProgramInstance(**data)
        out._role_rows = self._role_rows
        out._var_index = self._var_index
        return out

    def objective_value(self, x: np.ndarray) -> float:
        return float(self.cost @ x) + self.objective_offset

    def row_activity(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x

    def max_violation(self, x: np.ndarray) -> float:
        act = self.row_activity(x)
        viol = np.where(self.sense == "L", act - self.rhs,
                        np.where(self.sense == "G", self.rhs - act, np.abs(act - self.rhs)))
        bound = np.maximum(self.lb - x, x - self.ub)
        return float(max(np.max(viol, initial=0.0), np.max(bound, initial=0.0)))

    def to_lp_text(self) -> str:
        """Render in CPLEX LP text format; row and column names embed their tags."""
        names = [_lp_name(n) for n in self.var_names]

        def expr(idx, vals) -> str:
            parts = []
            for j, v in zip(idx, vals):
                if v == 0:
                    continue
                parts.append(f"{'+' if v >= 0 else '-'} {abs(v):.12g} {names[j]}")
            return " ".join(parts) if parts else "0 " + names[0]

        out = ["\\ " + self.name, "Minimize", " obj: " + expr(range(self.n_vars), self.cost), "Subject To"]
        A = self.A.tocsr()
        ops = {"L": "<=", "G": ">=", "E": "="}
        for i, tag in enumerate(self.tags):
            lo, hi = A.indptr[i], A.indptr[i + 1]
            rname = _lp_name("_".join([tag.role, *map(str, tag.subject), f"r{i}"]))
            out.append(f" {rname}: {expr(A.indices[lo:hi], A.data[lo:hi])} {ops[self.sense[i]]} {self.rhs[i]:.12g}")
        out.append("Bounds")
        for j, n in enumerate(names):
            lo, hi = self.lb[j], self.ub[j]
            lo_s = "-inf" if np.isneginf(lo) else f"{lo:.12g}"
            hi_s = "+inf" if np.isposinf(hi) else f"{hi:.12g}"
            out.append(f" {lo_s} <= {n} <= {hi_s}")
        ints = [names[j] for j in np.flatnonzero(self.integer)]
        if ints:
            out.append("Generals")
            out.extend(" " + n for n in ints)
        out.append("End")
        return "\n".join(out) + "\n"


def _lp_name(name: str) -> str:
    return "".join(c if c.isalnum() or c in "_." else "_" for c in name)


class ProgramBuilder:
    def __init__(self, name: str):
        self.name = name
        self.names: list[str] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.cost: list[float] = []
        self.integer: list[bool] = []
        self._rows: list[int] = []
        self._cols: list[int] = []
        self._vals: list[float] = []
        self.sense: list[str] = []
        self.rhs: list[float] = []
        self.tags: list[ConstraintTag] = []
        self.investment_cols: dict[str, np.ndarray] = {}
        self.meta: dict = {"theta": {}, "flow": {}, "shed": []}

    def add_var(self, name: str, lb: float = 0.0, ub: float = math.inf, cost: float = 0.0,
                integer: bool = False) -> int:
        self.names.append(name)
        self.lb.append(lb)
        self.ub.append(ub)
        self.cost.append(cost)
        self.integer.append(integer)
        return len(self.names) - 1

    def add_row(self, terms: Iterable[tuple[int, float]], sense: str, rhs: float, role: str,
                *subject) -> int:
        i = len(self.tags)
        for j, v in terms:
            self._rows.append(i)
            self._cols.append(j)
            self._vals.append(float(v))
        self.sense.append(sense)
        self.rhs.append(float(rhs))
        self.tags.append(ConstraintTag(role, tuple(subject)))
        return i

    def build(self) -> ProgramInstance:
        m, n = len(self.tags), len(self.names)
        A = sp.csr_matrix((self._vals, (self._rows, self._cols)), shape=(m, n))
        return ProgramInstance(
            name=self.name,
            var_names=self.names,
            lb=np.array(self.lb, dtype=float),
            ub=np.array(self.ub, dtype=float),
            cost=np.array(self.cost, dtype=float),
            integer=np.array(self.integer, dtype=bool),
            A=A,
            sense=np.array(self.sense, dtype="<U1"),
            rhs=np.array(self.rhs, dtype=float),
            tags=self.tags,
            investment_cols=self.investment_cols,
            meta=self.meta,
        )


# ---------------------------------------------------------------------------
# big-M


def corridor_class(system: PlanningSystem, corridor: Sequence[str]) -> str:
    """``new``, ``existing`` or ``existing_reconductorable``."""
    on = system.lines_on(tuple(corridor))
    if not any(ln.is_existing for ln in on):
        return "new"
    if any(ln.reconductorable for ln in on):
        return "existing_reconductorable"
    return "existing"


def big_m_value(line: TransmissionLine, policy: str, system: PlanningSystem | None = None,
                corridor_kind: str | None = None) -> float:
    """Big-M for a candidate or replaceable line.

    ``tight`` uses the capacity on plain existing corridors, 1.25x capacity
    on reconductorable existing corridors and 10x on new corridors;
    ``loose`` uses 10x everywhere.
    """
    if policy == "loose":
        return 10.0 * line.capacity
    if policy != "tight":
        raise ValueError(f"unknown big-M policy {policy!r}")
    if corridor_kind is None:
        if system is None:
            raise ValueError("need the system or the corridor kind")
        corridor_kind = corridor_class(system, line.corridor)
    return {"existing": 1.0, "existing_reconductorable": 1.25, "new": 10.0}[corridor_kind] * line.capacity


def line_big_m(system: PlanningSystem, line: TransmissionLine, policy: str | None) -> float:
    if policy is None:
        return line.big_m
    return big_m_value(line, policy, system)


# ---------------------------------------------------------------------------
# operational block shared by subproblems and the monolithic program


@dataclass
class _InvestmentColumns:
    y: dict[str, int]
    z: dict[str, int]
    r: dict[str, tuple[int, int]]


def reference_buses(system: PlanningSystem) -> list[str]:
    """One angle reference per component of the full (existing + candidate) network."""
    comps = connected_components(system.bus_ids(), [tuple(ln.corridor) for ln in system.lines])
    return [c[0] for c in comps]


def _add_operations(b: ProgramBuilder, system: PlanningSystem, period: RepresentativePeriod,
                    mode: str, inv: _InvestmentColumns, z_values: dict[str, float] | None,
                    big_m: str | None) -> None:
    w = period.id
    H = period.hours
    beta = period.weight
    psi = resolve_replacements(system)
    refs = set(reference_buses(system))
    dc = mode != TRANSPORT
    bilinear = mode == DCOPF_FIXED_BILINEAR

    def zval(line_id: str) -> float:
        return float(z_values[line_id])

    p_col: dict[tuple[str, int], int] = {}
    for g in system.generators:
        avail = period.availability_of(g.availability)
        cand = g.candidate and g.id in inv.y
        for t in range(H):
            cap = g.unit_size * avail[t]
            if g.has_commitment or cand:
                p = b.add_var(f"p[{g.id},{w},{t}]", cost=beta * g.variable_cost)
            else:
                p = b.add_var(f"p[{g.id},{w},{t}]", ub=cap * g.existing_units, cost=beta * g.variable_cost)
            p_col[g.id, t] = p
            if g.has_commitment:
                u = b.add_var(f"u[{g.id},{w},{t}]", ub=math.inf if cand else g.existing_units,
                              cost=beta * g.commit_cost)
                if cand:
                    b.add_row([(u, 1.0), (inv.y[g.id], -1.0)], "L", g.existing_units, "commitment", g.id, w, t)
                b.add_row([(p, 1.0), (u, -cap)], "L", 0.0, "gen_link", g.id, w, t)
                if g.min_output_frac > 0:
                    b.add_row([(u, g.min_output_frac * cap), (p, -1.0)], "L", 0.0, "commitment", g.id, w, t)
            elif cand:
                b.add_row([(p, 1.0), (inv.y[g.id], -cap)], "L", cap * g.existing_units, "gen_link", g.id, w, t)
        if g.ramp_rate is not None and g.ramp_rate < g.unit_size:
            R = g.ramp_rate
            for t in range(1, H):
                a, c = p_col[g.id, t], p_col[g.id, t - 1]
                for s1, s2 in ((1.0, -1.0), (-1.0, 1.0)):
                    terms = [(a, s1), (c, s2)]
                    if cand:
                        terms.append((inv.y[g.id], -R))
                    b.add_row(terms, "L", R * g.existing_units, "ramp", g.id, w, t)

    theta: dict[tuple[str, int], int] = {}
    if dc:
        for bus in system.buses:
            for t in range(H):
                if bus.id in refs:
                    theta[bus.id, t] = b.add_var(f"theta[{bus.id},{w},{t}]", 0.0, 0.0)
                else:
                    theta[bus.id, t] = b.add_var(f"theta[{bus.id},{w},{t}]", -ANGLE_LIMIT, ANGLE_LIMIT)
                b.meta["theta"][bus.id, w, t] = theta[bus.id, t]

    f_col: dict[tuple[str, int], int] = {}
    for ln in system.lines:
        i, j = ln.corridor
        fbar = ln.capacity
        bflow = system.flow_susceptance(ln)
        rec = ln.reconductorable and ln.id in inv.r
        if ln.kind == REPLACEABLE:
            zc = psi[ln.id]
        elif ln.is_candidate:
            zc = ln.id
        else:
            zc = None
        M = line_big_m(system, ln, big_m) if ln.kind in (REPLACEABLE, *CANDIDATE_KINDS) else None
        for t in range(H):
            head = fbar + (ln.recon_low_max + ln.recon_high_max if rec else 0.0)
            f = b.add_var(f"f[{ln.id},{w},{t}]", -head, head)
            f_col[ln.id, t] = f
            b.meta["flow"][ln.id, w, t] = f
            if rec:
                lo_c, hi_c = inv.r[ln.id]
                b.add_row([(f, 1.0), (lo_c, -1.0), (hi_c, -1.0)], "L", fbar, "flow_limit", ln.id, w, t)
                b.add_row([(f, -1.0), (lo_c, -1.0), (hi_c, -1.0)], "L", fbar, "flow_limit", ln.id, w, t)
            # build-dependent limits; the bilinear form keeps plain +-fbar bounds
            if zc is not None and not bilinear:
                zcol = inv.z[zc]
                if ln.is_candidate:
                    b.add_row([(f, 1.0), (zcol, -fbar)], "L", 0.0, "flow_limit", ln.id, w, t)
                    b.add_row([(f, -1.0), (zcol, -fbar)], "L", 0.0, "flow_limit", ln.id, w, t)
                else:
                    b.add_row([(f, 1.0), (zcol, fbar)], "L", fbar, "flow_limit", ln.id, w, t)
                    b.add_row([(f, -1.0), (zcol, fbar)], "L", fbar, "flow_limit", ln.id, w, t)
            if not dc:
                continue
            ti, tj = theta[i, t], theta[j, t]
            if ln.kind in (FIXED, FIXED_RECONDUCTORABLE):
                b.add_row([(f, 1.0), (ti, -bflow), (tj, bflow)], "E", 0.0, "flowdef_fixed", ln.id, w, t)
            elif bilinear:
                scale = zval(zc) if ln.is_candidate else 1.0 - zval(zc)
                role = "flowdef_cand" if ln.is_candidate else "flowdef_rep"
                b.add_row([(f, 1.0), (ti, -bflow * scale), (tj, bflow * scale)], "E", 0.0, role, ln.id, w, t)
            elif ln.is_candidate:
                zcol = inv.z[zc]
                b.add_row([(f, 1.0), (ti, -bflow), (tj, bflow), (zcol, M)], "L", M, "flowdef_cand", ln.id, w, t)
                b.add_row([(f, -1.0), (ti, bflow), (tj, -bflow), (zcol, M)], "L", M, "flowdef_cand", ln.id, w, t)
            else:
                zcol = inv.z[zc]
                b.add_row([(f, 1.0), (ti, -bflow), (tj, bflow), (zcol, -M)], "L", 0.0, "flowdef_rep", ln.id, w, t)
                b.add_row([(f, -1.0), (ti, bflow), (tj, -bflow), (zcol, -M)], "L", 0.0, "flowdef_rep", ln.id, w, t)

    gens_at: dict[str, list[str]] = {}
    for g in system.generators:
        gens_at.setdefault(g.bus, []).append(g.id)
    out_lines: dict[str, list[str]] = {}
    in_lines: dict[str, list[str]] = {}
    for ln in system.lines:
        out_lines.setdefault(ln.corridor[0], []).append(ln.id)
        in_lines.setdefault(ln.corridor[1], []).append(ln.id)
    for bus in system.buses:
        demand = period.demand_at(bus.demand_ref)
        for t in range(H):
            s = b.add_var(f"shed[{bus.id},{w},{t}]", 0.0, max(demand[t], 0.0), cost=beta * system.voll)
            b.meta["shed"].append(s)
            terms = [(p_col[g, t], 1.0) for g in gens_at.get(bus.id, [])]
            terms += [(f_col[l, t], -1.0) for l in out_lines.get(bus.id, [])]
            terms += [(f_col[l, t], 1.0) for l in in_lines.get(bus.id, [])]
            terms.append((s, 1.0))
            b.add_row(terms, "E", demand[t], "nodal_balance", bus.id, w, t)


def _copy_columns(b: ProgramBuilder, space: InvestmentSpace, values: InvestmentDecision | None,
                  as_decisions: bool, integer: bool = False) -> _InvestmentColumns:
    """Investment columns: shared decision variables, or free copies pinned by copy rows."""
    y, z, r = {}, {}, {}
    ycols, zcols, rcols = [], [], []
    for k, g in enumerate(space.gen_ids):
        if as_decisions:
            c = b.add_var(f"y[{g}]", 0.0, space.y_max[k], cost=space.c_y[k], integer=integer)
        else:
            c = b.add_var(f"y[{g}]", -math.inf, math.inf)
            b.add_row([(c, 1.0)], "E", values.y[k], "copy_y", g)
        y[g] = c
        ycols.append(c)
    for k, ln in enumerate(space.line_ids):
        if as_decisions:
            c = b.add_var(f"z[{ln}]", 0.0, 1.0, cost=space.c_z[k], integer=integer)
        else:
            c = b.add_var(f"z[{ln}]", -math.inf, math.inf)
            b.add_row([(c, 1.0)], "E", values.z[k], "copy_z", ln)
        z[ln] = c
        zcols.append(c)
    for k, ln in enumerate(space.rec_ids):
        pair = []
        for seg in range(2):
            nm = f"r_{'low' if seg == 0 else 'high'}[{ln}]"
            if as_decisions:
                c = b.add_var(nm, 0.0, space.r_max[k, seg], cost=space.c_r[k, seg])
            else:
                c = b.add_var(nm, -math.inf, math.inf)
                b.add_row([(c, 1.0)], "E", values.r[k, seg], "copy_r", ln, seg)
            pair.append(c)
            rcols.append(c)
        r[ln] = (pair[0], pair[1])
    b.investment_cols = {"y": np.array(ycols, int), "z": np.array(zcols, int), "r": np.array(rcols, int)}
    return _InvestmentColumns(y, z, r)


def build_subproblem(system: PlanningSystem, investment: InvestmentDecision,
                     period: RepresentativePeriod, mode: str, big_m: str | None = None,
                     space: InvestmentSpace | None = None) -> ProgramInstance:
    """Operational LP for one period with the investment pinned by copy rows.

    In ``dcopf_fixed_bilinear`` mode the build decisions are also substituted
    numerically into the flow definitions.
    """
    if mode not in FLOW_MODES:
        raise ValueError(f"unknown flow mode {mode!r}")
    space = space or InvestmentSpace.from_system(system)
    space.check(investment)
    b = ProgramBuilder(f"sub[{period.id},{mode}]")
    inv = _copy_columns(b, space, investment, as_decisions=False)
    zvals = dict(zip(space.line_ids, investment.z)) if mode == DCOPF_FIXED_BILINEAR else None
    _add_operations(b, system, period, mode, inv, zvals, big_m)
    return b.build()


def build_monolithic(system: PlanningSystem, mode: str, integer: bool = True,
                     big_m: str | None = None) -> ProgramInstance:
    """Single program over all periods with shared investment variables."""
    if mode not in (TRANSPORT, DCOPF_BIGM):
        raise ValueError("the monolithic program supports the linear modes only")
    space = InvestmentSpace.from_system(system)
    b = ProgramBuilder(f"monolithic[{mode}]")
    inv = _copy_columns(b, space, None, as_decisions=True, integer=integer)
    for period in system.periods:
        _add_operations(b, system, period, mode, inv, None, big_m)
    return b.build()


# ---------------------------------------------------------------------------
# masters


def _master_base(space: InvestmentSpace, period_ids: Sequence[str], integer: bool,
                 investment_costs: bool) -> tuple[ProgramBuilder, dict[str, int]]:
    b = ProgramBuilder("master")
    ycols, zcols, rcols = [], [], []
    for k, g in enumerate(space.gen_ids):
        ycols.append(b.add_var(f"y[{g}]", 0.0, space.y_max[k],
                               cost=space.c_y[k] if investment_costs else 0.0, integer=integer))
    for k, ln in enumerate(space.line_ids):
        zcols.append(b.add_var(f"z[{ln}]", 0.0, 1.0, cost=space.c_z[k] if investment_costs else 0.0,
                               integer=integer))
    for k, ln in enumerate(space.rec_ids):
        for seg, nm in enumerate(("low", "high")):
            rcols.append(b.add_var(f"r_{nm}[{ln}]", 0.0, space.r_max[k, seg],
                                   cost=space.c_r[k, seg] if investment_costs else 0.0))
    thetas = {w: b.add_var(f"costtogo[{w}]", 0.0, math.inf, cost=1.0 if investment_costs else 0.0)
              for w in period_ids}
    b.investment_cols = {"y": np.array(ycols, int), "z": np.array(zcols, int), "r": np.array(rcols, int),
                         "theta": np.array(list(thetas.values()), int)}
    return b, thetas


def _add_cuts(b: ProgramBuilder, cuts, thetas: dict[str, int]) -> None:
    cols = np.concatenate([b.investment_cols["y"], b.investment_cols["z"], b.investment_cols["r"]])
    for n, cut in enumerate(cuts):
        coef = cut.coefficients()
        rhs = cut.intercept - float(coef @ cut.point.vector())
        terms = [(thetas[cut.period], 1.0)] + [(c, -v) for c, v in zip(cols, coef) if v != 0.0]
        b.add_row(terms, "G", rhs, "cut", cut.period, cut.iteration, n)


def build_master(cuts, integrality: str, system: PlanningSystem,
                 space: InvestmentSpace | None = None) -> ProgramInstance:
    """Multicut master: investment cost plus one cost-to-go per period, floored at 0."""
    space = space or InvestmentSpace.from_system(system)
    b, thetas = _master_base(space, [p.id for p in system.periods], integrality == "integer", True)
    _add_cuts(b, cuts, thetas)
    return b.build()


def build_regularized_master(cuts, lower: float, upper: float, alpha: float, system: PlanningSystem,
                             integrality: str = "integer",
                             space: InvestmentSpace | None = None) -> ProgramInstance:
    """Feasibility master: cut rows plus ``cost <= L + alpha (U - L)``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if lower > upper:
        raise BoundOrderViolation(f"lower bound {lower} exceeds upper bound {upper}")
    space = space or InvestmentSpace.from_system(system)
    b, thetas = _master_base(space, [p.id for p in system.periods], integrality == "integer", False)
    _add_cuts(b, cuts, thetas)
    budget = lower + alpha * (upper - lower)
    cols = np.concatenate([b.investment_cols[k] for k in ("y", "z", "r")])
    terms = [(c, v) for c, v in zip(cols, space.cost_vector()) if v != 0.0]
    terms += [(c, 1.0) for c in thetas.values()]
    b.add_row(terms, "L", budget, "reg_budget")
    return b.build()


def master_objective(program: ProgramInstance, x: np.ndarray, space: InvestmentSpace) -> float:
    """Investment cost plus summed cost-to-go at a master point (works for both master forms)."""
    cols = np.concatenate([program.investment_cols[k] for k in ("y", "z", "r")])
    return float(space.cost_vector() @ x[cols] + x[program.investment_cols["theta"]].sum())


def decision_from_solution(program: ProgramInstance, x: np.ndarray, space: InvestmentSpace) -> InvestmentDecision:
    cols = np.concatenate([program.investment_cols[k] for k in ("y", "z", "r")])
    return space.from_vector(x[cols])


def period_independence_violations(program: ProgramInstance) -> list[int]:
    """Rows whose operational variables span more than one period."""
    period_of = []
    for name in program.var_names:
        inner = name[name.find("[") + 1:-1].split(",")
        period_of.append(inner[1] if len(inner) == 3 else None)
    A = program.A.tocsr()
    bad = []
    for i in range(program.n_rows):
        cols = A.indices[A.indptr[i]:A.indptr[i + 1]]
        periods = {period_of[c] for c in cols} - {None}
        if len(periods) > 1:
            bad.append(i)
    return bad
