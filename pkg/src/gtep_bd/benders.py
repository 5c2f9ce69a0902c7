"""Benders (BD) and generalized Benders (GBD) decomposition for expansion planning.

The engine keeps one cost-to-go variable per representative period and adds
one optimality cut per period per iteration.  :func:`run_staged` chains up to
four stages (transport LP master, transport MILP master, DC LP master, DC
MILP master); cuts from earlier stages stay in the master for later ones.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .backend import OPTIMAL, BackendFailure, HighsBackend, get_backend
from .formulation import (
    DCOPF_BIGM,
    DCOPF_FIXED_BILINEAR,
    TRANSPORT,
    ProgramInstance,
    build_master,
    build_regularized_master,
    build_subproblem,
    decision_from_solution,
    master_objective,
)
from .model import (
    InvestmentDecision,
    InvestmentSpace,
    PlanningSystem,
    RepresentativePeriod,
    resolve_replacements,
)

logger = logging.getLogger(__name__)

METHODS = ("bd", "gbd")

# stage -> (flow family, master integrality)
STAGES = {
    1: ("transport", "relaxed"),
    2: ("transport", "integer"),
    3: ("dcopf", "relaxed"),
    4: ("dcopf", "integer"),
}
STAGE_PROVENANCE = {1: "transport_lp", 2: "transport_mip", 3: "dcopf_lp", 4: "dcopf_mip"}

PRESETS: dict[str, tuple[tuple[int, ...], tuple[int, ...]]] = {
    "baseline": ((4,), ()),
    "hs": ((2, 4), ()),
    "lp": ((3, 4), ()),
    "reg": ((4,), (4,)),
    "hs+lp": ((1, 2, 3, 4), ()),
    "hs+lp+reg": ((1, 2, 3, 4), (1, 2, 3, 4)),
    "hs+lp+semireg": ((1, 2, 3, 4), (1, 2, 3)),
}

TRACE_COLUMNS = ("stage", "iteration", "upper_bound", "lower_bound", "algorithm_gap", "transport_gap",
                 "wall_seconds", "cuts_added", "cuts_skipped")

JITTER = 1e-6


class DualUnavailable(RuntimeError):
    pass


class SkippedCut(RuntimeError):
    pass


class MissingTransportBound(ValueError):
    pass


@dataclass(frozen=True)
class StrategyConfig:
    method: str = "bd"
    stages: tuple[int, ...] = (4,)
    regularize: tuple[int, ...] = ()
    alpha: float = 0.5
    eps_tol: float = 1e-3
    stage_eps: Mapping[int, float] = field(default_factory=dict)
    k_max: int = 100
    master_gap: float = 1e-3
    master_time_limit: float = 360.0
    big_m: str = "tight"
    seed: int = 0
    jobs: int = 1
    backend: str = "highs"
    preset: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        stages = tuple(sorted(set(self.stages)))
        if not set(stages) <= set(STAGES):
            raise ValueError(f"stages must be drawn from {sorted(STAGES)}")
        if 4 not in stages:
            raise ValueError("stage 4 (integer DC master) is always enabled")
        object.__setattr__(self, "stages", stages)
        object.__setattr__(self, "regularize", tuple(sorted(set(self.regularize) & set(stages))))
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")
        if self.big_m not in ("tight", "loose"):
            raise ValueError("big_m must be 'tight' or 'loose'")

    @classmethod
    def from_preset(cls, name: str, **overrides) -> "StrategyConfig":
        key = name.lower().replace(" ", "")
        if key not in PRESETS:
            raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        stages, reg = PRESETS[key]
        return cls(stages=stages, regularize=reg, preset=key, **overrides)

    def eps_for(self, stage: int) -> float:
        return float(self.stage_eps.get(stage, self.eps_tol))


@dataclass
class SubproblemResult:
    period: str
    objective: float
    pi: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    dual_ok: dict[str, bool]
    load_shed: float
    flows_at_bound: int
    solve_time: float
    mode: str
    method: str
    program: ProgramInstance | None = None
    solution: object | None = None

    @property
    def all_duals_ok(self) -> bool:
        return all(self.dual_ok.values())


@dataclass(frozen=True)
class Cut:
    """``theta_w >= intercept + coef . (x - point)`` for one period."""

    period: str
    iteration: int
    intercept: float
    coef_y: np.ndarray
    coef_z: np.ndarray
    coef_r: np.ndarray
    point: InvestmentDecision
    stage: str
    method: str

    def coefficients(self) -> np.ndarray:
        return np.concatenate([self.coef_y, self.coef_z, self.coef_r.ravel()])

    def evaluate(self, d: InvestmentDecision) -> float:
        return self.intercept + float(self.coefficients() @ (d.vector() - self.point.vector()))


@dataclass
class IterationRecord:
    stage: int
    iteration: int
    upper_bound: float
    stage_upper_bound: float
    lower_bound: float
    algorithm_gap: float
    transport_gap: float | None
    wall_seconds: float
    cuts_added: int
    cuts_skipped: int
    point: InvestmentDecision
    point_value: float
    master_bound: float
    regularized: bool = False
    reg_budget: float | None = None
    reg_objective: float | None = None
    reg_fallback: bool = False
    max_cut_violation: float = 0.0


@dataclass
class BendersTrace:
    method: str
    preset: str | None
    records: list[IterationRecord] = field(default_factory=list)
    incumbent: InvestmentDecision | None = None
    incumbent_value: float = math.inf
    termination: str = ""
    stage_terminations: dict[int, str] = field(default_factory=dict)
    stage_lower: dict[int, float] = field(default_factory=dict)
    transport_bound: float | None = None
    cuts: list[Cut] = field(default_factory=list)
    wall_seconds: float = 0.0

    @property
    def upper_bound(self) -> float:
        return self.incumbent_value

    @property
    def algorithm_bound(self) -> float:
        return self.stage_lower.get(4, -math.inf)

    @property
    def converged(self) -> bool:
        return self.termination == "converged"

    @property
    def iterations(self) -> int:
        return len(self.records)

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in self.records:
            w.writerow([r.stage, r.iteration, _fmt(r.upper_bound), _fmt(r.lower_bound), _fmt(r.algorithm_gap),
                        _fmt(r.transport_gap), f"{r.wall_seconds:.6f}", r.cuts_added, r.cuts_skipped])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def _fmt(v: float | None) -> str:
    if v is None or not math.isfinite(v):
        return ""
    return repr(float(v))


def relative_gap(upper: float, lower: float) -> float:
    if not (math.isfinite(upper) and math.isfinite(lower)):
        return math.inf
    if lower == 0.0:
        return 0.0 if upper == 0.0 else math.inf
    return (upper - lower) / abs(lower)


# ---------------------------------------------------------------------------
# subproblems and cuts


def _theta_diff(program: ProgramInstance, x: np.ndarray, system: PlanningSystem, line_id: str,
                period: str, t: int) -> float:
    i, j = system.line(line_id).corridor
    th = program.meta["theta"]
    return float(x[th[i, period, t]] - x[th[j, period, t]])


def gbd_multipliers(program: ProgramInstance, solution, system: PlanningSystem,
                    space: InvestmentSpace | None = None) -> np.ndarray:
    """Lagrange multipliers of the build decisions in the fixed-z bilinear subproblem.

    Differentiating the Lagrangian in ``z_l`` through ``f = B z dtheta`` gives
    ``sum_t u_t B dtheta_t`` for a candidate, and ``-sum_t u_t B dtheta_t``
    from the row ``f = B (1 - z) dtheta`` of the line it replaces.
    """
    space = space or InvestmentSpace.from_system(system)
    psi = resolve_replacements(system)
    index = {ln: k for k, ln in enumerate(space.line_ids)}
    lam = np.zeros(space.n_z)
    x = solution.x
    for role, sign in (("flowdef_cand", 1.0), ("flowdef_rep", -1.0)):
        rows = program.rows(role)
        if rows.size and not solution.duals_ok(rows):
            raise DualUnavailable(f"duals missing on {role} rows")
        for r in rows:
            line_id, period, t = program.tags[r].subject
            ln = system.line(line_id)
            target = line_id if role == "flowdef_cand" else psi[line_id]
            dtheta = _theta_diff(program, x, system, line_id, period, t)
            lam[index[target]] += sign * solution.duals[r] * system.flow_susceptance(ln) * dtheta
    return lam


def solve_subproblem(system: PlanningSystem, investment: InvestmentDecision, period: RepresentativePeriod,
                     mode: str, method: str = "bd", backend: HighsBackend | None = None,
                     big_m: str | None = "tight", space: InvestmentSpace | None = None,
                     keep: bool = False) -> SubproblemResult:
    """Solve one period's operational LP and read off its cut multipliers."""
    backend = backend or get_backend()
    space = space or InvestmentSpace.from_system(system)
    program = build_subproblem(system, investment, period, mode, big_m=big_m, space=space)
    sol = backend.solve_lp(program)
    if sol.status != OPTIMAL:
        raise BackendFailure(f"subproblem {period.id} ended with status {sol.status}")
    ry, rz, rr = program.rows("copy_y"), program.rows("copy_z"), program.rows("copy_r")
    dual_ok = {"y": sol.duals_ok(ry), "z": True, "r": sol.duals_ok(rr)}
    pi = sol.duals[ry].copy()
    mu = sol.duals[rr].copy()
    if mode == DCOPF_FIXED_BILINEAR:
        try:
            lam = gbd_multipliers(program, sol, system, space)
        except DualUnavailable:
            lam = np.full(space.n_z, np.nan)
            dual_ok["z"] = False
    else:
        lam = sol.duals[rz].copy()
        dual_ok["z"] = sol.duals_ok(rz)
    shed = float(sol.x[program.meta["shed"]].sum()) if program.meta["shed"] else 0.0
    at_bound = 0
    for col in program.meta["flow"].values():
        if program.ub[col] - abs(sol.x[col]) <= 1e-6:
            at_bound += 1
    return SubproblemResult(
        period=period.id, objective=sol.objective, pi=pi, lam=lam, mu=mu, dual_ok=dual_ok,
        load_shed=shed, flows_at_bound=at_bound, solve_time=sol.solve_time, mode=mode, method=method,
        program=program if keep else None, solution=sol if keep else None,
    )


def make_cut(result: SubproblemResult, point: InvestmentDecision, iteration: int = 0,
             stage: str = "dcopf_mip") -> Cut:
    """Optimality cut through ``(point, result.objective)``; raises :class:`SkippedCut` without duals."""
    missing = [k for k, ok in result.dual_ok.items() if not ok]
    if missing:
        raise SkippedCut(f"period {result.period}: multipliers unavailable for {', '.join(missing)}")
    return Cut(
        period=result.period, iteration=iteration, intercept=float(result.objective),
        coef_y=np.asarray(result.pi, float), coef_z=np.asarray(result.lam, float),
        coef_r=np.asarray(result.mu, float).reshape(-1, 2), point=point, stage=stage, method=result.method,
    )


def subproblem_mode(family: str, method: str) -> str:
    if family == "transport":
        return TRANSPORT
    return DCOPF_BIGM if method == "bd" else DCOPF_FIXED_BILINEAR


# ---------------------------------------------------------------------------
# engine


@dataclass
class _MasterResult:
    bound: float
    point: InvestmentDecision
    thetas: np.ndarray
    objective: float


class _Engine:
    def __init__(self, system: PlanningSystem, config: StrategyConfig, initial_cuts: Iterable[Cut] = (),
                 backend: HighsBackend | None = None):
        self.system = system
        self.config = config
        self.space = InvestmentSpace.from_system(system)
        self.backend = backend or get_backend(config.backend)
        self.periods = list(system.periods)
        self.period_index = {p.id: k for k, p in enumerate(self.periods)}
        self.cuts: list[Cut] = list(initial_cuts)
        self.incumbents: dict[tuple[str, bool], tuple[float, InvestmentDecision]] = {}
        self.trace = BendersTrace(method=config.method, preset=config.preset, cuts=self.cuts)
        self.t0 = time.perf_counter()
        self.pool = ThreadPoolExecutor(max_workers=config.jobs) if config.jobs > 1 else None

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()

    # -- masters

    def _finish_point(self, program: ProgramInstance, x: np.ndarray, integer: bool) -> InvestmentDecision:
        d = self.space.clip(decision_from_solution(program, x, self.space))
        return d.rounded() if integer else d

    def solve_master(self, integer: bool) -> _MasterResult:
        program = build_master(self.cuts, "integer" if integer else "relaxed", self.system, self.space)
        if integer:
            sol = self.backend.solve_milp(program, self.config.master_gap, self.config.master_time_limit)
            bound, x = sol.best_bound, sol.x
        else:
            sol = self.backend.solve_lp(program)
            bound, x = sol.objective, sol.x
        if sol.status not in (OPTIMAL, "limit") or x is None:
            raise BackendFailure(f"master ended with status {sol.status}")
        thetas = x[program.investment_cols["theta"]]
        return _MasterResult(bound, self._finish_point(program, x, integer), thetas,
                             master_objective(program, x, self.space))

    def solve_regularized(self, integer: bool, lower: float, upper: float) -> _MasterResult | None:
        program = build_regularized_master(self.cuts, lower, upper, self.config.alpha, self.system,
                                           "integer" if integer else "relaxed", self.space)
        if integer:
            sol = self.backend.solve_milp(program, self.config.master_gap, self.config.master_time_limit)
        else:
            sol = self.backend.solve_lp(program)
        if sol.status not in (OPTIMAL, "limit") or sol.x is None:
            return None
        x = sol.x
        return _MasterResult(lower + self.config.alpha * (upper - lower),
                             self._finish_point(program, x, integer), x[program.investment_cols["theta"]],
                             master_objective(program, x, self.space))

    def cut_violation(self, point: InvestmentDecision, thetas: np.ndarray) -> float:
        worst = 0.0
        for cut in self.cuts:
            val = cut.evaluate(point)
            th = thetas[self.period_index[cut.period]]
            worst = max(worst, (val - th) / max(1.0, abs(val)))
        return worst

    # -- subproblems

    def solve_period(self, args) -> SubproblemResult:
        point, period, mode = args
        return solve_subproblem(self.system, point, period, mode, self.config.method, self.backend,
                                self.config.big_m, self.space)

    def solve_all(self, point: InvestmentDecision, mode: str) -> list[SubproblemResult]:
        jobs = [(point, p, mode) for p in self.periods]
        if self.pool is None:
            return [self.solve_period(j) for j in jobs]
        # ordered reduction: map preserves period order
        return list(self.pool.map(self.solve_period, jobs))

    # -- bounds

    def update_incumbents(self, family: str, mode: str, point: InvestmentDecision, value: float) -> None:
        keys = [(mode, False)]
        if point.is_integral():
            keys.append((family, True))
        for key in keys:
            best = self.incumbents.get(key)
            if best is None or value < best[0]:
                self.incumbents[key] = (value, point)
        if family == "dcopf" and point.is_integral() and value < self.trace.incumbent_value:
            self.trace.incumbent_value = value
            self.trace.incumbent = point

    def stage_upper(self, family: str, mode: str, integer: bool) -> float:
        vals = [self.incumbents.get((family, True), (math.inf,))[0]]
        if not integer:
            vals.append(self.incumbents.get((mode, False), (math.inf,))[0])
        return min(vals)

    def transport_gap(self) -> float | None:
        tb = self.trace.transport_bound
        if tb is None or not math.isfinite(self.trace.incumbent_value):
            return None
        return relative_gap(self.trace.incumbent_value, tb)

    # -- main loop

    def run_stage(self, stage: int) -> str:
        cfg = self.config
        family, integrality = STAGES[stage]
        integer = integrality == "integer"
        mode = subproblem_mode(family, cfg.method)
        regularize = stage in cfg.regularize
        eps = cfg.eps_for(stage)
        provenance = STAGE_PROVENANCE[stage]

        master = self.solve_master(integer)
        lower = master.bound
        point = master.point
        termination = "k_max"
        for k in range(1, cfg.k_max + 1):
            results = self.solve_all(point, mode)
            value = self.space.cost(point) + sum(r.objective for r in results)
            new_cuts, skipped = [], 0
            for r in results:
                try:
                    new_cuts.append(make_cut(r, point, k, provenance))
                except SkippedCut as exc:
                    logger.warning("skipping cut: %s", exc)
                    skipped += 1
            self.update_incumbents(family, mode, point, value)
            upper = self.stage_upper(family, mode, integer)
            self.cuts.extend(new_cuts)

            master = self.solve_master(integer)
            lower = max(lower, master.bound)
            gap = relative_gap(upper, lower)
            converged = gap <= eps and bool(new_cuts)
            violation = self.cut_violation(master.point, master.thetas)

            rec = IterationRecord(
                stage=stage, iteration=k, upper_bound=self.trace.incumbent_value, stage_upper_bound=upper,
                lower_bound=lower, algorithm_gap=gap, transport_gap=None, wall_seconds=0.0,
                cuts_added=len(new_cuts), cuts_skipped=skipped, point=point, point_value=value,
                master_bound=master.bound,
            )
            next_point = master.point
            if not converged and regularize and k < cfg.k_max and math.isfinite(upper) and lower <= upper:
                reg = self.solve_regularized(integer, lower, upper)
                rec.regularized = True
                rec.reg_budget = lower + cfg.alpha * (upper - lower)
                if reg is None:
                    rec.reg_fallback = True
                else:
                    rec.reg_objective = reg.objective
                    next_point = reg.point
                    violation = max(violation, self.cut_violation(reg.point, reg.thetas))
            rec.max_cut_violation = violation
            if not new_cuts and self.space.n_r:
                next_point = self.space.clip(InvestmentDecision(
                    next_point.y, next_point.z, next_point.r + JITTER))
            rec.transport_gap = self.transport_gap()
            rec.wall_seconds = time.perf_counter() - self.t0
            self.trace.records.append(rec)
            logger.info("stage %d it %d: U=%.6g L=%.6g gap=%.3g", stage, k, upper, lower, gap)
            if converged:
                termination = "converged"
                break
            point = next_point
        self.trace.stage_lower[stage] = lower
        self.trace.stage_terminations[stage] = termination
        if family == "transport":
            tb = self.trace.transport_bound
            self.trace.transport_bound = lower if tb is None else max(tb, lower)
        return termination

    def run(self, stages: Sequence[int]) -> BendersTrace:
        try:
            for stage in stages:
                self.trace.termination = self.run_stage(stage)
        finally:
            self.close()
        self.trace.wall_seconds = time.perf_counter() - self.t0
        return self.trace


def run_benders(system: PlanningSystem, config: StrategyConfig, initial_cuts: Iterable[Cut] = (),
                backend: HighsBackend | None = None, stage: int = 4) -> BendersTrace:
    """Single-stage BD/GBD loop (integer DC master by default)."""
    engine = _Engine(system, config, initial_cuts, backend)
    return engine.run([stage])


def run_staged(system: PlanningSystem, config: StrategyConfig, initial_cuts: Iterable[Cut] = (),
               backend: HighsBackend | None = None) -> BendersTrace:
    """Run the enabled stages in order, inheriting cuts between them."""
    engine = _Engine(system, config, initial_cuts, backend)
    return engine.run(config.stages)


@dataclass(frozen=True)
class GapReport:
    method: str
    upper_bound: float
    algorithm_bound: float
    algorithm_gap: float
    transport_bound: float | None
    transport_gap: float | None
    certified_gap: float


def report_bounds(trace: BendersTrace, transport_bound: float | None = None) -> GapReport:
    """Upper bound, algorithm bound and the gap that can actually be certified.

    GBD bounds come from a nonconvex subproblem, so only the transport bound
    certifies its gap.
    """
    if not trace.records:
        raise ValueError("empty trace")
    tb = trace.transport_bound if transport_bound is None else transport_bound
    if trace.method == "gbd" and tb is None:
        raise MissingTransportBound("GBD gaps are certified only against a transport bound")
    U = trace.incumbent_value
    L = trace.algorithm_bound
    alg = relative_gap(U, L)
    tgap = relative_gap(U, tb) if tb is not None else None
    if trace.method == "gbd":
        certified = tgap
    else:
        certified = relative_gap(U, max(L, tb) if tb is not None else L)
    return GapReport(trace.method, U, L, alg, tb, tgap, certified)


def enumerate_cut_errors(cuts: Sequence[Cut], values: Mapping[tuple, dict[str, float]],
                         points: Sequence[InvestmentDecision]) -> list[tuple[int, int, float]]:
    """(cut index, point index, excess) for cuts that overestimate a tabulated value."""
    bad = []
    for i, cut in enumerate(cuts):
        for j, pt in enumerate(points):
            true = values[tuple(pt.vector())][cut.period]
            excess = cut.evaluate(pt) - true
            if excess > 1e-6 * max(1.0, abs(true)):
                bad.append((i, j, excess))
    return bad
