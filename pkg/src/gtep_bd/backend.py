"""LP/MILP solving behind a narrow interface.

Two backends ship: ``highs`` (scipy's HiGHS bindings for both LPs and
MILPs) and ``highs-bnb``, which solves LPs with HiGHS but reports no native
MILP capability, so integer programs go through the bundled depth-first
branch-and-bound in :func:`branch_and_bound`.

Dual convention: for a row ``a x (sense) b`` the reported dual ``u`` is the
derivative of the optimal value with respect to ``b``.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from .formulation import ProgramInstance

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
LIMIT = "limit"

# tried in order when the configured simplex variant stalls numerically
FALLBACK_LP_METHODS = ("highs", "highs-ipm")


class BackendFailure(RuntimeError):
    pass


class NoIncumbent(BackendFailure):
    pass


@dataclass
class LpSolution:
    status: str
    objective: float
    x: np.ndarray | None
    duals: np.ndarray | None
    dual_available: np.ndarray | None
    reduced_lower: np.ndarray | None = None
    reduced_upper: np.ndarray | None = None
    solve_time: float = 0.0

    def row_duals(self, rows: np.ndarray) -> np.ndarray:
        return self.duals[rows]

    def duals_ok(self, rows: np.ndarray) -> bool:
        return self.dual_available is not None and bool(np.all(self.dual_available[rows]))


@dataclass
class MilpSolution:
    status: str
    objective: float
    best_bound: float
    x: np.ndarray | None
    gap: float
    solve_time: float = 0.0
    nodes: int = 0
    extra: dict = field(default_factory=dict)


def _split_rows(program: ProgramInstance):
    A = program.A.tocsr()
    le = program.sense == "L"
    ge = program.sense == "G"
    eq = program.sense == "E"
    ub_rows = np.flatnonzero(le | ge)
    sign = np.where(ge[ub_rows], -1.0, 1.0)
    A_ub = sp.diags(sign) @ A[ub_rows] if ub_rows.size else None
    b_ub = sign * program.rhs[ub_rows] if ub_rows.size else None
    eq_rows = np.flatnonzero(eq)
    A_eq = A[eq_rows] if eq_rows.size else None
    b_eq = program.rhs[eq_rows] if eq_rows.size else None
    return A_ub, b_ub, ub_rows, sign, A_eq, b_eq, eq_rows


class HighsBackend:
    name = "highs"
    supports_milp = True

    def __init__(self, lp_method: str = "highs-ds"):
        # dual simplex: vertex solutions, reproducible duals
        self.lp_method = lp_method

    def capabilities(self) -> dict[str, bool]:
        return {"lp": True, "milp": self.supports_milp, "duals": True}

    def solve_lp(self, program: ProgramInstance) -> LpSolution:
        if program.has_integers:
            raise ValueError("solve_lp called on a program with integrality marks")
        A_ub, b_ub, ub_rows, sign, A_eq, b_eq, eq_rows = _split_rows(program)
        bounds = np.column_stack([program.lb, program.ub])
        bounds = [(None if np.isneginf(lo) else lo, None if np.isposinf(hi) else hi) for lo, hi in bounds]
        t0 = time.perf_counter()
        for method in dict.fromkeys((self.lp_method,) + FALLBACK_LP_METHODS):
            try:
                res = linprog(program.cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                              method=method)
            except ValueError as exc:
                raise BackendFailure(str(exc)) from exc
            if res.status != 4:
                break
            logger.info("LP %s: %s reported numerical trouble, retrying", program.name, method)
        elapsed = time.perf_counter() - t0
        if res.status == 2:
            return LpSolution(INFEASIBLE, math.inf, None, None, None, solve_time=elapsed)
        if res.status == 3:
            return LpSolution(UNBOUNDED, -math.inf, None, None, None, solve_time=elapsed)
        if res.status == 1:
            return LpSolution(LIMIT, math.nan, None, None, None, solve_time=elapsed)
        if res.status != 0:
            raise BackendFailure(f"LP backend failed: {res.message}")
        duals = np.full(program.n_rows, np.nan)
        if ub_rows.size and getattr(res, "ineqlin", None) is not None and res.ineqlin.marginals is not None:
            duals[ub_rows] = sign * res.ineqlin.marginals
        if eq_rows.size and getattr(res, "eqlin", None) is not None and res.eqlin.marginals is not None:
            duals[eq_rows] = res.eqlin.marginals
        avail = np.isfinite(duals)
        return LpSolution(
            OPTIMAL, float(res.fun) + program.objective_offset, np.asarray(res.x), duals, avail,
            reduced_lower=np.asarray(res.lower.marginals), reduced_upper=np.asarray(res.upper.marginals),
            solve_time=elapsed,
        )

    def solve_milp(self, program: ProgramInstance, rel_gap: float = 1e-3,
                   time_limit: float = 360.0) -> MilpSolution:
        if not program.has_integers:
            lp = self.solve_lp(program)
            return MilpSolution(lp.status, lp.objective, lp.objective, lp.x, 0.0, lp.solve_time)
        if not self.supports_milp:
            return branch_and_bound(self, program, rel_gap, time_limit)
        lo = np.where(program.sense == "G", program.rhs, np.where(program.sense == "E", program.rhs, -np.inf))
        hi = np.where(program.sense == "L", program.rhs, np.where(program.sense == "E", program.rhs, np.inf))
        cons = [LinearConstraint(program.A, lo, hi)] if program.n_rows else []
        t0 = time.perf_counter()
        res = milp(program.cost, integrality=program.integer.astype(int), bounds=Bounds(program.lb, program.ub),
                   constraints=cons, options={"mip_rel_gap": rel_gap, "time_limit": time_limit})
        elapsed = time.perf_counter() - t0
        off = program.objective_offset
        if res.status == 2:
            return MilpSolution(INFEASIBLE, math.inf, math.inf, None, math.inf, elapsed)
        if res.status == 3:
            return MilpSolution(UNBOUNDED, -math.inf, -math.inf, None, math.inf, elapsed)
        if res.x is None:
            if res.status == 1:
                raise NoIncumbent("MILP hit its limit before finding a feasible point")
            raise BackendFailure(f"MILP backend failed: {res.message}")
        status = OPTIMAL if res.status == 0 else LIMIT
        obj = float(res.fun) + off
        bound = getattr(res, "mip_dual_bound", None)
        bound = obj if bound is None or not np.isfinite(bound) else min(float(bound) + off, obj)
        gap = float(res.mip_gap) if getattr(res, "mip_gap", None) is not None else 0.0
        return MilpSolution(status, obj, bound, np.asarray(res.x), gap, elapsed,
                            nodes=int(getattr(res, "mip_node_count", 0) or 0))


class BranchAndBoundBackend(HighsBackend):
    """HiGHS for LPs, bundled branch-and-bound for integer programs."""

    name = "highs-bnb"
    supports_milp = False


def branch_and_bound(backend: HighsBackend, program: ProgramInstance, rel_gap: float = 1e-3,
                     time_limit: float = 360.0, int_tol: float = 1e-6) -> MilpSolution:
    """Depth-first branch-and-bound on the most fractional variable with best-bound pruning."""
    t0 = time.perf_counter()
    relaxed = program.relaxed()
    int_idx = np.flatnonzero(program.integer)
    incumbent, inc_x = math.inf, None
    pruned_bound = math.inf  # smallest bound among nodes pruned by the gap test
    stack = [(program.lb.copy(), program.ub.copy(), -math.inf)]
    nodes = 0
    hit_limit = False

    def cutoff() -> float:
        return incumbent - rel_gap * abs(incumbent) if math.isfinite(incumbent) else math.inf

    while stack:
        if time.perf_counter() - t0 > time_limit:
            hit_limit = True
            break
        lb, ub, parent_bound = stack.pop()
        if parent_bound >= cutoff():
            pruned_bound = min(pruned_bound, parent_bound)
            continue
        nodes += 1
        sol = backend.solve_lp(relaxed.replace(lb=lb, ub=ub))
        if sol.status == INFEASIBLE:
            continue
        if sol.status == UNBOUNDED:
            raise BackendFailure("unbounded LP relaxation inside branch-and-bound")
        if sol.status != OPTIMAL:
            raise BackendFailure(f"node LP ended with status {sol.status}")
        if sol.objective >= cutoff():
            pruned_bound = min(pruned_bound, sol.objective)
            continue
        vals = sol.x[int_idx]
        frac = np.abs(vals - np.round(vals))
        if np.all(frac <= int_tol):
            x = sol.x.copy()
            x[int_idx] = np.round(vals)
            incumbent, inc_x = sol.objective, x
            continue
        k = int(np.argmax(np.minimum(frac, 1.0)))
        j = int_idx[k]
        v = sol.x[j]
        down_ub = ub.copy()
        down_ub[j] = math.floor(v)
        up_lb = lb.copy()
        up_lb[j] = math.ceil(v)
        down = (lb, down_ub, sol.objective)
        up = (up_lb, ub, sol.objective)
        # pushed last = explored first: follow the nearer rounding
        if v - math.floor(v) >= 0.5:
            stack.extend([down, up])
        else:
            stack.extend([up, down])
    elapsed = time.perf_counter() - t0
    open_bound = min((nb for _, _, nb in stack), default=math.inf)
    if inc_x is None:
        if hit_limit:
            raise NoIncumbent("branch-and-bound hit its time limit before finding a feasible point")
        return MilpSolution(INFEASIBLE, math.inf, math.inf, None, math.inf, elapsed, nodes)
    best_bound = min(incumbent, pruned_bound, open_bound)
    gap = (incumbent - best_bound) / max(abs(incumbent), 1e-12)
    status = LIMIT if hit_limit else OPTIMAL
    return MilpSolution(status, incumbent, best_bound, inc_x, gap, elapsed, nodes)


_BACKENDS = {"highs": HighsBackend, "highs-bnb": BranchAndBoundBackend}


def get_backend(name: str = "highs") -> HighsBackend:
    try:
        return _BACKENDS[name]()
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; choose from {sorted(_BACKENDS)}") from None


def available_backends() -> list[str]:
    return sorted(_BACKENDS)
