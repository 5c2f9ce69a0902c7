"""Monolithic solves used as reference optima for the decomposition."""

from __future__ import annotations

from dataclasses import dataclass

from .backend import OPTIMAL, BackendFailure, HighsBackend, get_backend
from .formulation import build_monolithic, decision_from_solution
from .model import InvestmentDecision, InvestmentSpace, PlanningSystem

DEFAULT_MAX_VARS = 200_000


class ThresholdExceeded(ValueError):
    pass


@dataclass
class OracleResult:
    mode: str
    integer: bool
    status: str
    objective: float
    best_bound: float
    decision: InvestmentDecision
    investment_cost: float
    n_vars: int
    n_rows: int
    solve_time: float

    def to_dict(self, space: InvestmentSpace) -> dict:
        return {
            "mode": self.mode,
            "integer": self.integer,
            "status": self.status,
            "objective": self.objective,
            "best_bound": self.best_bound,
            "investment_cost": self.investment_cost,
            "n_vars": self.n_vars,
            "n_rows": self.n_rows,
            "investment": space.to_dict(self.decision),
        }


def solve_monolithic(system: PlanningSystem, mode: str = "dcopf_bigm", integer: bool = True,
                     big_m: str | None = "tight", backend: HighsBackend | None = None,
                     rel_gap: float = 1e-4, time_limit: float = 600.0,
                     max_vars: int = DEFAULT_MAX_VARS) -> OracleResult:
    program = build_monolithic(system, mode, integer=integer, big_m=big_m)
    if program.n_vars > max_vars:
        raise ThresholdExceeded(f"monolithic program has {program.n_vars} variables (limit {max_vars})")
    backend = backend or get_backend()
    space = InvestmentSpace.from_system(system)
    if integer:
        sol = backend.solve_milp(program, rel_gap, time_limit)
        obj, bound, x, status, t = sol.objective, sol.best_bound, sol.x, sol.status, sol.solve_time
    else:
        sol = backend.solve_lp(program)
        obj, bound, x, status, t = sol.objective, sol.objective, sol.x, sol.status, sol.solve_time
    if x is None or status not in (OPTIMAL, "limit"):
        raise BackendFailure(f"monolithic solve ended with status {status}")
    d = decision_from_solution(program, x, space)
    if integer:
        d = d.rounded()
    return OracleResult(mode, integer, status, obj, bound, d, space.cost(d), program.n_vars, program.n_rows, t)
