"""Reference optimum built directly in cvxpy, independent of the package's program builder.

Integer decisions are enumerated; for each combination an LP over all periods
(reconductoring continuous) is solved with disjunctive flow semantics: an
unbuilt candidate or a replaced line simply carries no flow.
"""

from __future__ import annotations

import itertools

import cvxpy as cp
import numpy as np

from gtep_bd.model import InvestmentSpace, PlanningSystem, connected_components, resolve_replacements


def fixed_integer_value(system: PlanningSystem, y: dict, z: dict, dc: bool = True) -> float:
    space = InvestmentSpace.from_system(system)
    psi = resolve_replacements(system)
    comps = connected_components([b.id for b in system.buses], [tuple(ln.corridor) for ln in system.lines])
    refs = {c[0] for c in comps}
    r = {ln: (cp.Variable(nonneg=True), cp.Variable(nonneg=True)) for ln in space.rec_ids}
    cons = []
    cost = 0.0
    for k, ln in enumerate(space.rec_ids):
        line = system.line(ln)
        cons += [r[ln][0] <= line.recon_low_max, r[ln][1] <= line.recon_high_max]
        cost += line.recon_low_cost * r[ln][0] + line.recon_high_cost * r[ln][1]
    cost += sum(g.annual_cost * y[g.id] for g in system.candidate_generators)
    cost += sum(ln.annual_cost * z[ln.id] for ln in system.candidate_lines)

    for period in system.periods:
        H, beta = period.hours, period.weight
        inj = {b.id: 0 for b in system.buses}
        for g in system.generators:
            units = g.existing_units + (y[g.id] if g.candidate else 0)
            cap = g.unit_size * period.availability_of(g.availability)[:H]
            p = cp.Variable(H, nonneg=True)
            cost += beta * g.variable_cost * cp.sum(p)
            if g.has_commitment:
                u = cp.Variable(H, nonneg=True)
                cons += [u <= units, p <= cp.multiply(cap, u), p >= g.min_output_frac * cp.multiply(cap, u)]
                cost += beta * g.commit_cost * cp.sum(u)
            else:
                cons += [p <= cap * units]
            if g.ramp_rate is not None and g.ramp_rate < g.unit_size and H > 1:
                cons += [cp.abs(cp.diff(p)) <= g.ramp_rate * units]
            inj[g.bus] = inj[g.bus] + p
        theta = {}
        if dc:
            for b in system.buses:
                theta[b.id] = np.zeros(H) if b.id in refs else cp.Variable(H)
                if b.id not in refs:
                    cons += [cp.abs(theta[b.id]) <= np.pi / 4]
        for ln in system.lines:
            if ln.is_candidate:
                active = z[ln.id] == 1
            elif ln.replaces is None and ln.id in psi:
                active = z[psi[ln.id]] == 0
            else:
                active = True
            if not active:
                continue
            i, j = ln.corridor
            f = cp.Variable(H)
            limit = ln.capacity
            if ln.id in r:
                limit = limit + r[ln.id][0] + r[ln.id][1]
            cons += [cp.abs(f) <= limit]
            if dc:
                cons += [f == system.base_mva * ln.susceptance * (theta[i] - theta[j])]
            inj[i] = inj[i] - f
            inj[j] = inj[j] + f
        for b in system.buses:
            d = period.demand_at(b.demand_ref)[:H]
            s = cp.Variable(H, nonneg=True)
            cons += [s <= d, inj[b.id] + s == d]
            cost += beta * system.voll * cp.sum(s)
    prob = cp.Problem(cp.Minimize(cost), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_rel=1e-10, tol_gap_abs=1e-6, tol_feas=1e-10)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"reference LP status {prob.status}")
    return float(prob.value)


def enumerate_optimum(system: PlanningSystem, dc: bool = True) -> tuple[float, dict, dict]:
    gens = system.candidate_generators
    lines = system.candidate_lines
    best = (np.inf, None, None)
    for ys in itertools.product(*[range(g.max_new_units + 1) for g in gens]):
        for zs in itertools.product((0, 1), repeat=len(lines)):
            y = {g.id: v for g, v in zip(gens, ys)}
            z = {ln.id: v for ln, v in zip(lines, zs)}
            val = fixed_integer_value(system, y, z, dc)
            if val < best[0]:
                best = (val, y, z)
    return best
