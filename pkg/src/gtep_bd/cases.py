"""Synthetic planning systems.

Built-in toys (``three_bus``, ``six_bus``, ``ring_eight``, ``surplus``) drive the
test suite.  The remaining functions turn an existing-lines-only grid into an
expansion case: candidate synthesis, annuitized line costing, load scaling,
interconnected duplication and representative-week selection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .model import (
    CANDIDATE_PARALLEL,
    CANDIDATE_REPLACEMENT,
    FIXED,
    FIXED_RECONDUCTORABLE,
    HOURS_PER_YEAR,
    REPLACEABLE,
    Bus,
    Corridor,
    GeneratorAsset,
    PlanningSystem,
    RepresentativePeriod,
    TransmissionLine,
)


class UnknownCase(KeyError):
    pass


class InsufficientData(ValueError):
    pass


@dataclass(frozen=True)
class CandidateRules:
    parallel_threshold: float = 200.0
    parallel_cap_mult: float = 1.5
    parallel_reactance_div: float = 1.5
    replace_cap_mult: float = 2.5
    replace_reactance_div: float = 2.5
    recon_low_frac: float = 0.10
    recon_high_frac: float = 0.15
    recon_low_cost_mult: float = 0.3
    recon_high_cost_mult: float = 0.8
    new_corridors_per_zone: int = 2

    def __post_init__(self):
        for name in ("parallel_cap_mult", "parallel_reactance_div", "replace_cap_mult", "replace_reactance_div"):
            if not getattr(self, name) > 1:
                raise ValueError(f"{name} must exceed 1")
        for name in ("recon_low_frac", "recon_high_frac"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1)")


@dataclass(frozen=True)
class CostRules:
    line_cost_per_mw_mile: float = 3667.0
    inflation_mult: float = 1.233
    min_annuitized_cost: float = 20358.0
    wacc: float = 0.044
    asset_life_years: int = 60
    cost_noise_frac: float = 0.10
    length_range: tuple[float, float] = (5.0, 100.0)

    def __post_init__(self):
        if not self.wacc > 0:
            raise ValueError("wacc must be positive")
        if self.asset_life_years < 1:
            raise ValueError("asset life must be at least one year")


def annuitize(overnight_cost: float, wacc: float = 0.044, life: int = 60) -> float:
    """Level annual payment that repays ``overnight_cost`` over ``life`` years."""
    if not wacc > 0 or life < 1:
        raise ValueError("need wacc > 0 and life >= 1")
    return overnight_cost * wacc / (1.0 - (1.0 + wacc) ** (-life))


def line_annual_cost(capacity: float, length_miles: float, rules: CostRules = CostRules()) -> float:
    overnight = capacity * length_miles * rules.line_cost_per_mw_mile * rules.inflation_mult
    return max(annuitize(overnight, rules.wacc, rules.asset_life_years), rules.min_annuitized_cost)


# ---------------------------------------------------------------------------
# profiles


def daily_shape(hours: int = 24, peak_hour: float = 18.0, low: float = 0.6, high: float = 1.0) -> np.ndarray:
    t = np.arange(hours)
    return low + (high - low) * (0.5 + 0.5 * np.cos(2 * np.pi * (t - peak_hour) / 24.0))


def solar_shape(hours: int = 24, peak: float = 1.0) -> np.ndarray:
    t = np.arange(hours) % 24
    return np.clip(peak * np.sin(np.pi * (t - 6) / 12.0), 0.0, 1.0)


def wind_shape(hours: int = 24, mean: float = 0.45, swing: float = 0.3, phase: float = 3.0) -> np.ndarray:
    t = np.arange(hours)
    return np.clip(mean + swing * np.cos(2 * np.pi * (t - phase) / 24.0), 0.0, 1.0)


def _two_day_periods(peaks: dict[str, float], profiles: dict[str, tuple[np.ndarray, np.ndarray]],
                     scale: tuple[float, float] = (1.0, 0.85)) -> tuple[RepresentativePeriod, ...]:
    weight = HOURS_PER_YEAR / 48.0
    periods = []
    for k, (pid, peak_hour) in enumerate((("winter", 18.0), ("summer", 15.0))):
        shape = daily_shape(24, peak_hour)
        demand = {ref: np.round(peak * scale[k] * shape, 3) for ref, peak in peaks.items()}
        avail = {ref: np.round(pair[k], 4) for ref, pair in profiles.items()}
        periods.append(RepresentativePeriod(pid, 24, weight, demand, avail))
    return tuple(periods)


def _corridors(lines) -> tuple[Corridor, ...]:
    seen = []
    for ln in lines:
        if ln.corridor not in seen:
            seen.append(ln.corridor)
    return tuple(Corridor(*c) for c in seen)


def _line(id, a, b, kind, cap, sus, cost=0.0, replaces=None, big_m=None, length=None, recon=(0.0, 0.0),
          recon_cost=(0.0, 0.0)) -> TransmissionLine:
    return TransmissionLine(
        id=id, corridor=(a, b), kind=kind, capacity=cap, susceptance=sus,
        big_m=cap if big_m is None else big_m, annual_cost=cost, replaces=replaces,
        recon_low_max=recon[0], recon_high_max=recon[1], recon_low_cost=recon_cost[0],
        recon_high_cost=recon_cost[1], length_miles=length,
    )


def _three_bus() -> PlanningSystem:
    lines = (
        _line("L1", "B1", "B2", FIXED_RECONDUCTORABLE, 250.0, 10.0, length=40.0,
              recon=(25.0, 37.5), recon_cost=(5000.0, 14000.0)),
        _line("L2", "B1", "B3", FIXED, 180.0, 8.0, length=55.0),
        _line("L3", "B2", "B3", CANDIDATE_PARALLEL, 200.0, 10.0, cost=line_annual_cost(200.0, 30.0),
              big_m=2000.0, length=30.0),
    )
    gens = (
        GeneratorAsset("G1", "B1", existing_units=3, unit_size=200.0, variable_cost=20.0, ramp_rate=120.0,
                       min_output_frac=0.3, commit_cost=150.0),
        GeneratorAsset("G2", "B2", existing_units=1, unit_size=200.0, variable_cost=140.0),
        GeneratorAsset("G3", "B3", candidate=True, max_new_units=2, unit_size=200.0,
                       annual_cost=9.0e6, variable_cost=45.0),
    )
    buses = (Bus("B1", "1", None), Bus("B2", "1", "D2"), Bus("B3", "1", "D3"))
    periods = _two_day_periods({"D2": 320.0, "D3": 230.0}, {})
    return PlanningSystem(buses, _corridors(lines), lines, gens, periods, name="three_bus")


def _six_bus() -> PlanningSystem:
    lines = (
        _line("E1", "N1", "N2", FIXED_RECONDUCTORABLE, 300.0, 10.0, length=60.0,
              recon=(30.0, 45.0), recon_cost=(6000.0, 16000.0)),
        _line("E2", "N2", "N3", REPLACEABLE, 150.0, 8.0, length=35.0),
        _line("E3", "N2", "N4", FIXED, 250.0, 9.0, length=45.0),
        _line("E4", "N3", "N4", REPLACEABLE, 120.0, 6.0, length=25.0),
        _line("E5", "N4", "N5", FIXED_RECONDUCTORABLE, 220.0, 9.0, length=30.0,
              recon=(22.0, 33.0), recon_cost=(5000.0, 13000.0)),
        _line("E6", "N1", "N6", FIXED, 180.0, 7.0, length=70.0),
        _line("E7", "N5", "N6", FIXED, 200.0, 8.0, length=50.0),
        _line("C1", "N1", "N2", CANDIDATE_PARALLEL, 450.0, 15.0, cost=line_annual_cost(450.0, 60.0),
              big_m=1.25 * 450.0, length=60.0),
        _line("C2", "N2", "N3", CANDIDATE_REPLACEMENT, 375.0, 20.0, cost=line_annual_cost(375.0, 35.0),
              replaces="E2", length=35.0),
        _line("C4", "N3", "N4", CANDIDATE_REPLACEMENT, 300.0, 15.0, cost=line_annual_cost(300.0, 25.0),
              replaces="E4", length=25.0),
        _line("C7", "N1", "N3", CANDIDATE_PARALLEL, 250.0, 8.0, cost=line_annual_cost(250.0, 80.0),
              big_m=2500.0, length=80.0),
    )
    gens = (
        GeneratorAsset("coal1", "N1", existing_units=3, variable_cost=22.0, ramp_rate=100.0,
                       min_output_frac=0.35, commit_cost=200.0),
        GeneratorAsset("wind1", "N1", existing_units=1, variable_cost=0.0, availability="wind_a"),
        GeneratorAsset("peak3", "N3", existing_units=1, variable_cost=150.0),
        GeneratorAsset("gas4", "N4", existing_units=1, variable_cost=65.0, min_output_frac=0.2, commit_cost=100.0),
        GeneratorAsset("cc3", "N3", candidate=True, max_new_units=2, annual_cost=1.6e7, variable_cost=42.0,
                       min_output_frac=0.3, commit_cost=120.0),
        GeneratorAsset("pv5", "N5", candidate=True, max_new_units=2, annual_cost=8.0e6, variable_cost=0.0,
                       availability="solar"),
        GeneratorAsset("wind6", "N6", candidate=True, max_new_units=2, annual_cost=1.05e7, variable_cost=0.0,
                       availability="wind_b"),
    )
    buses = (Bus("N1", "A"), Bus("N2", "A", "D2"), Bus("N3", "B", "D3"), Bus("N4", "B", "D4"),
             Bus("N5", "B", "D5"), Bus("N6", "A"))
    profiles = {
        "wind_a": (wind_shape(24, 0.55, 0.25, 2.0), wind_shape(24, 0.35, 0.2, 4.0)),
        "wind_b": (wind_shape(24, 0.5, 0.3, 22.0), wind_shape(24, 0.4, 0.25, 1.0)),
        "solar": (solar_shape(24, 0.6), solar_shape(24, 1.0)),
    }
    periods = _two_day_periods({"D2": 120.0, "D3": 420.0, "D4": 260.0, "D5": 180.0}, profiles)
    return PlanningSystem(buses, _corridors(lines), lines, gens, periods, name="six_bus")


def _ring_eight() -> PlanningSystem:
    ring = [
        ("R1", "R1", "R2", FIXED_RECONDUCTORABLE, 260.0, 10.0, (26.0, 39.0), (5500.0, 15000.0)),
        ("R2", "R2", "R3", FIXED, 220.0, 9.0, None, None),
        ("R3", "R3", "R4", REPLACEABLE, 140.0, 7.0, None, None),
        ("R4", "R4", "R5", FIXED, 240.0, 9.0, None, None),
        ("R5", "R5", "R6", FIXED_RECONDUCTORABLE, 210.0, 8.0, (21.0, 31.5), (5000.0, 14000.0)),
        ("R6", "R6", "R7", REPLACEABLE, 130.0, 6.0, None, None),
        ("R7", "R7", "R8", FIXED, 230.0, 9.0, None, None),
        ("R8", "R8", "R1", FIXED, 250.0, 10.0, None, None),
    ]
    lines = []
    for lid, a, b, kind, cap, sus, recon, rcost in ring:
        lines.append(_line(lid, a, b, kind, cap, sus, length=40.0, recon=recon or (0.0, 0.0),
                           recon_cost=rcost or (0.0, 0.0)))
    lines += [
        _line("X1", "R1", "R2", CANDIDATE_PARALLEL, 390.0, 15.0, cost=line_annual_cost(390.0, 40.0),
              big_m=1.25 * 390.0, length=40.0),
        _line("X3", "R3", "R4", CANDIDATE_REPLACEMENT, 350.0, 17.5, cost=line_annual_cost(350.0, 40.0),
              replaces="R3", length=40.0),
        _line("X6", "R6", "R7", CANDIDATE_REPLACEMENT, 325.0, 15.0, cost=line_annual_cost(325.0, 40.0),
              replaces="R6", length=40.0),
        _line("X15", "R1", "R5", CANDIDATE_PARALLEL, 250.0, 8.0, cost=line_annual_cost(250.0, 90.0),
              big_m=2500.0, length=90.0),
        _line("X37", "R3", "R7", CANDIDATE_PARALLEL, 200.0, 8.0, cost=line_annual_cost(200.0, 85.0),
              big_m=2000.0, length=85.0),
    ]
    gens = (
        GeneratorAsset("coalR1", "R1", existing_units=3, variable_cost=21.0, ramp_rate=100.0,
                       min_output_frac=0.3, commit_cost=180.0),
        GeneratorAsset("windR2", "R2", existing_units=1, variable_cost=0.0, availability="wind"),
        GeneratorAsset("gasR5", "R5", existing_units=1, variable_cost=60.0),
        GeneratorAsset("peakR7", "R7", existing_units=1, variable_cost=145.0),
        GeneratorAsset("ccR4", "R4", candidate=True, max_new_units=2, annual_cost=1.55e7, variable_cost=42.0),
        GeneratorAsset("pvR6", "R6", candidate=True, max_new_units=2, annual_cost=7.5e6, variable_cost=0.0,
                       availability="solar"),
    )
    buses = (Bus("R1", "1"), Bus("R2", "1", "D2"), Bus("R3", "1", "D3"), Bus("R4", "2", "D4"),
             Bus("R5", "2", "D5"), Bus("R6", "2", "D6"), Bus("R7", "1", "D7"), Bus("R8", "1", "D8"))
    profiles = {
        "wind": (wind_shape(24, 0.5, 0.3, 3.0), wind_shape(24, 0.4, 0.2, 6.0)),
        "solar": (solar_shape(24, 0.55), solar_shape(24, 0.95)),
    }
    peaks = {"D2": 90.0, "D3": 160.0, "D4": 210.0, "D5": 120.0, "D6": 170.0, "D7": 190.0, "D8": 80.0}
    periods = _two_day_periods(peaks, profiles)
    return PlanningSystem(tuple(buses), _corridors(lines), tuple(lines), gens, periods, name="ring_eight")


def _surplus() -> PlanningSystem:
    lines = (
        _line("S1", "A", "B", FIXED_RECONDUCTORABLE, 400.0, 12.0, length=30.0,
              recon=(40.0, 60.0), recon_cost=(6000.0, 15000.0)),
        _line("S2", "A", "C", REPLACEABLE, 180.0, 8.0, length=30.0),
        _line("S3", "B", "C", FIXED, 300.0, 10.0, length=30.0),
        _line("S2r", "A", "C", CANDIDATE_REPLACEMENT, 450.0, 20.0, cost=line_annual_cost(450.0, 30.0),
              replaces="S2", length=30.0),
        _line("S4", "B", "C", CANDIDATE_PARALLEL, 300.0, 12.0, cost=line_annual_cost(300.0, 30.0),
              big_m=300.0, length=30.0),
    )
    gens = (
        GeneratorAsset("GA", "A", existing_units=3, variable_cost=25.0),
        GeneratorAsset("GB", "B", existing_units=2, variable_cost=30.0),
        GeneratorAsset("GC", "C", existing_units=2, variable_cost=30.0),
        GeneratorAsset("GCnew", "C", candidate=True, max_new_units=2, annual_cost=1.8e7, variable_cost=30.0),
    )
    buses = (Bus("A", "1"), Bus("B", "1", "DB"), Bus("C", "1", "DC"))
    periods = _two_day_periods({"DB": 150.0, "DC": 150.0}, {})
    return PlanningSystem(buses, _corridors(lines), lines, gens, periods, name="surplus")


TOY_CASES = {
    "three_bus": _three_bus,
    "six_bus": _six_bus,
    "ring_eight": _ring_eight,
    "surplus": _surplus,
}


def toy_case(name: str) -> PlanningSystem:
    try:
        return TOY_CASES[name]()
    except KeyError:
        raise UnknownCase(f"unknown toy case {name!r}; choose from {sorted(TOY_CASES)}") from None


# ---------------------------------------------------------------------------
# expansion recipe


def strip_candidates(system: PlanningSystem) -> PlanningSystem:
    """Existing-lines-only copy: candidates and candidate generators dropped, lines made plain fixed."""
    lines = tuple(replace(ln, kind=FIXED, big_m=ln.capacity, recon_low_max=0.0, recon_high_max=0.0,
                          recon_low_cost=0.0, recon_high_cost=0.0, annual_cost=0.0)
                  for ln in system.lines if ln.is_existing)
    gens = tuple(g for g in system.generators if not g.candidate)
    used = {b for ln in lines for b in ln.corridor} | {g.bus for g in gens}
    buses = tuple(b for b in system.buses if b.id in used)
    return replace(system, buses=buses, corridors=_corridors(lines), lines=lines, generators=gens,
                   name=system.name + "_base")


def _noisy(cost: float, rng: np.random.Generator, frac: float) -> float:
    if frac <= 0:
        return cost
    return float(cost * (1.0 + rng.uniform(-frac, frac)))


def _bus_demand(system: PlanningSystem) -> dict[str, float]:
    out = {}
    for b in system.buses:
        out[b.id] = sum(p.weight * float(np.sum(p.demand_at(b.demand_ref))) for p in system.periods)
    return out


def expand_candidates(base: PlanningSystem, rules: CandidateRules = CandidateRules(),
                      costs: CostRules = CostRules(), seed: int = 0) -> PlanningSystem:
    """Attach a parallel or replacement candidate to every existing line, plus new corridors per zone.

    Lines above the threshold become reconductorable and gain a parallel
    candidate; the rest become replaceable by a larger candidate.  In each zone
    the largest-demand bus is linked to the largest-capacity buses it is not
    already adjacent to.
    """
    if any(ln.is_candidate for ln in base.lines):
        raise ValueError("base system already has candidate lines")
    rng = np.random.default_rng(seed)
    lines: list[TransmissionLine] = []
    added: list[TransmissionLine] = []

    def length_of(ln: TransmissionLine) -> float:
        if ln.length_miles is not None:
            return ln.length_miles
        return float(rng.uniform(*costs.length_range))

    for ln in base.lines:
        length = length_of(ln)
        if ln.capacity > rules.parallel_threshold:
            cap = ln.capacity * rules.parallel_cap_mult
            cost = _noisy(line_annual_cost(cap, length, costs), rng, costs.cost_noise_frac)
            per_mw = cost / cap
            lines.append(replace(
                ln, kind=FIXED_RECONDUCTORABLE, big_m=ln.capacity, length_miles=length, replaces=None,
                recon_low_max=rules.recon_low_frac * ln.capacity, recon_high_max=rules.recon_high_frac * ln.capacity,
                recon_low_cost=rules.recon_low_cost_mult * per_mw, recon_high_cost=rules.recon_high_cost_mult * per_mw,
            ))
            added.append(TransmissionLine(
                id=f"{ln.id}_par", corridor=ln.corridor, kind=CANDIDATE_PARALLEL, capacity=cap,
                susceptance=ln.susceptance * rules.parallel_reactance_div, big_m=1.25 * cap,
                annual_cost=cost, length_miles=length,
            ))
        else:
            cap = ln.capacity * rules.replace_cap_mult
            cost = _noisy(line_annual_cost(cap, length, costs), rng, costs.cost_noise_frac)
            lines.append(replace(ln, kind=REPLACEABLE, big_m=ln.capacity, length_miles=length))
            added.append(TransmissionLine(
                id=f"{ln.id}_rep", corridor=ln.corridor, kind=CANDIDATE_REPLACEMENT, capacity=cap,
                susceptance=ln.susceptance * rules.replace_reactance_div, big_m=cap, annual_cost=cost,
                replaces=ln.id, length_miles=length,
            ))

    corridors = list(base.corridors)
    adjacent = {frozenset(c.key) for c in corridors}
    demand = _bus_demand(base)
    gen_cap: dict[str, float] = {b.id: 0.0 for b in base.buses}
    for g in base.generators:
        gen_cap[g.bus] += g.existing_units * g.unit_size
    zones = sorted({b.zone for b in base.buses})
    for zone in zones:
        members = [b.id for b in base.buses if b.zone == zone]
        if rules.new_corridors_per_zone <= 0 or len(members) < 2:
            continue
        hub = max(members, key=lambda b: (demand[b], b))
        ranked = sorted((b for b in members if b != hub and frozenset((hub, b)) not in adjacent),
                        key=lambda b: (-gen_cap[b], b))
        zone_lines = [ln for ln in base.lines if ln.corridor[0] in members and ln.corridor[1] in members]
        ref = zone_lines or list(base.lines)
        cap = float(np.mean([ln.capacity for ln in ref]))
        sus = float(np.mean([ln.susceptance for ln in ref]))
        for other in ranked[:rules.new_corridors_per_zone]:
            length = float(rng.uniform(*costs.length_range))
            cost = _noisy(line_annual_cost(cap, length, costs), rng, costs.cost_noise_frac)
            corridors.append(Corridor(hub, other))
            adjacent.add(frozenset((hub, other)))
            added.append(TransmissionLine(
                id=f"NEW_{hub}_{other}", corridor=(hub, other), kind=CANDIDATE_PARALLEL, capacity=cap,
                susceptance=sus, big_m=10.0 * cap, annual_cost=cost, length_miles=length,
            ))
    return replace(base, corridors=tuple(corridors), lines=tuple(lines + added), name=base.name + "_exp")


def scale_and_perturb(system: PlanningSystem, load_mult: float = 2.0, noise_frac: float = 0.0,
                      seed: int = 0) -> PlanningSystem:
    """Scale every demand series and jitter candidate costs (uniform, +-noise_frac)."""
    if not load_mult > 0:
        raise ValueError("load_mult must be positive")
    rng = np.random.default_rng(seed)
    periods = tuple(replace(p, demand={k: np.asarray(v, float) * load_mult for k, v in p.demand.items()})
                    for p in system.periods)
    lines = tuple(replace(ln, annual_cost=_noisy(ln.annual_cost, rng, noise_frac)) if ln.is_candidate else ln
                  for ln in system.lines)
    gens = tuple(replace(g, annual_cost=_noisy(g.annual_cost, rng, noise_frac)) if g.candidate else g
                 for g in system.generators)
    return replace(system, periods=periods, lines=lines, generators=gens)


def duplicate_interconnect(system: PlanningSystem, n_ties: int = 5, perturb_frac: float = 0.05,
                           seed: int = 0, suffix: str = "_b") -> PlanningSystem:
    """Two interconnected copies; the copy gets fresh ids and perturbed load and availability."""
    if n_ties < 1:
        raise ValueError("need at least one tie line")
    rng = np.random.default_rng(seed)

    def rn(x: str | None) -> str | None:
        return None if x is None else x + suffix

    buses = tuple(Bus(rn(b.id), rn(b.zone), rn(b.demand_ref)) for b in system.buses)
    corridors = tuple(Corridor(rn(c.from_bus), rn(c.to_bus)) for c in system.corridors)
    lines = tuple(replace(ln, id=rn(ln.id), corridor=(rn(ln.corridor[0]), rn(ln.corridor[1])),
                          replaces=rn(ln.replaces)) for ln in system.lines)
    gens = tuple(replace(g, id=rn(g.id), bus=rn(g.bus), availability=rn(g.availability))
                 for g in system.generators)

    def jitter(v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, float)
        if perturb_frac <= 0:
            return v.copy()
        return v * (1.0 + rng.uniform(-perturb_frac, perturb_frac, size=v.shape))

    periods = []
    for p in system.periods:
        demand = dict(p.demand)
        avail = dict(p.availability)
        for k, v in p.demand.items():
            demand[rn(k)] = np.maximum(jitter(v), 0.0)
        for k, v in p.availability.items():
            avail[rn(k)] = np.clip(jitter(v), 0.0, 1.0)
        periods.append(replace(p, demand=demand, availability=avail))

    existing = [ln for ln in system.lines if ln.is_existing]
    cap = float(np.mean([ln.capacity for ln in existing]))
    sus = float(np.mean([ln.susceptance for ln in existing]))
    originals = [b.id for b in system.buses]
    pairs: list[tuple[str, str]] = []
    max_pairs = len(originals) ** 2
    while len(pairs) < min(n_ties, max_pairs):
        a = originals[int(rng.integers(len(originals)))]
        b = originals[int(rng.integers(len(originals)))]
        if (a, rn(b)) not in pairs:
            pairs.append((a, rn(b)))
    ties = tuple(TransmissionLine(id=f"TIE{k + 1}", corridor=pair, kind=FIXED, capacity=cap, susceptance=sus,
                                  big_m=cap) for k, pair in enumerate(pairs))
    return replace(
        system,
        buses=system.buses + buses,
        corridors=system.corridors + corridors + tuple(Corridor(*t.corridor) for t in ties),
        lines=system.lines + lines + ties,
        generators=system.generators + gens,
        periods=tuple(periods),
        name=system.name + "_dup",
    )


# ---------------------------------------------------------------------------
# time-domain reduction


@dataclass
class YearData:
    """Hourly series for a year; ``solar``/``wind`` name the availability profiles of each kind."""

    demand: dict[str, np.ndarray]
    availability: dict[str, np.ndarray] = field(default_factory=dict)
    solar: list[str] = field(default_factory=list)
    wind: list[str] = field(default_factory=list)

    @property
    def hours(self) -> int:
        return len(next(iter(self.demand.values())))


def synthetic_year(demand_ids, solar_ids=(), wind_ids=(), seed: int = 0, hours: int = 8760,
                   peak: float = 100.0) -> YearData:
    rng = np.random.default_rng(seed)
    t = np.arange(hours)
    season = 0.85 + 0.15 * np.cos(2 * np.pi * (t - 24 * 20) / hours)
    demand = {}
    for k, d in enumerate(demand_ids):
        daily = daily_shape(hours, 18.0 + k % 3)
        demand[d] = np.round(peak * season * daily * (1 + 0.05 * rng.standard_normal(hours)).clip(0.5), 3)
    avail = {}
    for s in solar_ids:
        cloud = np.repeat(rng.uniform(0.3, 1.0, size=hours // 24 + 1), 24)[:hours]
        avail[s] = np.round(solar_shape(hours) * cloud * (0.8 + 0.2 * np.cos(2 * np.pi * (t - 24 * 172) / hours)), 4)
    for wi in wind_ids:
        x = np.zeros(hours)
        shocks = rng.standard_normal(hours)
        for h in range(1, hours):
            x[h] = 0.97 * x[h - 1] + 0.25 * shocks[h]
        avail[wi] = np.round(1 / (1 + np.exp(-x)), 4)
    return YearData(demand, avail, list(solar_ids), list(wind_ids))


def reduce_time(year: YearData, n_periods: int, period_hours: int = 168, seed: int = 0,
                n_init: int = 50) -> list[RepresentativePeriod]:
    """Representative periods: the extreme weeks plus k-means medoid weeks.

    The minimum-solar, minimum-wind and maximum-demand weeks are always kept;
    the other weeks are clustered and each cluster is represented by its
    member closest to the centroid.  Weights count the weeks each period
    stands for, rescaled so the weighted hours cover a full year.
    """
    from sklearn.cluster import KMeans

    if n_periods < 4:
        raise InsufficientData("need at least four periods to hold the three extreme weeks")
    n_weeks = year.hours // period_hours
    if n_weeks < n_periods:
        raise InsufficientData(f"{n_weeks} weeks of data cannot supply {n_periods} periods")

    def week(series: np.ndarray, k: int) -> np.ndarray:
        return np.asarray(series[k * period_hours:(k + 1) * period_hours], float)

    extremes: list[int] = []
    if year.solar:
        solar = [sum(week(year.availability[s], k).sum() for s in year.solar) for k in range(n_weeks)]
        extremes.append(int(np.argmin(solar)))
    if year.wind:
        wind = [sum(week(year.availability[s], k).sum() for s in year.wind) for k in range(n_weeks)]
        extremes.append(int(np.argmin(wind)))
    total = sum(np.asarray(v, float) for v in year.demand.values())
    extremes.append(int(np.argmax([week(total, k).max() for k in range(n_weeks)])))
    extremes = list(dict.fromkeys(extremes))

    rest = [k for k in range(n_weeks) if k not in extremes]
    n_clusters = n_periods - len(extremes)
    scale = {name: max(float(np.max(np.abs(v))), 1e-12)
             for name, v in list(year.demand.items()) + list(year.availability.items())}
    feats = np.array([np.concatenate([week(v, k) / scale[name]
                                      for name, v in list(year.demand.items()) + list(year.availability.items())])
                      for k in rest])

    groups: list[list[int]]
    if len(np.unique(np.round(feats, 12), axis=0)) < n_clusters:
        groups = [rest[i::n_clusters] for i in range(n_clusters)]
        medoids = [g[0] for g in groups]
    else:
        km = KMeans(n_clusters=n_clusters, init="k-means++", n_init=n_init, random_state=seed).fit(feats)
        groups, medoids = [], []
        for c in range(n_clusters):
            idx = np.flatnonzero(km.labels_ == c)
            dist = np.linalg.norm(feats[idx] - km.cluster_centers_[c], axis=1)
            groups.append([rest[i] for i in idx])
            medoids.append(rest[int(idx[int(np.argmin(dist))])])

    counts = {k: 1 for k in extremes}
    for m, g in zip(medoids, groups):
        counts[m] = counts.get(m, 0) + len(g)
    scale_w = HOURS_PER_YEAR / (sum(counts.values()) * period_hours)
    periods = []
    for k in sorted(counts):
        periods.append(RepresentativePeriod(
            id=f"w{k:02d}", hours=period_hours, weight=counts[k] * scale_w,
            demand={n: week(v, k) for n, v in year.demand.items()},
            availability={n: week(v, k) for n, v in year.availability.items()},
        ))
    return periods


def extreme_weeks(year: YearData, period_hours: int = 168) -> dict[str, int]:
    """Indices of the minimum-solar, minimum-wind and maximum-demand weeks."""
    n_weeks = year.hours // period_hours

    def wsum(names):
        return [sum(float(np.sum(year.availability[s][k * period_hours:(k + 1) * period_hours])) for s in names)
                for k in range(n_weeks)]

    out = {}
    if year.solar:
        out["min_solar"] = int(np.argmin(wsum(year.solar)))
    if year.wind:
        out["min_wind"] = int(np.argmin(wsum(year.wind)))
    total = sum(np.asarray(v, float) for v in year.demand.values())
    out["max_demand"] = int(np.argmax([total[k * period_hours:(k + 1) * period_hours].max()
                                       for k in range(n_weeks)]))
    return out
