"""Planning-system data model and structural validation.

A :class:`PlanningSystem` holds buses, corridors, transmission lines,
generators and representative operating periods.  Investment decisions
live in :class:`InvestmentDecision`, laid out by an
:class:`InvestmentSpace` that fixes the ordering of the ``y``/``z``/``r``
vectors used by every program builder and by the Benders engine.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

HOURS_PER_YEAR = 8760.0

FIXED = "fixed"
FIXED_RECONDUCTORABLE = "fixed_reconductorable"
REPLACEABLE = "replaceable"
CANDIDATE_PARALLEL = "candidate_parallel"
CANDIDATE_REPLACEMENT = "candidate_replacement"

LINE_KINDS = (FIXED, FIXED_RECONDUCTORABLE, REPLACEABLE, CANDIDATE_PARALLEL, CANDIDATE_REPLACEMENT)
EXISTING_KINDS = (FIXED, FIXED_RECONDUCTORABLE, REPLACEABLE)
CANDIDATE_KINDS = (CANDIDATE_PARALLEL, CANDIDATE_REPLACEMENT)


class ModelError(ValueError):
    """Base class for planning-system data errors."""


class MissingReplacement(ModelError):
    pass


class DuplicateReplacement(ModelError):
    pass


class InvalidInvestment(ModelError):
    pass


@dataclass(frozen=True)
class Bus:
    id: str
    zone: str = "1"
    demand_ref: str | None = None


@dataclass(frozen=True)
class Corridor:
    from_bus: str
    to_bus: str

    @property
    def key(self) -> tuple[str, str]:
        return (self.from_bus, self.to_bus)


@dataclass(frozen=True)
class TransmissionLine:
    """One line on a corridor.

    ``capacity`` and ``big_m`` are in MW, ``susceptance`` in per-unit on the
    system MVA base.  ``annual_cost`` applies to candidates only; the
    reconductoring fields apply to ``fixed_reconductorable`` lines only.
    """

    id: str
    corridor: tuple[str, str]
    kind: str
    capacity: float
    susceptance: float
    big_m: float
    annual_cost: float = 0.0
    replaces: str | None = None
    recon_low_max: float = 0.0
    recon_high_max: float = 0.0
    recon_low_cost: float = 0.0
    recon_high_cost: float = 0.0
    length_miles: float | None = None

    @property
    def is_candidate(self) -> bool:
        return self.kind in CANDIDATE_KINDS

    @property
    def is_existing(self) -> bool:
        return self.kind in EXISTING_KINDS

    @property
    def reconductorable(self) -> bool:
        return self.kind == FIXED_RECONDUCTORABLE


@dataclass(frozen=True)
class GeneratorAsset:
    """A generator technology at one bus, built in whole units.

    ``ramp_rate`` is MW/h per unit (``None`` means unconstrained);
    ``commit_cost`` is a $/unit-h charge on the relaxed commitment variable.
    """

    id: str
    bus: str
    existing_units: int = 0
    candidate: bool = False
    unit_size: float = 200.0
    max_new_units: int = 0
    annual_cost: float = 0.0
    variable_cost: float = 0.0
    ramp_rate: float | None = None
    min_output_frac: float = 0.0
    availability: str | None = None
    commit_cost: float = 0.0

    @property
    def has_commitment(self) -> bool:
        return self.min_output_frac > 0 or self.commit_cost > 0


@dataclass(frozen=True)
class RepresentativePeriod:
    id: str
    hours: int
    weight: float
    demand: Mapping[str, np.ndarray]
    availability: Mapping[str, np.ndarray] = field(default_factory=dict)

    def demand_at(self, ref: str | None) -> np.ndarray:
        if ref is None:
            return np.zeros(self.hours)
        return np.asarray(self.demand[ref], dtype=float)

    def availability_of(self, ref: str | None) -> np.ndarray:
        if ref is None:
            return np.ones(self.hours)
        return np.asarray(self.availability[ref], dtype=float)


@dataclass(frozen=True)
class PlanningSystem:
    buses: tuple[Bus, ...]
    corridors: tuple[Corridor, ...]
    lines: tuple[TransmissionLine, ...]
    generators: tuple[GeneratorAsset, ...]
    periods: tuple[RepresentativePeriod, ...]
    voll: float = 5000.0
    base_mva: float = 100.0
    name: str = "system"

    def bus_ids(self) -> list[str]:
        return [b.id for b in self.buses]

    def line(self, line_id: str) -> TransmissionLine:
        for ln in self.lines:
            if ln.id == line_id:
                return ln
        raise KeyError(line_id)

    @property
    def candidate_lines(self) -> list[TransmissionLine]:
        return [ln for ln in self.lines if ln.is_candidate]

    @property
    def reconductorable_lines(self) -> list[TransmissionLine]:
        return [ln for ln in self.lines if ln.reconductorable]

    @property
    def candidate_generators(self) -> list[GeneratorAsset]:
        return [g for g in self.generators if g.candidate]

    def lines_on(self, corridor: tuple[str, str]) -> list[TransmissionLine]:
        return [ln for ln in self.lines if tuple(ln.corridor) == tuple(corridor)]

    def flow_susceptance(self, line: TransmissionLine) -> float:
        """MW per radian of angle difference on the system base."""
        return self.base_mva * line.susceptance

    def total_hours(self) -> float:
        return sum(p.weight * p.hours for p in self.periods)


@dataclass(frozen=True)
class InvestmentDecision:
    """Integer generator units ``y``, binary builds ``z`` and reconductoring ``r``.

    ``r`` has shape ``(n_rec, 2)`` holding ``(r_low, r_high)`` per line.
    """

    y: np.ndarray
    z: np.ndarray
    r: np.ndarray

    def vector(self) -> np.ndarray:
        return np.concatenate([self.y, self.z, self.r.ravel()])

    def is_integral(self, tol: float = 1e-6) -> bool:
        head = np.concatenate([self.y, self.z])
        return bool(np.all(np.abs(head - np.round(head)) <= tol))

    def rounded(self) -> "InvestmentDecision":
        return InvestmentDecision(np.round(self.y), np.round(self.z), self.r.copy())


@dataclass(frozen=True)
class InvestmentSpace:
    """Ordering, bounds and costs of the investment vector."""

    gen_ids: tuple[str, ...]
    line_ids: tuple[str, ...]
    rec_ids: tuple[str, ...]
    y_max: np.ndarray
    r_max: np.ndarray
    c_y: np.ndarray
    c_z: np.ndarray
    c_r: np.ndarray

    @classmethod
    def from_system(cls, system: PlanningSystem) -> "InvestmentSpace":
        gens = system.candidate_generators
        cands = system.candidate_lines
        recs = system.reconductorable_lines
        return cls(
            gen_ids=tuple(g.id for g in gens),
            line_ids=tuple(ln.id for ln in cands),
            rec_ids=tuple(ln.id for ln in recs),
            y_max=np.array([g.max_new_units for g in gens], dtype=float),
            r_max=np.array([[ln.recon_low_max, ln.recon_high_max] for ln in recs], dtype=float).reshape(-1, 2),
            c_y=np.array([g.annual_cost for g in gens], dtype=float),
            c_z=np.array([ln.annual_cost for ln in cands], dtype=float),
            c_r=np.array([[ln.recon_low_cost, ln.recon_high_cost] for ln in recs], dtype=float).reshape(-1, 2),
        )

    @property
    def n_y(self) -> int:
        return len(self.gen_ids)

    @property
    def n_z(self) -> int:
        return len(self.line_ids)

    @property
    def n_r(self) -> int:
        return len(self.rec_ids)

    @property
    def size(self) -> int:
        return self.n_y + self.n_z + 2 * self.n_r

    def zeros(self) -> InvestmentDecision:
        return InvestmentDecision(np.zeros(self.n_y), np.zeros(self.n_z), np.zeros((self.n_r, 2)))

    def from_vector(self, v: np.ndarray) -> InvestmentDecision:
        v = np.asarray(v, dtype=float)
        a, b = self.n_y, self.n_y + self.n_z
        return InvestmentDecision(v[:a].copy(), v[a:b].copy(), v[b:].reshape(-1, 2).copy())

    def cost(self, d: InvestmentDecision) -> float:
        return float(self.c_y @ d.y + self.c_z @ d.z + np.sum(self.c_r * d.r))

    def cost_vector(self) -> np.ndarray:
        return np.concatenate([self.c_y, self.c_z, self.c_r.ravel()])

    def lower(self) -> np.ndarray:
        return np.zeros(self.size)

    def upper(self) -> np.ndarray:
        return np.concatenate([self.y_max, np.ones(self.n_z), self.r_max.ravel()])

    def integer_mask(self) -> np.ndarray:
        return np.concatenate([np.ones(self.n_y + self.n_z, bool), np.zeros(2 * self.n_r, bool)])

    def check(self, d: InvestmentDecision, tol: float = 1e-6) -> None:
        v = d.vector()
        if v.shape != (self.size,):
            raise InvalidInvestment(f"investment vector has length {v.size}, expected {self.size}")
        if np.any(v < self.lower() - tol) or np.any(v > self.upper() + tol):
            raise InvalidInvestment("investment outside its bounds")

    def clip(self, d: InvestmentDecision) -> InvestmentDecision:
        return self.from_vector(np.clip(d.vector(), self.lower(), self.upper()))

    def to_dict(self, d: InvestmentDecision) -> dict:
        return {
            "y": {g: int(round(v)) if abs(v - round(v)) < 1e-9 else float(v) for g, v in zip(self.gen_ids, d.y)},
            "z": {ln: int(round(v)) if abs(v - round(v)) < 1e-9 else float(v) for ln, v in zip(self.line_ids, d.z)},
            "r": {ln: [float(lo), float(hi)] for ln, (lo, hi) in zip(self.rec_ids, d.r)},
        }

    def from_dict(self, data: Mapping) -> InvestmentDecision:
        y = np.array([float(data.get("y", {}).get(g, 0)) for g in self.gen_ids])
        z = np.array([float(data.get("z", {}).get(ln, 0)) for ln in self.line_ids])
        r = np.array([data.get("r", {}).get(ln, [0.0, 0.0]) for ln in self.rec_ids], dtype=float).reshape(-1, 2)
        return InvestmentDecision(y, z, r)


@dataclass(frozen=True)
class Violation:
    severity: str  # "error" | "warning"
    code: str
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    def add(self, severity: str, code: str, message: str) -> None:
        self.violations.append(Violation(severity, code, message))

    @property
    def errors(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == "error"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def __len__(self) -> int:
        return len(self.violations)


def resolve_replacements(system: PlanningSystem) -> dict[str, str]:
    """Map each replaceable line to the unique candidate that replaces it."""
    replaceable = {ln.id for ln in system.lines if ln.kind == REPLACEABLE}
    mapping: dict[str, str] = {}
    for ln in system.lines:
        if ln.kind != CANDIDATE_REPLACEMENT:
            continue
        if ln.replaces not in replaceable:
            raise MissingReplacement(f"{ln.id} replaces {ln.replaces!r}, which is not a replaceable line")
        if ln.replaces in mapping:
            raise DuplicateReplacement(
                f"{ln.replaces} is replaced by both {mapping[ln.replaces]} and {ln.id}")
        mapping[ln.replaces] = ln.id
    missing = sorted(replaceable - mapping.keys())
    if missing:
        raise MissingReplacement(f"no replacement candidate for {', '.join(missing)}")
    return mapping


def connected_components(nodes: Iterable[str], edges: Iterable[tuple[str, str]]) -> list[list[str]]:
    adj: dict[str, set[str]] = defaultdict(set)
    nodes = list(nodes)
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen: set[str] = set()
    comps = []
    for n in nodes:
        if n in seen:
            continue
        stack, comp = [n], []
        seen.add(n)
        while stack:
            cur = stack.pop()
            comp.append(cur)
            for nb in sorted(adj[cur]):
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        comps.append(comp)
    return comps


def validate_system(system: PlanningSystem) -> ValidationReport:
    """Check structural invariants; never raises."""
    rep = ValidationReport()
    bus_ids = [b.id for b in system.buses]
    bus_set = set(bus_ids)
    if len(bus_set) != len(bus_ids):
        rep.add("error", "duplicate_bus", "bus ids are not unique")

    seen_pairs: set[frozenset] = set()
    corridor_keys = set()
    for c in system.corridors:
        if c.from_bus == c.to_bus:
            rep.add("error", "self_corridor", f"corridor {c.key} connects a bus to itself")
        if c.from_bus not in bus_set or c.to_bus not in bus_set:
            rep.add("error", "unknown_bus", f"corridor {c.key} references an unknown bus")
        pair = frozenset(c.key)
        if pair in seen_pairs:
            rep.add("error", "duplicate_corridor", f"corridor {c.key} listed twice")
        seen_pairs.add(pair)
        corridor_keys.add(c.key)

    line_ids = [ln.id for ln in system.lines]
    if len(set(line_ids)) != len(line_ids):
        rep.add("error", "duplicate_line", "line ids are not unique")
    referenced: set[str] = set()
    for ln in system.lines:
        if ln.kind not in LINE_KINDS:
            rep.add("error", "line_kind", f"{ln.id}: unknown kind {ln.kind!r}")
        if tuple(ln.corridor) not in corridor_keys:
            rep.add("error", "unknown_corridor", f"{ln.id}: corridor {tuple(ln.corridor)} not declared")
        referenced.update(ln.corridor)
        if not ln.capacity > 0:
            rep.add("error", "capacity", f"{ln.id}: capacity must be positive")
        if not ln.susceptance > 0:
            rep.add("error", "susceptance", f"{ln.id}: susceptance must be positive")
        if ln.big_m < ln.capacity:
            rep.add("error", "big_m", f"{ln.id}: big-M {ln.big_m} below capacity {ln.capacity}")
        if (ln.replaces is not None) != (ln.kind == CANDIDATE_REPLACEMENT):
            rep.add("error", "replaces", f"{ln.id}: 'replaces' must be set exactly for replacement candidates")
        if ln.reconductorable:
            if ln.recon_low_max < 0 or ln.recon_high_max < 0:
                rep.add("error", "recon_limits", f"{ln.id}: negative reconductoring limit")
        elif ln.recon_low_max or ln.recon_high_max:
            rep.add("error", "recon_limits", f"{ln.id}: reconductoring limits on a non-reconductorable line")
        if ln.is_candidate and ln.annual_cost < 0:
            rep.add("error", "line_cost", f"{ln.id}: negative annual cost")
        # unbuilt candidates on corridors without an existing line need M >= b*pi/2
        if ln.is_candidate and not any(o.is_existing for o in system.lines_on(ln.corridor)):
            if ln.big_m < system.flow_susceptance(ln) * math.pi / 2:
                rep.add("warning", "big_m_angle", f"{ln.id}: big-M may cut off angle differences")

    try:
        resolve_replacements(system)
    except ModelError as exc:
        rep.add("error", "psi_map", str(exc))

    gen_ids = [g.id for g in system.generators]
    if len(set(gen_ids)) != len(gen_ids):
        rep.add("error", "duplicate_generator", "generator ids are not unique")
    for g in system.generators:
        if g.bus not in bus_set:
            rep.add("error", "unknown_bus", f"{g.id}: unknown bus {g.bus}")
        referenced.add(g.bus)
        if not g.unit_size > 0:
            rep.add("error", "unit_size", f"{g.id}: unit size must be positive")
        if g.max_new_units < 0 or g.existing_units < 0:
            rep.add("error", "units", f"{g.id}: negative unit count")
        if g.max_new_units > 0 and not g.candidate:
            rep.add("error", "units", f"{g.id}: max_new_units set on a non-candidate generator")
        if not 0 <= g.min_output_frac <= 1:
            rep.add("error", "min_output", f"{g.id}: min_output_frac outside [0, 1]")
        for p in system.periods:
            if g.availability is None:
                continue
            if g.availability not in p.availability:
                rep.add("error", "availability_ref", f"{g.id}: profile {g.availability} missing in {p.id}")
                continue
            a = np.asarray(p.availability[g.availability], dtype=float)
            if a.size != p.hours:
                rep.add("error", "series_length", f"{g.id}: profile length {a.size} != {p.hours} in {p.id}")
            if np.any(a < 0) or np.any(a > 1):
                rep.add("error", "availability_range", f"{g.id}: availability outside [0, 1] in {p.id}")

    for b in system.buses:
        if b.id not in referenced:
            rep.add("error", "orphan_bus", f"bus {b.id} has no line or generator")
        for p in system.periods:
            if b.demand_ref is None:
                continue
            if b.demand_ref not in p.demand:
                rep.add("error", "demand_ref", f"bus {b.id}: demand series {b.demand_ref} missing in {p.id}")
                continue
            d = np.asarray(p.demand[b.demand_ref], dtype=float)
            if d.size != p.hours:
                rep.add("error", "series_length", f"bus {b.id}: demand length {d.size} != {p.hours} in {p.id}")
            if np.any(d < 0):
                rep.add("error", "negative_demand", f"bus {b.id}: negative demand in {p.id}")

    if not system.periods:
        rep.add("error", "no_periods", "system has no representative periods")
    for p in system.periods:
        if p.hours < 1:
            rep.add("error", "period_hours", f"{p.id}: hours must be >= 1")
        if not p.weight > 0:
            rep.add("error", "period_weight", f"{p.id}: weight must be positive")
    total = system.total_hours()
    if system.periods and abs(total - HOURS_PER_YEAR) > 1e-6:
        rep.add("error", "annualization", f"weighted hours sum to {total}, expected {HOURS_PER_YEAR}")

    if not system.voll > 0:
        rep.add("error", "voll", "VOLL must be positive")

    existing_edges = [tuple(ln.corridor) for ln in system.lines if ln.is_existing]
    comps = connected_components(bus_ids, existing_edges)
    if len(comps) > 1:
        rep.add("error", "connectivity", f"existing network has {len(comps)} islands")
    return rep
