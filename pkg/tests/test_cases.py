from dataclasses import replace

import numpy as np
import pytest

from gtep_bd.cases import (
    CandidateRules,
    CostRules,
    InsufficientData,
    UnknownCase,
    YearData,
    annuitize,
    duplicate_interconnect,
    expand_candidates,
    extreme_weeks,
    line_annual_cost,
    reduce_time,
    scale_and_perturb,
    strip_candidates,
    synthetic_year,
    toy_case,
)
from gtep_bd.io import dumps_system
from gtep_bd.model import (
    CANDIDATE_PARALLEL,
    CANDIDATE_REPLACEMENT,
    FIXED,
    FIXED_RECONDUCTORABLE,
    REPLACEABLE,
    validate_system,
)


def _closed_form(cost, w, n):
    # same annuity written as w (1+w)^n / ((1+w)^n - 1)
    g = (1 + w) ** n
    return cost * w * g / (g - 1)


def test_annuity_factor():
    assert annuitize(1.0) == pytest.approx(_closed_form(1.0, 0.044, 60), rel=1e-12)
    assert annuitize(1.0) == pytest.approx(0.0475935007, rel=1e-9)
    assert annuitize(1.0, 0.044, 1) == pytest.approx(1.044)
    with pytest.raises(ValueError):
        annuitize(1.0, 0.0, 10)
    with pytest.raises(ValueError):
        annuitize(1.0, 0.05, 0)


def test_line_cost_example():
    overnight = 100 * 5 * 3667 * 1.233
    assert overnight == pytest.approx(2260705.5)
    assert line_annual_cost(100, 5) == pytest.approx(_closed_form(overnight, 0.044, 60))
    assert line_annual_cost(1, 1) == 20358.0  # floor


def test_rule_invariants():
    with pytest.raises(ValueError):
        CandidateRules(parallel_cap_mult=1.0)
    with pytest.raises(ValueError):
        CandidateRules(recon_low_frac=1.2)
    with pytest.raises(ValueError):
        CostRules(wacc=0.0)
    with pytest.raises(ValueError):
        CostRules(asset_life_years=0)


@pytest.fixture
def base():
    """Existing-lines-only six-bus grid with one 350 MW and one 175 MW line."""
    b = strip_candidates(toy_case("six_bus"))
    lines = list(b.lines)
    lines[0] = replace(lines[0], capacity=350.0, big_m=350.0)
    lines[1] = replace(lines[1], capacity=175.0, big_m=175.0)
    return replace(b, lines=tuple(lines))


def test_strip_candidates(base):
    assert not any(ln.is_candidate for ln in base.lines)
    assert all(ln.kind == FIXED for ln in base.lines)
    assert not any(g.candidate for g in base.generators)
    assert validate_system(base).ok


def test_expand_rules(base):
    out = expand_candidates(base, CandidateRules(new_corridors_per_zone=0), seed=3)
    assert validate_system(out).ok
    assert len(out.candidate_lines) == len(base.lines)
    par = out.line("E1_par")
    assert par.kind == CANDIDATE_PARALLEL and par.capacity == pytest.approx(525.0)
    assert par.susceptance == pytest.approx(base.line("E1").susceptance * 1.5)
    assert par.corridor == base.line("E1").corridor
    rep = out.line("E2_rep")
    assert rep.kind == CANDIDATE_REPLACEMENT and rep.capacity == pytest.approx(437.5)
    assert rep.replaces == "E2" and rep.susceptance == pytest.approx(base.line("E2").susceptance * 2.5)
    e1 = out.line("E1")
    assert e1.kind == FIXED_RECONDUCTORABLE
    assert (e1.recon_low_max, e1.recon_high_max) == pytest.approx((35.0, 52.5))
    per_mw = par.annual_cost / par.capacity
    assert (e1.recon_low_cost, e1.recon_high_cost) == pytest.approx((0.3 * per_mw, 0.8 * per_mw))
    assert out.line("E2").kind == REPLACEABLE
    for ln in out.candidate_lines:
        assert ln.annual_cost >= 20358.0 * 0.9


def test_expand_new_corridors(base):
    out = expand_candidates(base, seed=1)
    new = [ln for ln in out.candidate_lines if ln.id.startswith("NEW_")]
    # zone A: hub N2 (only demand bus) -> N6 (not adjacent); zone B: hub N3 -> N5
    assert {ln.corridor for ln in new} == {("N2", "N6"), ("N3", "N5")}
    assert all(ln.big_m == pytest.approx(10 * ln.capacity) for ln in new)
    assert validate_system(out).ok


def test_expand_is_deterministic(base):
    assert dumps_system(expand_candidates(base, seed=7)) == dumps_system(expand_candidates(base, seed=7))
    assert dumps_system(expand_candidates(base, seed=7)) != dumps_system(expand_candidates(base, seed=8))


def test_expand_rejects_candidates():
    with pytest.raises(ValueError):
        expand_candidates(toy_case("six_bus"))


def test_scale_and_perturb():
    s = toy_case("six_bus")
    doubled = scale_and_perturb(s, 2.0, 0.0)
    for p, q in zip(s.periods, doubled.periods):
        for k in p.demand:
            np.testing.assert_allclose(q.demand[k], 2 * p.demand[k])
    assert [ln.annual_cost for ln in doubled.lines] == [ln.annual_cost for ln in s.lines]
    a = scale_and_perturb(s, 1.0, 0.1, seed=5)
    assert dumps_system(a) == dumps_system(scale_and_perturb(s, 1.0, 0.1, seed=5))
    for old, new in zip(s.candidate_lines, a.candidate_lines):
        assert abs(new.annual_cost / old.annual_cost - 1) <= 0.1
    with pytest.raises(ValueError):
        scale_and_perturb(s, 0.0)


def test_duplicate_interconnect():
    s = toy_case("three_bus")
    d = duplicate_interconnect(s, n_ties=5, perturb_frac=0.05, seed=2)
    assert len(d.buses) == 2 * len(s.buses)
    assert len(d.lines) == 2 * len(s.lines) + 5
    assert validate_system(d).ok
    plain = duplicate_interconnect(s, n_ties=1, perturb_frac=0.0, seed=0)
    for p in plain.periods:
        for k in ("D2", "D3"):
            np.testing.assert_array_equal(p.demand[k], p.demand[k + "_b"])
    with pytest.raises(ValueError):
        duplicate_interconnect(s, n_ties=0)


@pytest.fixture(scope="module")
def year():
    return synthetic_year(["D1", "D2"], ["pv"], ["wind"], seed=4)


def test_reduce_time_composition(year):
    periods = reduce_time(year, 4, seed=0)
    assert len(periods) == 4
    ext = extreme_weeks(year)
    ids = {p.id for p in periods}
    assert {f"w{k:02d}" for k in ext.values()} <= ids
    assert sum(p.weight * p.hours for p in periods) == pytest.approx(8760.0)


def test_reduce_time_more_periods(year):
    periods = reduce_time(year, 8, seed=1, n_init=10)
    assert len(periods) == 8
    assert sum(p.weight * p.hours for p in periods) == pytest.approx(8760.0)
    assert all(p.hours == 168 for p in periods)


def test_reduce_time_constant_year():
    flat = YearData({"D": np.full(8760, 50.0)}, {"pv": np.full(8760, 0.3), "w": np.full(8760, 0.4)}, ["pv"], ["w"])
    periods = reduce_time(flat, 6)
    assert len(periods) == 6
    assert sum(p.weight * p.hours for p in periods) == pytest.approx(8760.0)


def test_reduce_time_errors(year):
    with pytest.raises(InsufficientData):
        reduce_time(year, 3)
    short = YearData({"D": np.ones(168 * 3)})
    with pytest.raises(InsufficientData):
        reduce_time(short, 4)


def test_unknown_toy():
    with pytest.raises(UnknownCase):
        toy_case("nine_bus")
