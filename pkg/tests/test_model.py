from dataclasses import replace

import numpy as np
import pytest

from gtep_bd.cases import toy_case
from gtep_bd.model import (
    CANDIDATE_REPLACEMENT,
    Bus,
    Corridor,
    DuplicateReplacement,
    InvalidInvestment,
    InvestmentDecision,
    InvestmentSpace,
    MissingReplacement,
    TransmissionLine,
    connected_components,
    resolve_replacements,
    validate_system,
)


def test_toys_validate():
    for name in ("three_bus", "six_bus", "ring_eight", "surplus"):
        rep = validate_system(toy_case(name))
        assert rep.ok, rep.violations


def test_three_bus_shape(three_bus):
    assert len(three_bus.buses) == 3
    assert sum(ln.is_existing for ln in three_bus.lines) == 2
    assert len(three_bus.candidate_lines) == 1
    assert len(three_bus.candidate_generators) == 1
    assert [p.hours for p in three_bus.periods] == [24, 24]


def test_period_weights_cover_a_year():
    for name in ("three_bus", "six_bus", "ring_eight", "surplus"):
        assert toy_case(name).total_hours() == pytest.approx(8760.0)


def test_psi_map_on_six_bus(six_bus):
    assert resolve_replacements(six_bus) == {"E2": "C2", "E4": "C4"}


def test_missing_replacement_detected(six_bus):
    lines = tuple(ln for ln in six_bus.lines if ln.id != "C2")
    broken = replace(six_bus, lines=lines)
    with pytest.raises(MissingReplacement):
        resolve_replacements(broken)
    assert "psi_map" in validate_system(broken).codes()


def test_duplicate_replacement_detected(six_bus):
    extra = replace(six_bus.line("C2"), id="C2bis")
    broken = replace(six_bus, lines=six_bus.lines + (extra,))
    with pytest.raises(DuplicateReplacement):
        resolve_replacements(broken)


def test_replacement_of_non_replaceable_line(six_bus):
    bad = TransmissionLine("Cx", ("N1", "N6"), CANDIDATE_REPLACEMENT, 300.0, 10.0, 300.0, 1000.0, replaces="E6")
    with pytest.raises(MissingReplacement):
        resolve_replacements(replace(six_bus, lines=six_bus.lines + (bad,)))


@pytest.mark.parametrize("mutate, code", [
    (lambda s: replace(s, buses=s.buses + (s.buses[0],)), "duplicate_bus"),
    (lambda s: replace(s, corridors=s.corridors + (Corridor("B1", "B1"),)), "self_corridor"),
    (lambda s: replace(s, corridors=s.corridors + (Corridor("B2", "B1"),)), "duplicate_corridor"),
    (lambda s: replace(s, lines=(replace(s.lines[0], capacity=0.0),) + s.lines[1:]), "capacity"),
    (lambda s: replace(s, lines=(replace(s.lines[0], susceptance=-1.0),) + s.lines[1:]), "susceptance"),
    (lambda s: replace(s, lines=(replace(s.lines[0], kind="bogus"),) + s.lines[1:]), "line_kind"),
    (lambda s: replace(s, lines=(replace(s.lines[0], corridor=("B3", "B2")),) + s.lines[1:]), "unknown_corridor"),
    (lambda s: replace(s, buses=s.buses + (Bus("B9"),)), "orphan_bus"),
    (lambda s: replace(s, voll=0.0), "voll"),
    (lambda s: replace(s, periods=()), "no_periods"),
    (lambda s: replace(s, periods=tuple(replace(p, weight=100.0) for p in s.periods)), "annualization"),
])
def test_validation_codes(three_bus, mutate, code):
    rep = validate_system(mutate(three_bus))
    assert code in rep.codes()
    assert not rep.ok


def test_disconnected_network_reported(three_bus):
    lines = tuple(ln for ln in three_bus.lines if ln.id not in ("L2", "L3"))
    corridors = tuple(c for c in three_bus.corridors if c.key == ("B1", "B2"))
    rep = validate_system(replace(three_bus, lines=lines, corridors=corridors))
    assert "connectivity" in rep.codes() or "orphan_bus" in rep.codes()


def test_connected_components():
    comps = connected_components("abcde", [("a", "b"), ("b", "c"), ("d", "e")])
    assert sorted(map(sorted, comps)) == [["a", "b", "c"], ["d", "e"]]


def test_investment_space_layout(six_bus):
    space = InvestmentSpace.from_system(six_bus)
    assert list(space.gen_ids) == ["cc3", "pv5", "wind6"]
    assert list(space.line_ids) == ["C1", "C2", "C4", "C7"]
    assert list(space.rec_ids) == ["E1", "E5"]
    assert space.size == 3 + 4 + 4
    assert space.integer_mask().sum() == 7
    np.testing.assert_allclose(space.r_max, [[30.0, 45.0], [22.0, 33.0]])


def test_investment_roundtrip_and_cost(six_bus):
    space = InvestmentSpace.from_system(six_bus)
    d = InvestmentDecision(np.array([1.0, 0, 2]), np.array([0, 1.0, 0, 1]), np.array([[10.0, 0], [0, 5]]))
    back = space.from_dict(space.to_dict(d))
    np.testing.assert_array_equal(back.vector(), d.vector())
    np.testing.assert_array_equal(space.from_vector(d.vector()).vector(), d.vector())
    expected = 1.6e7 + 2 * 1.05e7 + six_bus.line("C2").annual_cost + six_bus.line("C7").annual_cost \
        + 10 * 6000.0 + 5 * 13000.0
    assert space.cost(d) == pytest.approx(expected)


def test_investment_check(three_bus):
    space = InvestmentSpace.from_system(three_bus)
    with pytest.raises(InvalidInvestment):
        space.check(InvestmentDecision(np.array([3.0]), np.array([0.0]), np.zeros((1, 2))))
    with pytest.raises(InvalidInvestment):
        space.check(InvestmentDecision(np.array([0.0]), np.array([0.0, 1.0]), np.zeros((1, 2))))
    space.check(space.zeros())


def test_decision_integrality():
    d = InvestmentDecision(np.array([1.0000000001]), np.array([0.4]), np.array([[0.3, 0.0]]))
    assert not d.is_integral()
    r = d.rounded()
    assert r.is_integral()
    assert r.r[0, 0] == 0.3  # reconductoring stays continuous
