import math

import numpy as np
import pytest

from conftest import cached_oracle
from gtep_bd.backend import get_backend
from gtep_bd.benders import (
    PRESETS,
    TRACE_COLUMNS,
    MissingTransportBound,
    SkippedCut,
    StrategyConfig,
    SubproblemResult,
    make_cut,
    relative_gap,
    report_bounds,
    run_benders,
    run_staged,
    solve_subproblem,
    subproblem_mode,
)
from gtep_bd.model import InvestmentSpace


def test_presets_match_strategy_table():
    assert PRESETS == {
        "baseline": ((4,), ()),
        "hs": ((2, 4), ()),
        "lp": ((3, 4), ()),
        "reg": ((4,), (4,)),
        "hs+lp": ((1, 2, 3, 4), ()),
        "hs+lp+reg": ((1, 2, 3, 4), (1, 2, 3, 4)),
        "hs+lp+semireg": ((1, 2, 3, 4), (1, 2, 3)),
    }


def test_config_validation():
    with pytest.raises(ValueError):
        StrategyConfig(stages=(1, 2))
    with pytest.raises(ValueError):
        StrategyConfig(alpha=1.5)
    with pytest.raises(ValueError):
        StrategyConfig(method="admm")
    with pytest.raises(ValueError):
        StrategyConfig(big_m="huge")
    with pytest.raises(ValueError):
        StrategyConfig.from_preset("turbo")
    cfg = StrategyConfig.from_preset("HS+LP+SemiReg", eps_tol=1e-2, stage_eps={1: 0.05})
    assert cfg.stages == (1, 2, 3, 4) and cfg.regularize == (1, 2, 3)
    assert cfg.eps_for(1) == 0.05 and cfg.eps_for(4) == 1e-2
    # regularization on a disabled stage is dropped
    assert StrategyConfig(stages=(4,), regularize=(1, 4)).regularize == (4,)


def test_subproblem_modes():
    assert subproblem_mode("transport", "gbd") == "transport"
    assert subproblem_mode("dcopf", "bd") == "dcopf_bigm"
    assert subproblem_mode("dcopf", "gbd") == "dcopf_fixed_bilinear"


def test_relative_gap():
    assert relative_gap(101.0, 100.0) == pytest.approx(0.01)
    assert relative_gap(math.inf, 100.0) == math.inf


def test_missing_duals_skip_the_cut(three_bus):
    space = InvestmentSpace.from_system(three_bus)
    res = SubproblemResult("winter", 1.0, np.zeros(1), np.zeros(1), np.zeros(2), {"y": True, "z": False, "r": True},
                           0.0, 0, 0.0, "dcopf_fixed_bilinear", "gbd")
    with pytest.raises(SkippedCut):
        make_cut(res, space.zeros())


def test_cut_is_tight_at_its_point(six_bus):
    space = InvestmentSpace.from_system(six_bus)
    point = space.from_vector(np.array([1, 0, 1, 1, 0, 0, 1, 10, 0, 0, 0], float))
    res = solve_subproblem(six_bus, point, six_bus.periods[0], "dcopf_bigm")
    cut = make_cut(res, point)
    assert cut.evaluate(point) == pytest.approx(res.objective, rel=1e-12)


def test_baseline_reaches_oracle(three_bus):
    trace = run_benders(three_bus, StrategyConfig(eps_tol=1e-4))
    assert trace.converged
    assert trace.incumbent_value == pytest.approx(cached_oracle("three_bus").objective, rel=1e-3)
    assert len(trace.cuts) == trace.iterations * len(three_bus.periods)


def test_trace_csv(three_bus):
    trace = run_staged(three_bus, StrategyConfig.from_preset("hs"))
    text = trace.to_csv()
    rows = [r.split(",") for r in text.strip().splitlines()]
    assert tuple(rows[0]) == TRACE_COLUMNS
    assert len(rows) == trace.iterations + 1
    first_dc = next(r for r in rows[1:] if r[0] == "4")
    assert rows[1][2] == ""  # no DC incumbent during the transport stage
    assert float(first_dc[2]) >= trace.incumbent_value


def test_parallel_matches_serial(six_bus):
    a = run_staged(six_bus, StrategyConfig.from_preset("hs", jobs=1))
    b = run_staged(six_bus, StrategyConfig.from_preset("hs", jobs=3))
    assert [r.upper_bound for r in a.records] == [r.upper_bound for r in b.records]
    assert [r.lower_bound for r in a.records] == [r.lower_bound for r in b.records]


def test_bundled_backend_run(three_bus):
    trace = run_benders(three_bus, StrategyConfig(backend="highs-bnb"), backend=get_backend("highs-bnb"))
    assert trace.incumbent_value == pytest.approx(cached_oracle("three_bus").objective, rel=1e-3)


def test_initial_cuts_warm_start(six_bus):
    first = run_benders(six_bus, StrategyConfig(k_max=8))
    second = run_benders(six_bus, StrategyConfig(k_max=1), initial_cuts=first.cuts)
    assert second.records[0].lower_bound >= first.records[-1].lower_bound - 1e-6 * abs(first.records[-1].lower_bound)


def test_gap_report_rules(three_bus):
    bd = run_staged(three_bus, StrategyConfig.from_preset("hs+lp"))
    rep = report_bounds(bd)
    assert rep.transport_bound is not None
    assert rep.certified_gap <= rep.algorithm_gap + 1e-12
    gbd = run_staged(three_bus, StrategyConfig.from_preset("baseline", method="gbd"))
    with pytest.raises(MissingTransportBound):
        report_bounds(gbd)
    rep = report_bounds(gbd, transport_bound=bd.transport_bound)
    assert rep.certified_gap == rep.transport_gap


def test_k_max_termination(six_bus):
    trace = run_benders(six_bus, StrategyConfig(k_max=2))
    assert trace.termination == "k_max"
    assert trace.iterations == 2


def test_regularized_iterates_recorded(three_bus):
    trace = run_staged(three_bus, StrategyConfig.from_preset("reg"))
    reg = [r for r in trace.records if r.regularized]
    assert reg
    for r in reg:
        assert r.reg_budget == pytest.approx(r.lower_bound + 0.5 * (r.stage_upper_bound - r.lower_bound))
