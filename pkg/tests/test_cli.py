import json

import pytest

from gtep_bd.cli import EXIT_INPUT, EXIT_K_MAX, EXIT_OK, build_parser, main, resolve_settings
from gtep_bd.io import load_system


@pytest.fixture(scope="module")
def six_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("sys") / "six.json"
    assert main(["generate", "--toy", "six_bus", "--out", str(path)]) == EXIT_OK
    return path


def test_generate_toy(six_file, capsys):
    assert load_system(six_file).name == "six_bus"


def test_generate_expand_and_duplicate(tmp_path, capsys):
    base = tmp_path / "three.json"
    main(["generate", "--toy", "three_bus", "--out", str(base)])
    dup = tmp_path / "dup.json"
    assert main(["generate", "--duplicate", str(base), "--ties", "5", "--seed", "3", "--out", str(dup)]) == EXIT_OK
    s = load_system(dup)
    assert len(s.buses) == 6 and len(s.lines) == 11
    assert "6 buses" in capsys.readouterr().out
    # expansion needs a candidate-free base
    assert main(["generate", "--expand", str(base), "--out", str(tmp_path / "x.json")]) == EXIT_INPUT


def test_generate_expand_seeded(tmp_path):
    from gtep_bd.cases import strip_candidates, toy_case
    from gtep_bd.io import save_system

    base = tmp_path / "base.json"
    save_system(strip_candidates(toy_case("six_bus")), base)
    outs = []
    for k in range(2):
        out = tmp_path / f"exp{k}.json"
        assert main(["generate", "--expand", str(base), "--seed", "7", "--out", str(out)]) == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    s = load_system(tmp_path / "exp0.json")
    assert len(s.candidate_lines) == len(load_system(base).lines) + 2


def test_run_writes_outputs(six_file, tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["run", str(six_file), "--preset", "hs+lp+semireg", "--eps-tol", "1e-3", "--out", str(out)])
    assert code == EXIT_OK
    inc = json.loads((out / "incumbent.json").read_text())
    assert inc["termination"] == "converged"
    assert inc["transport_gap"] is not None
    assert (out / "trace.csv").read_text().startswith("stage,iteration")
    svg = (out / "convergence.svg").read_text()
    assert svg.lstrip().startswith("<?xml") and "<svg" in svg
    assert "transport gap" in capsys.readouterr().out


def test_run_iteration_limit(six_file, tmp_path):
    assert main(["run", str(six_file), "--k-max", "2", "--out", str(tmp_path / "r")]) == EXIT_K_MAX


def test_run_missing_file(tmp_path):
    out = tmp_path / "never"
    assert main(["run", str(tmp_path / "missing.json"), "--out", str(out)]) == EXIT_INPUT
    assert not out.exists()


def test_bad_flags():
    assert main(["run"]) == EXIT_INPUT
    assert main(["frobnicate"]) == EXIT_INPUT


def test_oracle_command(six_file, tmp_path):
    assert main(["oracle", str(six_file), "--out", str(tmp_path)]) == EXIT_OK
    data = json.loads((tmp_path / "oracle_dcopf_bigm.json").read_text())
    assert sum(data["investment"]["z"].values()) >= 1
    assert main(["oracle", str(six_file), "--max-vars", "10", "--out", str(tmp_path)]) == EXIT_INPUT


def test_config_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"k_max": 7, "alpha": 0.3, "preset": "hs"}))
    args = build_parser().parse_args(["run", "x.json", "--config", str(cfg), "--alpha", "0.9", "--jobs", "4",
                                      "--serial"])
    s = resolve_settings(args)
    assert s["k_max"] == 7 and s["alpha"] == 0.9 and s["preset"] == "hs" and s["jobs"] == 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": 1}))
    assert main(["run", "x.json", "--config", str(bad)]) == EXIT_INPUT


def test_compare_single_row(six_file, tmp_path):
    code = main(["compare", str(six_file), "--presets", "baseline", "--serial", "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = (tmp_path / "compare.csv").read_text().strip().splitlines()
    assert len(rows) == 2
    assert (tmp_path / "compare_timings.csv").exists()


def test_compare_rejects_unknown_preset(six_file, tmp_path):
    assert main(["compare", str(six_file), "--presets", "turbo", "--out", str(tmp_path)]) == EXIT_INPUT
