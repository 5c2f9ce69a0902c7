"""Command-line front end: ``gtep-bd {generate,run,oracle,compare}``.

Exit codes: 0 converged, 2 iteration limit, 3 input error, 4 backend error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from pathlib import Path

from .backend import BackendFailure, available_backends, get_backend
from .benders import METHODS, PRESETS, StrategyConfig, report_bounds, run_staged
from .cases import (
    TOY_CASES,
    CandidateRules,
    CostRules,
    UnknownCase,
    duplicate_interconnect,
    expand_candidates,
    scale_and_perturb,
    toy_case,
)
from .formulation import FLOW_MODES
from .io import load_system, save_system
from .model import InvestmentSpace, ModelError, PlanningSystem, validate_system
from .oracle import DEFAULT_MAX_VARS, ThresholdExceeded, solve_monolithic

logger = logging.getLogger("gtep_bd")

EXIT_OK = 0
EXIT_K_MAX = 2
EXIT_INPUT = 3
EXIT_BACKEND = 4

# StrategyConfig fields settable from flags or a config file
CONFIG_KEYS = ("method", "preset", "stages", "regularize", "alpha", "eps_tol", "k_max", "master_gap",
               "master_time_limit", "big_m", "seed", "jobs", "backend")
DEFAULTS = {"method": "bd", "preset": "baseline", "seed": 0, "jobs": 1, "backend": "highs"}

COMPARE_COLUMNS = ("method", "preset", "big_m", "status", "termination", "upper_bound", "algorithm_bound",
                   "transport_bound", "algorithm_gap", "transport_gap", "certified_gap", "iterations",
                   "cuts", "error")


class InputError(Exception):
    pass


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _word_list(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def _add_shared(p: argparse.ArgumentParser) -> None:
    # defaults are None so a config file can fill the gaps
    p.add_argument("--backend", choices=available_backends())
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, help="max concurrent subproblem solves")
    p.add_argument("--serial", action="store_true", help="single-threaded deterministic mode")
    p.add_argument("--out", help="output directory (file for generate)")
    p.add_argument("--eps-tol", type=float, dest="eps_tol")
    p.add_argument("--k-max", type=int, dest="k_max")
    p.add_argument("--alpha", type=float)
    p.add_argument("--master-gap", type=float, dest="master_gap")
    p.add_argument("--master-time-limit", type=float, dest="master_time_limit")
    p.add_argument("--big-m", dest="big_m", help="tight or loose (compare accepts a comma list)")
    p.add_argument("--config", help="JSON file with strategy settings; flags take precedence")
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gtep-bd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a system file")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--toy", choices=sorted(TOY_CASES))
    src.add_argument("--expand", metavar="BASE", help="add candidates to an existing-lines-only system")
    src.add_argument("--duplicate", metavar="SYSTEM", help="build two interconnected copies")
    g.add_argument("--ties", type=int, default=5)
    g.add_argument("--perturb", type=float, default=0.05)
    g.add_argument("--load-mult", type=float, default=1.0)
    g.add_argument("--noise", type=float, default=None, help="candidate cost noise fraction")
    g.add_argument("--sidecar", action="store_true", help="store time series in a CSV next to the file")
    _add_shared(g)

    r = sub.add_parser("run", help="solve with a staged BD/GBD strategy")
    r.add_argument("system")
    r.add_argument("--preset", choices=sorted(PRESETS))
    r.add_argument("--method", choices=METHODS)
    r.add_argument("--stages", type=_int_list)
    r.add_argument("--regularize", type=_int_list)
    _add_shared(r)

    o = sub.add_parser("oracle", help="monolithic reference solve")
    o.add_argument("system")
    o.add_argument("--mode", choices=FLOW_MODES, default="dcopf_bigm")
    o.add_argument("--relaxed", action="store_true", help="solve the LP relaxation")
    o.add_argument("--max-vars", type=int, default=DEFAULT_MAX_VARS)
    _add_shared(o)

    c = sub.add_parser("compare", help="run several (method, preset) pairs")
    c.add_argument("system")
    c.add_argument("--presets", type=_word_list, default=["baseline"])
    c.add_argument("--methods", type=_word_list, default=["bd"])
    _add_shared(c)
    return parser


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    unknown = set(data) - set(CONFIG_KEYS)
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    return data


def resolve_settings(args: argparse.Namespace) -> dict:
    """Merge flags over config file over defaults."""
    merged = dict(DEFAULTS)
    merged.update(_load_config(getattr(args, "config", None)))
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    if getattr(args, "serial", False):
        merged["jobs"] = 1
    return merged


def strategy_from_settings(settings: dict, method: str | None = None, preset: str | None = None,
                           big_m: str | None = None) -> StrategyConfig:
    kw = {k: settings[k] for k in ("alpha", "eps_tol", "k_max", "master_gap", "master_time_limit", "seed",
                                    "jobs", "backend") if settings.get(k) is not None}
    kw["method"] = method or settings["method"]
    kw["big_m"] = big_m or settings.get("big_m") or "tight"
    preset = preset or settings.get("preset")
    if settings.get("stages") or settings.get("regularize"):
        base = PRESETS[preset][0] if preset else (4,)
        return StrategyConfig(stages=tuple(settings.get("stages") or base),
                              regularize=tuple(settings.get("regularize") or ()), preset=None, **kw)
    return StrategyConfig.from_preset(preset or "baseline", **kw)


def _read_system(path: str) -> PlanningSystem:
    try:
        system = load_system(path)
    except FileNotFoundError as exc:
        raise InputError(f"system file not found: {path}") from exc
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot load {path}: {exc}") from exc
    report = validate_system(system)
    if not report.ok:
        msgs = "; ".join(f"{v.code}: {v.message}" for v in report.errors)
        raise InputError(f"invalid system {path}: {msgs}")
    return system


def _summary(system: PlanningSystem) -> str:
    n_cand = len(system.candidate_lines)
    return (f"{system.name}: {len(system.buses)} buses, {len(system.lines)} lines "
            f"({n_cand} candidates, {len(system.reconductorable_lines)} reconductorable), "
            f"{len(system.generators)} generators ({len(system.candidate_generators)} candidates), "
            f"{len(system.periods)} periods")


def _out_dir(args, default: str) -> Path:
    out = Path(args.out or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_generate(args) -> int:
    settings = resolve_settings(args)
    seed = settings["seed"]
    if args.toy:
        system = toy_case(args.toy)
    elif args.expand:
        base = _read_system(args.expand)
        costs = CostRules() if args.noise is None else CostRules(cost_noise_frac=args.noise)
        system = expand_candidates(base, CandidateRules(), costs, seed=seed)
    else:
        if args.ties < 1:
            raise InputError("--ties must be at least 1")
        system = duplicate_interconnect(_read_system(args.duplicate), args.ties, args.perturb, seed=seed)
    if args.load_mult != 1.0 or (args.noise and not args.expand):
        system = scale_and_perturb(system, args.load_mult, args.noise or 0.0, seed=seed)
    report = validate_system(system)
    if not report.ok:
        raise InputError("generated system failed validation: " + "; ".join(v.message for v in report.errors))
    out = Path(args.out or f"{system.name}.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    save_system(system, out, sidecar=args.sidecar)
    print(_summary(system))
    print(f"wrote {out}")
    return EXIT_OK


def _exit_for(termination: str) -> int:
    return EXIT_OK if termination == "converged" else EXIT_K_MAX


def cmd_run(args) -> int:
    from .plotting import plot_convergence

    settings = resolve_settings(args)
    system = _read_system(args.system)
    try:
        config = strategy_from_settings(settings)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    trace = run_staged(system, config, backend=get_backend(config.backend))
    out = _out_dir(args, "gtep_run")
    space = InvestmentSpace.from_system(system)
    (out / "trace.csv").write_text(trace.to_csv())
    rep = report_bounds(trace) if (config.method == "bd" or trace.transport_bound is not None) else None
    payload = {
        "system": system.name,
        "method": config.method,
        "preset": config.preset,
        "stages": list(config.stages),
        "regularize": list(config.regularize),
        "big_m": config.big_m,
        "termination": trace.termination,
        "upper_bound": _num(trace.incumbent_value),
        "algorithm_bound": _num(trace.algorithm_bound),
        "transport_bound": _num(trace.transport_bound),
        "certified_gap": _num(rep.certified_gap) if rep else None,
        "transport_gap": _num(rep.transport_gap) if rep else None,
        "iterations": trace.iterations,
        "investment": space.to_dict(trace.incumbent) if trace.incumbent is not None else None,
        "investment_cost": space.cost(trace.incumbent) if trace.incumbent is not None else None,
    }
    (out / "incumbent.json").write_text(json.dumps(payload, indent=2) + "\n")
    plot_convergence(trace, out / "convergence.svg", f"{system.name}: {config.method.upper()} {config.preset or ''}")
    print(f"{trace.termination}: U={trace.incumbent_value:.8g} L={trace.algorithm_bound:.8g} "
          f"iterations={trace.iterations}")
    if rep is not None:
        line = f"certified gap {rep.certified_gap:.3e}"
        if rep.transport_gap is not None:
            line += f", transport gap {rep.transport_gap:.3e}"
        print(line)
    print(f"wrote {out}/trace.csv, incumbent.json, convergence.svg")
    return _exit_for(trace.termination)


def _num(v):
    if v is None:
        return None
    return float(v) if math.isfinite(v) else None


def cmd_oracle(args) -> int:
    settings = resolve_settings(args)
    system = _read_system(args.system)
    result = solve_monolithic(system, args.mode, integer=not args.relaxed, big_m=settings.get("big_m") or "tight",
                              backend=get_backend(settings["backend"]), max_vars=args.max_vars)
    space = InvestmentSpace.from_system(system)
    out = _out_dir(args, "gtep_oracle")
    path = out / f"oracle_{args.mode}{'_lp' if args.relaxed else ''}.json"
    data = {"system": system.name, **result.to_dict(space)}
    path.write_text(json.dumps(data, indent=2) + "\n")
    print(f"{result.status}: objective={result.objective:.8g} investment cost={result.investment_cost:.8g}")
    print(f"wrote {path}")
    return EXIT_OK


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ""
    return str(v)


def cmd_compare(args) -> int:
    settings = resolve_settings(args)
    system = _read_system(args.system)
    big_ms = _word_list(settings.get("big_m") or "tight") if isinstance(settings.get("big_m"), str) \
        else list(settings.get("big_m") or ["tight"])
    for name in args.presets:
        if name not in PRESETS:
            raise InputError(f"unknown preset {name!r}")
    for m in args.methods:
        if m not in METHODS:
            raise InputError(f"unknown method {m!r}")
    for bm in big_ms:
        if bm not in ("tight", "loose"):
            raise InputError(f"unknown big-M policy {bm!r}")
    if not args.presets:
        raise InputError("need at least one preset")

    rows, timings = [], []
    worst = EXIT_OK
    for method in args.methods:
        for preset in args.presets:
            for bm in big_ms:
                row = dict.fromkeys(COMPARE_COLUMNS, None)
                row.update(method=method, preset=preset, big_m=bm)
                t0 = time.perf_counter()
                try:
                    cfg = strategy_from_settings({**settings, "stages": None, "regularize": None}, method, preset, bm)
                    trace = run_staged(system, cfg, backend=get_backend(cfg.backend))
                    tb = trace.transport_bound
                    row.update(status="ok", termination=trace.termination, upper_bound=_num(trace.incumbent_value),
                               algorithm_bound=_num(trace.algorithm_bound), transport_bound=_num(tb),
                               iterations=trace.iterations, cuts=len(trace.cuts))
                    if method == "bd" or tb is not None:
                        rep = report_bounds(trace)
                        row.update(algorithm_gap=_num(rep.algorithm_gap), transport_gap=_num(rep.transport_gap),
                                   certified_gap=_num(rep.certified_gap))
                    worst = max(worst, _exit_for(trace.termination))
                except BackendFailure as exc:
                    row.update(status="backend_error", error=str(exc))
                    worst = max(worst, EXIT_BACKEND)
                except ValueError as exc:
                    row.update(status="input_error", error=str(exc))
                    worst = max(worst, EXIT_INPUT)
                rows.append(row)
                timings.append((method, preset, bm, time.perf_counter() - t0))
                logger.info("%s %s %s done", method, preset, bm)

    out = _out_dir(args, "gtep_compare")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARE_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in COMPARE_COLUMNS])
    (out / "compare.csv").write_text(buf.getvalue())
    # wall time varies run to run, so it lives outside the canonical table
    tbuf = io.StringIO()
    tw = csv.writer(tbuf, lineterminator="\n")
    tw.writerow(("method", "preset", "big_m", "wall_seconds"))
    for m, p, bm, secs in timings:
        tw.writerow((m, p, bm, f"{secs:.3f}"))
    (out / "compare_timings.csv").write_text(tbuf.getvalue())
    sys.stdout.write(buf.getvalue())
    print(f"wrote {out}/compare.csv, compare_timings.csv")
    return worst


COMMANDS = {"generate": cmd_generate, "run": cmd_run, "oracle": cmd_oracle, "compare": cmd_compare}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (InputError, UnknownCase, ModelError, ThresholdExceeded, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BackendFailure as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND


if __name__ == "__main__":
    sys.exit(main())
