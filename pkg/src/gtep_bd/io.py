"""Read and write system files.

System files are JSON with top-level arrays ``buses``, ``corridors``,
``lines``, ``generators``, ``periods`` and a scalar ``voll``.  Hourly series
sit inline in each period, or in a sidecar CSV (``period_id, hour,
series_id, value``) named by the top-level ``series_csv`` key; in that case
each period lists only the series ids under ``demand`` and ``availability``.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import asdict, fields
from pathlib import Path
from typing import Any

import numpy as np

from .model import (
    Bus,
    Corridor,
    GeneratorAsset,
    PlanningSystem,
    RepresentativePeriod,
    TransmissionLine,
)


def _clean(value: float) -> float | int:
    f = float(value)
    return int(f) if f.is_integer() and abs(f) < 2**53 else f


def _series(values) -> list:
    return [_clean(v) for v in np.asarray(values, dtype=float)]


def system_to_dict(system: PlanningSystem, sidecar: str | None = None) -> dict[str, Any]:
    lines = []
    for ln in system.lines:
        d = asdict(ln)
        d["corridor"] = list(ln.corridor)
        lines.append(d)
    periods = []
    for p in system.periods:
        entry: dict[str, Any] = {"id": p.id, "hours": p.hours, "weight": p.weight}
        if sidecar:
            entry["demand"] = list(p.demand)
            entry["availability"] = list(p.availability)
        else:
            entry["demand"] = {k: _series(v) for k, v in p.demand.items()}
            entry["availability"] = {k: _series(v) for k, v in p.availability.items()}
        periods.append(entry)
    out: dict[str, Any] = {
        "name": system.name,
        "voll": system.voll,
        "base_mva": system.base_mva,
        "buses": [asdict(b) for b in system.buses],
        "corridors": [asdict(c) for c in system.corridors],
        "lines": lines,
        "generators": [asdict(g) for g in system.generators],
        "periods": periods,
    }
    if sidecar:
        out["series_csv"] = sidecar
    return out


def _pick(cls, data: dict) -> dict:
    names = {f.name for f in fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ValueError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    return dict(data)


def system_from_dict(data: dict[str, Any], base_dir: Path | None = None) -> PlanningSystem:
    sidecar_values: dict[tuple[str, str], dict[int, float]] = defaultdict(dict)
    if data.get("series_csv"):
        path = Path(data["series_csv"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                sidecar_values[(row["period_id"], row["series_id"])][int(row["hour"])] = float(row["value"])

    def series(period_id: str, spec) -> dict[str, np.ndarray]:
        if isinstance(spec, dict):
            return {k: np.asarray(v, dtype=float) for k, v in spec.items()}
        out = {}
        for sid in spec or []:
            vals = sidecar_values[(period_id, sid)]
            out[sid] = np.array([vals[h] for h in sorted(vals)], dtype=float)
        return out

    lines = []
    for d in data.get("lines", []):
        d = _pick(TransmissionLine, d)
        d["corridor"] = tuple(d["corridor"])
        lines.append(TransmissionLine(**d))
    periods = []
    for d in data.get("periods", []):
        pid = str(d["id"])
        periods.append(RepresentativePeriod(
            id=pid,
            hours=int(d["hours"]),
            weight=float(d["weight"]),
            demand=series(pid, d.get("demand", {})),
            availability=series(pid, d.get("availability", {})),
        ))
    return PlanningSystem(
        buses=tuple(Bus(**_pick(Bus, b)) for b in data.get("buses", [])),
        corridors=tuple(Corridor(**_pick(Corridor, c)) for c in data.get("corridors", [])),
        lines=tuple(lines),
        generators=tuple(GeneratorAsset(**_pick(GeneratorAsset, g)) for g in data.get("generators", [])),
        periods=tuple(periods),
        voll=float(data.get("voll", 5000.0)),
        base_mva=float(data.get("base_mva", 100.0)),
        name=str(data.get("name", "system")),
    )


def dumps_system(system: PlanningSystem) -> str:
    return json.dumps(system_to_dict(system), indent=1, sort_keys=False) + "\n"


def save_system(system: PlanningSystem, path: str | Path, sidecar: bool = False) -> None:
    path = Path(path)
    if not sidecar:
        path.write_text(dumps_system(system))
        return
    csv_name = path.with_suffix(".series.csv").name
    with open(path.parent / csv_name, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["period_id", "hour", "series_id", "value"])
        for p in system.periods:
            for sid, vals in list(p.demand.items()) + list(p.availability.items()):
                for h, v in enumerate(np.asarray(vals, dtype=float)):
                    w.writerow([p.id, h, sid, repr(float(v))])
    path.write_text(json.dumps(system_to_dict(system, sidecar=csv_name), indent=1) + "\n")


def load_system(path: str | Path) -> PlanningSystem:
    path = Path(path)
    with open(path) as fh:
        data = json.load(fh)
    return system_from_dict(data, base_dir=path.parent)
