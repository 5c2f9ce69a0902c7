"""Convergence plots: upper and lower bounds against wall time."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .benders import BendersTrace, report_bounds  # noqa: E402

# fixed salt and no timestamp keep the SVG text stable for identical data
_SVG_RC = {"svg.hashsalt": "gtep-bd", "svg.fonttype": "path"}


def plot_convergence(trace: BendersTrace, path: str | Path, title: str | None = None) -> Path:
    path = Path(path)
    t = [r.wall_seconds for r in trace.records]
    upper = [r.upper_bound if math.isfinite(r.upper_bound) else math.nan for r in trace.records]
    lower = [r.lower_bound if math.isfinite(r.lower_bound) else math.nan for r in trace.records]

    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        ax.step(t, upper, where="post", color="tab:red", label="upper bound U")
        ax.step(t, lower, where="post", color="tab:blue", label="lower bound L")
        if trace.transport_bound is not None:
            ax.axhline(trace.transport_bound, color="0.4", ls="--", lw=1, label="transport bound")
        # stage boundaries
        for prev, rec in zip(trace.records, trace.records[1:]):
            if rec.stage != prev.stage:
                ax.axvline(rec.wall_seconds, color="0.85", lw=0.8, zorder=0)
        if trace.records and math.isfinite(trace.incumbent_value):
            try:
                rep = report_bounds(trace)
                note = f"final gap {100 * rep.certified_gap:.3g}%"
                if rep.transport_gap is not None:
                    note += f"\ntransport gap {100 * rep.transport_gap:.3g}%"
            except ValueError:
                note = None
            if note:
                ax.annotate(note, xy=(0.98, 0.3), xycoords="axes fraction", ha="right", va="bottom", fontsize=8)
        ax.set_xlabel("wall time [s]")
        ax.set_ylabel("total cost [$/yr]")
        ax.set_title(title or f"{trace.method.upper()} {trace.preset or 'custom'}")
        ax.legend(loc="lower right", fontsize=8)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
