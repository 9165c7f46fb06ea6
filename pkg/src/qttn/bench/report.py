"""Time-versus-energy report tables."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .records import BenchmarkRecord

__all__ = ["ReportRow", "build_report", "report_csv", "plot_csv", "report_text", "DEFAULT_EPSILON"]

DEFAULT_EPSILON = 1e-4

CSV_COLUMNS = ["label", "N", "chi", "pattern", "backend", "threads", "skip_ergt", "tiling", "symmetry",
               "final_energy", "energy_above_best", "total_time_s", "speedup"]


@dataclass
class ReportRow:
    label: str
    energy_above_best: float
    total_time_s: float
    speedup: float | None
    final_energy: float
    config: dict


def build_report(records: list[BenchmarkRecord], baseline: str | None = None,
                 epsilon: float = DEFAULT_EPSILON) -> list[ReportRow]:
    """Rows in file order; failed records are left out.

    ``energy_above_best = max(E - E_min, epsilon)`` over the successful
    records and ``speedup = T_baseline / T`` against the record labelled
    ``baseline`` (``KeyError`` if no record carries that label).
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    good = [r for r in records if r.ok and r.final_energy is not None]
    if not good:
        raise ValueError("no successful records to report")
    e_min = min(r.final_energy for r in good)
    t_base = None
    if baseline is not None:
        matches = [r for r in good if r.label == baseline]
        if not matches:
            raise KeyError(baseline)
        t_base = matches[0].total_wall_time_s
    rows = []
    for r in good:
        speedup = None
        if t_base is not None and r.total_wall_time_s > 0:
            speedup = t_base / r.total_wall_time_s
        rows.append(ReportRow(r.label, max(r.final_energy - e_min, epsilon), r.total_wall_time_s, speedup,
                              r.final_energy, r.config))
    return rows


def _fmt(x: float | None, spec: str = ".10g") -> str:
    return "" if x is None else format(x, spec)


def report_csv(rows: list[ReportRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        c = row.config
        w.writerow([row.label, c.get("N"), c.get("chi"), c.get("pattern"), c.get("backend"), c.get("threads"),
                    str(c.get("skip_ergt")).lower(), str(c.get("tiling")).lower(), str(c.get("symmetry")).lower(),
                    _fmt(row.final_energy, ".12g"), _fmt(row.energy_above_best), _fmt(row.total_time_s, ".6g"),
                    _fmt(row.speedup, ".4g")])
    return buf.getvalue()


def plot_csv(rows: list[ReportRow]) -> str:
    """``(time, energy_above_best, marker size = chi)`` per row, for external plotting."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["total_time_s", "energy_above_best", "marker_size", "label"])
    for row in rows:
        w.writerow([_fmt(row.total_time_s, ".6g"), _fmt(row.energy_above_best), row.config.get("chi"), row.label])
    return buf.getvalue()


def report_text(rows: list[ReportRow]) -> str:
    width = max(len("label"), *(len(r.label) for r in rows))
    lines = [f"{'label':<{width}}  {'E - E_min':>12}  {'time [s]':>10}  {'speedup':>8}"]
    for r in rows:
        sp = "" if r.speedup is None else f"{r.speedup:.2f}x"
        lines.append(f"{r.label:<{width}}  {r.energy_above_best:>12.4e}  {r.total_time_s:>10.3f}  {sp:>8}")
    return "\n".join(lines) + "\n"
