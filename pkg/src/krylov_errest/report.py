"""CSV tables and SVG convergence plots for convergence traces."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence
from xml.sax.saxutils import escape

from .estimates import ConvergenceRecord

__all__ = ["TRACE_COLUMNS", "BOUND_COLUMNS", "format_value", "write_trace_csv",
           "read_trace_csv", "write_svg", "PLOT_FLOOR"]

TRACE_COLUMNS = ("step", "xi1_rel", "xi2_rel", "true_rel", "wall_ms")
BOUND_COLUMNS = ("bound41", "bound42", "bound43", "bound44",
                 "gamma1", "gamma2", "gamma3", "mu2", "true_err")
PLOT_FLOOR = 1e-16


def format_value(x: Optional[float]) -> str:
    """Scientific notation with 10 significant digits; empty for missing."""
    if x is None:
        return ""
    return f"{float(x) + 0.0:.9e}"


def _bound_cells(rec: ConvergenceRecord) -> list[str]:
    b = rec.bounds
    if b is None:
        return [""] * len(BOUND_COLUMNS)
    values = (b.bound_41, b.bound_42, b.bound_43, b.bound_44,
              b.gamma1, b.gamma2, b.gamma3, b.mu2, rec.true_abs)
    return [format_value(v) for v in values]


def write_trace_csv(records: Sequence[ConvergenceRecord], path, with_bounds: bool = False) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = TRACE_COLUMNS + (BOUND_COLUMNS if with_bounds else ())
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in records:
            row = [str(r.step), format_value(r.xi1_rel), format_value(r.xi2_rel),
                   format_value(r.true_rel), format_value(r.wall_ms)]
            if with_bounds:
                row += _bound_cells(r)
            w.writerow(row)
    return path


def read_trace_csv(path) -> list[dict]:
    """Rows as dicts with floats (``None`` for empty cells, int ``step``)."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append({k: (int(v) if k == "step" else (float(v) if v else None))
                        for k, v in row.items()})
    return out


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def write_svg(series: dict[str, Iterable[tuple[float, Optional[float]]]], path,
              title: str = "", xlabel: str = "m", ylabel: str = "relative error",
              width: int = 640, height: int = 420) -> Path:
    """Log-scale line plot of named ``(x, y)`` series.

    Values below ``PLOT_FLOOR`` are clipped to it; missing or non-finite
    values break the line.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    clean = {}
    for name, pts in series.items():
        clean[name] = [(float(x), None if y is None or not math.isfinite(y) else max(float(y), PLOT_FLOOR))
                       for x, y in pts]
    xs = [x for pts in clean.values() for x, _ in pts]
    ys = [y for pts in clean.values() for _, y in pts if y is not None]
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1
    lo = math.floor(math.log10(min(ys))) if ys else -16
    hi = math.ceil(math.log10(max(ys))) if ys else 0
    if hi == lo:
        hi = lo + 1
    left, right, top, bottom = 70, 20, 30, 50
    pw, ph = width - left - right, height - top - bottom

    def sx(x):
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return top + (hi - math.log10(y)) / (hi - lo) * ph

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
             f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    step = max(1, (hi - lo) // 8)
    for e in range(lo, hi + 1, step):
        y = sy(10.0**e)
        parts.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" '
                     f'stroke="#dddddd"/>')
        parts.append(f'<text x="{left - 6}" y="{y + 4:.2f}" font-size="11" '
                     f'text-anchor="end">1e{e}</text>')
    for k in range(6):
        xv = x0 + k * (x1 - x0) / 5
        parts.append(f'<text x="{sx(xv):.2f}" y="{top + ph + 16}" font-size="11" '
                     f'text-anchor="middle">{xv:g}</text>')
    parts.append(f'<text x="{left + pw / 2}" y="{height - 10}" font-size="12" '
                 f'text-anchor="middle">{escape(xlabel)}</text>')
    parts.append(f'<text x="14" y="{top + ph / 2}" font-size="12" text-anchor="middle" '
                 f'transform="rotate(-90 14 {top + ph / 2})">{escape(ylabel)}</text>')
    if title:
        parts.append(f'<text x="{left + pw / 2}" y="18" font-size="13" '
                     f'text-anchor="middle">{escape(title)}</text>')
    for i, (name, pts) in enumerate(clean.items()):
        color = _COLORS[i % len(_COLORS)]
        run: list[str] = []
        runs = []
        for x, y in pts:
            if y is None:
                if run:
                    runs.append(run)
                run = []
            else:
                run.append(f"{sx(x):.2f},{sy(y):.2f}")
        if run:
            runs.append(run)
        for r in runs:
            parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                         f'points="{" ".join(r)}"/>')
        ly = top + 16 + 16 * i
        parts.append(f'<line x1="{left + pw - 110}" y1="{ly - 4}" x2="{left + pw - 90}" '
                     f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{left + pw - 84}" y="{ly}" font-size="11">{escape(name)}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")
    return path
