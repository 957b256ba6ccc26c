"""Reading problems and writing results."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import CountMismatch, ParseError
from .geometry import AngleSpline, InterpolationProblem, sample_segments
from .pipeline import RunReport, RunRequest
from .quadrature import QuadratureConfig
from .results import BranchResult

FORMATS = ("csv", "json")
# sampling resolution floor for the curve files
SAMPLE_SUBINTERVALS = 64


def parse_problem(text: str, fmt: str) -> InterpolationProblem:
    """Build a problem from CSV rows ``t,x,y`` or JSON ``{"times", "points"}``.

    A non-numeric first CSV row is taken as a header.  Raises ``ParseError``
    on malformed text and the problem errors (``NonMonotoneTimes``,
    ``CountMismatch``) on well-formed but unusable data.
    """
    if fmt == "csv":
        times, points = _parse_csv(text)
    elif fmt == "json":
        times, points = _parse_json(text)
    else:
        raise ValueError(f"format must be one of {FORMATS}")
    return InterpolationProblem(times, points)


def _number(raw: str, line: int, name: str) -> float:
    try:
        x = float(raw)
    except ValueError:
        raise ParseError(f"not a number: {raw.strip()!r}", line=line, field=name) from None
    if not math.isfinite(x):
        raise ParseError("non-finite value", line=line, field=name)
    return x


def _parse_csv(text: str):
    times, points = [], []
    names = ("t", "x", "y")
    rows = csv.reader(io.StringIO(text.lstrip("\ufeff"), newline=""))
    first = True
    for lineno, row in enumerate(rows, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, found {len(row)}", line=lineno)
        if first:
            first = False
            try:
                float(row[0])
            except ValueError:
                continue
        t, x, y = (_number(cell, lineno, name) for cell, name in zip(row, names))
        times.append(t)
        points.append((x, y))
    return times, points


def _parse_json(text: str):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(obj, dict):
        raise ParseError("top level must be an object")
    for key in ("times", "points"):
        if key not in obj or not isinstance(obj[key], list):
            raise ParseError("missing or non-list entry", field=key)
    times = [_json_number(t, f"times[{i}]") for i, t in enumerate(obj["times"])]
    points = []
    for i, pt in enumerate(obj["points"]):
        if not isinstance(pt, list) or len(pt) != 2:
            raise ParseError("point must be a pair [x, y]", field=f"points[{i}]")
        points.append(tuple(_json_number(v, f"points[{i}]") for v in pt))
    if len(times) != len(points):
        raise CountMismatch(f"{len(times)} times but {len(points)} points")
    return times, points


def _json_number(v, name: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ParseError("expected a finite number", field=name)
    return float(v)


def load_problem(path, fmt: str | None = None) -> InterpolationProblem:
    path = Path(path)
    fmt = fmt or ("json" if path.suffix.lower() == ".json" else "csv")
    return parse_problem(path.read_text(encoding="utf-8"), fmt)


# output


def _json(obj, indent: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if all(not isinstance(x, (dict, list, tuple, np.ndarray)) for x in seq):
            return "[" + ", ".join(_json(x) for x in seq) + "]"
        return "[\n" + ",\n".join(pad + _json(x, indent + 1) for x in seq) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return f"{x:.17g}" if math.isfinite(x) else "null"
    return json.dumps(str(obj))


def _sig4(x) -> str:
    return "" if x is None or not math.isfinite(x) else f"{x:.4g}"


def sigma_label(sigma) -> str:
    return "(" + ",".join(f"{s:+d}" for s in sigma) + ")"


def _stage(br: BranchResult) -> str:
    if br.optimized is not None:
        return "optimize"
    if br.refined is not None:
        return "refine"
    return "estimate"


def spline_record(spline: AngleSpline) -> dict:
    rec = {
        "knots": spline.knots,
        "origin": spline.origin,
        "a": spline.a,
        "b": spline.b,
        "c": spline.c,
        "d": spline.d,
    }
    if spline.extension is not None:
        rec["extension"] = {"family": spline.extension.family.tag, "p": spline.extension.p}
    return rec


def branch_record(br: BranchResult) -> dict:
    rec = {
        "index": br.index,
        "sigma": list(br.sigma),
        "stage": _stage(br),
        "status": "ok" if br.ok else br.error_kind,
        "estimate_energy": br.estimate_energy,
        "refined_energy": br.refined_energy,
        "optimized_energy": br.optimized_energy,
        "residual": br.residual,
        "iterations": br.iterations,
        "subintervals": br.subintervals,
    }
    if not br.ok:
        rec["error"] = br.error
    if br.final is not None:
        rec["spline"] = spline_record(br.final)
    return rec


def _curve_rows(br: BranchResult, report: RunReport) -> dict[str, np.ndarray]:
    m = max(br.subintervals, SAMPLE_SUBINTERVALS)
    return sample_segments(br.final, report.request.problem, report.request.sample_count, QuadratureConfig(m, m))


def curve_csv(samples: dict[str, np.ndarray]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["segment", "t", "x", "y", "tilde_x", "tilde_y"])
    for j, t, (x, y), (tx, ty) in zip(samples["segment"], samples["t"], samples["y"], samples["tilde"]):
        w.writerow([int(j) + 1] + [f"{v:.17g}" for v in (t, x, y, tx, ty)])
    return buf.getvalue()


def summary_csv(report: RunReport) -> str:
    """One row per branch in index order, energies to 4 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "sigma", "estimate_energy", "refined_energy", "optimized_energy", "residual", "status"])
    for br in sorted(report.branches, key=lambda b: b.index):
        w.writerow([
            br.index,
            sigma_label(br.sigma),
            _sig4(br.estimate_energy),
            _sig4(br.refined_energy),
            _sig4(br.optimized_energy),
            "" if br.residual is None else f"{br.residual:.3g}",
            "ok" if br.ok else br.error_kind,
        ])
    return buf.getvalue()


def ranking_table(report: RunReport) -> str:
    """Plain-text ranking: successes by energy, then failures."""
    lines = [f"{'rank':>4}  {'p':>4}  {'sigma':<{3 * report.request.problem.n + 2}}  {'energy':>10}  stage"]
    for r, br in enumerate(report.rows, start=1):
        lines.append(f"{r:>4}  {br.index:>4}  {sigma_label(br.sigma):<{3 * len(br.sigma) + 2}}  {br.energy:>10.4g}  {_stage(br)}")
    for br in report.failures:
        lines.append(f"{'-':>4}  {br.index:>4}  {sigma_label(br.sigma):<{3 * len(br.sigma) + 2}}  {'failed':>10}  {br.error_kind}")
    return "\n".join(lines)


def curve_svg(samples: dict[str, np.ndarray], problem: InterpolationProblem, size: int = 480) -> str:
    """Polyline plot of y (solid) and its re-anchored twin (dashed) with waypoints."""
    pts = np.vstack([samples["y"], samples["tilde"], problem.waypoints])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = max(float((hi - lo).max()), 1e-12)
    margin = 20.0
    scale = (size - 2 * margin) / span

    def xy(p):
        # SVG y grows downwards
        return margin + (p[0] - lo[0]) * scale, size - margin - (p[1] - lo[1]) * scale

    def polyline(arr, style):
        coords = " ".join("{:.3f},{:.3f}".format(*xy(p)) for p in arr)
        return f'  <polyline fill="none" {style} points="{coords}"/>'

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'  <rect width="{size}" height="{size}" fill="white"/>',
    ]
    seg = samples["segment"]
    for j in np.unique(seg):
        out.append(polyline(samples["tilde"][seg == j], 'stroke="#d62728" stroke-width="1" stroke-dasharray="4 3"'))
    out.append(polyline(samples["y"], 'stroke="#1f77b4" stroke-width="1.5"'))
    for p in problem.waypoints:
        out.append('  <circle cx="{:.3f}" cy="{:.3f}" r="3" fill="black"/>'.format(*xy(p)))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_outputs(report: RunReport, request: RunRequest, out_dir) -> list[Path]:
    """Write per-branch JSON/CSV (and SVG), plus summary.csv; returns the paths.

    File contents depend only on the computed results, never on timings.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def write(name: str, text: str):
        path = out / name
        path.write_text(text, encoding="utf-8", newline="\n")
        written.append(path)

    width = len(str(2**request.problem.n))
    for br in sorted(report.branches, key=lambda b: b.index):
        stem = f"branch_{br.index:0{width}d}"
        write(stem + ".json", _json(branch_record(br)) + "\n")
        if br.final is None:
            continue
        samples = _curve_rows(br, report)
        write(stem + ".csv", curve_csv(samples))
        if request.svg:
            write(stem + ".svg", curve_svg(samples, request.problem))
    write("summary.csv", summary_csv(report))
    return written
