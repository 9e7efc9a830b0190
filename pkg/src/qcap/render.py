"""Publication-style SVG line charts from sweep CSV files.

Self-contained SVG 1.1 output with a fixed 800x500 viewBox and 10%
margins so that identical inputs give byte-identical files.  Empty or
NaN cells break a polyline into separate runs instead of interpolating;
runs of a single point are drawn as markers.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

VIEW_W, VIEW_H = 800.0, 500.0
MARGIN_X, MARGIN_Y = 0.1 * VIEW_W, 0.1 * VIEW_H

STYLES = {"solid": None, "dotted": "2,5", "dashed": "9,6"}
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")


@dataclass(frozen=True)
class Series:
    column: str
    style: str
    label: str

    def __post_init__(self):
        if self.style not in STYLES:
            raise ValueError(
                f"unknown line style {self.style!r}; choose from {sorted(STYLES)}")


@dataclass(frozen=True)
class ChartSpec:
    csv_path: str
    x_column: str
    series: tuple[Series, ...]
    x_label: str
    y_label: str
    y_range: tuple[float, float]
    out_path: str

    def __post_init__(self):
        lo, hi = self.y_range
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError(f"y range must be finite with min < max, got {self.y_range}")


def _parse_cell(text: str, column: str, line_no: int) -> Optional[float]:
    text = text.strip()
    if text == "":
        return None
    try:
        value = float(text)
    except ValueError:
        raise ValueError(
            f"non-numeric value {text!r} in column {column!r} at CSV line {line_no}"
        ) from None
    return value if math.isfinite(value) else None


def read_columns(csv_path: str, columns: Sequence[str]) -> dict[str, list[Optional[float]]]:
    """Read the requested columns; empty/NaN cells become None."""
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in columns:
            if col not in header:
                raise ValueError(f"column {col!r} not found in {csv_path} "
                                 f"(header: {', '.join(header)})")
        data: dict[str, list[Optional[float]]] = {col: [] for col in columns}
        for line_no, row in enumerate(reader, start=2):
            for col in columns:
                data[col].append(_parse_cell(row[col] or "", col, line_no))
    return data


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    span = hi - lo
    raw = span / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * span:
        ticks.append(0.0 if abs(t) < step * 1e-9 else t)
        t += step
    return ticks


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def _runs(points: list[tuple[Optional[float], Optional[float]]]):
    """Split into maximal runs of consecutive finite points."""
    run: list[tuple[float, float]] = []
    for x, y in points:
        if x is None or y is None:
            if run:
                yield run
                run = []
        else:
            run.append((x, y))
    if run:
        yield run


def render_svg(spec: ChartSpec) -> str:
    """Build the chart as an SVG string (pure function of the CSV data)."""
    columns = [spec.x_column] + [s.column for s in spec.series]
    data = read_columns(spec.csv_path, columns)
    xs = data[spec.x_column]
    finite_x = [x for x in xs if x is not None]
    if not finite_x:
        raise ValueError(f"column {spec.x_column!r} holds no numeric data")
    x_lo, x_hi = min(finite_x), max(finite_x)
    if x_hi - x_lo < 1e-300:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    y_lo, y_hi = spec.y_range

    px_lo, px_hi = MARGIN_X, VIEW_W - MARGIN_X
    py_lo, py_hi = VIEW_H - MARGIN_Y, MARGIN_Y  # y axis points up

    def sx(x: float) -> float:
        return px_lo + (x - x_lo) / (x_hi - x_lo) * (px_hi - px_lo)

    def sy(y: float) -> float:
        return py_lo + (y - y_lo) / (y_hi - y_lo) * (py_hi - py_lo)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="0 0 {VIEW_W:g} {VIEW_H:g}">',
        f'<rect x="0" y="0" width="{VIEW_W:g}" height="{VIEW_H:g}" fill="white"/>',
        f'<rect x="{px_lo:.2f}" y="{py_hi:.2f}" width="{px_hi - px_lo:.2f}" '
        f'height="{py_lo - py_hi:.2f}" fill="none" stroke="black" stroke-width="1"/>',
    ]

    for t in _nice_ticks(x_lo, x_hi):
        x = sx(t)
        parts.append(f'<line x1="{x:.2f}" y1="{py_lo:.2f}" x2="{x:.2f}" '
                     f'y2="{py_lo + 6:.2f}" stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{x:.2f}" y="{py_lo + 20:.2f}" font-size="12" '
                     f'text-anchor="middle" font-family="sans-serif">{_fmt(t)}</text>')
    for t in _nice_ticks(y_lo, y_hi):
        y = sy(t)
        parts.append(f'<line x1="{px_lo - 6:.2f}" y1="{y:.2f}" x2="{px_lo:.2f}" '
                     f'y2="{y:.2f}" stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{px_lo - 10:.2f}" y="{y + 4:.2f}" font-size="12" '
                     f'text-anchor="end" font-family="sans-serif">{_fmt(t)}</text>')

    parts.append(f'<text x="{(px_lo + px_hi) / 2:.2f}" y="{VIEW_H - 8:.2f}" '
                 f'font-size="14" text-anchor="middle" '
                 f'font-family="sans-serif">{spec.x_label}</text>')
    parts.append(f'<text x="16" y="{(py_lo + py_hi) / 2:.2f}" font-size="14" '
                 f'text-anchor="middle" font-family="sans-serif" '
                 f'transform="rotate(-90 16 {(py_lo + py_hi) / 2:.2f})">'
                 f'{spec.y_label}</text>')

    for idx, series in enumerate(spec.series):
        color = PALETTE[idx % len(PALETTE)]
        dash = STYLES[series.style]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        points = list(zip(xs, data[series.column]))
        for run in _runs(points):
            coords = [(sx(x), sy(min(max(y, y_lo), y_hi))) for x, y in run]
            if len(coords) == 1:
                cx, cy = coords[0]
                parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="3" '
                             f'fill="{color}"/>')
            else:
                path = " ".join(f"{cx:.2f},{cy:.2f}" for cx, cy in coords)
                parts.append(f'<polyline points="{path}" fill="none" '
                             f'stroke="{color}" stroke-width="1.5"{dash_attr}/>')

    legend_x = px_hi - 170.0
    legend_y = py_hi + 14.0
    for idx, series in enumerate(spec.series):
        color = PALETTE[idx % len(PALETTE)]
        dash = STYLES[series.style]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        y = legend_y + 18.0 * idx
        parts.append(f'<line x1="{legend_x:.2f}" y1="{y:.2f}" '
                     f'x2="{legend_x + 30:.2f}" y2="{y:.2f}" stroke="{color}" '
                     f'stroke-width="1.5"{dash_attr}/>')
        parts.append(f'<text x="{legend_x + 36:.2f}" y="{y + 4:.2f}" font-size="12" '
                     f'font-family="sans-serif">{series.label}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_chart(spec: ChartSpec) -> None:
    """Render and write the SVG file."""
    svg = render_svg(spec)
    with open(spec.out_path, "w", newline="\n") as fh:
        fh.write(svg)


def preset_spec(name: str, csv_path: str, out_path: str) -> ChartSpec:
    """Chart presets for the two standard sweep figures."""
    series = (
        Series("c_lower", "solid", "lower bound"),
        Series("c_upper", "solid", "upper bound"),
        Series("c_chi", "dotted", "chi capacity"),
    )
    if name == "fig1":
        return ChartSpec(csv_path, "x", series, "gamma t", "capacity (bits)",
                         (0.0, 1.0), out_path)
    if name == "fig2":
        return ChartSpec(csv_path, "x", series, "p", "capacity (bits)",
                         (0.0, 1.0), out_path)
    raise ValueError(f"unknown preset {name!r}; choose fig1 or fig2")
