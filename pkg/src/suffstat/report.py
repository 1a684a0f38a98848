"""Deterministic report files: CSV records, JSON summaries, SVG plots.

Floats are written with 12 significant digits everywhere so repeated runs
produce byte-identical files.
"""

from __future__ import annotations

import json
import math
from html import escape
from pathlib import Path
from typing import Iterable, Sequence

FLOAT_FORMAT = "{:.12g}"
R2_FORMAT = "{:.4f}"


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return FLOAT_FORMAT.format(value)
    return str(value)


def _canonical(obj):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return float(FLOAT_FORMAT.format(obj))
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalars
        return _canonical(obj.item())
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_canonical(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps_json(obj), encoding="utf-8")
    return path


def csv_text(columns: Sequence[str], rows: Iterable[dict]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        cells = []
        for c in columns:
            cell = fmt(row.get(c))
            if any(ch in cell for ch in ',"\n'):
                cell = '"' + cell.replace('"', '""') + '"'
            cells.append(cell)
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    path.write_text(csv_text(columns, rows), encoding="utf-8")
    return path


# -- SVG ---------------------------------------------------------------------

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 40, 55


def _nice_range(lo, hi):
    if lo == hi:
        pad = abs(lo) * 0.1 or 1.0
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


class _Frame:
    def __init__(self, xs, ys):
        self.x0, self.x1 = _nice_range(min(xs), max(xs))
        self.y0, self.y1 = _nice_range(min(ys), max(ys))
        self.pw = WIDTH - MARGIN_L - MARGIN_R
        self.ph = HEIGHT - MARGIN_T - MARGIN_B

    def px(self, x):
        return MARGIN_L + (x - self.x0) / (self.x1 - self.x0) * self.pw

    def py(self, y):
        return MARGIN_T + (1.0 - (y - self.y0) / (self.y1 - self.y0)) * self.ph


def _p(v) -> str:
    return f"{v:.2f}"


def _axes(frame: _Frame, title, xlabel, ylabel) -> list[str]:
    out = [
        f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{frame.pw}" height="{frame.ph}" fill="none" stroke="#333"/>',
    ]
    for t in _ticks(frame.x0, frame.x1):
        x = frame.px(t)
        out.append(f'<line x1="{_p(x)}" y1="{MARGIN_T + frame.ph}" x2="{_p(x)}" y2="{MARGIN_T + frame.ph + 5}" stroke="#333"/>')
        out.append(f'<text x="{_p(x)}" y="{MARGIN_T + frame.ph + 18}" text-anchor="middle" font-size="11">{t:.3g}</text>')
    for t in _ticks(frame.y0, frame.y1):
        y = frame.py(t)
        out.append(f'<line x1="{MARGIN_L - 5}" y1="{_p(y)}" x2="{MARGIN_L}" y2="{_p(y)}" stroke="#333"/>')
        out.append(f'<text x="{MARGIN_L - 8}" y="{_p(y + 4)}" text-anchor="end" font-size="11">{t:.3g}</text>')
    out.append(f'<text x="{MARGIN_L + frame.pw / 2:.0f}" y="{HEIGHT - 12}" text-anchor="middle" font-size="13">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{MARGIN_T + frame.ph / 2:.0f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {MARGIN_T + frame.ph / 2:.0f})">{escape(ylabel)}</text>'
    )
    return out


def _doc(body: list[str], attrs: str = "") -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}"{attrs}>'
    )
    return "\n".join([head, f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>', *body, "</svg>"]) + "\n"


def scatter_svg(xs, ys, slope, intercept, r_squared, title, xlabel, ylabel) -> str:
    """Scatter plot with the least-squares line and an R^2 annotation.

    The exact R^2 is embedded as ``data-r-squared`` on the root element.
    """
    if not xs:
        raise ValueError("nothing to plot")
    frame = _Frame(xs, ys)
    body = _axes(frame, title, xlabel, ylabel)
    for x, y in zip(xs, ys):
        body.append(f'<circle cx="{_p(frame.px(x))}" cy="{_p(frame.py(y))}" r="3" fill="#1f77b4" fill-opacity="0.7"/>')
    lx0, lx1 = frame.x0, frame.x1
    body.append(
        f'<line x1="{_p(frame.px(lx0))}" y1="{_p(frame.py(intercept + slope * lx0))}" '
        f'x2="{_p(frame.px(lx1))}" y2="{_p(frame.py(intercept + slope * lx1))}" '
        f'stroke="#d62728" stroke-width="1.5" clip-path="url(#plot)"/>'
    )
    body.insert(
        0,
        f'<defs><clipPath id="plot"><rect x="{MARGIN_L}" y="{MARGIN_T}" width="{frame.pw}" height="{frame.ph}"/></clipPath></defs>',
    )
    body.append(
        f'<text x="{WIDTH - MARGIN_R - 8}" y="{MARGIN_T + 18}" text-anchor="end" font-size="13">'
        f"R² = {R2_FORMAT.format(r_squared)}</text>"
    )
    return _doc(body, f' data-r-squared="{fmt(float(r_squared))}"')


def curve_svg(n_train, train_err, valid_err, title) -> str:
    """Training and validation error against training-set size."""
    xs = [float(v) for v in n_train]
    frame = _Frame(xs, list(train_err) + list(valid_err) + [0.0])
    body = _axes(frame, title, "training rows", "error rate")
    for series, colour, name in ((train_err, "#2ca02c", "train"), (valid_err, "#d62728", "validation")):
        pts = " ".join(f"{_p(frame.px(x))},{_p(frame.py(y))}" for x, y in zip(xs, series))
        body.append(f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="1.5"/>')
        for x, y in zip(xs, series):
            body.append(f'<circle cx="{_p(frame.px(x))}" cy="{_p(frame.py(y))}" r="2.5" fill="{colour}"/>')
    body.append(f'<text x="{WIDTH - MARGIN_R - 8}" y="{MARGIN_T + 18}" text-anchor="end" font-size="12" fill="#2ca02c">train</text>')
    body.append(f'<text x="{WIDTH - MARGIN_R - 8}" y="{MARGIN_T + 34}" text-anchor="end" font-size="12" fill="#d62728">validation</text>')
    return _doc(body)
