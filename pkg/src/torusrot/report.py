"""Deterministic CSV, JSON and SVG output."""

from __future__ import annotations

import enum
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np


def format_number(v) -> str:
    """Numbers for CSV cells: integers verbatim, floats with 17 significant digits."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if v == 0.0:
            return "0"  # folds -0.0 as well
        return f"{v:.17g}"
    return str(v)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_number(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def to_jsonable(obj):
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return repr(v)
        return 0.0 if v == 0.0 else v
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps_json(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps_json(obj), encoding="utf-8", newline="\n")


class SvgPlot:
    """Minimal static plot: scatter clouds, polygons and polylines in data coordinates."""

    COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd")

    def __init__(self, size=480, pad=24):
        self.size = size
        self.pad = pad
        self.items = []

    def scatter(self, pts, color="#888888", radius=1.0, limit=20000):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        if len(pts) > limit:  # deterministic thinning
            pts = pts[:: int(math.ceil(len(pts) / limit))]
        self.items.append(("scatter", pts, color, radius))

    def polygon(self, pts, color=None, closed=True, width=1.5):
        color = color or self.COLORS[len(self.items) % len(self.COLORS)]
        self.items.append(("poly", np.asarray(pts, dtype=float).reshape(-1, 2), color, (closed, width)))

    def polyline(self, pts, color=None, width=1.0):
        self.polygon(pts, color, closed=False, width=width)

    def _bounds(self):
        allpts = np.vstack([it[1] for it in self.items if len(it[1])]) if self.items else np.zeros((1, 2))
        lo, hi = allpts.min(axis=0), allpts.max(axis=0)
        span = max(float((hi - lo).max()), 1e-9)
        center = (lo + hi) / 2.0
        return center - span / 2.0, span

    def render(self) -> str:
        lo, span = self._bounds()
        inner = self.size - 2 * self.pad

        def tx(p):
            x = self.pad + (p[0] - lo[0]) / span * inner
            y = self.size - self.pad - (p[1] - lo[1]) / span * inner
            return f"{x:.3f},{y:.3f}"

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.size}" height="{self.size}"'
            f' viewBox="0 0 {self.size} {self.size}">',
            f'<rect width="{self.size}" height="{self.size}" fill="white"/>',
        ]
        for kind, pts, color, extra in self.items:
            if kind == "scatter":
                for p in pts:
                    cx, cy = tx(p).split(",")
                    out.append(f'<circle cx="{cx}" cy="{cy}" r="{extra}" fill="{color}"/>')
            else:
                closed, width = extra
                tag = "polygon" if closed and len(pts) > 2 else "polyline"
                coords = " ".join(tx(p) for p in pts)
                if len(pts) == 1:
                    cx, cy = tx(pts[0]).split(",")
                    out.append(f'<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>')
                    continue
                out.append(
                    f'<{tag} points="{coords}" fill="none" stroke="{color}" stroke-width="{width}"/>'
                )
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path):
        Path(path).write_text(self.render(), encoding="utf-8", newline="\n")
