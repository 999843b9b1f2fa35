"""CSV and SVG serialization of threshold grids.

Reals are printed with 17 significant digits so a written grid re-parses
bit-exactly.  The SVG is self-contained (one rectangle per cell, no
external assets) and byte-deterministic for a given grid.
"""

from __future__ import annotations

import io
from typing import Optional

import numpy as np

from .estimators import DeltaGrid

_CSV_HEADER = "z1,z2,delta,std_error,n"

# diverging anchors: blue for negative, white at zero, red for positive
_NEG = (33, 102, 172)
_MID = (255, 255, 255)
_POS = (178, 24, 43)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def grid_csv_text(grid: DeltaGrid) -> str:
    """CSV document: one row per cell, z1-major ascending."""
    out = io.StringIO()
    out.write(_CSV_HEADER + "\n")
    for a, z1 in enumerate(grid.z1_values):
        for b, z2 in enumerate(grid.z2_values):
            out.write(
                f"{_fmt(z1)},{_fmt(z2)},{_fmt(grid.value[a, b])},"
                f"{_fmt(grid.std_error[a, b])},{grid.n}\n"
            )
    return out.getvalue()


def write_grid_csv(grid: DeltaGrid, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(grid_csv_text(grid))


def parse_grid_csv(text: str) -> DeltaGrid:
    """Rebuild a grid from its CSV form; exact inverse of grid_csv_text.

    Tail and combo labels are not stored in the CSV, so the parsed grid
    carries the defaults.
    """
    lines = text.strip().split("\n")
    if not lines or lines[0] != _CSV_HEADER:
        raise ValueError(f"expected header {_CSV_HEADER!r}")
    rows = [line.split(",") for line in lines[1:]]
    if not rows:
        raise ValueError("no data rows")
    z1 = sorted({float(r[0]) for r in rows})
    z2 = sorted({float(r[1]) for r in rows})
    g1, g2 = len(z1), len(z2)
    if len(rows) != g1 * g2:
        raise ValueError("row count does not fill the grid")
    value = np.empty((g1, g2))
    se = np.empty((g1, g2))
    n = int(rows[0][4])
    index1 = {v: i for i, v in enumerate(z1)}
    index2 = {v: i for i, v in enumerate(z2)}
    for r in rows:
        a, b = index1[float(r[0])], index2[float(r[1])]
        value[a, b] = float(r[2])
        se[a, b] = float(r[3])
    return DeltaGrid(np.array(z1), np.array(z2), value, se, n)


def read_grid_csv(path) -> DeltaGrid:
    with open(path) as fh:
        return parse_grid_csv(fh.read())


def _cell_color(value: float, limit: float) -> str:
    t = 0.0 if limit <= 0 else float(np.clip(value / limit, -1.0, 1.0))
    anchor = _POS if t >= 0 else _NEG
    t = abs(t)
    rgb = tuple(round(m + t * (a - m)) for m, a in zip(_MID, anchor))
    return "#%02x%02x%02x" % rgb


def heatmap_svg_text(grid: DeltaGrid, color_limit: Optional[float] = None) -> str:
    """Self-contained SVG heatmap of the grid.

    White is pinned at zero and the color limits are symmetric at the
    grid's max absolute value unless ``color_limit`` pins a shared scale.
    """
    g1, g2 = grid.value.shape
    limit = color_limit if color_limit is not None else float(np.abs(grid.value).max())
    plot = 420.0
    left, top, right, bottom = 58.0, 16.0, 16.0, 48.0
    width = left + plot + right
    height = top + plot + bottom
    cw, ch = plot / g1, plot / g2

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>\n',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}">\n',
        f'<rect x="0" y="0" width="{width:.0f}" height="{height:.0f}" fill="#ffffff"/>\n',
    ]
    for a in range(g1):
        for b in range(g2):
            x = left + a * cw
            y = top + (g2 - 1 - b) * ch  # z2 increases upward
            color = _cell_color(float(grid.value[a, b]), limit)
            parts.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{cw + 0.5:.2f}" '
                f'height="{ch + 0.5:.2f}" fill="{color}"/>\n'
            )
    style = 'font-family="sans-serif" font-size="13" fill="#000000"'
    ticks1 = [(0, grid.z1_values[0]), (g1 - 1, grid.z1_values[-1])]
    ticks2 = [(0, grid.z2_values[0]), (g2 - 1, grid.z2_values[-1])]
    for a, val in ticks1:
        x = left + (a + 0.5) * cw
        parts.append(
            f'<text x="{x:.2f}" y="{top + plot + 18:.2f}" text-anchor="middle" '
            f'{style}>{val:.2g}</text>\n'
        )
    for b, val in ticks2:
        y = top + (g2 - 0.5 - b) * ch
        parts.append(
            f'<text x="{left - 6:.2f}" y="{y + 4:.2f}" text-anchor="end" '
            f'{style}>{val:.2g}</text>\n'
        )
    parts.append(
        f'<text x="{left + plot / 2:.2f}" y="{height - 10:.2f}" '
        f'text-anchor="middle" {style}>z1</text>\n'
    )
    parts.append(
        f'<text x="16" y="{top + plot / 2:.2f}" text-anchor="middle" {style} '
        f'transform="rotate(-90 16 {top + plot / 2:.2f})">z2</text>\n'
    )
    parts.append("</svg>\n")
    return "".join(parts)


def render_heatmap(grid: DeltaGrid, path, color_limit: Optional[float] = None) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(heatmap_svg_text(grid, color_limit))
