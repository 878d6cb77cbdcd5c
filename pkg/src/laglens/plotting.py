"""Plot-ready output: gnuplot ``.dat`` files and a minimal standalone SVG."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .dde import fmt

_COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728")


def write_dat(path: str | Path, columns: Sequence[str], *data) -> Path:
    """Whitespace-separated columns with a ``#`` header line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = [np.asarray(d) for d in data]
    with path.open("w") as fh:
        fh.write("# " + " ".join(columns) + "\n")
        for row in zip(*arrays):
            fh.write(" ".join(fmt(float(v)) for v in row) + "\n")
    return path


def _decimate(x: np.ndarray, y: np.ndarray, max_points: int) -> tuple[np.ndarray, np.ndarray]:
    if x.size <= max_points:
        return x, y
    # keep min and max of each bucket so narrow peaks survive
    edges = np.linspace(0, x.size, max_points // 2 + 1).astype(int)
    keep = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            seg = y[a:b]
            keep.extend(sorted({a + int(np.argmin(seg)), a + int(np.argmax(seg))}))
    keep = np.array(keep)
    return x[keep], y[keep]


def write_svg(path: str | Path, series, title: str = "", xlabel: str = "", ylabel: str = "",
              markers: bool = False, width: int = 800, height: int = 450,
              max_points: int = 4000) -> Path:
    """``series`` is a sequence of ``(x, y, label)``; lines unless ``markers``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ml, mr, mt, mb = 70, 20, 35, 50
    pw, ph = width - ml - mr, height - mt - mb
    xs = np.concatenate([np.asarray(s[0], float) for s in series])
    ys = np.concatenate([np.asarray(s[1], float) for s in series])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def px(x):
        return ml + (np.asarray(x) - x0) / (x1 - x0) * pw

    def py(y):
        return mt + (1.0 - (np.asarray(y) - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
           f'<text x="{width / 2}" y="20" text-anchor="middle">{escape(title)}</text>',
           f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>',
           f'<text x="15" y="{mt + ph / 2}" transform="rotate(-90 15 {mt + ph / 2})" '
           f'text-anchor="middle">{escape(ylabel)}</text>']
    for v in np.linspace(x0, x1, 5):
        out.append(f'<text x="{px(v):.1f}" y="{mt + ph + 16}" text-anchor="middle">{v:.4g}</text>')
    for v in np.linspace(y0, y1, 5):
        out.append(f'<text x="{ml - 5}" y="{py(v) + 4:.1f}" text-anchor="end">{v:.4g}</text>')
    for i, (x, y, label) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        x, y = np.asarray(x, float), np.asarray(y, float)
        if markers:
            for a, b in zip(px(x), py(y)):
                out.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="2.5" fill="none" stroke="{color}"/>')
        else:
            x, y = _decimate(x, y, max_points)
            pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(x), py(y)))
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{pts}"/>')
        out.append(f'<text x="{ml + pw - 5}" y="{mt + 15 + 15 * i}" text-anchor="end" '
                   f'fill="{color}">{escape(label)}</text>')
    out.append("</svg>")
    path.write_text("\n".join(out) + "\n")
    return path
