"""Static SVG line charts.

Output is plain text built from the data alone (no timestamps or random
ids), so equal inputs produce identical files.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")
WIDTH, HEIGHT = 640, 400
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 150, 40, 50
MAX_POINTS = 2000


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * step:
        out.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return out


def _thin(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if x.size <= MAX_POINTS:
        return x, y
    idx = np.unique(np.linspace(0, x.size - 1, MAX_POINTS).astype(int))
    return x[idx], y[idx]


def line_chart(x, columns: dict, title: str = "", x_label: str = "", y_label: str = "",
               reference_lines: dict | None = None) -> str:
    """Render ``columns`` against ``x`` as an SVG document.

    Parameters
    ----------
    x : array_like
    columns : dict of str to array_like
        One polyline per entry; non-finite values are skipped.
    reference_lines : dict of str to float, optional
        Dashed horizontal lines, e.g. predicted limits.
    """
    x = np.asarray(x, dtype=float)
    reference_lines = reference_lines or {}
    ys = {k: np.asarray(v, dtype=float) for k, v in columns.items()}
    finite = [v[np.isfinite(v)] for v in ys.values()] + [np.array(list(reference_lines.values()), dtype=float)]
    finite = np.concatenate([f for f in finite if f.size]) if any(f.size for f in finite) else np.array([0.0])
    y_lo, y_hi = float(finite.min()), float(finite.max())
    if y_hi - y_lo < 1e-12:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    x_lo, x_hi = float(x.min()), float(x.max())
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(v):
        return MARGIN_LEFT + (v - x_lo) / (x_hi - x_lo) * plot_w

    def py(v):
        return MARGIN_TOP + (y_hi - v) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP + plot_h}" x2="{MARGIN_LEFT + plot_w}" '
        f'y2="{MARGIN_TOP + plot_h}" stroke="black"/>',
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{MARGIN_TOP + plot_h}" stroke="black"/>',
    ]
    for t in _ticks(x_lo, x_hi):
        X = px(t)
        parts.append(f'<line x1="{X:.1f}" y1="{MARGIN_TOP + plot_h}" x2="{X:.1f}" '
                     f'y2="{MARGIN_TOP + plot_h + 5}" stroke="black"/>')
        parts.append(f'<text x="{X:.1f}" y="{MARGIN_TOP + plot_h + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y_lo, y_hi):
        Y = py(t)
        parts.append(f'<line x1="{MARGIN_LEFT - 5}" y1="{Y:.1f}" x2="{MARGIN_LEFT}" y2="{Y:.1f}" stroke="black"/>')
        parts.append(f'<text x="{MARGIN_LEFT - 8}" y="{Y + 4:.1f}" text-anchor="end">{t:.4g}</text>')
    parts.append(f'<text x="{MARGIN_LEFT + plot_w / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">'
                 f'{escape(x_label)}</text>')
    parts.append(f'<text x="16" y="{MARGIN_TOP + plot_h / 2:.1f}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {MARGIN_TOP + plot_h / 2:.1f})">{escape(y_label)}</text>')

    legend_y = MARGIN_TOP + 10
    for k, (label, y) in enumerate(ys.items()):
        color = PALETTE[k % len(PALETTE)]
        mask = np.isfinite(y)
        xs, yv = _thin(x[mask], y[mask])
        if xs.size:
            pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(xs, yv))
            parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        parts.append(f'<line x1="{WIDTH - MARGIN_RIGHT + 10}" y1="{legend_y}" x2="{WIDTH - MARGIN_RIGHT + 30}" '
                     f'y2="{legend_y}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{WIDTH - MARGIN_RIGHT + 35}" y="{legend_y + 4}">{escape(label)}</text>')
        legend_y += 18
    for label, value in reference_lines.items():
        Y = py(value)
        parts.append(f'<line x1="{MARGIN_LEFT}" y1="{Y:.2f}" x2="{MARGIN_LEFT + plot_w}" y2="{Y:.2f}" '
                     f'stroke="gray" stroke-dasharray="4 3"/>')
        parts.append(f'<text x="{WIDTH - MARGIN_RIGHT + 10}" y="{Y + 4:.1f}" fill="gray">{escape(label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
