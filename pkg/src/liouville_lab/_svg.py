"""Minimal static SVG line plots (no plotting dependency)."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def line_plot(series, title: str = "", xlabel: str = "", ylabel: str = "",
              xlog: bool = False, ylog: bool = False, width: int = 640,
              height: int = 400) -> str:
    """``series`` is a list of ``(x, y, label)``; nonfinite points are dropped."""
    pad_l, pad_r, pad_t, pad_b = 70, 20, 30, 50
    clean = []
    for x, y, label in series:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        ok = np.isfinite(x) & np.isfinite(y)
        if xlog:
            ok &= x > 0
        if ylog:
            ok &= y > 0
        x, y = x[ok], y[ok]
        if x.size:
            clean.append((np.log10(x) if xlog else x, np.log10(y) if ylog else y, label))
    if not clean:
        clean = [(np.array([0.0, 1.0]), np.array([0.0, 1.0]), "(no data)")]
    xs = np.concatenate([c[0] for c in clean])
    ys = np.concatenate([c[1] for c in clean])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b

    def px(v):
        return pad_l + (v - x0) / (x1 - x0) * pw

    def py(v):
        return pad_t + (1 - (v - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{pad_l}" y="{pad_t}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
           f'<text x="{width / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
           f'<text x="{pad_l + pw / 2}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>',
           f'<text x="14" y="{pad_t + ph / 2}" transform="rotate(-90 14 {pad_t + ph / 2})" '
           f'text-anchor="middle">{escape(ylabel)}</text>']
    for i in range(5):
        fx = x0 + (x1 - x0) * i / 4
        fy = y0 + (y1 - y0) * i / 4
        lx = _fmt(10 ** fx) if xlog else _fmt(fx)
        ly = _fmt(10 ** fy) if ylog else _fmt(fy)
        out.append(f'<text x="{px(fx):.1f}" y="{pad_t + ph + 16}" text-anchor="middle">{lx}</text>')
        out.append(f'<text x="{pad_l - 6}" y="{py(fy) + 4:.1f}" text-anchor="end">{ly}</text>')
    for j, (x, y, label) in enumerate(clean):
        col = COLORS[j % len(COLORS)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{pad_l + 8}" y="{pad_t + 14 + 14 * j}" fill="{col}">{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"

