"""Bare-bones SVG line charts (CSV files remain the normative output)."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

_COLOURS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def line_chart(series: dict, title: str = "", xlabel: str = "", ylabel: str = "",
               width: int = 720, height: int = 360) -> str:
    """``series`` maps a label to ``(x, y)`` arrays."""
    pad_l, pad_r, pad_t, pad_b = 60, 130, 30, 40
    xs = np.concatenate([np.asarray(x, float) for x, _ in series.values()])
    ys = np.concatenate([np.asarray(y, float) for _, y in series.values()])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b

    def sx(v):
        return pad_l + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return pad_t + (1.0 - (v - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect x="{pad_l}" y="{pad_t}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
           f'<text x="{width / 2:.0f}" y="18" text-anchor="middle">{escape(title)}</text>',
           f'<text x="{pad_l + pw / 2:.0f}" y="{height - 8}" text-anchor="middle">{escape(xlabel)}</text>',
           f'<text x="14" y="{pad_t + ph / 2:.0f}" transform="rotate(-90 14 {pad_t + ph / 2:.0f})" '
           f'text-anchor="middle">{escape(ylabel)}</text>']
    for v, anchor, x, y in ((y0, "end", pad_l - 4, sy(y0)), (y1, "end", pad_l - 4, sy(y1) + 8),
                            (x0, "start", pad_l, pad_t + ph + 14), (x1, "end", pad_l + pw, pad_t + ph + 14)):
        out.append(f'<text x="{x:.1f}" y="{y:.1f}" text-anchor="{anchor}">{v:.4g}</text>')
    for k, (label, (x, y)) in enumerate(series.items()):
        colour = _COLOURS[k % len(_COLOURS)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.4" points="{pts}"/>')
        ly = pad_t + 14 + 16 * k
        out.append(f'<line x1="{pad_l + pw + 10}" y1="{ly - 4}" x2="{pad_l + pw + 30}" y2="{ly - 4}" '
                   f'stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{pad_l + pw + 34}" y="{ly}">{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
