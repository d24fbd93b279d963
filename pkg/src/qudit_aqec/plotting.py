"""Minimal dependency-free SVG line/point plots."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

_COLORS = ("#d4a017", "#2e8b57", "#1f5fbf", "#b22222", "#6a3d9a")


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def svg_plot(series, xlabel: str = "", ylabel: str = "", title: str = "", width: int = 560, height: int = 380) -> str:
    """Render ``series``: dicts with ``x``, ``y``, ``label`` and optional ``fit_x``/``fit_y``."""
    ml, mr, mt, mb = 64, 16, 32, 48
    xs = np.concatenate([np.asarray(s["x"], float) for s in series])
    ys = np.concatenate([np.asarray(s["y"], float) for s in series])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(min(ys.min(), 0.4)), float(max(ys.max(), 1.0))
    x1 = x1 if x1 > x0 else x0 + 1.0
    pw, ph = width - ml - mr, height - mt - mb

    def X(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def Y(v):
        return mt + (1 - (v - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{width / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="14" y="{mt + ph / 2}" text-anchor="middle" transform="rotate(-90 14 {mt + ph / 2})">{escape(ylabel)}</text>',
    ]
    for v in np.linspace(x0, x1, 5):
        out.append(f'<text x="{_fmt(X(v))}" y="{mt + ph + 16}" text-anchor="middle">{v:.3g}</text>')
    for v in np.linspace(y0, y1, 5):
        out.append(f'<text x="{ml - 6}" y="{_fmt(Y(v) + 4)}" text-anchor="end">{v:.3g}</text>')
    for k, s in enumerate(series):
        c = _COLORS[k % len(_COLORS)]
        for x, y in zip(s["x"], s["y"]):
            out.append(f'<circle cx="{_fmt(X(x))}" cy="{_fmt(Y(y))}" r="3" fill="{c}"/>')
        if "fit_x" in s:
            pts = " ".join(f"{_fmt(X(x))},{_fmt(Y(y))}" for x, y in zip(s["fit_x"], s["fit_y"]))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{c}" stroke-dasharray="5,3"/>')
        ly = mt + 14 + 14 * k
        out.append(f'<circle cx="{ml + pw - 120}" cy="{ly - 4}" r="3" fill="{c}"/>')
        out.append(f'<text x="{ml + pw - 112}" y="{ly}">{escape(str(s.get("label", "")))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
