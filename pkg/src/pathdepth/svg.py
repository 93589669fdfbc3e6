"""Minimal standalone SVG charts (no plotting dependency).

Every chart ships next to a CSV with the same data, so these only need to
be legible, well-formed and deterministic.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
            "#8c564b", "#17becf", "#e377c2")

_W, _H = 720, 440
_ML, _MR, _MT, _MB = 70, 20, 40, 50


def _scale(lo: float, hi: float):
    if hi <= lo:
        hi = lo + 1.0
    return lo, hi


def _ticks(lo: float, hi: float, n: int = 5):
    return np.linspace(lo, hi, n)


def line_chart(series, title: str = "", x_label: str = "",
               y_label: str = "") -> str:
    """Multi-polyline chart; ``series`` is a list of (label, xs, ys)."""
    xs_all = np.concatenate([np.asarray(s[1], float) for s in series])
    ys_all = np.concatenate([np.asarray(s[2], float) for s in series])
    x_lo, x_hi = _scale(float(xs_all.min()), float(xs_all.max()))
    y_lo, y_hi = _scale(float(ys_all.min()), float(ys_all.max()))

    def px(x):
        return _ML + (x - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def py(y):
        return _H - _MB - (y - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    parts = [_svg_open(title, x_label, y_label)]
    parts.append(_axes(px, py, x_lo, x_hi, y_lo, y_hi))
    for i, (label, xs, ys) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        points = " ".join(f"{px(float(x)):.2f},{py(float(y)):.2f}"
                          for x, y in zip(xs, ys))
        parts.append(f'<polyline fill="none" stroke="{color}" '
                     f'stroke-width="1.5" points="{points}"/>')
        parts.append(f'<text x="{_W - _MR - 170}" y="{_MT + 16 * (i + 1)}" '
                     f'fill="{color}" font-size="12">'
                     f'{escape(str(label))}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def bar_chart(edges, counts, title: str = "", x_label: str = "",
              y_label: str = "") -> str:
    """Histogram bars over ``edges`` (len(counts) + 1 values)."""
    edges = np.asarray(edges, float)
    counts = np.asarray(counts, float)
    if counts.size == 0:
        return _svg_open(title, x_label, y_label) + "</svg>\n"
    x_lo, x_hi = _scale(float(edges[0]), float(edges[-1]))
    y_lo, y_hi = _scale(0.0, float(counts.max()))

    def px(x):
        return _ML + (x - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def py(y):
        return _H - _MB - (y - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    parts = [_svg_open(title, x_label, y_label)]
    parts.append(_axes(px, py, x_lo, x_hi, y_lo, y_hi))
    for i, count in enumerate(counts):
        x0, x1 = px(float(edges[i])), px(float(edges[i + 1]))
        y0, y1 = py(float(count)), py(0.0)
        parts.append(f'<rect x="{x0:.2f}" y="{y0:.2f}" '
                     f'width="{max(x1 - x0 - 1.0, 0.5):.2f}" '
                     f'height="{max(y1 - y0, 0.0):.2f}" '
                     f'fill="{_PALETTE[0]}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _svg_open(title: str, x_label: str, y_label: str) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
            f'height="{_H}" viewBox="0 0 {_W} {_H}">\n'
            f'<rect width="{_W}" height="{_H}" fill="white"/>\n')
    if title:
        head += (f'<text x="{_W / 2:.0f}" y="24" text-anchor="middle" '
                 f'font-size="15">{escape(title)}</text>\n')
    if x_label:
        head += (f'<text x="{_W / 2:.0f}" y="{_H - 12}" '
                 f'text-anchor="middle" font-size="12">'
                 f'{escape(x_label)}</text>\n')
    if y_label:
        head += (f'<text x="16" y="{_H / 2:.0f}" text-anchor="middle" '
                 f'font-size="12" transform="rotate(-90 16 {_H / 2:.0f})">'
                 f'{escape(y_label)}</text>\n')
    return head


def _axes(px, py, x_lo, x_hi, y_lo, y_hi) -> str:
    parts = [
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" '
        f'y2="{_H - _MB}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" '
        f'stroke="black"/>',
    ]
    for x in _ticks(x_lo, x_hi):
        parts.append(f'<text x="{px(x):.1f}" y="{_H - _MB + 16}" '
                     f'text-anchor="middle" font-size="10">{x:.4g}</text>')
    for y in _ticks(y_lo, y_hi):
        parts.append(f'<text x="{_ML - 6}" y="{py(y) + 4:.1f}" '
                     f'text-anchor="end" font-size="10">{y:.4g}</text>')
    return "\n".join(parts)
