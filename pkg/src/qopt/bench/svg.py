"""Minimal SVG line charts, no plotting dependency.

Output is a fixed-size chart with axes, tick labels, one polyline per
series, and a small legend.  Good enough for eyeballing cost trends
offline; anything fancier belongs in a real plotting tool.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

__all__ = ["line_chart"]

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"]

_WIDTH = 960
_HEIGHT = 540
_MARGIN_L = 84
_MARGIN_R = 24
_MARGIN_T = 48
_MARGIN_B = 64


def _fmt(v: float) -> str:
    return f"{v:g}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if mag * mult >= raw:
            step = mag * mult
            break
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(v)
        v += step
    return ticks or [lo]


def line_chart(series, path, *, title: str = "", x_label: str = "",
               y_label: str = "", log_x: bool = False) -> None:
    """Write a polyline chart to ``path``.

    ``series`` is a list of (name, xs, ys) triples with equal-length
    xs/ys.  With ``log_x`` the x axis is log10-scaled; x values must then
    be positive, so callers typically pass iteration + 1.
    """
    if not series:
        raise ValueError("need at least one series")
    for name, xs, ys in series:
        if len(xs) != len(ys) or not xs:
            raise ValueError(f"series {name!r} must have equal, nonzero lengths")
        if log_x and min(xs) <= 0:
            raise ValueError(f"series {name!r} has non-positive x values under log_x")

    def tx(x):
        return math.log10(x) if log_x else x

    all_x = [tx(x) for _, xs, _ in series for x in xs]
    all_y = [y for _, _, ys in series for y in ys]
    x_lo, x_hi = min(all_x), max(all_x)
    y_lo, y_hi = min(all_y), max(all_y)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.04 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def px(x):
        return _MARGIN_L + (tx(x) - x_lo) / (x_hi - x_lo) * plot_w

    def py(y):
        return _MARGIN_T + (y_hi - y) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}" font-family="sans-serif" font-size="13">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_WIDTH / 2:.1f}" y="26" text-anchor="middle" font-size="16">'
            f"{escape(title)}</text>"
        )

    if log_x:
        lo_exp = math.floor(x_lo)
        hi_exp = math.ceil(x_hi)
        xtick_pairs = [(10.0 ** e, f"1e{e}") for e in range(int(lo_exp), int(hi_exp) + 1)
                       if x_lo - 1e-9 <= e <= x_hi + 1e-9]
    else:
        xtick_pairs = [(v, _fmt(v)) for v in _ticks(x_lo, x_hi)]
    for xv, label in xtick_pairs:
        x = px(xv) if log_x else _MARGIN_L + (xv - x_lo) / (x_hi - x_lo) * plot_w
        parts.append(f'<line x1="{x:.1f}" y1="{_MARGIN_T + plot_h}" x2="{x:.1f}" '
                     f'y2="{_MARGIN_T + plot_h + 6}" stroke="#333"/>')
        parts.append(f'<text x="{x:.1f}" y="{_MARGIN_T + plot_h + 22}" '
                     f'text-anchor="middle">{escape(label)}</text>')
    for yv in _ticks(y_lo, y_hi):
        y = py(yv)
        parts.append(f'<line x1="{_MARGIN_L - 6}" y1="{y:.1f}" x2="{_MARGIN_L}" '
                     f'y2="{y:.1f}" stroke="#333"/>')
        parts.append(f'<text x="{_MARGIN_L - 10}" y="{y + 4:.1f}" '
                     f'text-anchor="end">{escape(_fmt(yv))}</text>')
    if x_label:
        parts.append(f'<text x="{_MARGIN_L + plot_w / 2:.1f}" y="{_HEIGHT - 18}" '
                     f'text-anchor="middle">{escape(x_label)}</text>')
    if y_label:
        cy = _MARGIN_T + plot_h / 2
        parts.append(f'<text x="22" y="{cy:.1f}" text-anchor="middle" '
                     f'transform="rotate(-90 22 {cy:.1f})">{escape(y_label)}</text>')

    for idx, (name, xs, ys) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.6"/>')
        ly = _MARGIN_T + 16 + 18 * idx
        lx = _MARGIN_L + plot_w - 150
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 26}" y2="{ly - 4}" '
                     f'stroke="{color}" stroke-width="2.5"/>')
        parts.append(f'<text x="{lx + 32}" y="{ly}">{escape(str(name))}</text>')

    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
