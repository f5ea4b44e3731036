"""Minimal deterministic SVG line charts (axes, log scales, polylines, legend).

No plotting dependency: benchmark outputs must be byte-identical across runs
for a fixed report, which rules out timestamped or version-stamped backends.
"""

from __future__ import annotations

import math

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]

_PANEL_W = 560
_PANEL_H = 420
_MARGIN_L = 72
_MARGIN_R = 18
_MARGIN_T = 44
_MARGIN_B = 56


def _fmt(v):
    return f"{v:.2f}"


def _tick_label(v, log):
    if log:
        return f"1e{int(round(v))}" if abs(v - round(v)) < 1e-9 else f"{10.0 ** v:.3g}"
    return f"{v:.4g}"


def _ticks(lo, hi, log):
    if log:
        start, stop = math.ceil(lo - 1e-9), math.floor(hi + 1e-9)
        step = max(1, (stop - start) // 8 + (1 if (stop - start) % 8 else 0))
        return [float(t) for t in range(start, stop + 1, step)]
    if hi == lo:
        return [lo]
    raw = (hi - lo) / 5.0
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(t)
        t += step
    return ticks


class Panel:
    """One chart: series of (label, xs, ys) with optional log axes."""

    def __init__(self, title, xlabel, ylabel, xlog=False, ylog=False):
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.xlog = xlog
        self.ylog = ylog
        self.series = []

    def add(self, label, xs, ys):
        pts = [(float(x), float(y)) for x, y in zip(xs, ys)
               if math.isfinite(x) and math.isfinite(y)
               and (not self.xlog or x > 0.0) and (not self.ylog or y > 0.0)]
        self.series.append((str(label), pts))


def _transform(pts, xlog, ylog):
    return [((math.log10(x) if xlog else x), (math.log10(y) if ylog else y)) for x, y in pts]


def _panel_svg(panel: Panel, x_off):
    all_pts = []
    transformed = []
    for label, pts in panel.series:
        tp = _transform(pts, panel.xlog, panel.ylog)
        transformed.append((label, tp))
        all_pts.extend(tp)
    if all_pts:
        xs = [p[0] for p in all_pts]
        ys = [p[1] for p in all_pts]
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(ys), max(ys)
    else:
        x_lo = y_lo = 0.0
        x_hi = y_hi = 1.0
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad_x = 0.03 * (x_hi - x_lo)
    pad_y = 0.05 * (y_hi - y_lo)
    x_lo, x_hi = x_lo - pad_x, x_hi + pad_x
    y_lo, y_hi = y_lo - pad_y, y_hi + pad_y

    plot_w = _PANEL_W - _MARGIN_L - _MARGIN_R
    plot_h = _PANEL_H - _MARGIN_T - _MARGIN_B

    def sx(v):
        return x_off + _MARGIN_L + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v):
        return _MARGIN_T + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h

    out = []
    out.append(f'<g font-family="monospace" font-size="12">')
    out.append(f'<rect x="{_fmt(x_off + _MARGIN_L)}" y="{_fmt(_MARGIN_T)}" '
               f'width="{_fmt(plot_w)}" height="{_fmt(plot_h)}" fill="none" stroke="#333"/>')
    out.append(f'<text x="{_fmt(x_off + _MARGIN_L + plot_w / 2)}" y="{_fmt(_MARGIN_T - 16)}" '
               f'text-anchor="middle" font-size="14">{panel.title}</text>')
    out.append(f'<text x="{_fmt(x_off + _MARGIN_L + plot_w / 2)}" y="{_fmt(_PANEL_H - 14)}" '
               f'text-anchor="middle">{panel.xlabel}</text>')
    out.append(f'<text x="{_fmt(x_off + 16)}" y="{_fmt(_MARGIN_T + plot_h / 2)}" text-anchor="middle" '
               f'transform="rotate(-90 {_fmt(x_off + 16)} {_fmt(_MARGIN_T + plot_h / 2)})">'
               f'{panel.ylabel}</text>')

    for t in _ticks(x_lo + pad_x, x_hi - pad_x, panel.xlog):
        px = sx(t)
        out.append(f'<line x1="{_fmt(px)}" y1="{_fmt(_MARGIN_T + plot_h)}" '
                   f'x2="{_fmt(px)}" y2="{_fmt(_MARGIN_T + plot_h + 5)}" stroke="#333"/>')
        out.append(f'<text x="{_fmt(px)}" y="{_fmt(_MARGIN_T + plot_h + 20)}" '
                   f'text-anchor="middle">{_tick_label(t, panel.xlog)}</text>')
    for t in _ticks(y_lo + pad_y, y_hi - pad_y, panel.ylog):
        py = sy(t)
        out.append(f'<line x1="{_fmt(x_off + _MARGIN_L - 5)}" y1="{_fmt(py)}" '
                   f'x2="{_fmt(x_off + _MARGIN_L)}" y2="{_fmt(py)}" stroke="#333"/>')
        out.append(f'<text x="{_fmt(x_off + _MARGIN_L - 8)}" y="{_fmt(py + 4)}" '
                   f'text-anchor="end">{_tick_label(t, panel.ylog)}</text>')

    legend_y = _MARGIN_T + 10
    for i, (label, tp) in enumerate(transformed):
        color = PALETTE[i % len(PALETTE)]
        if tp:
            pts_attr = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in tp)
            out.append(f'<polyline points="{pts_attr}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        lx = x_off + _MARGIN_L + plot_w - 150
        out.append(f'<line x1="{_fmt(lx)}" y1="{_fmt(legend_y)}" x2="{_fmt(lx + 22)}" '
                   f'y2="{_fmt(legend_y)}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{_fmt(lx + 28)}" y="{_fmt(legend_y + 4)}">{label}</text>')
        legend_y += 16
    out.append("</g>")
    return "\n".join(out)


def render(panels, title=None) -> str:
    """Render panels side by side into one SVG document string."""
    width = _PANEL_W * len(panels)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{_PANEL_H}" '
        f'viewBox="0 0 {width} {_PANEL_H}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for i, panel in enumerate(panels):
        parts.append(_panel_svg(panel, i * _PANEL_W))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(panels, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render(panels))
