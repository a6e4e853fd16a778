"""Minimal SVG line plots of ratio probes on a log-x axis."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

_W, _H = 640, 400
_L, _R, _T, _B = 70, 20, 40, 50
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def ratio_plot(series, target: float | None = None, title: str = "") -> str:
    """``series`` is a list of ``(label, xs, ys)``; non-finite points are skipped."""
    pts = [(lab, np.asarray(xs, float), np.asarray(ys, float)) for lab, xs, ys in series]
    allx = np.concatenate([xs[np.isfinite(ys) & (xs > 0)] for _, xs, ys in pts] or [np.ones(1)])
    ally = np.concatenate([ys[np.isfinite(ys)] for _, _, ys in pts] or [np.zeros(1)])
    if target is not None:
        ally = np.append(ally, target)
    if allx.size == 0:
        allx = np.ones(1)
    if ally.size == 0:
        ally = np.zeros(1)
    lx0, lx1 = math.log10(allx.min()), math.log10(allx.max())
    if lx1 - lx0 < 1e-12:
        lx0, lx1 = lx0 - 0.5, lx1 + 0.5
    y0, y1 = float(ally.min()), float(ally.max())
    pad = 0.05 * (y1 - y0) if y1 > y0 else 0.5
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return _L + (math.log10(x) - lx0) / (lx1 - lx0) * (_W - _L - _R)

    def py(y):
        return _T + (y1 - y) / (y1 - y0) * (_H - _T - _B)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">',
           f'<rect width="{_W}" height="{_H}" fill="white"/>',
           f'<text x="{_W / 2}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>',
           f'<line x1="{_L}" y1="{_H - _B}" x2="{_W - _R}" y2="{_H - _B}" stroke="black"/>',
           f'<line x1="{_L}" y1="{_T}" x2="{_L}" y2="{_H - _B}" stroke="black"/>']
    for k in range(math.ceil(lx0), math.floor(lx1) + 1):
        X = px(10.0 ** k)
        out.append(f'<line x1="{_fmt(X)}" y1="{_H - _B}" x2="{_fmt(X)}" y2="{_H - _B + 4}" stroke="black"/>')
        out.append(f'<text x="{_fmt(X)}" y="{_H - _B + 16}" text-anchor="middle">1e{k}</text>')
    for v in np.linspace(y0, y1, 5):
        Y = py(v)
        out.append(f'<text x="{_L - 6}" y="{_fmt(Y + 4)}" text-anchor="end">{v:.4g}</text>')
    if target is not None:
        Y = py(target)
        out.append(f'<line x1="{_L}" y1="{_fmt(Y)}" x2="{_W - _R}" y2="{_fmt(Y)}" '
                   f'stroke="gray" stroke-dasharray="4 3"/>')
    for i, (lab, xs, ys) in enumerate(pts):
        color = _COLORS[i % len(_COLORS)]
        ok = np.isfinite(ys) & (xs > 0)
        coords = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xs[ok], ys[ok]))
        if coords:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        out.append(f'<text x="{_W - _R - 4}" y="{_T + 14 * (i + 1)}" text-anchor="end" '
                   f'fill="{color}">{escape(lab)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def report_plot(report) -> str:
    series = [(name, p.grid, p.ratios) for name, p in report.iter_probes()]
    targets = {p.target for _, p in report.iter_probes()}
    target = targets.pop() if len(targets) == 1 else None
    return ratio_plot(series, target, f"{report.subject}: {report.verdict}")
