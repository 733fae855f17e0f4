"""Minimal static SVG 1.1 charts (axes, polyline or bars, labels).

Plot-data CSVs are the primary product; these are a convenience rendering.
"""

from __future__ import annotations

_W, _H = 640, 400
_ML, _MR, _MT, _MB = 60, 20, 30, 50


def _scale(values, lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in values]


def _frame(title: str, xlabel: str, ylabel: str, body: str) -> str:
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">\n'
        f'<rect width="{_W}" height="{_H}" fill="white"/>\n'
        f'<text x="{_W/2:.0f}" y="20" text-anchor="middle" font-size="14">{title}</text>\n'
        f'<line x1="{_ML}" y1="{_H-_MB}" x2="{_W-_MR}" y2="{_H-_MB}" stroke="black"/>\n'
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H-_MB}" stroke="black"/>\n'
        f'<text x="{_W/2:.0f}" y="{_H-12}" text-anchor="middle" font-size="12">{xlabel}</text>\n'
        f'<text x="16" y="{_H/2:.0f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {_H/2:.0f})">{ylabel}</text>\n'
        f"{body}</svg>\n"
    )


def line_chart(path, xs, ys, title: str, xlabel: str, ylabel: str) -> None:
    xs = [float(v) for v in xs]
    ys = [float(v) for v in ys]
    lo_y, hi_y = min(ys), max(ys)
    px = _scale(xs, min(xs), max(xs), _ML, _W - _MR)
    py = _scale(ys, lo_y, hi_y, _H - _MB, _MT)
    points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(px, py))
    body = f'<polyline points="{points}" fill="none" stroke="steelblue" stroke-width="2"/>\n'
    for x, y, vx in zip(px, py, xs):
        body += f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="steelblue"/>\n'
        body += f'<text x="{x:.2f}" y="{_H-_MB+16}" text-anchor="middle" font-size="10">{vx:g}</text>\n'
    body += (
        f'<text x="{_ML-6}" y="{_H-_MB}" text-anchor="end" font-size="10">{lo_y:.3g}</text>\n'
        f'<text x="{_ML-6}" y="{_MT+4}" text-anchor="end" font-size="10">{hi_y:.3g}</text>\n'
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_frame(title, xlabel, ylabel, body))


def bar_chart(path, labels, values, title: str, xlabel: str, ylabel: str) -> None:
    values = [float(v) for v in values]
    hi = max(max(values), 0.0) or 1.0
    n = len(values)
    width = (_W - _ML - _MR) / max(n, 1)
    body = ""
    for i, (label, value) in enumerate(zip(labels, values)):
        h = (value / hi) * (_H - _MT - _MB)
        x = _ML + i * width
        y = _H - _MB - h
        body += (
            f'<rect x="{x+2:.2f}" y="{y:.2f}" width="{width-4:.2f}" height="{h:.2f}" '
            f'fill="steelblue"/>\n'
        )
        body += (
            f'<text x="{x+width/2:.2f}" y="{_H-_MB+12}" text-anchor="end" font-size="9" '
            f'transform="rotate(-45 {x+width/2:.2f} {_H-_MB+12})">{label}</text>\n'
        )
    body += f'<text x="{_ML-6}" y="{_MT+4}" text-anchor="end" font-size="10">{hi:.3g}</text>\n'
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_frame(title, xlabel, ylabel, body))
