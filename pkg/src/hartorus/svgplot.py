"""Hand-rolled SVG line/scatter plots: byte-deterministic except one
timestamp comment (the provenance checksum comment is part of the contract)."""

from __future__ import annotations

import math
import time

_W, _H = 720, 480
_ML, _MR, _MT, _MB = 70, 20, 40, 50


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _ticks(lo: float, hi: float, n: int = 6):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / max(n - 1, 1)))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= n:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * span:
        out.append(t)
        t += step
    return out


def _log_ticks(lo: float, hi: float):
    lo = max(lo, 1e-300)
    a, b = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
    return [10.0 ** e for e in range(a, b + 1)]


def emit_plot(series, style=None) -> str:
    """Build a standalone SVG document.

    series : list of (label, xs, ys) triples
    style  : dict with optional keys title, xlabel, ylabel, logy, band
             (x0, x1 shaded), markers, checksum, timestamp
    """
    style = dict(style or {})
    logy = bool(style.get("logy"))
    parts = []
    parts.append('<?xml version="1.0" encoding="UTF-8"?>')
    parts.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
                 f'viewBox="0 0 {_W} {_H}">')
    checksum = style.get("checksum", "")
    parts.append(f"<!-- provenance: config sha256 {checksum} -->")
    stamp = style.get("timestamp", time.strftime("%Y-%m-%dT%H:%M:%S"))
    parts.append(f"<!-- timestamp: {stamp} -->")
    parts.append(f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>')

    cleaned = []
    for label, xs, ys in series or ():
        pts = [(float(x), float(y)) for x, y in zip(xs, ys)
               if math.isfinite(x) and math.isfinite(y) and (not logy or y > 0)]
        if pts:
            cleaned.append((label, pts))

    title = style.get("title", "")
    if title:
        parts.append(f'<text x="{_W / 2}" y="24" text-anchor="middle" '
                     f'font-size="16" font-family="sans-serif">{title}</text>')

    if not cleaned:
        parts.append(f'<text x="{_W / 2}" y="{_H / 2}" text-anchor="middle" '
                     'font-size="14" font-family="sans-serif" fill="#a00">'
                     'warning: empty series, nothing to plot</text>')
        parts.append("</svg>")
        return "\n".join(parts) + "\n"

    xs_all = [p[0] for _, pts in cleaned for p in pts]
    ys_all = [p[1] for _, pts in cleaned for p in pts]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    if logy:
        y_lo, y_hi = math.log10(max(y_lo, 1e-300)), math.log10(max(y_hi, 1e-299))
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    pw, ph = _W - _ML - _MR, _H - _MT - _MB

    def px(x):
        return _ML + pw * (x - x_lo) / (x_hi - x_lo)

    def py(y):
        yv = math.log10(max(y, 1e-300)) if logy else y
        return _MT + ph * (1.0 - (yv - y_lo) / (y_hi - y_lo))

    band = style.get("band")
    if band:
        b0, b1 = max(band[0], x_lo), min(band[1], x_hi)
        if b1 > b0:
            parts.append(f'<rect x="{_fmt(px(b0))}" y="{_MT}" width="{_fmt(px(b1) - px(b0))}" '
                         f'height="{ph}" fill="#fce0e0"/>')

    parts.append(f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" '
                 'fill="none" stroke="black"/>')

    for t in _ticks(x_lo, x_hi):
        X = px(t)
        parts.append(f'<line x1="{_fmt(X)}" y1="{_MT + ph}" x2="{_fmt(X)}" y2="{_MT + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{_fmt(X)}" y="{_MT + ph + 18}" text-anchor="middle" '
                     f'font-size="11" font-family="sans-serif">{_fmt(t)}</text>')
    y_ticks = _log_ticks(10 ** y_lo, 10 ** y_hi) if logy else _ticks(y_lo, y_hi)
    for t in y_ticks:
        tv = math.log10(t) if logy else t
        if not (y_lo - 1e-12 <= tv <= y_hi + 1e-12):
            continue
        Y = _MT + ph * (1.0 - (tv - y_lo) / (y_hi - y_lo))
        parts.append(f'<line x1="{_ML - 5}" y1="{_fmt(Y)}" x2="{_ML}" y2="{_fmt(Y)}" stroke="black"/>')
        parts.append(f'<text x="{_ML - 8}" y="{_fmt(Y + 4)}" text-anchor="end" '
                     f'font-size="11" font-family="sans-serif">{_fmt(t)}</text>')

    if style.get("xlabel"):
        parts.append(f'<text x="{_ML + pw / 2}" y="{_H - 12}" text-anchor="middle" '
                     f'font-size="13" font-family="sans-serif">{style["xlabel"]}</text>')
    if style.get("ylabel"):
        parts.append(f'<text x="18" y="{_MT + ph / 2}" text-anchor="middle" font-size="13" '
                     f'font-family="sans-serif" transform="rotate(-90 18 {_MT + ph / 2})">'
                     f'{style["ylabel"]}</text>')

    colors = ("#1f4e9c", "#c03020", "#208040", "#806010", "#603080")
    for i, (label, pts) in enumerate(cleaned):
        color = colors[i % len(colors)]
        if len(pts) > 1:
            path = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in pts)
            parts.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        if style.get("markers", True) and len(pts) <= 400:
            for x, y in pts:
                parts.append(f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="2.5" fill="{color}"/>')
        if label:
            parts.append(f'<text x="{_ML + pw - 8}" y="{_MT + 16 + 14 * i}" text-anchor="end" '
                         f'font-size="12" font-family="sans-serif" fill="{color}">{label}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
