"""Minimal SVG line plots (linear/semi-log/log-log), no plotting dependency."""
from __future__ import annotations

import math
from typing import Dict, Sequence, Tuple

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 36, 48
PALETTE = ("#c0392b", "#2471a3", "#1e8449", "#7d3c98", "#b7950b", "#34495e")


def _transform(values, log):
    out = []
    for v in values:
        if log:
            out.append(math.log10(v) if v > 0 else None)
        else:
            out.append(float(v))
    return out


def _ticks(lo: float, hi: float, log: bool):
    if log:
        first = math.ceil(lo - 1e-9)
        return [(t, f"1e{t:d}") for t in range(first, math.floor(hi + 1e-9) + 1)] \
            or [(lo, f"1e{lo:.1f}")]
    span = hi - lo or 1.0
    step = 10 ** math.floor(math.log10(span / 4))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= 6:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * span:
        ticks.append((t, f"{t:g}"))
        t += step
    return ticks


def line_plot(
    path: str,
    series: Dict[str, Tuple[Sequence[float], Sequence[float]]],
    title: str = "",
    xlabel: str = "t",
    ylabel: str = "",
    xlog: bool = False,
    ylog: bool = False,
) -> None:
    """Write one SVG with a polyline per named series."""
    xs_all, ys_all = [], []
    transformed = {}
    for label, (xs, ys) in series.items():
        tx = _transform(xs, xlog)
        ty = _transform(ys, ylog)
        pts = [(a, b) for a, b in zip(tx, ty) if a is not None and b is not None]
        transformed[label] = pts
        xs_all += [p[0] for p in pts]
        ys_all += [p[1] for p in pts]
    if not xs_all:
        xs_all = ys_all = [0.0, 1.0]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.04 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    inner_w = WIDTH - MARGIN_L - MARGIN_R
    inner_h = HEIGHT - MARGIN_T - MARGIN_B

    def px(x):
        return MARGIN_L + inner_w * (x - x_lo) / (x_hi - x_lo)

    def py(y):
        return MARGIN_T + inner_h * (1.0 - (y - y_lo) / (y_hi - y_lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH/2:.0f}" y="20" text-anchor="middle" '
        f'font-size="14">{title}</text>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{inner_w}" '
        f'height="{inner_h}" fill="none" stroke="#555"/>',
    ]
    for t, label in _ticks(x_lo, x_hi, xlog):
        if x_lo <= t <= x_hi:
            parts.append(
                f'<line x1="{px(t):.1f}" y1="{MARGIN_T + inner_h}" '
                f'x2="{px(t):.1f}" y2="{MARGIN_T + inner_h + 5}" stroke="#555"/>'
                f'<text x="{px(t):.1f}" y="{MARGIN_T + inner_h + 18}" '
                f'text-anchor="middle">{label}</text>'
            )
    for t, label in _ticks(y_lo, y_hi, ylog):
        if y_lo <= t <= y_hi:
            parts.append(
                f'<line x1="{MARGIN_L - 5}" y1="{py(t):.1f}" x2="{MARGIN_L}" '
                f'y2="{py(t):.1f}" stroke="#555"/>'
                f'<text x="{MARGIN_L - 8}" y="{py(t) + 4:.1f}" '
                f'text-anchor="end">{label}</text>'
            )
    parts.append(
        f'<text x="{MARGIN_L + inner_w/2:.0f}" y="{HEIGHT - 10}" '
        f'text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="16" y="{MARGIN_T + inner_h/2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {MARGIN_T + inner_h/2:.0f})">{ylabel}</text>'
    )
    for i, (label, pts) in enumerate(transformed.items()):
        color = PALETTE[i % len(PALETTE)]
        if pts:
            coords = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in pts)
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"/>'
            )
        parts.append(
            f'<rect x="{MARGIN_L + 8}" y="{MARGIN_T + 8 + 16*i}" width="12" '
            f'height="3" fill="{color}"/>'
            f'<text x="{MARGIN_L + 25}" y="{MARGIN_T + 14 + 16*i}">{label}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(parts) + "\n")
