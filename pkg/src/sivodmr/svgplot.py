"""Minimal self-contained SVG line plots for sweep and spectrum outputs.

Purely a convenience for eyeballing results; nothing numeric depends on it.
"""

from __future__ import annotations

import math

_WIDTH, _HEIGHT = 640, 420
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64, 16, 28, 46
_COLORS = ("#1f6fb2", "#c24f1d", "#3a8f5f")


def _ticks(lo: float, hi: float, n: int = 5):
    """Round tick positions covering [lo, hi]."""
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / n))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if span / (step * mult) <= n:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * span:
        ticks.append(0.0 if abs(t) < step * 1e-6 else t)
        t += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:g}"


def line_plot_svg(x, series, xlabel: str, ylabel: str, title: str = "") -> str:
    """Render one or more (label, y-array) series against a shared x-axis."""
    xs = [float(v) for v in x]
    if not xs or not series:
        raise ValueError("need x values and at least one series")
    ys_all = [float(v) for _, ys in series for v in ys]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.04 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def px(v):
        return _MARGIN_L + (v - x_lo) / (x_hi - x_lo) * plot_w

    def py(v):
        return _MARGIN_T + (y_hi - v) / (y_hi - y_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#444" stroke-width="1"/>',
    ]
    for t in _ticks(x_lo, x_hi):
        xm = px(t)
        out.append(
            f'<line x1="{xm:.1f}" y1="{_MARGIN_T + plot_h}" x2="{xm:.1f}" '
            f'y2="{_MARGIN_T + plot_h + 5}" stroke="#444"/>'
        )
        out.append(
            f'<text x="{xm:.1f}" y="{_MARGIN_T + plot_h + 18}" font-size="11" '
            f'text-anchor="middle" font-family="sans-serif">{_fmt(t)}</text>'
        )
    for t in _ticks(y_lo, y_hi):
        ym = py(t)
        out.append(
            f'<line x1="{_MARGIN_L - 5}" y1="{ym:.1f}" x2="{_MARGIN_L}" '
            f'y2="{ym:.1f}" stroke="#444"/>'
        )
        out.append(
            f'<text x="{_MARGIN_L - 8}" y="{ym + 4:.1f}" font-size="11" '
            f'text-anchor="end" font-family="sans-serif">{_fmt(t)}</text>'
        )
    for i, (label, ys) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{px(xv):.2f},{py(float(yv)):.2f}" for xv, yv in zip(xs, ys))
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        if label:
            ly = _MARGIN_T + 14 + 14 * i
            out.append(
                f'<line x1="{_WIDTH - 150}" y1="{ly - 4}" x2="{_WIDTH - 130}" '
                f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>'
            )
            out.append(
                f'<text x="{_WIDTH - 124}" y="{ly}" font-size="11" '
                f'font-family="sans-serif">{label}</text>'
            )
    out.append(
        f'<text x="{_MARGIN_L + plot_w / 2:.0f}" y="{_HEIGHT - 10}" font-size="12" '
        f'text-anchor="middle" font-family="sans-serif">{xlabel}</text>'
    )
    out.append(
        f'<text x="16" y="{_MARGIN_T + plot_h / 2:.0f}" font-size="12" '
        f'text-anchor="middle" font-family="sans-serif" '
        f'transform="rotate(-90 16 {_MARGIN_T + plot_h / 2:.0f})">{ylabel}</text>'
    )
    if title:
        out.append(
            f'<text x="{_WIDTH / 2:.0f}" y="18" font-size="13" text-anchor="middle" '
            f'font-family="sans-serif">{title}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
