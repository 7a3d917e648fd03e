"""Static SVG ranking plot: variables sorted by descending IG, filled markers
for relevant variables, hollow for the rest, dashed line at IG_lim."""

from __future__ import annotations

import numpy as np

WIDTH, HEIGHT = 800, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 30, 50


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def ranking_svg(statistic, relevant, ig_lim: float, title: str = "") -> str:
    statistic = np.asarray(statistic, dtype=np.float64)
    relevant = set(int(i) for i in relevant)
    n = statistic.size
    order = np.lexsort((np.arange(n), -statistic))
    y_max = max(float(statistic.max(initial=0.0)), ig_lim, 1e-12) * 1.05
    y_min = min(float(statistic.min(initial=0.0)), 0.0)
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def sx(rank):
        return MARGIN_L + (rank + 0.5) * pw / max(n, 1)

    def sy(v):
        return MARGIN_T + ph * (1.0 - (v - y_min) / (y_max - y_min))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{MARGIN_T + ph}" stroke="black"/>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T + ph}" x2="{MARGIN_L + pw}" y2="{MARGIN_T + ph}" stroke="black"/>',
        f'<text x="{MARGIN_L + pw / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle" '
        'font-family="sans-serif" font-size="13">variables sorted by IG</text>',
        f'<text x="16" y="{MARGIN_T + ph / 2:.1f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13" transform="rotate(-90 16 {MARGIN_T + ph / 2:.1f})">IG</text>',
    ]
    if title:
        out.append(
            f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle" font-family="sans-serif" '
            f'font-size="14">{_escape(title)}</text>'
        )
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        v = y_min + frac * (y_max - y_min)
        out.append(
            f'<text x="{MARGIN_L - 6}" y="{_fmt(sy(v) + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{v:.3g}</text>'
        )
    ly = sy(ig_lim)
    out.append(
        f'<line class="ig-limit" x1="{MARGIN_L}" y1="{_fmt(ly)}" x2="{MARGIN_L + pw}" '
        f'y2="{_fmt(ly)}" stroke="red" stroke-dasharray="6,4"/>'
    )
    for rank, i in enumerate(order):
        cls, fill = ("relevant", "black") if i in relevant else ("irrelevant", "none")
        out.append(
            f'<circle class="{cls}" data-variable="{i}" cx="{_fmt(sx(rank))}" '
            f'cy="{_fmt(sy(statistic[i]))}" r="3" fill="{fill}" stroke="black"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
