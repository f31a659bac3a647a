"""Dependency-free static SVG line charts (fixed 800x600 viewport)."""

import math

WIDTH = 800
HEIGHT = 600
MARGIN_L = 80
MARGIN_R = 30
MARGIN_T = 50
MARGIN_B = 60

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f"]


def nice_ticks(lo, hi, target=6):
    """Round tick positions covering [lo, hi] with a 1/2/5 step."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return [0.0, 1.0]
    if hi <= lo:
        hi = lo + max(abs(lo), 1.0) * 1e-3 + 1e-12
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / max(target, 2)))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if span / (step * mult) <= target:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 0.5 * step:
        ticks.append(0.0 if abs(v) < 0.5 * step * 1e-9 else v)
        v += step
    return ticks or [lo, hi]


def _fmt(x):
    return f"{x:.6g}"


def line_chart(series, title="", xlabel="", ylabel=""):
    """SVG text for polylines; ``series`` is a list of (label, xs, ys)."""
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    if not xs_all:
        xs_all, ys_all = [0.0, 1.0], [0.0, 1.0]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def px(x):
        return MARGIN_L + plot_w * (x - x_lo) / (x_hi - x_lo)

    def py(y):
        return MARGIN_T + plot_h * (1.0 - (y - y_lo) / (y_hi - y_lo))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
           f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
    out.append(f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" '
               f'height="{plot_h}" fill="none" stroke="black"/>')
    for tx in nice_ticks(x_lo, x_hi):
        if not (x_lo <= tx <= x_hi):
            continue
        X = px(tx)
        out.append(f'<line x1="{_fmt(X)}" y1="{MARGIN_T + plot_h}" '
                   f'x2="{_fmt(X)}" y2="{MARGIN_T + plot_h + 5}" stroke="black"/>')
        out.append(f'<text x="{_fmt(X)}" y="{MARGIN_T + plot_h + 20}" '
                   f'font-size="12" text-anchor="middle">{_fmt(tx)}</text>')
    for ty in nice_ticks(y_lo, y_hi):
        if not (y_lo <= ty <= y_hi):
            continue
        Y = py(ty)
        out.append(f'<line x1="{MARGIN_L - 5}" y1="{_fmt(Y)}" '
                   f'x2="{MARGIN_L}" y2="{_fmt(Y)}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_L - 8}" y="{_fmt(Y)}" font-size="12" '
                   f'text-anchor="end" dominant-baseline="middle">{_fmt(ty)}</text>')
    for i, (label, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"/>')
        ly = MARGIN_T + 16 + 16 * i
        out.append(f'<line x1="{WIDTH - 170}" y1="{ly - 4}" x2="{WIDTH - 145}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{WIDTH - 140}" y="{ly}" font-size="12">{label}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="25" font-size="16" '
                   f'text-anchor="middle">{title}</text>')
    if xlabel:
        out.append(f'<text x="{MARGIN_L + plot_w / 2}" y="{HEIGHT - 15}" '
                   f'font-size="13" text-anchor="middle">{xlabel}</text>')
    if ylabel:
        out.append(f'<text x="20" y="{MARGIN_T + plot_h / 2}" font-size="13" '
                   f'text-anchor="middle" transform="rotate(-90 20 '
                   f'{MARGIN_T + plot_h / 2})">{ylabel}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
