"""Minimal self-contained SVG emitters (no plotting dependency).

Output is deterministic: floats are formatted at fixed precision so the
same data always produces identical bytes.
"""
from __future__ import annotations

WIDTH, HEIGHT = 640, 480
MARGIN = 50
GROUP_COLORS = {
    "ground_truth": "#1f77b4",
    "model_output": "#d62728",
}
FALLBACK_COLORS = ("#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def _scale(values, lo_px, hi_px):
    vmin, vmax = min(values), max(values)
    span = vmax - vmin
    if span == 0:
        return lambda v: (lo_px + hi_px) / 2
    return lambda v: lo_px + (v - vmin) / span * (hi_px - lo_px)


def _color_for(group: str, palette: dict) -> str:
    if group not in palette:
        palette[group] = GROUP_COLORS.get(
            group, FALLBACK_COLORS[len(palette) % len(FALLBACK_COLORS)]
        )
    return palette[group]


def scatter_svg(points, title: str = "") -> str:
    """Scatter plot of (x, y, group) triples, colored by group."""
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>'
        )
    if points:
        sx = _scale([p[0] for p in points], MARGIN, WIDTH - MARGIN)
        sy = _scale([p[1] for p in points], HEIGHT - MARGIN, MARGIN)
        palette: dict = {}
        for x, y, group in points:
            color = _color_for(group, palette)
            parts.append(
                f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="4" '
                f'fill="{color}" fill-opacity="0.7"><title>{group}</title></circle>'
            )
        for i, (group, color) in enumerate(sorted(palette.items())):
            ly = MARGIN + i * 18
            parts.append(f'<circle cx="{WIDTH - 150}" cy="{ly}" r="5" fill="{color}"/>')
            parts.append(
                f'<text x="{WIDTH - 138}" y="{ly + 4}" font-family="sans-serif" '
                f'font-size="12">{group}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts)


def bar_svg(labels, values, title: str = "", y_max: float = 1.0) -> str:
    """Bar chart of per-item values in [0, y_max]."""
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>'
        )
    if values:
        plot_w = WIDTH - 2 * MARGIN
        plot_h = HEIGHT - 2 * MARGIN
        bar_w = plot_w / len(values)
        for i, (label, v) in enumerate(zip(labels, values)):
            h = max(0.0, min(v, y_max)) / y_max * plot_h
            x = MARGIN + i * bar_w
            y = HEIGHT - MARGIN - h
            parts.append(
                f'<rect x="{_fmt(x + bar_w * 0.1)}" y="{_fmt(y)}" '
                f'width="{_fmt(bar_w * 0.8)}" height="{_fmt(h)}" fill="#1f77b4">'
                f"<title>{label}: {v:.4f}</title></rect>"
            )
        # y axis reference lines at 0, 0.5 and 1.0 of y_max
        for frac in (0.0, 0.5, 1.0):
            y = HEIGHT - MARGIN - frac * plot_h
            parts.append(
                f'<line x1="{MARGIN}" y1="{_fmt(y)}" x2="{WIDTH - MARGIN}" y2="{_fmt(y)}" '
                f'stroke="#cccccc" stroke-width="1"/>'
            )
            parts.append(
                f'<text x="{MARGIN - 8}" y="{_fmt(y + 4)}" text-anchor="end" '
                f'font-family="sans-serif" font-size="11">{frac * y_max:.1f}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts)
