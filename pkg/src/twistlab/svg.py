"""Minimal dependency-free SVG scatter plot."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape


def scatter_svg(xs, ys, title: str = "", width: int = 480, height: int = 360, radius: float = 1.2) -> str:
    pts = [(float(x), float(y)) for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]
    pad = 36
    if pts:
        x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
        y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    else:
        x0 = y0 = 0.0
        x1 = y1 = 1.0
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    sx = (width - 2 * pad) / (x1 - x0)
    sy = (height - 2 * pad) / (y1 - y0)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" fill="none" stroke="#888"/>',
        f'<text x="{width / 2}" y="{pad / 2 + 4}" text-anchor="middle" font-size="12">{escape(title)}</text>',
        f'<text x="{pad}" y="{height - pad / 3}" font-size="10">{x0:.4g}</text>',
        f'<text x="{width - pad}" y="{height - pad / 3}" text-anchor="end" font-size="10">{x1:.4g}</text>',
        f'<text x="{pad - 4}" y="{height - pad}" text-anchor="end" font-size="10">{y0:.4g}</text>',
        f'<text x="{pad - 4}" y="{pad + 8}" text-anchor="end" font-size="10">{y1:.4g}</text>',
        '<g fill="#1f4e9c">',
    ]
    for x, y in pts:
        cx = pad + (x - x0) * sx
        cy = height - pad - (y - y0) * sy
        out.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{radius}"/>')
    out.append("</g></svg>\n")
    return "\n".join(out)
