"""Dependency-free SVG figures: z-statistic histograms and rejection curves."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN = 50
COLORS = {"z1": "#1f5fbf", "z2": "#2e9e44", "normal": "#d62728"}


def _frame(title, xlo, xhi, ylo, yhi, xlabel, ylabel):
    sx = lambda v: MARGIN + (v - xlo) / (xhi - xlo) * (WIDTH - 2 * MARGIN)  # noqa: E731
    sy = lambda v: HEIGHT - MARGIN - (v - ylo) / (yhi - ylo) * (HEIGHT - 2 * MARGIN)  # noqa: E731
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="14" y="{HEIGHT / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {HEIGHT / 2})">{escape(ylabel)}</text>',
    ]
    for v in np.linspace(xlo, xhi, 5):
        parts.append(f'<text x="{sx(v):.1f}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle" font-size="10">{v:.2g}</text>')
    for v in np.linspace(ylo, yhi, 5):
        parts.append(f'<text x="{MARGIN - 6}" y="{sy(v) + 3:.1f}" text-anchor="end" font-size="10">{v:.2g}</text>')
    return parts, sx, sy


def _polyline(xs, ys, color, width=2):
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"/>'


def histogram_svg(z1, z2, title="Empirical distribution of the z statistics", bins=60, span=5.0):
    """Density histograms of both statistics with the N(0, 1) density on top."""
    edges = np.linspace(-span, span, bins + 1)
    h1, _ = np.histogram(np.clip(z1, -span, span), bins=edges, density=True)
    h2, _ = np.histogram(np.clip(z2, -span, span), bins=edges, density=True)
    grid = np.linspace(-span, span, 241)
    dens = np.exp(-0.5 * grid**2) / math.sqrt(2 * math.pi)
    ymax = 1.1 * max(h1.max(), h2.max(), dens.max())
    parts, sx, sy = _frame(title, -span, span, 0.0, ymax, "z", "density")
    for h, key, opacity in ((h1, "z1", 0.45), (h2, "z2", 0.35)):
        for lo, hi, v in zip(edges[:-1], edges[1:], h):
            parts.append(
                f'<rect x="{sx(lo):.2f}" y="{sy(v):.2f}" width="{sx(hi) - sx(lo):.2f}" '
                f'height="{sy(0) - sy(v):.2f}" fill="{COLORS[key]}" fill-opacity="{opacity}"/>'
            )
    parts.append(_polyline([sx(g) for g in grid], [sy(d) for d in dens], COLORS["normal"]))
    parts.append(_legend([("Z1", COLORS["z1"]), ("Z2", COLORS["z2"]), ("N(0,1)", COLORS["normal"])]))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def rejection_svg(points, level=0.05, title="Rejection rate"):
    """Rejection curves of both statistics against alpha_1, with the nominal level."""
    xs = [pt.alpha1 for pt in points]
    xlo, xhi = min(xs), max(xs)
    if xlo == xhi:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    parts, sx, sy = _frame(title, xlo, xhi, 0.0, 1.0, "alpha_1", "rejection rate")
    parts.append(_polyline([sx(x) for x in xs], [sy(pt.reject1) for pt in points], COLORS["z1"]))
    parts.append(_polyline([sx(x) for x in xs], [sy(pt.reject2) for pt in points], COLORS["z2"]))
    parts.append(
        f'<line x1="{sx(xlo):.2f}" y1="{sy(level):.2f}" x2="{sx(xhi):.2f}" y2="{sy(level):.2f}" '
        f'stroke="{COLORS["normal"]}" stroke-dasharray="5,4"/>'
    )
    parts.append(_legend([("Z1", COLORS["z1"]), ("Z2", COLORS["z2"]), (f"{level:g} level", COLORS["normal"])]))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _legend(entries):
    out = []
    for i, (label, color) in enumerate(entries):
        y = MARGIN + 14 * i
        out.append(f'<rect x="{WIDTH - MARGIN - 90}" y="{y - 8}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{WIDTH - MARGIN - 74}" y="{y + 1}" font-size="11">{escape(label)}</text>')
    return "\n".join(out)
