"""SVG 1.1 drawings of planar frameworks."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .core import Framework
from .errors import InvalidInput

SIZE = 800.0
MARGIN = 0.05 * SIZE
RADIUS = 6.0

_STYLE = """
    line { stroke: #333; stroke-width: 2; }
    circle.vertex { fill: #fff; stroke: #222; stroke-width: 2; }
    circle.shared { fill: #d62728; stroke: #222; stroke-width: 2; }
    text { font-family: sans-serif; font-size: 14px; fill: #000; }
"""


def layout(points: np.ndarray) -> np.ndarray:
    """Scale raw coordinates uniformly into the drawing area, y pointing up."""
    lo, hi = points.min(axis=0), points.max(axis=0)
    span = float(np.max(hi - lo))
    inner = SIZE - 2 * MARGIN
    scale = inner / span if span > 0 else 1.0
    offset = MARGIN + 0.5 * (inner - scale * (hi - lo))
    xy = (points - lo) * scale + offset
    xy[:, 1] = SIZE - xy[:, 1]
    return xy


def render(fw: Framework, labels=None, shared=()) -> str:
    if fw.d != 2:
        raise InvalidInput(f"only planar frameworks can be drawn, got d={fw.d}")
    labels = labels or [str(i + 1) for i in range(fw.v)]
    shared = set(shared)
    xy = layout(fw.points)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{SIZE:g}" height="{SIZE:g}" viewBox="0 0 {SIZE:g} {SIZE:g}">',
        f"<style>{_STYLE}</style>",
    ]
    for i, j in fw.graph.edges:
        (x1, y1), (x2, y2) = xy[i], xy[j]
        out.append(f'<line x1="{x1:.3f}" y1="{y1:.3f}" x2="{x2:.3f}" y2="{y2:.3f}"/>')
    for k, (x, y) in enumerate(xy):
        cls = "shared" if k in shared else "vertex"
        out.append(f'<circle class="{cls}" cx="{x:.3f}" cy="{y:.3f}" r="{RADIUS:g}"/>')
        out.append(f'<text x="{x + 1.5 * RADIUS:.3f}" y="{y - 1.5 * RADIUS:.3f}">'
                   f"{escape(labels[k])}</text>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
