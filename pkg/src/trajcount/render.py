"""SVG rendering of pipeline output: ROI outline, representative paths with
arrowheads, per-movement count labels, optional confidence-grid and track
layers.  Output bytes are a pure function of the inputs."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import TrajcountError
from .counting import PipelineResult

LAYER_NAMES = ("grid-heatmap", "roi", "tracks", "paths", "counts")

# colorblind-safe categorical palette, cycled by cluster index
PALETTE = ("#e41a1c", "#377eb8", "#4daf4a", "#984ea3",
           "#ff7f00", "#a65628", "#f781bf", "#666666")


class RenderError(TrajcountError):
    pass


@dataclass(frozen=True)
class RenderSpec:
    width: int
    height: int
    layers: tuple[str, ...] = ("roi", "paths", "counts")
    roi_stroke: float = 3.0
    path_stroke: float = 2.5
    track_stroke: float = 1.0
    font_size: float = 18.0

    def __post_init__(self):
        if not self.layers:
            raise RenderError("at least one layer required")
        unknown = [l for l in self.layers if l not in LAYER_NAMES]
        if unknown:
            raise RenderError(f"unknown layers {unknown}; valid: {list(LAYER_NAMES)}")
        if self.width <= 0 or self.height <= 0:
            raise RenderError("render size must be positive")


def cluster_color(idx: int) -> str:
    return PALETTE[idx % len(PALETTE)]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _points_attr(pts) -> str:
    return " ".join(f"{_fmt(q.x)},{_fmt(q.y)}" for q in pts)


def _arrowhead(tip, prev, color: str, stroke: float) -> str:
    dx, dy = tip.x - prev.x, tip.y - prev.y
    n = math.hypot(dx, dy)
    if n == 0:
        return ""
    ux, uy = dx / n, dy / n
    length, half = 4.0 * stroke, 1.5 * stroke
    bx, by = tip.x - ux * length, tip.y - uy * length
    left = (bx - uy * half, by + ux * half)
    right = (bx + uy * half, by - ux * half)
    pts = f"{_fmt(tip.x)},{_fmt(tip.y)} {_fmt(left[0])},{_fmt(left[1])} {_fmt(right[0])},{_fmt(right[1])}"
    return f'<polygon points="{pts}" fill="{color}"/>'


def _heatmap_rects(grid) -> list[str]:
    out = []
    g = grid.grid_size
    for row in range(grid.rows):
        for col in range(grid.cols):
            conf = grid.cell_avg_conf[row, col]
            if np.isnan(conf):
                continue
            out.append(f'<rect x="{_fmt(col * g)}" y="{_fmt(row * g)}" '
                       f'width="{_fmt(g)}" height="{_fmt(g)}" '
                       f'fill="#cc0000" fill-opacity="{conf:.3f}"/>')
    return out


def render_svg(result: PipelineResult, spec: RenderSpec,
               grid=None, tracks=None) -> str:
    """Compose the requested layers into one SVG document string."""
    parts = ['<?xml version="1.0" encoding="UTF-8"?>',
             f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width}" '
             f'height="{spec.height}" viewBox="0 0 {spec.width} {spec.height}">',
             f'<rect width="{spec.width}" height="{spec.height}" fill="#ffffff"/>']

    if "grid-heatmap" in spec.layers:
        if grid is None:
            raise RenderError("grid-heatmap layer needs the grid field")
        parts.extend(_heatmap_rects(grid))

    if "roi" in spec.layers:
        parts.append(f'<polygon points="{_points_attr(result.roi.vertices)}" '
                     f'fill="none" stroke="#222222" stroke-width="{_fmt(spec.roi_stroke)}"/>')

    if "tracks" in spec.layers:
        if tracks is None:
            raise RenderError("tracks layer needs the track list")
        for t in tracks:
            pts = [pt for _, pt in t.points]
            parts.append(f'<polyline points="{_points_attr(pts)}" fill="none" '
                         f'stroke="#bbbbbb" stroke-width="{_fmt(spec.track_stroke)}"/>')

    if "paths" in spec.layers:
        for m in result.clusters:
            color = cluster_color(m.cluster_idx)
            for stream, arrow_at_end in ((m.path.forward, True), (m.path.backward, False)):
                if not stream:
                    continue
                parts.append(f'<polyline points="{_points_attr(stream)}" fill="none" '
                             f'stroke="{color}" stroke-width="{_fmt(spec.path_stroke)}"/>')
                if len(stream) >= 2:
                    tip, prev = ((stream[-1], stream[-2]) if arrow_at_end
                                 else (stream[0], stream[1]))
                    head = _arrowhead(tip, prev, color, spec.path_stroke)
                    if head:
                        parts.append(head)

    if "counts" in spec.layers:
        for m in result.clusters:
            stream = m.path.forward or m.path.backward
            if not stream:
                continue
            mid = stream[len(stream) // 2]
            parts.append(f'<text x="{_fmt(mid.x)}" y="{_fmt(mid.y - spec.font_size / 2)}" '
                         f'font-size="{_fmt(spec.font_size)}" font-family="sans-serif" '
                         f'fill="{cluster_color(m.cluster_idx)}">{m.count}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render(result: PipelineResult, spec: RenderSpec, out,
           grid=None, tracks=None) -> None:
    svg = render_svg(result, spec, grid=grid, tracks=tracks)
    try:
        with open(out, "w") as fh:
            fh.write(svg)
    except OSError as exc:
        raise RenderError(f"cannot write {out}: {exc}") from exc
