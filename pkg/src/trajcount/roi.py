"""Region-of-interest estimation from detection confidence statistics.

The frame is split into square grid cells sized by the median bbox extent.
Cells whose mean detection confidence clears a threshold are clustered by
8-neighborhood DFS, small clusters are discarded as clutter, and the convex
hull of the survivors' cell corners becomes the ROI polygon.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import FrameGeometry, HyperParams, Point2, TrajcountError, bbox_center
from .geometry import convex_hull, point_in_convex, polygon_area
from .ingest import DetectionSet

Cell = tuple[int, int]  # (col, row)

_NEIGHBORS = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]


class EmptyDetections(TrajcountError):
    pass


class EmptyRoi(TrajcountError):
    pass


@dataclass(frozen=True)
class GridField:
    grid_size: float
    cols: int
    rows: int
    cell_avg_conf: np.ndarray  # (rows, cols) float, NaN where a cell saw no centers
    cell_count: np.ndarray     # (rows, cols) int


@dataclass(frozen=True)
class GridCluster:
    cells: frozenset[Cell]

    @property
    def area(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class RoiPolygon:
    """Convex polygon, CCW vertex order (positive shoelace area), plus the
    grid size it was derived from for downstream distance scaling."""

    vertices: tuple[Point2, ...]
    grid_size: float

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise ValueError("ROI polygon needs at least 3 vertices")
        if polygon_area(self.vertices) <= 0:
            raise ValueError("ROI polygon must be CCW with positive area")


def compute_grid_size(d: DetectionSet) -> float:
    """max(median of bbox widths, median of bbox heights); even-length medians
    average the two middle values."""
    if not d.records:
        raise EmptyDetections("cannot size the grid without detections")
    widths = np.array([r.bbox.w for r in d.records])
    heights = np.array([r.bbox.h for r in d.records])
    return float(max(np.median(widths), np.median(heights)))


def accumulate_grid(d: DetectionSet, grid_size: float) -> GridField:
    """Mean detection confidence per cell, binning bbox centers with the floor
    convention; centers on the frame's far edges clamp into the last cell."""
    if grid_size <= 0:
        raise ValueError("grid_size must be positive")
    geom = d.frame_geometry
    cols = math.ceil(geom.width / grid_size)
    rows = math.ceil(geom.height / grid_size)
    sums = np.zeros((rows, cols))
    counts = np.zeros((rows, cols), dtype=np.int64)
    if d.records:
        centers = np.array([bbox_center(r.bbox) for r in d.records])
        confs = np.array([r.confidence for r in d.records])
        ci = np.minimum(np.floor(centers[:, 0] / grid_size).astype(np.int64), cols - 1)
        ri = np.minimum(np.floor(centers[:, 1] / grid_size).astype(np.int64), rows - 1)
        np.add.at(sums, (ri, ci), confs)
        np.add.at(counts, (ri, ci), 1)
    with np.errstate(invalid="ignore"):
        avg = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return GridField(grid_size=grid_size, cols=cols, rows=rows,
                     cell_avg_conf=avg, cell_count=counts)


def select_cells(g: GridField, p: HyperParams) -> set[Cell]:
    """Cells strictly above the lambda2 confidence threshold."""
    ri, ci = np.nonzero(np.nan_to_num(g.cell_avg_conf, nan=-1.0) > p.lambda2)
    return {(int(c), int(r)) for c, r in zip(ci, ri)}


def cluster_cells(cells: set[Cell]) -> list[GridCluster]:
    """Maximal 8-neighborhood connected components, DFS.  Output is ordered by
    each component's minimum (row, col) for determinism."""
    remaining = set(cells)
    clusters = []
    for seed in sorted(cells, key=lambda c: (c[1], c[0])):
        if seed not in remaining:
            continue
        component = set()
        stack = [seed]
        remaining.discard(seed)
        while stack:
            col, row = stack.pop()
            component.add((col, row))
            for dc, dr in _NEIGHBORS:
                nb = (col + dc, row + dr)
                if nb in remaining:
                    remaining.discard(nb)
                    stack.append(nb)
        clusters.append(GridCluster(cells=frozenset(component)))
    clusters.sort(key=lambda cl: min((r, c) for c, r in cl.cells))
    return clusters


def remove_outlier_clusters(clusters: list[GridCluster], p: HyperParams) -> list[GridCluster]:
    """Drop clusters with area strictly under lambda3 of the mean cluster area."""
    if not clusters:
        return []
    mean_area = sum(cl.area for cl in clusters) / len(clusters)
    return [cl for cl in clusters if cl.area >= p.lambda3 * mean_area]


def _boundary_cells(cluster: GridCluster) -> list[Cell]:
    cells = cluster.cells
    out = []
    for col, row in cells:
        if any((col + dc, row + dr) not in cells for dc, dr in _NEIGHBORS):
            out.append((col, row))
    return out


def _cell_corners(cells, grid_size: float, frame: FrameGeometry | None):
    corners = set()
    for col, row in cells:
        for dc in (0, 1):
            for dr in (0, 1):
                x = (col + dc) * grid_size
                y = (row + dr) * grid_size
                if frame is not None:
                    x = min(x, float(frame.width))
                    y = min(y, float(frame.height))
                corners.add((x, y))
    return corners


def aggregate_to_roi(clusters: list[GridCluster], grid_size: float,
                     frame: FrameGeometry | None = None) -> RoiPolygon:
    """Single convex hull over the corner points of every cluster's boundary
    cells.  Corners of partial cells at the far edges clamp to the frame."""
    if not clusters or not any(cl.cells for cl in clusters):
        raise EmptyRoi("no grid clusters to aggregate")
    corners = set()
    for cl in clusters:
        corners |= _cell_corners(_boundary_cells(cl), grid_size, frame)
    hull = convex_hull(corners)
    if len(hull) < 3:
        raise EmptyRoi("cluster corners are collinear; no polygon")
    return RoiPolygon(vertices=tuple(Point2(x, y) for x, y in hull), grid_size=grid_size)


def point_in_roi(roi: RoiPolygon, pt: Point2) -> bool:
    """Boundary-inclusive containment."""
    return point_in_convex(roi.vertices, (pt[0], pt[1]))


def estimate_roi(d: DetectionSet, p: HyperParams) -> RoiPolygon:
    """Full module pass: grid sizing, accumulation, selection, clustering,
    clutter removal, hull aggregation."""
    grid_size = compute_grid_size(d)
    field = accumulate_grid(d, grid_size)
    cells = select_cells(field, p)
    clusters = remove_outlier_clusters(cluster_cells(cells), p)
    return aggregate_to_roi(clusters, grid_size, frame=d.frame_geometry)


def format_roi_lines(roi: RoiPolygon) -> list[str]:
    coords = " ".join(f"{repr(float(v.x))} {repr(float(v.y))}" for v in roi.vertices)
    return [f"ROI {len(roi.vertices)} {coords}", f"GRIDSIZE {repr(float(roi.grid_size))}"]


def write_roi_file(roi: RoiPolygon, path) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(format_roi_lines(roi)) + "\n")


def parse_roi_lines(lines) -> RoiPolygon:
    vertices = None
    grid_size = None
    for raw in lines:
        tokens = raw.split()
        if not tokens:
            continue
        if tokens[0] == "ROI":
            n = int(tokens[1])
            vals = [float(t) for t in tokens[2:2 + 2 * n]]
            vertices = tuple(Point2(vals[i], vals[i + 1]) for i in range(0, 2 * n, 2))
        elif tokens[0] == "GRIDSIZE":
            grid_size = float(tokens[1])
    if vertices is None or grid_size is None:
        raise TrajcountError("ROI file missing ROI or GRIDSIZE record")
    return RoiPolygon(vertices=vertices, grid_size=grid_size)


def read_roi_file(path) -> RoiPolygon:
    with open(path) as fh:
        return parse_roi_lines(fh)
