"""Pipeline evaluation: polygon IoU of the recovered ROI and count MAE.

IoU is rasterized at pixel resolution over the joint bounding box, which
sidesteps exact clipping of mixed convex/non-convex polygon pairs and is the
quantity image-domain evaluations usually mean anyway.  MAE normalizes the
summed absolute count error by the summed ground truth, in percent.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Point2, TrajcountError
from .counting import MovementCluster
from .geometry import point_polyline_distance


class DegeneratePolygon(TrajcountError):
    pass


class EmptyGroundTruth(TrajcountError):
    pass


def _raster_mask(vertices, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Even-odd point-in-polygon test over a grid of sample points."""
    inside = np.zeros(px.shape, dtype=bool)
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        if y1 == y2:
            continue
        crosses = (y1 > py) != (y2 > py)
        xi = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (px < xi)
    return inside


def polygon_iou(a, b, step: float = 1.0) -> float:
    """Area IoU of two simple polygons, sampled at pixel centers.

    `step` is the sample spacing; 1.0 means one sample per pixel. The same
    grid rasterizes both polygons, so the measure is exactly symmetric.
    """
    av = [(float(q[0]), float(q[1])) for q in a]
    bv = [(float(q[0]), float(q[1])) for q in b]
    for name, v in (("first", av), ("second", bv)):
        area = sum(v[i][0] * v[(i + 1) % len(v)][1] - v[(i + 1) % len(v)][0] * v[i][1]
                   for i in range(len(v))) / 2 if len(v) >= 3 else 0.0
        if abs(area) == 0.0:
            raise DegeneratePolygon(f"{name} polygon has zero area")
    xs = [q[0] for q in av + bv]
    ys = [q[1] for q in av + bv]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    nx = max(1, int(np.ceil((x1 - x0) / step)))
    ny = max(1, int(np.ceil((y1 - y0) / step)))
    cx = x0 + (np.arange(nx) + 0.5) * step
    cy = y0 + (np.arange(ny) + 0.5) * step
    px, py = np.meshgrid(cx, cy)
    in_a = _raster_mask(av, px, py)
    in_b = _raster_mask(bv, px, py)
    union = int(np.count_nonzero(in_a | in_b))
    if union == 0:
        return 0.0
    return float(np.count_nonzero(in_a & in_b) / union)


def _path_to_lane_distance(cluster: MovementCluster, lane_points) -> float:
    """Mean distance of the representative path vertices to the lane polyline."""
    vertices = list(cluster.path.forward) + list(cluster.path.backward)
    lane = [Point2(float(q[0]), float(q[1])) for q in lane_points]
    return float(np.mean([point_polyline_distance(v, lane) for v in vertices]))


def count_mae(gt_counts, pred_clusters, gt_paths):
    """Sum-normalized absolute count error in percent, plus the matching.

    Clusters pair with ground-truth movements greedily by ascending mean
    path-to-lane distance, one-to-one.  Unmatched entries on either side
    count against the error in full.
    """
    gt_counts = list(gt_counts)
    if not gt_counts:
        raise EmptyGroundTruth("no ground-truth movements")
    if len(gt_counts) != len(gt_paths):
        raise ValueError("one ground-truth path per count required")

    pairs = []
    for ci, cluster in enumerate(pred_clusters):
        for gi in range(len(gt_counts)):
            pairs.append((_path_to_lane_distance(cluster, gt_paths[gi]), ci, gi))
    pairs.sort()
    matched_c: dict[int, int] = {}
    matched_g: dict[int, int] = {}
    for dist, ci, gi in pairs:
        if ci in matched_c or gi in matched_g:
            continue
        matched_c[ci] = gi
        matched_g[gi] = ci

    error = 0
    per_movement = []
    for gi, gt in enumerate(gt_counts):
        if gi in matched_g:
            ci = matched_g[gi]
            pred = pred_clusters[ci].count
            per_movement.append((gt, pred, pred_clusters[ci].cluster_idx))
        else:
            pred, ci = 0, None
            per_movement.append((gt, 0, None))
        error += abs(pred - gt)
    for ci, cluster in enumerate(pred_clusters):
        if ci not in matched_c:
            error += cluster.count
    mae_pct = 100.0 * error / sum(gt_counts)
    return mae_pct, per_movement


@dataclass(frozen=True)
class EvalReport:
    roi_iou: float
    mae_pct: float
    per_movement: tuple[tuple[int, int, int | None], ...]


def evaluate(est_roi_vertices, pred_clusters, scenario, gt_roi=None) -> EvalReport:
    """Score one pipeline result against its generating scenario."""
    from .synth import ground_truth_roi
    if gt_roi is None:
        gt_roi = ground_truth_roi(scenario)
    iou = polygon_iou(est_roi_vertices, gt_roi)
    mae, per_movement = count_mae([lane.count for lane in scenario.lanes],
                                  pred_clusters,
                                  [lane.points for lane in scenario.lanes])
    return EvalReport(roi_iou=iou, mae_pct=mae, per_movement=tuple(per_movement))


def format_report_lines(report: EvalReport) -> list[str]:
    lines = [f"IOU {repr(report.roi_iou)}", f"MAE {repr(report.mae_pct)}"]
    for gi, (gt, pred, ci) in enumerate(report.per_movement):
        tag = "-" if ci is None else str(ci)
        lines.append(f"MOVEMENT {gi} {gt} {pred} {tag}")
    return lines


def write_report_file(report: EvalReport, path) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(format_report_lines(report)) + "\n")


def parse_report_lines(lines) -> EvalReport:
    iou = mae = None
    per = []
    for raw in lines:
        tokens = raw.split()
        if not tokens:
            continue
        if tokens[0] == "IOU":
            iou = float(tokens[1])
        elif tokens[0] == "MAE":
            mae = float(tokens[1])
        elif tokens[0] == "MOVEMENT":
            ci = None if tokens[4] == "-" else int(tokens[4])
            per.append((int(tokens[2]), int(tokens[3]), ci))
    if iou is None or mae is None:
        raise TrajcountError("report missing IOU or MAE record")
    return EvalReport(roi_iou=iou, mae_pct=mae, per_movement=tuple(per))
