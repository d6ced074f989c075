"""Synthetic traffic scenes with known lanes, counts and region of interest.

Vehicles advance along lane polylines at constant speed, centers jittered by
a Gaussian, confidences drawn from a clipped normal.  Clutter is the parked
vehicle analog: static high-confidence boxes near the frame border.  Output
is a DetectionSet carrying ground-truth track ids plus the ideal ROI polygon
and per-lane counts, all deterministic per seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .core import BBox, DetectionRecord, FrameGeometry, Point2, TrajcountError
from .geometry import convex_hull
from .ingest import DetectionSet


class ScenarioError(TrajcountError):
    pass


@dataclass(frozen=True)
class Lane:
    """One movement: polyline (vertex order is the travel direction),
    vehicles traversing it, and speed in pixels per frame."""

    points: tuple[Point2, ...]
    count: int
    speed: float

    def __post_init__(self):
        if len(self.points) < 2:
            raise ScenarioError("lane needs at least 2 points")
        if self.count < 0:
            raise ScenarioError(f"negative vehicle count {self.count}")
        if not self.speed > 0:
            raise ScenarioError(f"speed must be positive, got {self.speed}")


@dataclass(frozen=True)
class Scenario:
    width: int
    height: int
    frames: int
    lanes: tuple[Lane, ...]
    jitter_sigma: float = 0.0
    clutter_rate: float = 0.0
    conf_mean: float = 0.9
    conf_sigma: float = 0.05
    box_w: float = 40.0
    box_h: float = 30.0
    seed: int = 0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0 or self.frames <= 0:
            raise ScenarioError("frame geometry and frame count must be positive")
        for lane in self.lanes:
            for q in lane.points:
                if not (0 <= q.x <= self.width and 0 <= q.y <= self.height):
                    raise ScenarioError(f"lane point {q} outside the frame")


@dataclass(frozen=True)
class SynthOutput:
    detections: DetectionSet
    gt_roi: tuple[Point2, ...]
    gt_counts: tuple[int, ...]


def _arclength_tables(lane: Lane):
    xs = np.array([q.x for q in lane.points])
    ys = np.array([q.y for q in lane.points])
    steps = np.hypot(np.diff(xs), np.diff(ys))
    cum = np.concatenate([[0.0], np.cumsum(steps)])
    return xs, ys, cum


def _spawn_frames(s: Scenario, lane: Lane, travel: int) -> list[int]:
    """Start frames spread so traversals stagger across the scene length."""
    latest = max(0, s.frames - travel - 1)
    if lane.count <= 1:
        return [0] * lane.count
    return [round(i * latest / (lane.count - 1)) for i in range(lane.count)]


def ground_truth_roi(s: Scenario) -> tuple[Point2, ...]:
    """Convex hull of all lane vertices dilated by one nominal bbox."""
    hw, hh = s.box_w / 2, s.box_h / 2
    corners = []
    for lane in s.lanes:
        for q in lane.points:
            for dx in (-hw, hw):
                for dy in (-hh, hh):
                    corners.append(Point2(q.x + dx, q.y + dy))
    return tuple(convex_hull(corners))


def _nominal_size(s: Scenario, rng) -> tuple[float, float]:
    w = float(np.clip(rng.normal(s.box_w, 0.05 * s.box_w), 0.5 * s.box_w, 1.5 * s.box_w))
    h = float(np.clip(rng.normal(s.box_h, 0.05 * s.box_h), 0.5 * s.box_h, 1.5 * s.box_h))
    return w, h


def _clipped_conf(s: Scenario, rng) -> float:
    return float(np.clip(rng.normal(s.conf_mean, s.conf_sigma), 0.0, 1.0))


def generate(s: Scenario, seed: int | None = None) -> SynthOutput:
    """Roll out the scenario. Every record carries its ground-truth track id;
    a static clutter box gets an id of its own, like a parked vehicle would."""
    rng = np.random.default_rng(s.seed if seed is None else seed)
    records: list[DetectionRecord] = []
    vid = 0
    lane_detections = 0

    for lane in s.lanes:
        xs, ys, cum = _arclength_tables(lane)
        total = float(cum[-1])
        travel = int(math.ceil(total / lane.speed))
        for start in _spawn_frames(s, lane, travel):
            w, h = _nominal_size(s, rng)
            step = 0
            while start + step < s.frames and step * lane.speed <= total:
                dist = step * lane.speed
                px = float(np.interp(dist, cum, xs))
                py = float(np.interp(dist, cum, ys))
                jx, jy = rng.normal(0.0, s.jitter_sigma, size=2)
                conf = _clipped_conf(s, rng)
                cx, cy = px + float(jx), py + float(jy)
                if 0 <= cx <= s.width and 0 <= cy <= s.height:
                    records.append(DetectionRecord(
                        frame=start + step,
                        bbox=BBox(cx - w / 2, cy - h / 2, w, h),
                        confidence=conf, track_id=vid))
                    lane_detections += 1
                step += 1
            vid += 1

    if s.clutter_rate > 0 and lane_detections:
        n_boxes = max(1, round(s.clutter_rate * lane_detections / s.frames))
        for _ in range(n_boxes):
            corner = int(rng.integers(4))
            fx = float(rng.uniform(0.03, 0.10))
            fy = float(rng.uniform(0.03, 0.10))
            cx = fx * s.width if corner % 2 == 0 else (1 - fx) * s.width
            cy = fy * s.height if corner < 2 else (1 - fy) * s.height
            w, h = _nominal_size(s, rng)
            for f in range(s.frames):
                records.append(DetectionRecord(
                    frame=f, bbox=BBox(cx - w / 2, cy - h / 2, w, h),
                    confidence=_clipped_conf(s, rng), track_id=vid))
            vid += 1

    records.sort(key=lambda r: r.frame)
    detections = DetectionSet(frame_geometry=FrameGeometry(s.width, s.height),
                              records=tuple(records), source_id="synthetic")
    return SynthOutput(detections=detections,
                       gt_roi=ground_truth_roi(s),
                       gt_counts=tuple(lane.count for lane in s.lanes))


# Scenario file: the same `key = value` layout as the hyperparameter config,
# plus one LANE line per lane.

_INT_KEYS = {"width", "height", "frames", "seed"}
_REQUIRED = {"width", "height", "frames"}


def write_scenario_file(s: Scenario, path) -> None:
    lines = []
    for f in fields(Scenario):
        if f.name == "lanes":
            continue
        v = getattr(s, f.name)
        lines.append(f"{f.name} = {v if isinstance(v, int) else repr(float(v))}")
    for lane in s.lanes:
        coords = " ".join(f"{repr(float(q.x))} {repr(float(q.y))}" for q in lane.points)
        lines.append(f"LANE {len(lane.points)} {coords} {lane.count} {repr(float(lane.speed))}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def parse_scenario_lines(lines) -> Scenario:
    known = {f.name for f in fields(Scenario)} - {"lanes"}
    header: dict = {}
    lanes: list[Lane] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("LANE"):
            tokens = line.split()
            try:
                n = int(tokens[1])
                vals = [float(t) for t in tokens[2:2 + 2 * n]]
                count = int(tokens[2 + 2 * n])
                speed = float(tokens[3 + 2 * n])
            except (IndexError, ValueError):
                raise ScenarioError(f"line {lineno}: malformed LANE record") from None
            pts = tuple(Point2(vals[i], vals[i + 1]) for i in range(0, 2 * n, 2))
            lanes.append(Lane(points=pts, count=count, speed=speed))
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected `key = value` or LANE")
        name, _, text = line.partition("=")
        name = name.strip()
        if name not in known:
            raise ScenarioError(f"line {lineno}: unknown key {name!r}")
        try:
            header[name] = int(text) if name in _INT_KEYS else float(text)
        except ValueError:
            raise ScenarioError(f"line {lineno}: bad value for {name}") from None
    missing = _REQUIRED - header.keys()
    if missing:
        raise ScenarioError(f"scenario missing keys: {sorted(missing)}")
    if not lanes:
        raise ScenarioError("scenario has no lanes")
    return Scenario(lanes=tuple(lanes), **header)


def read_scenario_file(path) -> Scenario:
    with open(path) as fh:
        return parse_scenario_lines(fh.read().splitlines())
