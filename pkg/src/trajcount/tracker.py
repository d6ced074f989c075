"""Frame-to-frame association of detections into tracks.

A deliberately simple substitute for an appearance-based tracker: detections
inside the ROI are greedily matched to open tracks by IoU distance against the
track's last box, gated at lambda4.  Externally produced track ids can be
adopted instead via `adopt_external_tracks`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .core import BBox, Point2, TrajcountError, bbox_center
from .ingest import DetectionSet, group_by_frame
from .roi import RoiPolygon, point_in_roi

DEFAULT_MAX_AGE = 30  # frames a track may go unmatched before it closes


class MixedIdPresence(TrajcountError):
    pass


@dataclass
class Track:
    id: int
    points: list[tuple[int, Point2]] = field(default_factory=list)
    bbox_history: list[BBox] = field(default_factory=list)

    def first_center(self) -> Point2:
        return self.points[0][1]

    def last_center(self) -> Point2:
        return self.points[-1][1]


def iou(a: BBox, b: BBox) -> float:
    ix = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    iy = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.w * a.h + b.w * b.h - inter)


def greedy_match(track_boxes: list[BBox], det_boxes: list[BBox],
                 gate: float) -> list[tuple[int, int]]:
    """Ascending-cost greedy assignment on IoU distance (1 - IoU).

    Pairs with cost above `gate` are never matched.  Cost ties break by lower
    detection index, then lower track index, which keeps runs deterministic.
    """
    candidates = []
    for ti, tb in enumerate(track_boxes):
        for di, db in enumerate(det_boxes):
            cost = 1.0 - iou(tb, db)
            if cost <= gate:
                candidates.append((cost, di, ti))
    candidates.sort()
    used_t, used_d = set(), set()
    pairs = []
    for cost, di, ti in candidates:
        if ti in used_t or di in used_d:
            continue
        used_t.add(ti)
        used_d.add(di)
        pairs.append((ti, di))
    return pairs


def track(d: DetectionSet, roi: RoiPolygon, p, max_age: int = DEFAULT_MAX_AGE) -> list[Track]:
    """Associate in-ROI detections into tracks; tracks shorter than 2 points
    are discarded."""
    open_tracks: list[dict] = []   # {"track": Track, "last_frame": int}
    finished: list[Track] = []
    next_id = 0
    for frame, records in group_by_frame(d):
        still_open = []
        for entry in open_tracks:
            if frame - entry["last_frame"] > max_age:
                finished.append(entry["track"])
            else:
                still_open.append(entry)
        open_tracks = still_open

        in_roi = [r for r in records if point_in_roi(roi, bbox_center(r.bbox))]
        track_boxes = [e["track"].bbox_history[-1] for e in open_tracks]
        det_boxes = [r.bbox for r in in_roi]
        pairs = greedy_match(track_boxes, det_boxes, p.lambda4)

        matched_dets = set()
        for ti, di in pairs:
            entry = open_tracks[ti]
            rec = in_roi[di]
            entry["track"].points.append((frame, bbox_center(rec.bbox)))
            entry["track"].bbox_history.append(rec.bbox)
            entry["last_frame"] = frame
            matched_dets.add(di)
        for di, rec in enumerate(in_roi):
            if di in matched_dets:
                continue
            t = Track(id=next_id, points=[(frame, bbox_center(rec.bbox))],
                      bbox_history=[rec.bbox])
            next_id += 1
            open_tracks.append({"track": t, "last_frame": frame})

    finished.extend(e["track"] for e in open_tracks)
    finished = [t for t in finished if len(t.points) >= 2]
    finished.sort(key=lambda t: t.id)
    return finished


def adopt_external_tracks(d: DetectionSet, roi: RoiPolygon) -> list[Track]:
    """Group records by their supplied track_id, keep in-ROI points only.

    Raises MixedIdPresence unless every record carries a track_id.
    """
    if d.records and any(r.track_id is None for r in d.records):
        have = sum(r.track_id is not None for r in d.records)
        raise MixedIdPresence(f"{have}/{len(d.records)} records carry a track_id")
    grouped: dict[int, Track] = {}
    for r in d.records:  # records are frame-sorted after ingestion
        if not point_in_roi(roi, bbox_center(r.bbox)):
            continue
        t = grouped.setdefault(r.track_id, Track(id=r.track_id))
        if t.points and t.points[-1][0] == r.frame:
            continue  # duplicate frame within one external id: keep first
        t.points.append((r.frame, bbox_center(r.bbox)))
        t.bbox_history.append(r.bbox)
    return sorted((t for t in grouped.values() if len(t.points) >= 2), key=lambda t: t.id)


def write_track_file(tracks: list[Track], path) -> None:
    with open(path, "w") as fh:
        for t in sorted(tracks, key=lambda t: t.id):
            for frame, c in t.points:
                fh.write(f"TRACK {t.id} {frame} {repr(float(c.x))} {repr(float(c.y))}\n")


def parse_track_lines(lines) -> list[Track]:
    grouped: dict[int, Track] = {}
    for raw in lines:
        tokens = raw.split()
        if not tokens or tokens[0] != "TRACK":
            continue
        tid, frame = int(tokens[1]), int(tokens[2])
        pt = Point2(float(tokens[3]), float(tokens[4]))
        grouped.setdefault(tid, Track(id=tid)).points.append((frame, pt))
    tracks = sorted(grouped.values(), key=lambda t: t.id)
    for t in tracks:
        t.points.sort(key=lambda fp: fp[0])
    return tracks


def read_track_file(path) -> list[Track]:
    with open(path) as fh:
        return parse_track_lines(fh)
