"""Detection-record file parsing and per-frame grouping.

File format (whitespace separated, `.`-decimal reals):

    #geometry <width> <height>
    <frame> <x> <y> <w> <h> <confidence> <class> [track_id]

The header must be the first non-blank line; any other line starting with `#`
is a comment.  Confidences below the lambda1 floor are filtered (inclusive
boundary: confidence == lambda1 is retained), car/truck labels collapse to
`vehicle`, and any other class is dropped with a counted warning.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import groupby
from typing import Iterator

from .core import BBox, DetectionRecord, FrameGeometry, HyperParams, TrajcountError, bbox_center

log = logging.getLogger(__name__)

_VEHICLE_ALIASES = {"car", "truck", "vehicle"}


class IngestError(TrajcountError):
    pass


class GeometryMissing(IngestError):
    pass


class MalformedLine(IngestError):
    def __init__(self, line_no: int, detail: str):
        super().__init__(f"line {line_no}: {detail}")
        self.line_no = line_no


class ConfidenceOutOfRange(IngestError):
    def __init__(self, line_no: int, value: float):
        super().__init__(f"line {line_no}: confidence {value} outside [0,1]")
        self.line_no = line_no


class CenterOutsideFrame(IngestError):
    def __init__(self, line_no: int, center):
        super().__init__(f"line {line_no}: bbox center {center} outside frame")
        self.line_no = line_no


@dataclass(frozen=True)
class DetectionSet:
    frame_geometry: FrameGeometry
    records: tuple[DetectionRecord, ...]
    source_id: str = ""
    skipped_classes: int = field(default=0, compare=False)


def _parse_header(line: str, line_no: int) -> FrameGeometry:
    tokens = line.split()
    if len(tokens) != 3 or tokens[0] != "#geometry":
        raise GeometryMissing(f"expected `#geometry <width> <height>` header, got line {line_no}")
    try:
        w, h = int(tokens[1]), int(tokens[2])
    except ValueError:
        raise GeometryMissing(f"non-integer geometry on line {line_no}") from None
    if w <= 0 or h <= 0:
        raise GeometryMissing(f"non-positive geometry {w}x{h}")
    return FrameGeometry(w, h)


def _parse_record(tokens: list[str], line_no: int, geom: FrameGeometry) -> DetectionRecord | None:
    """Returns None for records of classes outside the vehicle set."""
    if len(tokens) not in (7, 8):
        raise MalformedLine(line_no, f"expected 7 or 8 fields, got {len(tokens)}")
    try:
        frame = int(tokens[0])
        x, y, w, h = (float(t) for t in tokens[1:5])
        conf = float(tokens[5])
    except ValueError as e:
        raise MalformedLine(line_no, str(e)) from None
    if frame < 0:
        raise MalformedLine(line_no, f"negative frame {frame}")
    if w <= 0 or h <= 0:
        raise MalformedLine(line_no, f"non-positive bbox extent {w}x{h}")
    if not (0.0 <= conf <= 1.0):
        raise ConfidenceOutOfRange(line_no, conf)
    label = tokens[6]
    if label not in _VEHICLE_ALIASES:
        return None
    track_id = None
    if len(tokens) == 8:
        try:
            track_id = int(tokens[7])
        except ValueError:
            raise MalformedLine(line_no, f"bad track id {tokens[7]!r}") from None
        if track_id < 0:
            raise MalformedLine(line_no, f"negative track id {track_id}")
    bbox = BBox(x, y, w, h)
    cx, cy = bbox_center(bbox)
    if not (0.0 <= cx <= geom.width and 0.0 <= cy <= geom.height):
        raise CenterOutsideFrame(line_no, (cx, cy))
    return DetectionRecord(frame=frame, bbox=bbox, confidence=conf,
                           class_label="vehicle", track_id=track_id)


def parse_detection_lines(lines, p: HyperParams, source_id: str = "") -> DetectionSet:
    geom = None
    records: list[DetectionRecord] = []
    skipped = 0
    for line_no, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if geom is None:
            if not stripped:
                continue
            geom = _parse_header(stripped, line_no)
            continue
        if not stripped or (stripped.startswith("#") and not stripped.startswith("#geometry")):
            continue
        rec = _parse_record(stripped.split(), line_no, geom)
        if rec is None:
            skipped += 1
            continue
        if rec.confidence >= p.lambda1:
            records.append(rec)
    if geom is None:
        raise GeometryMissing("no header record found")
    if skipped:
        log.warning("dropped %d non-vehicle detection(s) from %s", skipped, source_id or "<input>")
    records.sort(key=lambda r: r.frame)  # stable: input order preserved within a frame
    return DetectionSet(frame_geometry=geom, records=tuple(records),
                        source_id=source_id, skipped_classes=skipped)


def parse_detection_file(path, p: HyperParams) -> DetectionSet:
    with open(path) as fh:
        return parse_detection_lines(fh, p, source_id=str(path))


def format_record(r: DetectionRecord) -> str:
    # repr of a builtin float round-trips losslessly; coerce first so numpy
    # scalars cannot leak their own repr into the file
    parts = [str(r.frame), repr(float(r.bbox.x)), repr(float(r.bbox.y)),
             repr(float(r.bbox.w)), repr(float(r.bbox.h)),
             repr(float(r.confidence)), r.class_label]
    if r.track_id is not None:
        parts.append(str(int(r.track_id)))
    return " ".join(parts)


def write_detection_file(d: DetectionSet, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"#geometry {d.frame_geometry.width} {d.frame_geometry.height}\n")
        for r in d.records:
            fh.write(format_record(r) + "\n")


def group_by_frame(d: DetectionSet) -> Iterator[tuple[int, list[DetectionRecord]]]:
    """Frames in ascending order; frames with no detections are skipped."""
    for frame, group in groupby(d.records, key=lambda r: r.frame):
        yield frame, list(group)
