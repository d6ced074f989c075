"""End-to-end movement counting.

Detections -> ROI -> tracks -> feature clustering -> representative paths ->
deviant-track purge with a single re-clustering pass -> per-movement counts.
Every tracker-emitted track ends up either counted in exactly one movement
or listed as purged, never both.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clustering import (AllPurged, TooFewTracks, featurize_tracks,
                         purge_and_recluster, select_k)
from .core import HyperParams
from .ingest import DetectionSet
from .reppath import (NoPath, RepresentativePath, ZeroAverageVector,
                      distance_to_path, format_path_records, parse_path_records,
                      representative_path, segments_of_tracks)
from .roi import RoiPolygon, estimate_roi, format_roi_lines, parse_roi_lines
from .tracker import (DEFAULT_MAX_AGE, MixedIdPresence, Track,
                      adopt_external_tracks, track)


@dataclass(frozen=True)
class MovementCluster:
    """One traffic movement: its member tracks and their common path."""
    cluster_idx: int
    track_ids: tuple[int, ...]
    path: RepresentativePath

    @property
    def count(self) -> int:
        return len(self.track_ids)


@dataclass(frozen=True)
class PipelineResult:
    roi: RoiPolygon
    clusters: tuple[MovementCluster, ...]
    purged_track_ids: tuple[int, ...]
    params_used: HyperParams = field(default=HyperParams())

    @property
    def counts(self) -> dict[int, int]:
        return {m.cluster_idx: m.count for m in self.clusters}

    @property
    def total_tracked(self) -> int:
        return sum(m.count for m in self.clusters) + len(self.purged_track_ids)


def remove_deviant_tracks(clusters, paths, grid_size: float, p: HyperParams):
    """Drop tracks that stray from their own cluster's path.

    `clusters` is a list of track lists, `paths` the parallel path list.
    A track is deviant when any of its points is farther than
    lambda7 * grid_size from every path vertex (forward and backward pooled).
    Returns the surviving per-cluster track lists and the purged ids.
    """
    limit = p.lambda7 * grid_size
    surviving: list[list[Track]] = []
    purged: list[int] = []
    for members, path in zip(clusters, paths):
        kept = []
        for t in members:
            worst = max(distance_to_path(path, pt) for _, pt in t.points)
            if worst > limit:
                purged.append(t.id)
            else:
                kept.append(t)
        surviving.append(kept)
    return surviving, purged


def derive_tracks(detections: DetectionSet, roi: RoiPolygon, p: HyperParams,
                  max_age: int = DEFAULT_MAX_AGE) -> list[Track]:
    """Adopt external track ids when present, else run the built-in tracker."""
    ids_present = [r.track_id is not None for r in detections.records]
    if any(ids_present) and not all(ids_present):
        raise MixedIdPresence("some records carry track ids, some do not")
    if ids_present and all(ids_present):
        return adopt_external_tracks(detections, roi)
    return track(detections, roi, p, max_age=max_age)


def _cluster_pass(tracks: list[Track], p: HyperParams, seed: int,
                  grid_size: float):
    """One clustering + path + deviant-removal round.

    Returns (groups, purged_ids); groups is a list of (member tracks, path)
    in cluster-index order.  Degenerate tracks and members of clusters
    without a usable path are reported purged.
    """
    purged: list[int] = []
    features, kept_idx, degenerate_idx = featurize_tracks(tracks, p)
    purged.extend(tracks[i].id for i in degenerate_idx)
    usable = [tracks[i] for i in kept_idx]
    try:
        first = select_k(features, p, seed)
        outcome = purge_and_recluster(first, features, p, seed)
    except TooFewTracks as exc:
        raise AllPurged(str(exc)) from exc
    purged.extend(usable[i].id for i in outcome.purged)
    survivors = [usable[i] for i in outcome.kept]
    labels = outcome.result.assignments

    member_lists: list[list[Track]] = []
    paths: list[RepresentativePath] = []
    for c in range(outcome.result.k):
        members = [survivors[i] for i in np.flatnonzero(labels == c)]
        if not members:
            continue
        segs = segments_of_tracks(members)
        try:
            path = representative_path(segs, p, grid_size,
                                       num_tracks=len(members))
        except (ZeroAverageVector, NoPath):
            purged.extend(t.id for t in members)
            continue
        member_lists.append(members)
        paths.append(path)

    surviving, deviant_ids = remove_deviant_tracks(member_lists, paths,
                                                   grid_size, p)
    purged.extend(deviant_ids)
    groups = [(kept, path) for kept, path in zip(surviving, paths) if kept]
    return groups, purged


def run_pipeline(detections: DetectionSet, p: HyperParams, seed: int,
                 max_age: int = DEFAULT_MAX_AGE) -> PipelineResult:
    """Full counting pass over one detection set."""
    roi = estimate_roi(detections, p)
    tracks = derive_tracks(detections, roi, p, max_age=max_age)
    if not tracks:
        raise AllPurged("no tracks inside the region of interest")

    total = len(tracks)
    purged: list[int] = []
    groups, newly_purged = _cluster_pass(tracks, p, seed, roi.grid_size)
    purged.extend(newly_purged)

    if newly_purged and groups:
        # one re-cluster and re-path pass over the survivors; tracks that
        # turn deviant after it are only purged, never clustered again
        survivors = [t for members, _ in groups for t in members]
        try:
            groups, again = _cluster_pass(survivors, p, seed, roi.grid_size)
            purged.extend(again)
        except AllPurged:
            purged.extend(t.id for t in survivors)
            groups = []

    clusters = tuple(
        MovementCluster(cluster_idx=i,
                        track_ids=tuple(sorted(t.id for t in members)),
                        path=path)
        for i, (members, path) in enumerate(groups))
    if not clusters:
        raise AllPurged("every track was purged")

    result = PipelineResult(roi=roi, clusters=clusters,
                            purged_track_ids=tuple(sorted(purged)),
                            params_used=p)
    assert result.total_tracked == total
    return result


def format_result_lines(result: PipelineResult) -> list[str]:
    lines = format_roi_lines(result.roi)
    for m in result.clusters:
        lines.extend(format_path_records(m.cluster_idx, m.path))
    for m in result.clusters:
        lines.append(f"COUNT {m.cluster_idx} {m.count}")
    for tid in result.purged_track_ids:
        lines.append(f"PURGED {tid}")
    return lines


def write_result_file(result: PipelineResult, path) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(format_result_lines(result)) + "\n")


def parse_result_lines(lines):
    """Read back (roi, paths by cluster, counts by cluster, purged ids)."""
    material = [ln for ln in lines if ln.strip()]
    roi = parse_roi_lines(material)
    paths = parse_path_records(material)
    counts: dict[int, int] = {}
    purged: list[int] = []
    for ln in material:
        tokens = ln.split()
        if tokens[0] == "COUNT":
            counts[int(tokens[1])] = int(tokens[2])
        elif tokens[0] == "PURGED":
            purged.append(int(tokens[1]))
    return roi, paths, counts, purged


def read_result_file(path):
    with open(path) as fh:
        return parse_result_lines(fh.read().splitlines())
