import pytest

from trajcount.clustering import AllPurged
from trajcount.core import (BBox, DetectionRecord, FrameGeometry, HyperParams,
                            Point2)
from trajcount.counting import (derive_tracks, read_result_file,
                                remove_deviant_tracks, run_pipeline,
                                write_result_file)
from trajcount.ingest import DetectionSet
from trajcount.reppath import RepresentativePath
from trajcount.synth import Lane, Scenario, generate
from trajcount.tracker import MixedIdPresence, Track

P = HyperParams()


def strip_ids(d: DetectionSet) -> DetectionSet:
    recs = tuple(DetectionRecord(frame=r.frame, bbox=r.bbox, confidence=r.confidence,
                                 class_label=r.class_label) for r in d.records)
    return DetectionSet(frame_geometry=d.frame_geometry, records=recs)


def two_lane_scene(jitter=0.0, seed=0):
    lanes = (Lane(points=(Point2(50, 200), Point2(750, 200)), count=5, speed=10),
             Lane(points=(Point2(750, 400), Point2(50, 400)), count=5, speed=10))
    return Scenario(width=800, height=600, frames=100, lanes=lanes,
                    jitter_sigma=jitter, seed=seed)


def flat_path(y, xs):
    return RepresentativePath(forward=tuple(Point2(x, y) for x in xs),
                              backward=(), v_bar=(1.0, 0.0))


def drifting_track(tid, y, wobble=0.0):
    pts = [(f, Point2(10.0 * f, y + (wobble if f == 5 else 0.0)))
           for f in range(11)]
    return Track(id=tid, points=pts)


def test_remove_deviant_tracks_basic():
    path = flat_path(0.0, range(0, 110, 10))
    near = drifting_track(1, 0.0, wobble=2.0)
    far = drifting_track(2, 0.0, wobble=300.0)
    surviving, purged = remove_deviant_tracks([[near, far]], [path],
                                              grid_size=10.0, p=P)
    assert surviving == [[near]]
    assert purged == [2]


def test_remove_deviant_boundary_is_kept():
    # limit is lambda7 * grid_size = 50; a worst distance of exactly 50 stays
    path = flat_path(0.0, range(0, 110, 10))
    edge = drifting_track(3, 0.0, wobble=50.0)
    beyond = drifting_track(4, 0.0, wobble=50.0 + 1e-9)
    surviving, purged = remove_deviant_tracks([[edge, beyond]], [path], 10.0, P)
    assert surviving == [[edge]]
    assert purged == [4]


def test_remove_deviant_empty():
    assert remove_deviant_tracks([], [], 10.0, P) == ([], [])


def test_remove_deviant_idempotent():
    path = flat_path(0.0, range(0, 110, 10))
    members = [drifting_track(i, 0.0, wobble=float(i)) for i in range(6)]
    members.append(drifting_track(9, 0.0, wobble=400.0))
    surviving, purged = remove_deviant_tracks([members], [path], 10.0, P)
    assert purged == [9]
    again, more = remove_deviant_tracks(surviving, [path], 10.0, P)
    assert more == []
    assert again == surviving


def test_two_lanes_count_exactly():
    out = generate(two_lane_scene())
    result = run_pipeline(strip_ids(out.detections), P, seed=0)
    assert sorted(result.counts.values()) == [5, 5]
    assert result.purged_track_ids == ()
    assert result.total_tracked == 10
    assert result.params_used is P
    assert [m.cluster_idx for m in result.clusters] == [0, 1]


def test_external_ids_are_adopted():
    out = generate(two_lane_scene())
    result = run_pipeline(out.detections, P, seed=0)
    assert sorted(result.counts.values()) == [5, 5]
    claimed = {tid for m in result.clusters for tid in m.track_ids}
    assert claimed == set(range(10))


def test_mixed_ids_rejected():
    out = generate(two_lane_scene())
    recs = list(out.detections.records)
    bare = recs[0]
    recs[0] = DetectionRecord(frame=bare.frame, bbox=bare.bbox,
                              confidence=bare.confidence)
    d = DetectionSet(frame_geometry=out.detections.frame_geometry,
                     records=tuple(recs))
    with pytest.raises(MixedIdPresence):
        run_pipeline(d, P, seed=0)


def test_single_vehicle_cannot_be_clustered():
    lanes = (Lane(points=(Point2(50, 200), Point2(750, 200)), count=1, speed=10),)
    out = generate(Scenario(width=800, height=600, frames=100, lanes=lanes))
    with pytest.raises(AllPurged):
        run_pipeline(strip_ids(out.detections), P, seed=0)


def test_static_scene_cannot_be_clustered():
    recs = tuple(DetectionRecord(frame=f, bbox=BBox(380, 280, 40, 30),
                                 confidence=0.9, track_id=0) for f in range(10))
    d = DetectionSet(frame_geometry=FrameGeometry(800, 600), records=recs)
    with pytest.raises(AllPurged):
        run_pipeline(d, P, seed=0)


def test_conservation_under_jitter():
    lanes = (Lane(points=(Point2(50, 100), Point2(700, 300)), count=6, speed=10),
             Lane(points=(Point2(700, 500), Point2(50, 300)), count=6, speed=10))
    s = Scenario(width=800, height=600, frames=110, lanes=lanes,
                 jitter_sigma=0.5, seed=4)
    out = generate(s)
    result = run_pipeline(out.detections, P, seed=4)
    emitted = derive_tracks(out.detections, result.roi, P)
    assert result.total_tracked == len(emitted)
    counted = [tid for m in result.clusters for tid in m.track_ids]
    assert len(counted) == len(set(counted))
    assert not set(counted) & set(result.purged_track_ids)


def test_counts_property_matches_members():
    out = generate(two_lane_scene())
    result = run_pipeline(out.detections, P, seed=0)
    for m in result.clusters:
        assert result.counts[m.cluster_idx] == m.count == len(m.track_ids)


def test_result_file_round_trip(tmp_path):
    out = generate(two_lane_scene())
    result = run_pipeline(out.detections, P, seed=0)
    f1 = tmp_path / "result.txt"
    write_result_file(result, f1)
    roi, paths, counts, purged = read_result_file(f1)
    assert roi == result.roi
    assert counts == result.counts
    assert purged == list(result.purged_track_ids)
    for m in result.clusters:
        assert paths[m.cluster_idx].forward == m.path.forward
        assert paths[m.cluster_idx].backward == m.path.backward
    f2 = tmp_path / "again.txt"
    write_result_file(result, f2)
    assert f1.read_bytes() == f2.read_bytes()
    assert "np." not in f1.read_text()


def test_pipeline_deterministic_per_seed():
    lanes = (Lane(points=(Point2(50, 100), Point2(700, 300)), count=6, speed=10),
             Lane(points=(Point2(700, 500), Point2(50, 300)), count=6, speed=10))
    out = generate(Scenario(width=800, height=600, frames=110, lanes=lanes,
                            jitter_sigma=1.0, seed=2))
    a = run_pipeline(out.detections, P, seed=7)
    b = run_pipeline(out.detections, P, seed=7)
    assert a.counts == b.counts
    assert a.purged_track_ids == b.purged_track_ids
    assert a.roi == b.roi
    for ma, mb in zip(a.clusters, b.clusters):
        assert ma.track_ids == mb.track_ids
        assert ma.path == mb.path
