import numpy as np
import pytest

from trajcount.core import (BBox, DetectionRecord, FrameGeometry, HyperParams,
                            Point2)
from trajcount.ingest import DetectionSet
from trajcount.roi import (EmptyDetections, EmptyRoi, GridCluster,
                           accumulate_grid, aggregate_to_roi, cluster_cells,
                           compute_grid_size, estimate_roi, point_in_roi,
                           read_roi_file, remove_outlier_clusters,
                           select_cells, write_roi_file)

P = HyperParams()
GEOM = FrameGeometry(1000, 800)


def det(frame, cx, cy, w, h, conf=0.9):
    return DetectionRecord(frame=frame, bbox=BBox(cx - w / 2, cy - h / 2, w, h),
                           confidence=conf)


def make_set(records, geom=GEOM):
    return DetectionSet(frame_geometry=geom, records=tuple(records))


def test_grid_size_medians():
    d = make_set([det(0, 100, 100, w, h) for w, h in
                  [(10, 5), (20, 5), (30, 5)]])
    assert compute_grid_size(d) == 20
    d = make_set([det(0, 100, 100, w, h) for w, h in [(10, 40), (20, 40)]])
    assert compute_grid_size(d) == 40
    d = make_set([det(0, 100, 100, 7, 9)])
    assert compute_grid_size(d) == 9


def test_grid_size_needs_records():
    with pytest.raises(EmptyDetections):
        compute_grid_size(make_set([]))


def test_accumulate_cell_average():
    d = make_set([det(0, 5, 5, 4, 4, 0.6), det(1, 6, 6, 4, 4, 0.8)])
    g = accumulate_grid(d, 10.0)
    assert g.cols == 100 and g.rows == 80
    assert g.cell_avg_conf[0, 0] == pytest.approx(0.7)
    assert g.cell_count[0, 0] == 2
    assert np.isnan(g.cell_avg_conf[5, 5])


def test_accumulate_empty_all_absent():
    g = accumulate_grid(make_set([]), 10.0)
    assert np.all(np.isnan(g.cell_avg_conf))
    assert g.cell_count.sum() == 0


def test_center_on_cell_edge_floors_into_next_column():
    d = make_set([det(0, 10.0, 5.0, 4, 4)])
    g = accumulate_grid(d, 10.0)
    assert g.cell_count[0, 1] == 1 and g.cell_count[0, 0] == 0


def test_center_on_far_frame_edge_clamps_to_last_cell():
    geom = FrameGeometry(100, 100)
    d = make_set([det(0, 100.0, 100.0, 4, 4)], geom)
    g = accumulate_grid(d, 10.0)
    assert g.cell_count[9, 9] == 1


def test_select_cells_strict_threshold():
    d = make_set([det(0, 5, 5, 4, 4, 0.75), det(0, 15, 5, 4, 4, 0.76)])
    g = accumulate_grid(d, 10.0)
    assert select_cells(g, P) == {(1, 0)}
    low = HyperParams(lambda2=1e-9)
    assert select_cells(g, low) == {(0, 0), (1, 0)}


def test_cluster_cells_diagonal_is_adjacent():
    out = cluster_cells({(0, 0), (1, 1)})
    assert len(out) == 1 and out[0].cells == frozenset({(0, 0), (1, 1)})
    out = cluster_cells({(0, 0), (2, 2)})
    assert len(out) == 2
    assert cluster_cells(set()) == []


def test_cluster_cells_partition():
    rng = np.random.default_rng(9)
    cells = {(int(c), int(r)) for c, r in rng.integers(0, 12, size=(80, 2))}
    out = cluster_cells(cells)
    seen = set()
    for cl in out:
        assert not (cl.cells & seen)
        seen |= cl.cells
    assert seen == cells


def test_remove_outlier_clusters():
    def fake(area):
        return GridCluster(cells=frozenset((i, 0) for i in range(area)))

    kept = remove_outlier_clusters([fake(100), fake(100), fake(10)], P)
    assert sorted(cl.area for cl in kept) == [100, 100]
    kept = remove_outlier_clusters([fake(4), fake(4), fake(4)], P)
    assert len(kept) == 3
    assert len(remove_outlier_clusters([fake(1)], P)) == 1
    assert remove_outlier_clusters([], P) == []


def test_hull_of_square_block():
    block = GridCluster(cells=frozenset({(0, 0), (1, 0), (0, 1), (1, 1)}))
    roi = aggregate_to_roi([block], 10.0)
    assert roi.vertices == (Point2(0, 0), Point2(20, 0), Point2(20, 20), Point2(0, 20))


def test_single_hull_spans_all_clusters():
    a = GridCluster(cells=frozenset({(0, 0)}))
    b = GridCluster(cells=frozenset({(5, 0)}))
    roi = aggregate_to_roi([a, b], 10.0)
    xs = [v.x for v in roi.vertices]
    assert min(xs) == 0 and max(xs) == 60
    assert point_in_roi(roi, Point2(30, 5))


def test_l_shaped_cluster_corners_all_inside():
    cl = GridCluster(cells=frozenset({(0, 0), (0, 1), (1, 1)}))
    roi = aggregate_to_roi([cl], 10.0)
    for col, row in cl.cells:
        for dc in (0, 1):
            for dr in (0, 1):
                assert point_in_roi(roi, Point2((col + dc) * 10.0, (row + dr) * 10.0))


def test_boundary_cells_hull_equals_all_cells_hull():
    rng = np.random.default_rng(31)
    for _ in range(100):
        cells = {(int(c), int(r)) for c, r in rng.integers(0, 15, size=(60, 2))}
        clusters = cluster_cells(cells)
        roi = aggregate_to_roi(clusters, 7.0)
        corners = set()
        for cl in clusters:
            for col, row in cl.cells:
                for dc in (0, 1):
                    for dr in (0, 1):
                        corners.add(((col + dc) * 7.0, (row + dr) * 7.0))
        from trajcount.geometry import convex_hull
        full = convex_hull(corners)
        assert tuple(Point2(x, y) for x, y in full) == roi.vertices


def test_point_in_roi_cases():
    block = GridCluster(cells=frozenset({(0, 0), (1, 0), (0, 1), (1, 1)}))
    roi = aggregate_to_roi([block], 10.0)
    cx = sum(v.x for v in roi.vertices) / 4
    cy = sum(v.y for v in roi.vertices) / 4
    assert point_in_roi(roi, Point2(cx, cy))
    assert point_in_roi(roi, roi.vertices[0])
    assert not point_in_roi(roi, Point2(-1, -1))


def test_aggregate_empty_raises():
    with pytest.raises(EmptyRoi):
        aggregate_to_roi([], 10.0)


def test_collinear_cells_raise():
    row = GridCluster(cells=frozenset({(0, 0), (1, 0), (2, 0)}))
    # corners of a single row still span a rectangle, so this must succeed
    roi = aggregate_to_roi([row], 10.0)
    assert len(roi.vertices) == 4


def test_estimate_roi_excludes_small_far_cluster():
    # dense 6x2-cell band of confident detections plus a single confident
    # cell far away in a corner; the small cluster falls below lambda3
    records = []
    for i in range(120):
        records.append(det(i % 10, 25 + (i % 12) * 25, 100 + (i % 2) * 25, 25, 25, 0.9))
    for i in range(10):
        records.append(det(i, 960, 760, 25, 25, 0.95))
    d = make_set(records)
    roi = estimate_roi(d, P)
    assert not point_in_roi(roi, Point2(960, 760))
    assert point_in_roi(roi, Point2(150, 110))


def test_roi_file_round_trip(tmp_path):
    block = GridCluster(cells=frozenset({(0, 0), (1, 0), (0, 1), (1, 1)}))
    roi = aggregate_to_roi([block], 12.5)
    f = tmp_path / "roi.txt"
    write_roi_file(roi, f)
    back = read_roi_file(f)
    assert back == roi
    f2 = tmp_path / "roi2.txt"
    write_roi_file(back, f2)
    assert f.read_bytes() == f2.read_bytes()


def test_grid_clamp_keeps_roi_inside_frame():
    geom = FrameGeometry(95, 95)
    records = [det(0, 90 + dx, 90 + dy, 20, 20, 0.9) for dx in (-2, 0, 2) for dy in (-2, 0, 2)]
    d = make_set(records, geom)
    roi = estimate_roi(d, P)
    for v in roi.vertices:
        assert 0 <= v.x <= 95 and 0 <= v.y <= 95
