"""Representative path of a track cluster via a directional double sweep.

All segments are rotated so the cluster's average direction becomes the +x
axis.  A sweep position visits thinned endpoint x-values; segments straddling
the position contribute their interpolated y, averaged separately for
segments running with and against the average direction.  Candidate segments
are retrieved from a quad-tree over endpoint coordinates; `naive_sweep` is
the same computation with full-scan retrieval and must match bit-for-bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import HyperParams, Point2, TrajcountError
from .quadtree import QuadTree
from .tracker import Track


class ZeroAverageVector(TrajcountError):
    pass


class NoPath(TrajcountError):
    pass


@dataclass(frozen=True)
class Segment:
    a: Point2
    b: Point2
    track_id: int

    @property
    def direction(self) -> tuple[float, float]:
        dx, dy = self.b.x - self.a.x, self.b.y - self.a.y
        n = math.hypot(dx, dy)
        return (dx / n, dy / n)


def segments_of_tracks(tracks: list[Track]) -> list[Segment]:
    """Consecutive-point segments of every track; zero-length steps are skipped."""
    segs = []
    for t in tracks:
        for (f0, p0), (f1, p1) in zip(t.points, t.points[1:]):
            if p0 == p1:
                continue
            segs.append(Segment(a=p0, b=p1, track_id=t.id))
    return segs


def average_vector(segments: list[Segment]) -> tuple[float, float]:
    """Normalized sum of all segment displacement vectors."""
    if not segments:
        raise ZeroAverageVector("no segments")
    sx = sum(s.b.x - s.a.x for s in segments)
    sy = sum(s.b.y - s.a.y for s in segments)
    n = math.hypot(sx, sy)
    if n == 0.0:
        raise ZeroAverageVector("segment directions cancel out")
    return (sx / n, sy / n)


def rotate_to_sweep_frame(segments: list[Segment], v_bar) -> list[Segment]:
    """Map each point p to (p . v, p . v_perp), v_perp = v rotated +90 deg."""
    vx, vy = v_bar
    out = []
    append = out.append
    for s in segments:
        a, b = s.a, s.b
        append(Segment(a=Point2(a.x * vx + a.y * vy, -a.x * vy + a.y * vx),
                       b=Point2(b.x * vx + b.y * vy, -b.x * vy + b.y * vx),
                       track_id=s.track_id))
    return out


def sweep_frame_to_image(pt: Point2, v_bar) -> Point2:
    vx, vy = v_bar
    return Point2(pt.x * vx - pt.y * vy, pt.x * vy + pt.y * vx)


@dataclass(frozen=True)
class RepresentativePath:
    forward: tuple[Point2, ...]   # runs with the average direction
    backward: tuple[Point2, ...]  # runs against it
    v_bar: tuple[float, float]


class _SweepProblem:
    """Shared arrays and per-position evaluation for both sweep variants."""

    def __init__(self, segments: list[Segment], p: HyperParams, grid_size: float,
                 num_tracks: int):
        if grid_size <= 0:
            raise ValueError("grid_size must be positive")
        self.ax = np.array([s.a.x for s in segments])
        self.ay = np.array([s.a.y for s in segments])
        self.bx = np.array([s.b.x for s in segments])
        self.by = np.array([s.b.y for s in segments])
        self.n = len(segments)
        self.window = p.lambda7 * grid_size
        self.support = max(p.lambda8_floor, p.lambda8_frac * num_tracks)
        self.gamma = grid_size if p.gamma_is_grid_size else 0.0

    def positions(self) -> list[float]:
        """Endpoint x-values, ascending, thinned to a minimum gamma spacing."""
        xs = np.unique(np.concatenate([self.ax, self.bx])) if self.n else np.array([])
        accepted: list[float] = []
        for x in xs:
            if not accepted or x - accepted[-1] >= self.gamma:
                accepted.append(float(x))
        return accepted

    def evaluate(self, x: float, candidates: np.ndarray,
                 candidates_unique: bool = False):
        """Directional y-averages at x over the straddling candidate segments.

        Returns (forward_y | None, backward_y | None), or None when the
        straddling count misses the support threshold.  Candidates are
        deduplicated and processed in index order so that any retrieval
        producing the same candidate superset yields identical floats;
        `candidates_unique` skips the no-op dedup for pre-sorted inputs.
        """
        idx = candidates if candidates_unique else np.unique(candidates)
        lo = np.minimum(self.ax[idx], self.bx[idx])
        hi = np.maximum(self.ax[idx], self.bx[idx])
        sel = idx[(lo <= x) & (x <= hi)]
        if sel.size < self.support:
            return None
        ax, bx = self.ax[sel], self.bx[sel]
        ay, by = self.ay[sel], self.by[sel]
        run = bx - ax
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.where(run != 0.0, (x - ax) / np.where(run != 0.0, run, 1.0), 0.5)
        ys = ay + t * (by - ay)
        fwd = ys[run >= 0.0]
        bwd = ys[run < 0.0]
        return (float(fwd.mean()) if fwd.size else None,
                float(bwd.mean()) if bwd.size else None)


def _split_points(ax: float, bx: float, window: float) -> list[float]:
    """Interior cut x-values at multiples of the window width, so every
    straddling piece keeps an endpoint within the query window."""
    lo, hi = (ax, bx) if ax <= bx else (bx, ax)
    first = math.floor(lo / window) + 1
    last = math.ceil(hi / window) - 1
    return [m * window for m in range(first, last + 1) if lo < m * window < hi]


def _build_index(prob: _SweepProblem) -> QuadTree:
    ax, ay, bx, by = prob.ax, prob.ay, prob.bx, prob.by
    window = prob.window
    lo = np.minimum(ax, bx)
    hi = np.maximum(ax, bx)
    # segments whose span crosses no window multiple need no interior cuts
    need = np.floor(lo / window) + 1 <= np.ceil(hi / window) - 1
    ex: list[float] = []
    ey: list[float] = []
    ep: list[int] = []
    for i in np.flatnonzero(need):
        run = bx[i] - ax[i]
        for cx in _split_points(ax[i], bx[i], window):
            t = (cx - ax[i]) / run
            ex.append(cx)
            ey.append(ay[i] + t * (by[i] - ay[i]))
            ep.append(int(i))
    xs = np.concatenate([ax, bx, np.array(ex)])
    ys = np.concatenate([ay, by, np.array(ey)])
    ids = np.concatenate([np.arange(prob.n), np.arange(prob.n),
                          np.array(ep, dtype=int)])
    # generous node capacity: queries span the full y-range, so a shallow
    # tree beats a finely subdivided one
    return QuadTree.build(xs.min(), ys.min(), xs.max(), ys.max(),
                          zip(xs.tolist(), ys.tolist(), ids.tolist()),
                          capacity=64)


def _finish(prob: _SweepProblem, retrieve, v_bar, p: HyperParams,
            candidates_unique: bool = False) -> RepresentativePath:
    forward: list[Point2] = []
    backward: list[Point2] = []
    for x in prob.positions():
        cand = retrieve(x)
        if cand.size == 0:
            continue
        got = prob.evaluate(x, cand, candidates_unique)
        if got is None:
            continue
        fy, by = got
        if fy is not None:
            forward.append(Point2(x, fy))
        if by is not None:
            backward.append(Point2(x, by))
    if len(forward) < p.lambda9:
        forward = []
    if len(backward) < p.lambda9:
        backward = []
    if not forward and not backward:
        raise NoPath("no direction kept enough sweep points")
    back_to_image = lambda pts: tuple(sweep_frame_to_image(q, v_bar) for q in pts)
    return RepresentativePath(forward=back_to_image(forward),
                              backward=back_to_image(backward), v_bar=tuple(v_bar))


def sweep(segments_in_frame: list[Segment], v_bar, p: HyperParams,
          grid_size: float, num_tracks: int) -> RepresentativePath:
    """Double sweep with quad-tree candidate retrieval."""
    if not segments_in_frame:
        raise NoPath("no segments")
    prob = _SweepProblem(segments_in_frame, p, grid_size, num_tracks)
    tree = _build_index(prob)

    def retrieve(x):
        found = tree.query(x - prob.window, x + prob.window, -math.inf, math.inf)
        return np.array(found, dtype=int)

    return _finish(prob, retrieve, v_bar, p)


def naive_sweep(segments_in_frame: list[Segment], v_bar, p: HyperParams,
                grid_size: float, num_tracks: int) -> RepresentativePath:
    """Linear-scan oracle: identical contract to `sweep`, no index."""
    if not segments_in_frame:
        raise NoPath("no segments")
    prob = _SweepProblem(segments_in_frame, p, grid_size, num_tracks)
    everything = np.arange(prob.n)
    return _finish(prob, lambda x: everything, v_bar, p, candidates_unique=True)


def representative_path(segments: list[Segment], p: HyperParams, grid_size: float,
                        num_tracks: int, use_naive: bool = False) -> RepresentativePath:
    """Average direction, rotation, sweep and rotation back in one call."""
    v = average_vector(segments)
    rotated = rotate_to_sweep_frame(segments, v)
    run = naive_sweep if use_naive else sweep
    return run(rotated, v, p, grid_size, num_tracks)


def distance_to_path(path: RepresentativePath, pt: Point2) -> float:
    """Minimum distance from pt to the emitted path vertices (both directions)."""
    vertices = list(path.forward) + list(path.backward)
    if not vertices:
        raise ValueError("path has no vertices")
    return min(math.hypot(pt.x - q.x, pt.y - q.y) for q in vertices)


def format_path_records(cluster_idx: int, path: RepresentativePath) -> list[str]:
    lines = []
    for tag, pts in (("F", path.forward), ("B", path.backward)):
        if not pts:
            continue
        coords = " ".join(f"{repr(float(q.x))} {repr(float(q.y))}" for q in pts)
        lines.append(f"PATH {cluster_idx} {tag} {len(pts)} {coords}")
    return lines


def parse_path_records(lines) -> dict[int, RepresentativePath]:
    """Paths keyed by cluster index; v_bar is not stored in the file format
    and comes back as the forward +x axis."""
    acc: dict[int, dict[str, tuple[Point2, ...]]] = {}
    for raw in lines:
        tokens = raw.split()
        if not tokens or tokens[0] != "PATH":
            continue
        ci, tag, n = int(tokens[1]), tokens[2], int(tokens[3])
        vals = [float(t) for t in tokens[4:4 + 2 * n]]
        pts = tuple(Point2(vals[i], vals[i + 1]) for i in range(0, 2 * n, 2))
        acc.setdefault(ci, {})[tag] = pts
    return {ci: RepresentativePath(forward=d.get("F", ()), backward=d.get("B", ()),
                                   v_bar=(1.0, 0.0))
            for ci, d in acc.items()}
