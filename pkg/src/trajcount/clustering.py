"""Track clustering: 7-d features, k-means with silhouette-based k selection,
and removal of under-populated clusters with re-clustering at the reduced k.

The feature of a track is (x_first, y_first, x_last, y_last, dx, dy,
lambda5 * heading) with heading = atan2(dy, dx).  Features are deliberately
left unstandardized; lambda5 is the only scaling knob.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import HyperParams, TrajcountError
from .tracker import Track

KMEANS_MAX_ITER = 300


class DegenerateTrack(TrajcountError):
    pass


class TooFewTracks(TrajcountError):
    pass


class SingleCluster(TrajcountError):
    pass


class AllPurged(TrajcountError):
    pass


@dataclass(frozen=True)
class ClusteringResult:
    k: int
    assignments: np.ndarray  # (n,) cluster index per feature row
    centroids: np.ndarray    # (k, 7)
    silhouette: float


def featurize(t: Track, p: HyperParams) -> np.ndarray:
    if len(t.points) < 2:
        raise DegenerateTrack(f"track {t.id} has fewer than 2 points")
    x0, y0 = t.first_center()
    x1, y1 = t.last_center()
    dx, dy = x1 - x0, y1 - y0
    if dx == 0.0 and dy == 0.0:
        raise DegenerateTrack(f"track {t.id} has zero displacement")
    theta = math.atan2(dy, dx)
    if p.angle_degrees:
        theta = math.degrees(theta)
    return np.array([x0, y0, x1, y1, dx, dy, p.lambda5 * theta])


def featurize_tracks(tracks: list[Track], p: HyperParams):
    """Features for every non-degenerate track.

    Returns (features, kept_indices, degenerate_indices); degenerate tracks
    (zero displacement) cannot be clustered and are reported, not raised.
    """
    rows, kept, degenerate = [], [], []
    for i, t in enumerate(tracks):
        try:
            rows.append(featurize(t, p))
        except DegenerateTrack:
            degenerate.append(i)
        else:
            kept.append(i)
    features = np.array(rows) if rows else np.empty((0, 7))
    return features, kept, degenerate


def _pairwise_sq(X: np.ndarray) -> np.ndarray:
    sq = np.sum(X * X, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def _dist2_to_centroids(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    d2 = np.sum(X * X, axis=1)[:, None] + np.sum(C * C, axis=1)[None, :] - 2.0 * (X @ C.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def _kmeanspp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    idx = [int(rng.integers(n))]
    d2 = np.sum((X - X[idx[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            # every remaining point coincides with a chosen center
            for j in range(n):
                if j not in idx:
                    idx.append(j)
                    break
            continue
        r = rng.random() * total
        j = int(np.searchsorted(np.cumsum(d2), r, side="right"))
        j = min(j, n - 1)
        idx.append(j)
        d2 = np.minimum(d2, np.sum((X - X[j]) ** 2, axis=1))
    return X[idx].astype(float).copy()


def _repair_empty(X, centroids, d2, labels, k):
    """Reseed empty clusters from the point farthest from its assigned centroid."""
    for _ in range(k):
        present = np.bincount(labels, minlength=k)
        empties = np.nonzero(present == 0)[0]
        if empties.size == 0:
            return labels, d2
        j = int(empties[0])
        assigned = d2[np.arange(X.shape[0]), labels]
        far = int(np.argmax(assigned))
        centroids[j] = X[far]
        d2 = _dist2_to_centroids(X, centroids)
        labels = d2.argmin(axis=1)
    return labels, d2


def _lloyd(X: np.ndarray, k: int, seed: int, trace: list | None = None):
    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(X, k, rng)
    labels = None
    for _ in range(KMEANS_MAX_ITER):
        d2 = _dist2_to_centroids(X, centroids)
        new_labels = d2.argmin(axis=1)
        new_labels, d2 = _repair_empty(X, centroids, d2, new_labels, k)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            centroids[j] = X[labels == j].mean(axis=0)
        if trace is not None:
            sse = float(np.sum((X - centroids[labels]) ** 2))
            trace.append(sse)
    return labels, centroids


def _silhouette_from_sq(d2: np.ndarray, labels: np.ndarray) -> float:
    d = np.sqrt(d2)
    uniq = np.unique(labels)
    if uniq.size < 2:
        raise SingleCluster("silhouette needs at least 2 clusters")
    n = d.shape[0]
    scores = np.zeros(n)
    masks = {int(c): labels == c for c in uniq}
    sizes = {c: int(m.sum()) for c, m in masks.items()}
    for i in range(n):
        own = int(labels[i])
        if sizes[own] == 1:
            continue  # singleton convention: contributes 0
        a = d[i, masks[own]].sum() / (sizes[own] - 1)
        b = min(d[i, masks[c]].mean() for c in masks if c != own)
        m = max(a, b)
        scores[i] = 0.0 if m == 0.0 else (b - a) / m
    return float(scores.mean())


def silhouette_index(features: np.ndarray, assignments: np.ndarray) -> float:
    """Mean silhouette with Euclidean distances; singleton-cluster points and
    all-zero-distance points contribute 0."""
    return _silhouette_from_sq(_pairwise_sq(np.asarray(features, dtype=float)),
                               np.asarray(assignments))


def _n_distinct(X: np.ndarray) -> int:
    return np.unique(X, axis=0).shape[0] if X.size else 0


def kmeans(features: np.ndarray, k: int, seed: int,
           trace: list | None = None) -> ClusteringResult:
    """Lloyd's iteration with k-means++ seeding, deterministic for a seed.

    Converges when assignments stop changing or after 300 iterations; empty
    clusters are reseeded from the farthest point.
    """
    X = np.asarray(features, dtype=float)
    if k > _n_distinct(X):
        raise TooFewTracks(f"k={k} exceeds {_n_distinct(X)} distinct feature vectors")
    if k < 1:
        raise ValueError("k must be at least 1")
    labels, centroids = _lloyd(X, k, seed, trace)
    if k == 1:
        sil = 0.0
    else:
        sil = _silhouette_from_sq(_pairwise_sq(X), labels)
    return ClusteringResult(k=k, assignments=labels, centroids=centroids, silhouette=sil)


def select_k(features: np.ndarray, p: HyperParams, seed: int) -> ClusteringResult:
    """Run kmeans for each k in {k_min .. min(k_max, distinct)} and keep the
    best silhouette; ties go to the smaller k.  Per-k seeds are seed + k."""
    X = np.asarray(features, dtype=float)
    distinct = _n_distinct(X)
    if distinct < p.k_min:
        raise TooFewTracks(f"{distinct} distinct feature vectors, need {p.k_min}")
    d2 = _pairwise_sq(X)
    best = None
    for k in range(p.k_min, min(p.k_max, distinct) + 1):
        labels, centroids = _lloyd(X, k, seed + k)
        sil = _silhouette_from_sq(d2, labels) if k > 1 else 0.0
        result = ClusteringResult(k=k, assignments=labels, centroids=centroids, silhouette=sil)
        if best is None or result.silhouette > best.silhouette:
            best = result
    return best


@dataclass(frozen=True)
class PurgeOutcome:
    result: ClusteringResult
    kept: np.ndarray    # indices into the original feature rows
    purged: np.ndarray  # indices into the original feature rows


def purge_and_recluster(result: ClusteringResult, features: np.ndarray,
                        p: HyperParams, seed: int) -> PurgeOutcome:
    """Delete clusters with fewer than lambda6 members and re-cluster the rest
    with k reduced by the number of deleted clusters, iterated to a fixpoint.

    When k would fall below 2 the survivors are kept as a single cluster if
    they are numerous enough to stand on their own; otherwise AllPurged.
    """
    X = np.asarray(features, dtype=float)
    keep_idx = np.arange(X.shape[0])
    purged: list[int] = []
    cur = result
    while True:
        sizes = np.bincount(cur.assignments, minlength=cur.k)
        small = np.nonzero(sizes < p.lambda6)[0]
        if small.size == 0:
            return PurgeOutcome(result=cur, kept=keep_idx, purged=np.array(sorted(purged), dtype=int))
        doomed = np.isin(cur.assignments, small)
        purged.extend(int(i) for i in keep_idx[doomed])
        keep_idx = keep_idx[~doomed]
        X_next = X[keep_idx]
        if keep_idx.size < p.k_min:
            raise AllPurged(f"only {keep_idx.size} tracks survive cluster purging")
        k_next = cur.k - int(small.size)
        if k_next < 2:
            if keep_idx.size >= p.lambda6:
                centroid = X_next.mean(axis=0, keepdims=True)
                single = ClusteringResult(k=1, assignments=np.zeros(keep_idx.size, dtype=int),
                                          centroids=centroid, silhouette=0.0)
                return PurgeOutcome(result=single, kept=keep_idx,
                                    purged=np.array(sorted(purged), dtype=int))
            raise AllPurged("survivors too few to form a cluster")
        k_next = min(k_next, _n_distinct(X_next))
        if k_next < 2:
            raise AllPurged("survivors collapse to a single feature vector")
        labels, centroids = _lloyd(X_next, k_next, seed + k_next)
        sil = _silhouette_from_sq(_pairwise_sq(X_next), labels)
        cur = ClusteringResult(k=k_next, assignments=labels, centroids=centroids, silhouette=sil)


def write_cluster_file(track_ids: list[int], result: ClusteringResult, path) -> None:
    with open(path, "w") as fh:
        for tid, c in sorted(zip(track_ids, result.assignments)):
            fh.write(f"ASSIGN {tid} {int(c)}\n")
        fh.write(f"K {result.k} SILHOUETTE {repr(result.silhouette)}\n")
