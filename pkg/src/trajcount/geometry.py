"""2D primitives: exact orientation tests, monotone-chain hull, distances.

The orientation predicate uses a floating-point fast path with an exact
rational fallback, so hulls built from lattice-aligned corners are robust
regardless of the grid size value.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

Pt = tuple[float, float]


def orient(o: Pt, a: Pt, b: Pt) -> int:
    """Sign of the cross product (a-o) x (b-o): +1 left turn, -1 right, 0 collinear."""
    t1 = (a[0] - o[0]) * (b[1] - o[1])
    t2 = (a[1] - o[1]) * (b[0] - o[0])
    det = t1 - t2
    # Rounding error of det is a few ulps of |t1|+|t2|; stay well clear of it.
    bound = 1e-10 * (abs(t1) + abs(t2))
    if det > bound:
        return 1
    if det < -bound:
        return -1
    if det == 0.0 and t1 == 0.0 and t2 == 0.0:
        return 0
    ex = (Fraction(a[0]) - Fraction(o[0])) * (Fraction(b[1]) - Fraction(o[1])) \
        - (Fraction(a[1]) - Fraction(o[1])) * (Fraction(b[0]) - Fraction(o[0]))
    return (ex > 0) - (ex < 0)


def convex_hull(points: Iterable[Pt]) -> list[Pt]:
    """Monotone chain. Returns CCW vertices (positive signed area), starting at
    the lexicographically smallest point; collinear points are dropped.

    Degenerate inputs (all points collinear) return fewer than 3 vertices.
    """
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) <= 2:
        return pts
    lower: list[Pt] = []
    for p in pts:
        while len(lower) >= 2 and orient(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Pt] = []
    for p in reversed(pts):
        while len(upper) >= 2 and orient(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2:  # all collinear
        return hull
    return hull


def polygon_area(vertices: Sequence[Pt]) -> float:
    """Signed shoelace area; positive for CCW vertex order."""
    n = len(vertices)
    acc = 0.0
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        acc += x1 * y2 - x2 * y1
    return acc / 2.0


def point_in_convex(vertices: Sequence[Pt], p: Pt) -> bool:
    """Boundary-inclusive containment test for a CCW convex polygon."""
    n = len(vertices)
    for i in range(n):
        if orient(vertices[i], vertices[(i + 1) % n], p) < 0:
            return False
    return True


def point_segment_distance(p: Pt, a: Pt, b: Pt) -> float:
    ax, ay = a
    dx, dy = b[0] - ax, b[1] - ay
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return math.hypot(p[0] - ax, p[1] - ay)
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / L2
    t = max(0.0, min(1.0, t))
    return math.hypot(p[0] - (ax + t * dx), p[1] - (ay + t * dy))


def point_polyline_distance(p: Pt, polyline: Sequence[Pt]) -> float:
    """Distance from p to the interpolated polyline (not just its vertices)."""
    if not polyline:
        raise ValueError("empty polyline")
    if len(polyline) == 1:
        return math.hypot(p[0] - polyline[0][0], p[1] - polyline[0][1])
    return min(point_segment_distance(p, polyline[i], polyline[i + 1])
               for i in range(len(polyline) - 1))
