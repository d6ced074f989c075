"""Point quad-tree with axis-aligned range queries.

Used as the endpoint index for the representative-path sweep; node capacity 8
and max depth 16 are plumbing defaults.  Queries are inclusive on all four
bounds and must agree exactly with a linear scan over the inserted points.
"""
from __future__ import annotations

import numpy as np


class _Node:
    __slots__ = ("x0", "y0", "x1", "y1", "points", "children")

    def __init__(self, x0, y0, x1, y1):
        self.x0, self.y0, self.x1, self.y1 = x0, y0, x1, y1
        self.points = []        # (x, y, payload)
        self.children = None    # [NW, NE, SW, SE] after split

    def _child_for(self, x, y):
        mx = (self.x0 + self.x1) / 2
        my = (self.y0 + self.y1) / 2
        if x <= mx:
            return self.children[0] if y <= my else self.children[2]
        return self.children[1] if y <= my else self.children[3]


class QuadTree:
    def __init__(self, x0: float, y0: float, x1: float, y1: float,
                 capacity: int = 8, max_depth: int = 16):
        if not (x1 >= x0 and y1 >= y0):
            raise ValueError("invalid bounds")
        self.root = _Node(x0, y0, x1, y1)
        self.capacity = capacity
        self.max_depth = max_depth
        self.size = 0

    def insert(self, x: float, y: float, payload) -> None:
        node = self.root
        if not (node.x0 <= x <= node.x1 and node.y0 <= y <= node.y1):
            raise ValueError(f"point ({x}, {y}) outside index bounds")
        depth = 0
        while node.children is not None:  # descent inlined, this is hot
            if x <= (node.x0 + node.x1) / 2:
                node = node.children[0] if y <= (node.y0 + node.y1) / 2 else node.children[2]
            else:
                node = node.children[1] if y <= (node.y0 + node.y1) / 2 else node.children[3]
            depth += 1
        node.points.append((x, y, payload))
        self.size += 1
        if len(node.points) > self.capacity and depth < self.max_depth:
            self._split(node)

    def _split(self, node: _Node) -> None:
        mx = (node.x0 + node.x1) / 2
        my = (node.y0 + node.y1) / 2
        node.children = [
            _Node(node.x0, node.y0, mx, my),
            _Node(mx, node.y0, node.x1, my),
            _Node(node.x0, my, mx, node.y1),
            _Node(mx, my, node.x1, node.y1),
        ]
        pts, node.points = node.points, []
        for x, y, payload in pts:
            node._child_for(x, y).points.append((x, y, payload))

    @classmethod
    def build(cls, x0, y0, x1, y1, points, capacity: int = 8,
              max_depth: int = 16) -> "QuadTree":
        """Bulk construction from (x, y, payload) triples.

        Query-equivalent to inserting one by one, but partitions with numpy
        and may subdivide a little more eagerly (one-by-one insertion leaves
        a node overfull when a split hands a child more than `capacity`
        points and nothing arrives there afterward).
        """
        tree = cls(x0, y0, x1, y1, capacity=capacity, max_depth=max_depth)
        pts = list(points)
        if not pts:
            return tree
        xs = np.array([p[0] for p in pts], dtype=float)
        ys = np.array([p[1] for p in pts], dtype=float)
        if xs.min() < x0 or xs.max() > x1 or ys.min() < y0 or ys.max() > y1:
            raise ValueError("point outside index bounds")

        def grow(node, idx, depth):
            if idx.size <= capacity or depth >= max_depth:
                node.points = [pts[i] for i in idx.tolist()]
                return
            mx = (node.x0 + node.x1) / 2
            my = (node.y0 + node.y1) / 2
            node.children = [
                _Node(node.x0, node.y0, mx, my),
                _Node(mx, node.y0, node.x1, my),
                _Node(node.x0, my, mx, node.y1),
                _Node(mx, my, node.x1, node.y1),
            ]
            west = xs[idx] <= mx
            north = ys[idx] <= my
            grow(node.children[0], idx[west & north], depth + 1)
            grow(node.children[1], idx[~west & north], depth + 1)
            grow(node.children[2], idx[west & ~north], depth + 1)
            grow(node.children[3], idx[~west & ~north], depth + 1)

        grow(tree.root, np.arange(len(pts)), 0)
        tree.size = len(pts)
        return tree

    def query(self, x_lo: float, x_hi: float, y_lo: float, y_hi: float) -> list:
        """Payloads of all points with x_lo <= x <= x_hi and y_lo <= y <= y_hi."""
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.x1 < x_lo or node.x0 > x_hi or node.y1 < y_lo or node.y0 > y_hi:
                continue
            if x_lo <= node.x0 and node.x1 <= x_hi and y_lo <= node.y0 and node.y1 <= y_hi:
                # node box fully covered: take the whole subtree untested
                sub = [node]
                while sub:
                    n = sub.pop()
                    if n.points:
                        out.extend([p[2] for p in n.points])
                    if n.children is not None:
                        sub.extend(n.children)
                continue
            for x, y, payload in node.points:
                if x_lo <= x <= x_hi and y_lo <= y <= y_hi:
                    out.append(payload)
            if node.children is not None:
                stack.extend(node.children)
        return out
