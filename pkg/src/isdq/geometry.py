"""Compiled 2-D geometry primitives shared by planning and simulation.

Obstacles are passed to the kernels as a flat edge array ``edges`` of shape
(E, 4) holding ``x1, y1, x2, y2`` and an offset array ``poly_off`` of length
P + 1 so that polygon ``p`` owns ``edges[poly_off[p]:poly_off[p + 1]]``.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

JIT = dict(cache=True, nogil=True)


def pack_polygons(polygons) -> tuple[np.ndarray, np.ndarray]:
    """Flatten polygons into the ``(edges, poly_off)`` kernel layout."""
    rows = []
    off = [0]
    for poly in polygons:
        k = len(poly)
        for a in range(k):
            x1, y1 = poly[a]
            x2, y2 = poly[(a + 1) % k]
            rows.append((x1, y1, x2, y2))
        off.append(len(rows))
    edges = np.array(rows, dtype=np.float64).reshape(-1, 4)
    return edges, np.array(off, dtype=np.int64)


@njit(**JIT)
def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


@njit(**JIT)
def _on_segment(ax, ay, bx, by, px, py):
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


@njit(**JIT)
def segments_intersect(ax, ay, bx, by, cx, cy, dx, dy):
    """Closed-segment intersection test; touching counts."""
    d1 = _orient(cx, cy, dx, dy, ax, ay)
    d2 = _orient(cx, cy, dx, dy, bx, by)
    d3 = _orient(ax, ay, bx, by, cx, cy)
    d4 = _orient(ax, ay, bx, by, dx, dy)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    if d1 == 0 and _on_segment(cx, cy, dx, dy, ax, ay):
        return True
    if d2 == 0 and _on_segment(cx, cy, dx, dy, bx, by):
        return True
    if d3 == 0 and _on_segment(ax, ay, bx, by, cx, cy):
        return True
    if d4 == 0 and _on_segment(ax, ay, bx, by, dx, dy):
        return True
    return False


@njit(**JIT)
def closest_on_segment(px, py, ax, ay, bx, by):
    """Return (distance, qx, qy) from point p to the closest point q of segment ab."""
    ex = bx - ax
    ey = by - ay
    ll = ex * ex + ey * ey
    t = 0.0
    if ll > 0.0:
        t = ((px - ax) * ex + (py - ay) * ey) / ll
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    qx = ax + t * ex
    qy = ay + t * ey
    return math.hypot(px - qx, py - qy), qx, qy


@njit(**JIT)
def point_in_polygon(px, py, edges, e0, e1):
    inside = False
    for e in range(e0, e1):
        x1 = edges[e, 0]
        y1 = edges[e, 1]
        x2 = edges[e, 2]
        y2 = edges[e, 3]
        if (y1 > py) != (y2 > py):
            xc = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
            if px < xc:
                inside = not inside
    return inside


@njit(**JIT)
def polygon_nearest(px, py, edges, e0, e1):
    """Signed distance to a polygon boundary (negative inside) and the nearest boundary point."""
    best = np.inf
    bx = 0.0
    by = 0.0
    for e in range(e0, e1):
        d, qx, qy = closest_on_segment(px, py, edges[e, 0], edges[e, 1], edges[e, 2], edges[e, 3])
        if d < best:
            best = d
            bx = qx
            by = qy
    if point_in_polygon(px, py, edges, e0, e1):
        best = -best
    return best, bx, by


@njit(**JIT)
def segment_hits_obstacles(ax, ay, bx, by, edges, poly_off):
    npoly = poly_off.shape[0] - 1
    for p in range(npoly):
        e0 = poly_off[p]
        e1 = poly_off[p + 1]
        for e in range(e0, e1):
            if segments_intersect(ax, ay, bx, by, edges[e, 0], edges[e, 1], edges[e, 2], edges[e, 3]):
                return True
        # a segment with no edge crossing is either fully inside or fully outside
        if point_in_polygon(ax, ay, edges, e0, e1):
            return True
    return False


@njit(**JIT)
def segment_hits_disc(ax, ay, bx, by, cx, cy, r):
    d, _, _ = closest_on_segment(cx, cy, ax, ay, bx, by)
    return d <= r


@njit(**JIT)
def ray_segment(ox, oy, dx, dy, ax, ay, bx, by):
    """Distance along the unit ray (o, d) to segment ab, or inf."""
    ex = bx - ax
    ey = by - ay
    den = dx * ey - dy * ex
    if den == 0.0:
        # parallel: only a collinear overlap can be hit
        if _orient(ax, ay, bx, by, ox, oy) != 0.0:
            return np.inf
        ta = (ax - ox) * dx + (ay - oy) * dy
        tb = (bx - ox) * dx + (by - oy) * dy
        lo = min(ta, tb)
        hi = max(ta, tb)
        if hi < 0.0:
            return np.inf
        return max(lo, 0.0)
    wx = ax - ox
    wy = ay - oy
    t = (wx * ey - wy * ex) / den
    u = (wx * dy - wy * dx) / den
    if t >= 0.0 and 0.0 <= u <= 1.0:
        return t
    return np.inf


@njit(**JIT)
def ray_circle(ox, oy, dx, dy, cx, cy, r):
    """Distance along the unit ray to the circle surface, or inf (0 if o lies inside)."""
    fx = ox - cx
    fy = oy - cy
    c = fx * fx + fy * fy - r * r
    if c <= 0.0:
        return 0.0
    b = fx * dx + fy * dy
    disc = b * b - c
    if disc < 0.0:
        return np.inf
    t = -b - math.sqrt(disc)
    if t < 0.0:
        return np.inf
    return t
