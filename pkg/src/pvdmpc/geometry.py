"""Convex polygons, Minkowski sums and the encompassing-tangent avoidance disk.

A rectangular ego vehicle P and rectangular obstacle Q are reduced to a point
(the ego center) and the polygon R = Q + (-P).  R is then replaced by a disk
inscribed between the two tangent lines drawn from the ego center to R, so the
collision cone of the disk coincides with that of R.
"""

import math
from functools import lru_cache
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

Point = Tuple[float, float]


class AlreadyInCollision(ValueError):
    """The query point lies inside (or on) the obstacle region."""


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


@dataclass(frozen=True)
class ConvexPolygon:
    """Strictly convex polygon, vertices counterclockwise."""

    vertices: Tuple[Point, ...]

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", pts)
        n = len(pts)
        if n < 3:
            raise ValueError("polygon needs at least 3 vertices")
        for i in range(n):
            x0, y0 = pts[i - 1]
            x1, y1 = pts[i]
            x2, y2 = pts[(i + 1) % n]
            ex, ey = x1 - x0, y1 - y0
            fx, fy = x2 - x1, y2 - y1
            le, lf = math.hypot(ex, ey), math.hypot(fx, fy)
            if le == 0.0 or lf == 0.0:
                raise ValueError("duplicate consecutive vertices")
            if _cross(ex, ey, fx, fy) <= 1e-9 * le * lf:
                raise ValueError("polygon is degenerate, not strictly convex, or clockwise")

    @classmethod
    def from_points(cls, points) -> "ConvexPolygon":
        return cls(tuple(map(tuple, np.asarray(points, dtype=float))))

    def as_array(self) -> np.ndarray:
        return np.array(self.vertices)

    def __len__(self):
        return len(self.vertices)

    def area(self) -> float:
        s = 0.0
        n = len(self.vertices)
        for i in range(n):
            x0, y0 = self.vertices[i]
            x1, y1 = self.vertices[(i + 1) % n]
            s += x0 * y1 - x1 * y0
        return 0.5 * s

    def centroid(self) -> Point:
        n = len(self.vertices)
        return (sum(v[0] for v in self.vertices) / n, sum(v[1] for v in self.vertices) / n)

    def translated(self, dx: float, dy: float) -> "ConvexPolygon":
        return ConvexPolygon(tuple((x + dx, y + dy) for x, y in self.vertices))

    def rotated(self, angle: float, about: Point = (0.0, 0.0)) -> "ConvexPolygon":
        c, s = math.cos(angle), math.sin(angle)
        ox, oy = about
        return ConvexPolygon(tuple(
            (ox + c * (x - ox) - s * (y - oy), oy + s * (x - ox) + c * (y - oy))
            for x, y in self.vertices))

    def negated(self) -> "ConvexPolygon":
        # point reflection keeps counterclockwise order
        return ConvexPolygon(tuple((-x, -y) for x, y in self.vertices))


@dataclass(frozen=True)
class OrientedRect:
    center: Point
    heading: float
    length: float
    width: float

    def polygon(self) -> ConvexPolygon:
        return ConvexPolygon(self.corners())

    def corners(self) -> Tuple[Point, ...]:
        c, s = math.cos(self.heading), math.sin(self.heading)
        hl, hw = 0.5 * self.length, 0.5 * self.width
        cx, cy = self.center
        out = []
        for lx, ly in ((hl, -hw), (hl, hw), (-hl, hw), (-hl, -hw)):
            out.append((cx + c * lx - s * ly, cy + s * lx + c * ly))
        # ccw starting from front-right
        return tuple(out)

    def moved(self, dx: float, dy: float) -> "OrientedRect":
        return OrientedRect((self.center[0] + dx, self.center[1] + dy), self.heading,
                            self.length, self.width)

    def inflated(self, margin: float) -> "OrientedRect":
        return OrientedRect(self.center, self.heading, self.length + 2 * margin,
                            self.width + 2 * margin)


@dataclass(frozen=True)
class AvoidanceDisk:
    center: Point
    radius: float
    source_velocity: Point = (0.0, 0.0)

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    @property
    def velocity(self) -> Point:
        return self.source_velocity


def _start_index(pts):
    best = 0
    for i in range(1, len(pts)):
        if (pts[i][1], pts[i][0]) < (pts[best][1], pts[best][0]):
            best = i
    return best


def _drop_collinear(pts, tol=1e-12):
    out = list(pts)
    changed = True
    while changed and len(out) > 3:
        changed = False
        n = len(out)
        for i in range(n):
            x0, y0 = out[i - 1]
            x1, y1 = out[i]
            x2, y2 = out[(i + 1) % n]
            ex, ey, fx, fy = x1 - x0, y1 - y0, x2 - x1, y2 - y1
            le, lf = math.hypot(ex, ey), math.hypot(fx, fy)
            if le <= tol or lf <= tol or _cross(ex, ey, fx, fy) <= tol * le * lf:
                del out[i]
                changed = True
                break
    return out


def minkowski_sum(q: ConvexPolygon, p_negated: ConvexPolygon) -> ConvexPolygon:
    """Minkowski sum by merging the edge sequences in polar order, O(m+n).

    Pass the already negated polygon (``p.negated()``) to obtain Q + (-P).
    """
    a = q.vertices
    b = p_negated.vertices
    ia, ib = _start_index(a), _start_index(b)
    a = a[ia:] + a[:ia]
    b = b[ib:] + b[:ib]
    n, m = len(a), len(b)
    a = a + a[:2]
    b = b + b[:2]
    out = []
    i = j = 0
    while i < n or j < m:
        out.append((a[i][0] + b[j][0], a[i][1] + b[j][1]))
        ex, ey = a[i + 1][0] - a[i][0], a[i + 1][1] - a[i][1]
        fx, fy = b[j + 1][0] - b[j][0], b[j + 1][1] - b[j][1]
        cr = _cross(ex, ey, fx, fy)
        if j >= m or (i < n and cr > 0):
            i += 1
        elif i >= n or cr < 0:
            j += 1
        else:
            i += 1
            j += 1
    return ConvexPolygon(tuple(_drop_collinear(out)))


def contains_point(poly: ConvexPolygon, p: Point, tol: float = 0.0) -> bool:
    """True when ``p`` is inside or on the boundary (within ``tol``)."""
    px, py = p
    v = poly.vertices
    n = len(v)
    for i in range(n):
        x0, y0 = v[i]
        x1, y1 = v[(i + 1) % n]
        ex, ey = x1 - x0, y1 - y0
        if _cross(ex, ey, px - x0, py - y0) < -tol * math.hypot(ex, ey):
            return False
    return True


def _relative_angles(p: Point, poly: ConvexPolygon):
    px, py = p
    cx, cy = poly.centroid()
    rx, ry = cx - px, cy - py
    ref = math.atan2(ry, rx)
    angs = []
    for x, y in poly.vertices:
        dx, dy = x - px, y - py
        angs.append(math.atan2(_cross(rx, ry, dx, dy), rx * dx + ry * dy))
    return ref, angs


def _check_outside(p, poly):
    if contains_point(poly, p, tol=1e-12):
        raise AlreadyInCollision("point lies inside the obstacle region")


def enclosing_angle(p: Point, r_poly: ConvexPolygon) -> float:
    """Largest angular separation between directions from ``p`` to vertices of R."""
    _check_outside(p, r_poly)
    _, angs = _relative_angles(p, r_poly)
    return max(angs) - min(angs)


def tangent_lines(p: Point, r_poly: ConvexPolygon):
    """Unit directions of the two encompassing tangents (clockwise one first)."""
    _check_outside(p, r_poly)
    ref, angs = _relative_angles(p, r_poly)
    lo, hi = ref + min(angs), ref + max(angs)
    return (math.cos(lo), math.sin(lo)), (math.cos(hi), math.sin(hi))


def encompassing_disk(p: Point, r_poly: ConvexPolygon) -> AvoidanceDisk:
    """Disk inscribed between the encompassing tangents from ``p``.

    The center sits on the tangent bisector at distance D with radius
    D*sin(phi/2).  D is the smallest value for which every vertex of R lies
    in the disk when such a D exists; otherwise (the usual case, because the
    vertices touching the tangents fix D separately) D minimizes the largest
    vertex overshoot of the disk boundary.
    """
    _check_outside(p, r_poly)
    px, py = p
    ref, angs = _relative_angles(p, r_poly)
    amin, amax = min(angs), max(angs)
    half = 0.5 * (amax - amin)
    bis = ref + 0.5 * (amax + amin)
    ux, uy = math.cos(bis), math.sin(bis)
    sin_h, cos_h = math.sin(half), math.cos(half)
    cos2 = cos_h * cos_h

    proj = []
    lo, hi = 0.0, math.inf
    for x, y in r_poly.vertices:
        qx, qy = x - px, y - py
        s = qx * ux + qy * uy
        l2 = qx * qx + qy * qy
        proj.append((s, l2))
        disc = max(0.0, s * s - l2 * cos2)
        root = math.sqrt(disc)
        lo = max(lo, (s - root) / cos2)
        hi = min(hi, (s + root) / cos2)

    if lo <= hi * (1 + 1e-12):
        dist = lo
    else:
        dist = _minimax_distance(proj, sin_h)
    radius = dist * sin_h
    return AvoidanceDisk((px + dist * ux, py + dist * uy), radius)


@lru_cache(maxsize=32)
def _pairs(n):
    return np.triu_indices(n, 1)


def _minimax_distance(proj, sin_h):
    """argmin_D max_k (|q_k - D u| - D sin_h); convex, exact candidate search."""
    pr = np.asarray(proj, dtype=float)
    s, l2 = pr[:, 0], pr[:, 1]
    c2 = 1.0 - sin_h * sin_h
    cands = []
    if c2 > 0:
        # stationary point of a single term: (D - s)^2 = sin^2 (D^2 - 2 s D + l2)
        disc = s * s * c2 * c2 - c2 * (s * s - sin_h * sin_h * l2)
        ok = disc >= 0
        sq = np.sqrt(disc[ok])
        cands.append((s[ok] * c2 - sq) / c2)
        cands.append((s[ok] * c2 + sq) / c2)
    # crossings of two terms
    i, j = _pairs(len(s))
    ds = s[i] - s[j]
    nz = ds != 0
    cands.append((l2[i][nz] - l2[j][nz]) / (2 * ds[nz]))
    cand = np.concatenate(cands)
    cand = cand[cand > 0]
    if cand.size == 0:
        cand = np.array([math.sqrt(float(l2.min()))])
    dist = cand[:, None]
    worst = np.max(np.sqrt(np.maximum(0.0, dist * dist - 2 * s * dist + l2)) - dist * sin_h, axis=1)
    # smallest D among the minimizers
    order = np.lexsort((cand, worst))
    return float(cand[order[0]])


def disk_containment_margin(disk: AvoidanceDisk, poly: ConvexPolygon) -> float:
    """min over vertices of (radius - distance to center); >= 0 means contained."""
    cx, cy = disk.center
    return min(disk.radius - math.hypot(x - cx, y - cy) for x, y in poly.vertices)


def rectangle_pair_to_disk(ego: OrientedRect, obs: OrientedRect,
                           obs_velocity: Point = (0.0, 0.0)) -> AvoidanceDisk:
    """Reduce ego/obstacle rectangles to (ego center point, avoidance disk)."""
    ego_local = OrientedRect((0.0, 0.0), ego.heading, ego.length, ego.width).polygon()
    region = minkowski_sum(obs.polygon(), ego_local.negated())
    disk = encompassing_disk(ego.center, region)
    return AvoidanceDisk(disk.center, disk.radius, tuple(map(float, obs_velocity)))


def minkowski_region(ego: OrientedRect, obs: OrientedRect) -> ConvexPolygon:
    ego_local = OrientedRect((0.0, 0.0), ego.heading, ego.length, ego.width).polygon()
    return minkowski_sum(obs.polygon(), ego_local.negated())


def _seg_point_dist(px, py, ax, ay, bx, by):
    ex, ey = bx - ax, by - ay
    den = ex * ex + ey * ey
    t = 0.0 if den == 0 else max(0.0, min(1.0, ((px - ax) * ex + (py - ay) * ey) / den))
    return math.hypot(px - ax - t * ex, py - ay - t * ey)


def polygon_separation(a: Sequence[Point], b: Sequence[Point]) -> float:
    """Signed distance between two convex polygons (negative = penetration depth)."""
    axes_min_overlap = math.inf
    for poly in (a, b):
        n = len(poly)
        for i in range(n):
            x0, y0 = poly[i]
            x1, y1 = poly[(i + 1) % n]
            nx, ny = y1 - y0, x0 - x1
            ln = math.hypot(nx, ny)
            nx, ny = nx / ln, ny / ln
            pa = [x * nx + y * ny for x, y in a]
            pb = [x * nx + y * ny for x, y in b]
            overlap = min(max(pa), max(pb)) - max(min(pa), min(pb))
            if overlap <= 0:
                axes_min_overlap = None
                break
            axes_min_overlap = min(axes_min_overlap, overlap)
        if axes_min_overlap is None:
            break
    if axes_min_overlap is not None:
        return -axes_min_overlap
    best = math.inf
    for p, q in ((a, b), (b, a)):
        m = len(q)
        for px, py in p:
            for i in range(m):
                ax, ay = q[i]
                bx, by = q[(i + 1) % m]
                best = min(best, _seg_point_dist(px, py, ax, ay, bx, by))
    return best
