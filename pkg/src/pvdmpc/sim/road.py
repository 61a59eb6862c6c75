"""Road geometry: arc-length parameterized centerline, lanes and boundary disks."""

import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from ..collision_cone import ObstacleTrack


@dataclass
class Road:
    centerline: np.ndarray
    lane_width: float
    lane_count: int
    _s: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.centerline = np.asarray(self.centerline, dtype=float)
        if self.centerline.ndim != 2 or self.centerline.shape[1] != 2 or len(self.centerline) < 2:
            raise ValueError("centerline needs at least two planar points")
        if not self.lane_width > 0:
            raise ValueError("lane_width must be positive")
        if self.lane_count < 1:
            raise ValueError("lane_count must be >= 1")
        seg = np.hypot(*np.diff(self.centerline, axis=0).T)
        if np.any(seg <= 0):
            raise ValueError("centerline has repeated points")
        self._s = np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def length(self) -> float:
        return float(self._s[-1])

    @property
    def half_width(self) -> float:
        return 0.5 * self.lane_count * self.lane_width

    def lane_offset(self, lane: int) -> float:
        """Signed lateral offset (left positive) of a lane center; lane 0 is rightmost."""
        if not 0 <= lane < self.lane_count:
            raise ValueError(f"lane {lane} out of range")
        return (lane + 0.5) * self.lane_width - self.half_width

    def _segment(self, s: float) -> int:
        return int(min(max(np.searchsorted(self._s, s, side="right") - 1, 0), len(self._s) - 2))

    def frame(self, s: float):
        """(point, unit tangent) at arc length s, clamped to the road."""
        s = min(max(s, 0.0), self.length)
        k = self._segment(s)
        a, b = self.centerline[k], self.centerline[k + 1]
        ln = self._s[k + 1] - self._s[k]
        t = (b - a) / ln
        return a + t * (s - self._s[k]), t

    def point(self, s: float, d: float = 0.0) -> Tuple[float, float]:
        p, t = self.frame(s)
        return float(p[0] - d * t[1]), float(p[1] + d * t[0])

    def heading(self, s: float) -> float:
        _, t = self.frame(s)
        return math.atan2(t[1], t[0])

    def project(self, p) -> Tuple[float, float]:
        """(s, d) of the closest centerline point; d is left positive."""
        a = self.centerline[:-1]
        ab = np.diff(self.centerline, axis=0)
        ln2 = np.einsum("ij,ij->i", ab, ab)
        ap = np.asarray(p, dtype=float) - a
        u = np.clip(np.einsum("ij,ij->i", ap, ab) / ln2, 0.0, 1.0)
        q = a + ab * u[:, None]
        dist2 = np.sum((np.asarray(p) - q) ** 2, axis=1)
        k = int(np.argmin(dist2))
        t = ab[k] / math.sqrt(ln2[k])
        w = np.asarray(p, dtype=float) - q[k]
        d = t[0] * w[1] - t[1] * w[0]
        return float(self._s[k] + u[k] * math.sqrt(ln2[k])), float(d)

    def offset_polyline(self, d: float, step: float = 0.25) -> np.ndarray:
        """Points at lateral offset d, sampled every ``step`` of centerline arc length
        plus at every centerline vertex."""
        ss = np.union1d(np.arange(0.0, self.length, step), self._s)
        return np.array([self.point(s, d) for s in ss])

    def boundary_polylines(self):
        return self.offset_polyline(-self.half_width), self.offset_polyline(self.half_width)


def _resample(poly: np.ndarray, spacing: float) -> np.ndarray:
    seg = np.hypot(*np.diff(poly, axis=0).T)
    keep = np.concatenate([[True], seg > 0])
    poly = poly[keep]
    s = np.concatenate([[0.0], np.cumsum(seg[seg > 0])])
    count = int(math.floor(s[-1] / spacing + 1e-9)) + 1
    q = spacing * np.arange(count)
    return np.column_stack([np.interp(q, s, poly[:, 0]), np.interp(q, s, poly[:, 1])])


def boundary_obstacles(road: Road, spacing: float, radius: float,
                       outward: float = 0.0) -> List[ObstacleTrack]:
    """Static disks along both road boundaries.

    Centers sit on the boundary polylines moved ``outward`` away from the
    road (0 puts them on the line).  Disks on one boundary are ``spacing``
    apart in arc length along that boundary.
    """
    if not spacing > 0 or not radius > 0:
        raise ValueError("spacing and radius must be positive")
    if spacing > 2.0 * radius:
        raise ValueError("spacing must not exceed 2*radius")
    out = []
    for side in (-1.0, 1.0):
        poly = road.offset_polyline(side * (road.half_width + outward))
        for x, y in _resample(poly, spacing):
            out.append(ObstacleTrack((float(x), float(y)), (0.0, 0.0), radius))
    return out


def advance_goal(goal, road: Road, pseudo_speed: float, dt: float):
    """Move ``goal`` forward along the road by pseudo_speed*dt, keeping its lateral offset.

    Returns (new_goal, at_end).
    """
    if not pseudo_speed > 0:
        raise ValueError("pseudo_speed must be positive")
    s, d = road.project(goal)
    s_new = s + pseudo_speed * dt
    at_end = s_new >= road.length
    return road.point(min(s_new, road.length), d), at_end
