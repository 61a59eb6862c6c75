"""Collision-cone constraint, converging filter and its linearization in omega."""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .kinematics import VehicleState

# relative speeds below this are excluded from cone constraints
MIN_REL_SPEED = 1e-6


class StationaryRelativeMotion(ValueError):
    """Relative velocity vanishes; the cone direction is undefined."""


@dataclass(frozen=True)
class ObstacleTrack:
    """Constant-velocity disk obstacle; ``footprint`` is the rectangle it came from."""

    center: Tuple[float, float]
    velocity: Tuple[float, float]
    radius: float
    footprint: Optional[object] = None

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("obstacle radius must be positive")
        if not all(math.isfinite(c) for c in self.velocity):
            raise ValueError("obstacle velocity must be finite")

    def at(self, t: float) -> "ObstacleTrack":
        cx, cy = self.center
        vx, vy = self.velocity
        if vx == 0.0 and vy == 0.0:
            return self
        fp = self.footprint.moved(vx * t, vy * t) if self.footprint is not None else None
        return ObstacleTrack((cx + vx * t, cy + vy * t), self.velocity, self.radius, fp)


@dataclass(frozen=True)
class AffineAvoidance:
    """Half-line ``a_row * omega <= b_val``."""

    a_row: float
    b_val: float
    g_value: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.a_row) and math.isfinite(self.b_val)):
            raise ValueError("non-finite avoidance coefficients")


def cc_value(r, v_rel, big_r: float) -> float:
    """(r.v)^2/|v|^2 - |r|^2 + R^2; nonpositive means the relative ray misses."""
    rx, ry = r
    vx, vy = v_rel
    vv = vx * vx + vy * vy
    if vv == 0.0:
        raise StationaryRelativeMotion("relative velocity is zero")
    rv = rx * vx + ry * vy
    return rv * rv / vv - (rx * rx + ry * ry) + big_r * big_r


def is_converging(r, v_rel) -> bool:
    return r[0] * v_rel[0] + r[1] * v_rel[1] < 0.0


def time_to_closest_approach(r, v_rel) -> float:
    vv = v_rel[0] ** 2 + v_rel[1] ** 2
    if vv == 0.0:
        return math.inf
    return -(r[0] * v_rel[0] + r[1] * v_rel[1]) / vv


def _next_geometry(s: VehicleState, obs, v, dt, omega, v_cone=None):
    """Relative position after one step at speed ``v`` and relative velocity
    with the ego moving at ``v_cone`` (defaults to ``v``)."""
    th = s.theta + omega * dt
    c, sn = math.cos(th), math.sin(th)
    vc = v if v_cone is None else v_cone
    ox, oy = obs.velocity
    rx = s.x + v * c * dt - (obs.center[0] + ox * dt)
    ry = s.y + v * sn * dt - (obs.center[1] + oy * dt)
    return rx, ry, vc * c - ox, vc * sn - oy, c, sn


def avoidance_residual(s: VehicleState, obs, v: float, dt: float, omega: float,
                       v_cone: Optional[float] = None) -> float:
    """Cone value at t+dt after commanding ``omega`` for one interval."""
    rx, ry, wx, wy, _, _ = _next_geometry(s, obs, v, dt, omega, v_cone)
    return cc_value((rx, ry), (wx, wy), obs.radius)


def residual_and_slope(s: VehicleState, obs, v: float, dt: float, omega: float,
                       v_cone: Optional[float] = None):
    rx, ry, wx, wy, c, sn = _next_geometry(s, obs, v, dt, omega, v_cone)
    vc = v if v_cone is None else v_cone
    ww = wx * wx + wy * wy
    if ww < MIN_REL_SPEED ** 2:
        raise StationaryRelativeMotion("relative velocity is zero")
    rw = rx * wx + ry * wy
    g = rw * rw / ww - (rx * rx + ry * ry) + obs.radius ** 2
    # d(vel)/d(omega) = vc dt (-sin, cos); d(pos)/d(omega) = v dt^2 (-sin, cos)
    dwx, dwy = -vc * dt * sn, vc * dt * c
    drx, dry = -v * dt * dt * sn, v * dt * dt * c
    d_rw = drx * wx + dry * wy + rx * dwx + ry * dwy
    d_ww = 2.0 * (wx * dwx + wy * dwy)
    dg = 2.0 * rw * d_rw / ww - rw * rw * d_ww / (ww * ww) - 2.0 * (rx * drx + ry * dry)
    return g, dg


def linearize_wrt_omega(s: VehicleState, obs, v: float, dt: float,
                        omega_lin: float, v_cone: Optional[float] = None) -> Optional[AffineAvoidance]:
    """First-order expansion of the one-step cone constraint about ``omega_lin``.

    Returns None when the relative velocity at the expansion point vanishes.
    """
    try:
        g, dg = residual_and_slope(s, obs, v, dt, omega_lin, v_cone)
    except StationaryRelativeMotion:
        return None
    return AffineAvoidance(dg, dg * omega_lin - g, g)
