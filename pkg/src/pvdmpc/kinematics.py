"""Unicycle model, horizon rollout and time-scaling retiming."""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.fmod(a + math.pi, 2.0 * math.pi)
    if w <= 0.0:
        w += 2.0 * math.pi
    return w - math.pi


@dataclass(frozen=True)
class VehicleState:
    x: float
    y: float
    theta: float
    v: float

    def __post_init__(self):
        if self.v < 0:
            raise ValueError("forward speed must be nonnegative")
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @property
    def position(self):
        return (self.x, self.y)

    @property
    def velocity(self):
        return (self.v * math.cos(self.theta), self.v * math.sin(self.theta))


def step(s: VehicleState, v_cmd: float, omega: float, dt: float) -> VehicleState:
    """One interval of the semi-implicit unicycle update.

    The heading is advanced first and the velocity is taken at the new
    heading, so x' = x + v cos(theta + omega dt) dt.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    th = s.theta + omega * dt
    vx, vy = v_cmd * math.cos(th), v_cmd * math.sin(th)
    return VehicleState(s.x + vx * dt, s.y + vy * dt, th, v_cmd)


@dataclass
class PlannedTrajectory:
    times: np.ndarray          # (N+1,)
    positions: np.ndarray      # (N+1, 2)
    velocities: np.ndarray     # (N+1, 2)
    accelerations: np.ndarray  # (N+1, 2)
    headings: np.ndarray       # (N+1,)

    def __post_init__(self):
        n = len(self.times)
        for name in ("positions", "velocities", "accelerations"):
            if getattr(self, name).shape != (n, 2):
                raise ValueError(f"{name} must have shape ({n}, 2)")
        if self.headings.shape != (n,):
            raise ValueError("headings length mismatch")
        if n > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("knot times must be strictly increasing")

    @property
    def n_intervals(self) -> int:
        return len(self.times) - 1

    @property
    def speeds(self) -> np.ndarray:
        return np.hypot(self.velocities[:, 0], self.velocities[:, 1])

    def state(self, i: int) -> VehicleState:
        return VehicleState(float(self.positions[i, 0]), float(self.positions[i, 1]),
                            float(self.headings[i]), float(self.speeds[i]))


def rollout(s0: VehicleState, omegas: Sequence[float], v: float, dt: float,
            t0: float = 0.0) -> PlannedTrajectory:
    """Iterate :func:`step` with constant speed ``v``.

    Knot accelerations are forward differences of knot velocities; the last
    knot repeats the previous interval's value.
    """
    omegas = list(omegas)
    if not omegas:
        raise ValueError("need at least one control interval")
    n = len(omegas)
    pos = np.empty((n + 1, 2))
    vel = np.empty((n + 1, 2))
    hdg = np.empty(n + 1)
    pos[0] = s0.x, s0.y
    vel[0] = v * math.cos(s0.theta), v * math.sin(s0.theta)
    hdg[0] = s0.theta
    s = VehicleState(s0.x, s0.y, s0.theta, v)
    for i, w in enumerate(omegas):
        s = step(s, v, w, dt)
        pos[i + 1] = s.x, s.y
        vel[i + 1] = v * math.cos(s.theta), v * math.sin(s.theta)
        hdg[i + 1] = s.theta
    acc = np.empty_like(vel)
    acc[:-1] = (vel[1:] - vel[:-1]) / dt
    acc[-1] = acc[-2]
    times = t0 + dt * np.arange(n + 1)
    return PlannedTrajectory(times, pos, vel, acc, hdg)


@dataclass
class ScalingProfile:
    sdot: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        self.sdot = np.asarray(self.sdot, dtype=float)
        self.z = np.asarray(self.z, dtype=float)
        if self.sdot.shape != self.z.shape:
            raise ValueError("sdot and z must have equal length")
        if np.any(np.abs(self.z - self.sdot ** 2) > 1e-12 * np.maximum(1.0, self.z)):
            raise ValueError("z must equal sdot**2")

    @classmethod
    def from_sdot(cls, sdot) -> "ScalingProfile":
        sdot = np.asarray(sdot, dtype=float)
        return cls(sdot, sdot ** 2)

    @classmethod
    def from_z(cls, z) -> "ScalingProfile":
        z = np.asarray(z, dtype=float)
        return cls(np.sqrt(np.maximum(z, 0.0)), z)


def retime(traj: PlannedTrajectory, prof: ScalingProfile) -> PlannedTrajectory:
    """Apply a time scaling to ``traj`` without moving its knots.

    Interval durations become 2 dt / (sdot_i + sdot_{i+1}); velocities scale
    by sdot; accelerations become acc * sdot^2 + vel * sddot with
    sddot_i = (z_{i+1} - z_i) / (2 dt) held over the interval.
    """
    n = len(traj.times)
    if len(prof.sdot) != n:
        raise ValueError("profile length must equal the knot count")
    if np.any(prof.sdot <= 0):
        raise ValueError("scaling values must be positive")
    dts = np.diff(traj.times)
    new_t = np.empty(n)
    new_t[0] = traj.times[0]
    new_t[1:] = traj.times[0] + np.cumsum(2.0 * dts / (prof.sdot[:-1] + prof.sdot[1:]))
    sddot = np.zeros(n)
    if n > 1:
        sddot[:-1] = (prof.z[1:] - prof.z[:-1]) / (2.0 * dts)
        sddot[-1] = sddot[-2]
    vel = traj.velocities * prof.sdot[:, None]
    acc = traj.accelerations * prof.z[:, None] + traj.velocities * sddot[:, None]
    return PlannedTrajectory(new_t, traj.positions.copy(), vel, acc, traj.headings.copy())
