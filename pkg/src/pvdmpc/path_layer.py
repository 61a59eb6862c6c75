"""Path layer: one-interval heading optimization over the angular velocity.

Per interval the cost w1*(theta + omega*dt - theta_d)^2 + w2*omega^2 is
minimized in closed form and clipped to the intersection of the kinematic
interval with the linearized cone half-lines of every relevant obstacle.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import collision_cone as cc
from .geometry import AlreadyInCollision, OrientedRect, rectangle_pair_to_disk, minkowski_region
from .kinematics import PlannedTrajectory, VehicleState, rollout, step, wrap_angle

SYMMETRY_EPS = 1e-9


class GoalReached(ValueError):
    """Vehicle position coincides with the goal."""


@dataclass(frozen=True)
class PathParams:
    w1: float
    w2: float
    kappa_max: float
    omega_max: float
    dt: float
    horizon_n: int = 10
    # extra cap on |omega| * v (lateral acceleration); None disables it
    lat_accel_max: Optional[float] = None
    # converging obstacles further than this in time-to-closest-approach are ignored
    gate_time: float = math.inf

    def __post_init__(self):
        for name in ("w1", "w2", "kappa_max", "omega_max", "dt", "gate_time"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.horizon_n < 1:
            raise ValueError("horizon_n must be >= 1")
        if self.lat_accel_max is not None and not self.lat_accel_max > 0:
            raise ValueError("lat_accel_max must be positive")

    def omega_bound(self, v: float) -> float:
        m = min(self.kappa_max * v, self.omega_max)
        if self.lat_accel_max is not None and v > 0:
            m = min(m, self.lat_accel_max / v)
        return m


@dataclass
class PathStep:
    omega: float
    feasible: bool
    unconstrained: float
    interval: tuple
    n_constraints: int = 0


def desired_heading(pos, goal) -> float:
    dx, dy = goal[0] - pos[0], goal[1] - pos[1]
    if dx == 0.0 and dy == 0.0:
        raise GoalReached("goal reached")
    return wrap_angle(math.atan2(dy, dx))


def unconstrained_omega(s: VehicleState, theta_d: float, p: PathParams) -> float:
    dth = wrap_angle(theta_d - s.theta)
    return p.w1 * p.dt * dth / (p.w1 * p.dt ** 2 + p.w2)


def avoidance_rows(s: VehicleState, obstacles, p: PathParams, omega_lin: float,
                   v_cone: Optional[float] = None):
    """Linearized half-lines for every converging obstacle within the time gate.

    ``v_cone`` replaces the current speed in the relative velocity of the
    cone test (the rollout still moves at ``s.v``).
    """
    vc = s.v if v_cone is None else v_cone
    rows = []
    if not obstacles:
        return rows
    bound = p.omega_bound(s.v)
    keep = _relevant_mask(s, obstacles, p, omega_lin, [vc])
    for k in np.flatnonzero(keep[:, 0]):
        row = _row(s, obstacles[k], p, omega_lin, vc, bound)
        if row is not None:
            rows.append(row)
    return rows


def _relevant_mask(s, obstacles, p, omega_lin, speeds):
    """(n_obstacles, n_speeds) mask of converging obstacles within the time gate."""
    th = s.theta + omega_lin * p.dt
    c, sn = math.cos(th), math.sin(th)
    cen = np.array([o.center for o in obstacles], dtype=float)
    vel = np.array([o.velocity for o in obstacles], dtype=float)
    rx = s.x + s.v * c * p.dt - (cen[:, 0] + vel[:, 0] * p.dt)
    ry = s.y + s.v * sn * p.dt - (cen[:, 1] + vel[:, 1] * p.dt)
    out = np.zeros((len(obstacles), len(speeds)), dtype=bool)
    for j, vc in enumerate(speeds):
        wx, wy = vc * c - vel[:, 0], vc * sn - vel[:, 1]
        ww = wx * wx + wy * wy
        rw = rx * wx + ry * wy
        with np.errstate(divide="ignore", invalid="ignore"):
            ttc = -rw / ww
        out[:, j] = (ww >= cc.MIN_REL_SPEED ** 2) & (rw < 0) & (ttc <= p.gate_time)
    return out


def _row(s, obs, p, omega_lin, vc, bound):
    row = cc.linearize_wrt_omega(s, obs, s.v, p.dt, omega_lin, vc)
    if row is None:
        return None
    if abs(row.a_row) <= SYMMETRY_EPS * (1.0 + abs(row.g_value)) and row.g_value > 0 and bound > 0:
        # symmetric head-on: slope vanishes, bias toward positive omega
        # using the secant to the left kinematic limit
        g_left = cc.avoidance_residual(s, obs, s.v, p.dt, omega_lin + bound, vc)
        slope = min((g_left - row.g_value) / bound, -SYMMETRY_EPS * (1.0 + row.g_value))
        row = cc.AffineAvoidance(slope, slope * omega_lin - row.g_value, row.g_value)
    return row


def _least_violation(rows, lo, hi, target):
    """Minimize max_j max(0, a_j w - b_j) over [lo, hi]; ties go to ``target``."""
    a = np.array([r.a_row for r in rows])
    b = np.array([r.b_val for r in rows])

    def f(w):
        return float(np.max(a * w - b))

    cands = [lo, hi]
    nz = np.abs(a) > 0
    cands.extend(list((b[nz] / a[nz])))
    pos = np.flatnonzero(a > 0)
    neg = np.flatnonzero(a < 0)
    if pos.size and neg.size:
        ai, aj = a[pos][:, None], a[neg][None, :]
        bi, bj = b[pos][:, None], b[neg][None, :]
        cands.extend(((bi - bj) / (ai - aj)).ravel().tolist())
    cands = [min(hi, max(lo, w)) for w in cands]
    cands.append(min(hi, max(lo, target)))
    vals = [max(0.0, f(w)) for w in cands]
    best = min(vals)
    tie = 1e-12 * (1.0 + abs(best))
    winners = [w for w, val in zip(cands, vals) if val <= best + tie]
    return min(winners, key=lambda w: (abs(w - target), -w))


def solve_path_step(s: VehicleState, obstacles, goal, p: PathParams,
                    omega_warm: float = 0.0, v_cone: Optional[float] = None) -> PathStep:
    """Closed-form one-interval path optimization.

    ``obstacles`` are disks exposing ``center``, ``velocity`` and ``radius``
    (ObstacleTrack or AvoidanceDisk).  Cone rows at the current speed are
    always imposed; rows at ``v_cone`` are added only if the interval stays
    nonempty.
    """
    if s.v < 0:
        raise ValueError("speed must be nonnegative")
    try:
        theta_d = desired_heading((s.x, s.y), goal)
        w_u = unconstrained_omega(s, theta_d, p)
    except GoalReached:
        w_u = 0.0
    bound = p.omega_bound(s.v)
    rows = avoidance_rows(s, obstacles, p, omega_warm)
    lo, hi = _intersect(rows, -bound, bound)
    if v_cone is not None and v_cone != s.v and lo <= hi:
        # also keep clear at the target speed when that is possible
        extra = avoidance_rows(s, obstacles, p, omega_warm, v_cone)
        lo2, hi2 = _intersect(extra, lo, hi)
        if lo2 <= hi2:
            rows, lo, hi = rows + extra, lo2, hi2
    if lo <= hi:
        return PathStep(min(hi, max(lo, w_u)), True, w_u, (lo, hi), len(rows))
    w = _least_violation(rows, -bound, bound, w_u)
    return PathStep(w, False, w_u, (lo, hi), len(rows))


def _intersect(rows, lo, hi):
    for row in rows:
        if row.a_row > 0:
            hi = min(hi, row.b_val / row.a_row)
        elif row.a_row < 0:
            lo = max(lo, row.b_val / row.a_row)
        elif row.b_val < 0:
            return 1.0, -1.0
    return lo, hi


@dataclass
class PathPlan:
    trajectory: PlannedTrajectory
    omegas: List[float]
    feasible: List[bool]
    # per knot 0..N: list of disks (ObstacleTrack) seen from that knot
    knot_disks: List[list] = field(default_factory=list)
    collisions: int = 0

    @property
    def all_feasible(self) -> bool:
        return all(self.feasible)


def reduce_world(s: VehicleState, world, ego_dims, ego_radius: float = 0.0):
    """Avoidance disks seen from ego state ``s``.

    Tracks with a footprint are reduced with the encompassing-tangent
    construction; plain disk tracks get ``ego_radius`` added.  Returns
    (disks, n_overlapping).
    """
    ego_rect = OrientedRect((s.x, s.y), s.theta, ego_dims[0], ego_dims[1])
    out = []
    overlaps = 0
    for trk in world:
        if trk.footprint is None:
            out.append(trk if ego_radius == 0.0 else
                       cc.ObstacleTrack(trk.center, trk.velocity, trk.radius + ego_radius))
            continue
        try:
            disk = rectangle_pair_to_disk(ego_rect, trk.footprint, trk.velocity)
            out.append(cc.ObstacleTrack(disk.center, trk.velocity, disk.radius, trk.footprint))
        except AlreadyInCollision:
            overlaps += 1
            # only separating motion is allowed: disk just excluding the ego point
            cx, cy = minkowski_region(ego_rect, trk.footprint).centroid()
            dist = math.hypot(cx - s.x, cy - s.y)
            if dist > 1e-9:
                out.append(cc.ObstacleTrack((cx, cy), trk.velocity, 0.999 * dist, trk.footprint))
    return out, overlaps


def plan_path_horizon(s0: VehicleState, world: Sequence, goal, p: PathParams,
                      ego_dims=(4.5, 1.8), ego_radius: float = 0.0,
                      omega_warm: float = 0.0, world_filter=None,
                      v_cone: Optional[float] = None, rereduce: bool = False) -> PathPlan:
    """Repeat the one-step optimization over ``p.horizon_n`` intervals.

    Obstacles move at constant velocity.  Footprints are reduced to disks
    from the initial ego pose and the disks are propagated; with
    ``rereduce`` the reduction is redone from the ego pose at every knot.
    Speed stays at ``s0.v``; the cone test may use a different ego speed
    ``v_cone`` (e.g. the preferred one).
    """
    s = s0
    omegas, feas, knot_disks = [], [], []
    w_prev = omega_warm
    collisions = 0
    base = None
    for k in range(p.horizon_n + 1):
        if rereduce or base is None:
            tracks = [trk.at(k * p.dt) for trk in world]
            if world_filter is not None:
                tracks = world_filter(s, tracks)
            disks, hits = reduce_world(s, tracks, ego_dims, ego_radius)
            collisions += hits
            base = disks
        else:
            disks = [d.at(k * p.dt) for d in base]
        knot_disks.append(disks)
        if k == p.horizon_n:
            break
        res = solve_path_step(s, disks, goal, p, w_prev, v_cone)
        omegas.append(res.omega)
        feas.append(res.feasible)
        w_prev = res.omega
        s = step(s, s0.v, res.omega, p.dt)
    traj = rollout(s0, omegas, s0.v, p.dt)
    return PathPlan(traj, omegas, feas, knot_disks, collisions)
