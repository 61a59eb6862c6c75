"""Receding-horizon loop."""

import math
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..collision_cone import ObstacleTrack
from ..geometry import OrientedRect, polygon_separation
from ..kinematics import VehicleState, wrap_angle
from ..path_layer import plan_path_horizon
from ..velocity_layer import DEGRADED, VelocityParams, solve_velocity
from ..qp_solver import ActiveSetSolver
from .road import boundary_obstacles
from .scenario import RunLog, Scenario, TickRecord


def ego_rect(s: VehicleState, sc: Scenario) -> OrientedRect:
    return OrientedRect((s.x, s.y), s.theta, sc.ego.length, sc.ego.width)


def true_separation(s: VehicleState, sc: Scenario, t: float) -> float:
    """Exact rectangle distance from the ego to the nearest obstacle (inf if none)."""
    ego = ego_rect(s, sc).corners()
    best = math.inf
    reach = math.hypot(sc.ego.length, sc.ego.width) / 2
    for ob in sc.obstacles:
        r = ob.rect_at(t)
        gap = math.hypot(r.center[0] - s.x, r.center[1] - s.y) - reach - math.hypot(ob.length, ob.width) / 2
        if gap >= best:
            continue
        best = min(best, polygon_separation(ego, r.corners()))
    return best


@dataclass
class World:
    """Mutable loop state."""

    t: float
    state: VehicleState
    s_goal: float
    boundary: List[ObstacleTrack]
    boundary_xy: np.ndarray
    omega_warm: float = 0.0
    z_abs: Optional[np.ndarray] = None  # last planned absolute knot speeds
    solver: ActiveSetSolver = field(default_factory=ActiveSetSolver)


def init_world(sc: Scenario) -> World:
    m = sc.mpc
    outward = m.boundary_radius
    bnd = boundary_obstacles(sc.road, m.boundary_spacing, m.boundary_radius, outward)
    # the ego is a point for the path layer: widen the disks by its half-width once
    half_w = 0.5 * sc.ego.width
    bnd = [ObstacleTrack(b.center, b.velocity, b.radius + half_w) for b in bnd]
    xy = np.array([b.center for b in bnd]) if bnd else np.zeros((0, 2))
    s0 = sc.ego.state()
    s_ego, _ = sc.road.project(s0.position)
    return World(0.0, s0, s_ego + m.min_lookahead, bnd, xy)


def _tracks(w: World, sc: Scenario):
    m = sc.mpc
    s = w.state
    out = []
    for ob in sc.obstacles:
        r = ob.rect_at(w.t)
        if math.hypot(r.center[0] - s.x, r.center[1] - s.y) > m.sensor_range:
            continue
        fp = r.inflated(m.safety_margin)
        out.append(ObstacleTrack(r.center, ob.velocity, 0.5 * math.hypot(fp.length, fp.width), fp))
    if len(w.boundary):
        # boundary disks only matter within the distance covered by the horizon
        reach = s.v * sc.path.dt * sc.path.horizon_n + 3.0 * sc.mpc.boundary_radius + sc.ego.length
        d2 = np.sum((w.boundary_xy - np.array([s.x, s.y])) ** 2, axis=1)
        for k in np.flatnonzero(d2 <= reach * reach):
            out.append(w.boundary[k])
    return out


def goal_point(w: World, sc: Scenario):
    lane = sc.goal_lane(w.t)
    return sc.road.point(w.s_goal, sc.road.lane_offset(lane))


def mpc_tick(w: World, sc: Scenario) -> TickRecord:
    """Plan, execute the first exec_steps intervals and advance the world in place."""
    s0 = w.state
    vp = sc.velocity
    v_pref = sc.v_pref(w.t)
    vparams = VelocityParams(vp.v_min, vp.v_max, vp.a_min, vp.a_max, v_pref, vp.dt, vp.gate_time,
                             sc.path.omega_max)
    world = _tracks(w, sc)
    goal = goal_point(w, sc)

    t0 = time.perf_counter()
    plan = plan_path_horizon(s0, world, goal, sc.path, (sc.ego.length, sc.ego.width),
                             ego_radius=0.0, omega_warm=w.omega_warm,
                             v_cone=max(s0.v, v_pref))
    t1 = time.perf_counter()
    traj = plan.trajectory
    n = traj.n_intervals
    z_warm = np.ones(n + 1)
    if w.z_abs is not None and s0.v > 0:
        z_warm[1:] = (w.z_abs[1:] / s0.v) ** 2
    disks = [[d for d in kd if d.footprint is not None] for kd in plan.knot_disks]
    res = solve_velocity(traj, disks, vparams, z_warm, w.solver)
    t2 = time.perf_counter()

    k = min(sc.mpc.exec_steps, n)
    rt = res.retimed
    tau = float(rt.times[k] - rt.times[0])
    speeds = rt.speeds
    v_new = float(speeds[k])
    if res.status == DEGRADED:
        v_new = min(max(v_new, vp.v_min), vp.v_max)
    arc = float(np.sum(np.hypot(*np.diff(traj.positions[:k + 1], axis=0).T)))
    omega_exec = wrap_angle(traj.headings[k] - traj.headings[0]) / tau
    rec = TickRecord(
        t=w.t, x=s0.x, y=s0.y, theta=s0.theta, v=arc / tau, omega=omega_exec,
        min_dist=true_separation(s0, sc, w.t),
        path_ms=1e3 * (t1 - t0), vel_ms=1e3 * (t2 - t1), total_ms=1e3 * (t2 - t0),
        path_feasible=plan.all_feasible, vel_status=res.status,
        acc=[tuple(a) for a in rt.accelerations[:k]], plan_v=s0.v)

    # advance
    w.state = VehicleState(float(traj.positions[k, 0]), float(traj.positions[k, 1]),
                           float(traj.headings[k]), v_new)
    w.t += tau
    w.omega_warm = plan.omegas[k] if k < n else plan.omegas[-1]
    shifted = np.concatenate([speeds[k:], np.full(k, speeds[-1])])
    w.z_abs = shifted
    m = sc.mpc
    pseudo = m.pseudo_goal_speed if m.pseudo_goal_speed is not None else 1.2 * sc.v_pref(w.t)
    s_ego, _ = sc.road.project(w.state.position)
    w.s_goal = min(max(w.s_goal + pseudo * tau, s_ego + m.min_lookahead), s_ego + m.max_lookahead)
    w.s_goal = min(w.s_goal, sc.road.length)
    return rec


def run_scenario(sc: Scenario, max_ticks: Optional[int] = None) -> RunLog:
    w = init_world(sc)
    log = RunLog(sc.name)
    while True:
        if w.t >= sc.mpc.duration:
            log.terminated = "duration"
            break
        if max_ticks is not None and len(log.records) >= max_ticks:
            log.terminated = "ticks"
            break
        s_ego, _ = sc.road.project(w.state.position)
        if s_ego + sc.mpc.min_lookahead >= sc.road.length:
            log.terminated = "end_of_road"
            break
        log.records.append(mpc_tick(w, sc))
    log.end_state = w.state
    log.end_time = w.t
    return log
