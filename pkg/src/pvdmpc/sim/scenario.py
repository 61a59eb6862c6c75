"""Scenario description and run log records."""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from ..geometry import OrientedRect
from ..kinematics import VehicleState
from ..path_layer import PathParams
from ..velocity_layer import VelocityParams
from .road import Road


@dataclass(frozen=True)
class EgoSpec:
    x: float
    y: float
    theta: float
    v: float
    length: float = 4.5
    width: float = 1.8

    def state(self) -> VehicleState:
        return VehicleState(self.x, self.y, self.theta, self.v)


@dataclass(frozen=True)
class ObstacleSpec:
    """Rectangle moving at constant velocity along its heading."""

    x: float
    y: float
    theta: float
    speed: float
    length: float = 4.5
    width: float = 1.8

    def __post_init__(self):
        if not (self.length > 0 and self.width > 0):
            raise ValueError("obstacle dimensions must be positive")

    @property
    def velocity(self) -> Tuple[float, float]:
        return (self.speed * math.cos(self.theta), self.speed * math.sin(self.theta))

    def rect_at(self, t: float) -> OrientedRect:
        vx, vy = self.velocity
        return OrientedRect((self.x + vx * t, self.y + vy * t), self.theta, self.length, self.width)


@dataclass(frozen=True)
class MpcConfig:
    horizon_n: int = 10
    exec_fraction: float = 0.1
    # None means 1.2 * current v_pref
    pseudo_goal_speed: Optional[float] = None
    duration: float = 30.0
    # goal lead over the ego along the road is kept in [min_lookahead, max_lookahead]
    min_lookahead: float = 10.0
    max_lookahead: float = 30.0
    boundary_radius: float = 1.0
    boundary_spacing: float = 1.5
    # footprint inflation used for planning only
    safety_margin: float = 0.3
    # only obstacles and boundary disks within this range are planned against
    sensor_range: float = 80.0

    def __post_init__(self):
        if not 0 < self.exec_fraction <= 1:
            raise ValueError("exec_fraction must be in (0, 1]")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if self.horizon_n < 1:
            raise ValueError("horizon_n must be >= 1")
        if self.pseudo_goal_speed is not None and not self.pseudo_goal_speed > 0:
            raise ValueError("pseudo_goal_speed must be positive")
        if not 0 < self.min_lookahead <= self.max_lookahead:
            raise ValueError("need 0 < min_lookahead <= max_lookahead")
        if self.safety_margin < 0:
            raise ValueError("safety_margin must be nonnegative")

    @property
    def exec_steps(self) -> int:
        return max(1, int(round(self.exec_fraction * self.horizon_n)))


def schedule_value(schedule: Sequence[Tuple[float, float]], t: float):
    """Piecewise-constant lookup: value of the last entry with t_from <= t."""
    val = schedule[0][1]
    for t_from, v in schedule:
        if t_from <= t:
            val = v
        else:
            break
    return val


@dataclass
class Scenario:
    name: str
    road: Road
    ego: EgoSpec
    obstacles: List[ObstacleSpec]
    vpref_schedule: List[Tuple[float, float]]
    path: PathParams
    velocity: VelocityParams
    mpc: MpcConfig = field(default_factory=MpcConfig)
    # goal lane index over time; defaults to the lane the ego starts in
    goal_lane_schedule: Optional[List[Tuple[float, int]]] = None

    def __post_init__(self):
        if not self.vpref_schedule:
            raise ValueError("vpref_schedule must not be empty")
        for sched in (self.vpref_schedule, self.goal_lane_schedule or []):
            ts = [t for t, _ in sched]
            if ts != sorted(ts):
                raise ValueError("schedules must be sorted by time")
        if self.road.lane_width <= self.ego.width:
            raise ValueError("lane_width must exceed the vehicle width")
        if self.goal_lane_schedule is None:
            _, d = self.road.project((self.ego.x, self.ego.y))
            lane = int(math.floor((d + self.road.half_width) / self.road.lane_width))
            lane = min(max(lane, 0), self.road.lane_count - 1)
            self.goal_lane_schedule = [(0.0, lane)]
        for _, lane in self.goal_lane_schedule:
            self.road.lane_offset(lane)

    def v_pref(self, t: float) -> float:
        return float(schedule_value(self.vpref_schedule, t))

    def goal_lane(self, t: float) -> int:
        return int(schedule_value(self.goal_lane_schedule, t))


@dataclass
class TickRecord:
    t: float
    x: float
    y: float
    theta: float
    v: float
    omega: float
    min_dist: float
    path_ms: float
    vel_ms: float
    total_ms: float
    path_feasible: bool
    vel_status: str
    # not serialized: per-axis accelerations of the executed intervals and
    # the speed the path was planned at
    acc: list = field(default_factory=list)
    plan_v: float = 0.0


@dataclass
class RunLog:
    scenario: str
    records: List[TickRecord] = field(default_factory=list)
    end_state: Optional[VehicleState] = None
    end_time: float = 0.0
    terminated: str = "duration"

    @property
    def times(self):
        return [r.t for r in self.records]

    def summary(self) -> dict:
        recs = self.records
        if not recs:
            return {"ticks": 0}
        tot = [r.total_ms for r in recs]
        return {
            "ticks": len(recs),
            "min_dist": min(r.min_dist for r in recs),
            "mean_total_ms": sum(tot) / len(tot),
            "max_total_ms": max(tot),
            "mean_path_ms": sum(r.path_ms for r in recs) / len(recs),
            "mean_vel_ms": sum(r.vel_ms for r in recs) / len(recs),
            "terminal_speed": self.end_state.v if self.end_state else recs[-1].v,
            "degraded_ticks": sum(r.vel_status == "degraded" for r in recs),
            "error_ticks": sum(r.vel_status == "error" for r in recs),
            "infeasible_path_ticks": sum(not r.path_feasible for r in recs),
        }
