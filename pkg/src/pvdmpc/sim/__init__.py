"""Driving simulator around the two-layer planner."""

from .road import Road, advance_goal, boundary_obstacles
from .scenario import EgoSpec, MpcConfig, ObstacleSpec, RunLog, Scenario, TickRecord
from .loop import mpc_tick, run_scenario
from .oracle import collision_oracle, constraint_audit, road_containment

__all__ = [
    "Road", "advance_goal", "boundary_obstacles",
    "EgoSpec", "MpcConfig", "ObstacleSpec", "RunLog", "Scenario", "TickRecord",
    "mpc_tick", "run_scenario",
    "collision_oracle", "constraint_audit", "road_containment",
]
