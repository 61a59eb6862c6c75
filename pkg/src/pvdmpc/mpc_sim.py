"""Flat import point for the receding-horizon simulator (see :mod:`pvdmpc.sim`)."""

from .sim import (EgoSpec, MpcConfig, ObstacleSpec, Road, RunLog, Scenario, TickRecord,
                  advance_goal, boundary_obstacles, collision_oracle, constraint_audit,
                  mpc_tick, road_containment, run_scenario)

__all__ = [
    "Road", "advance_goal", "boundary_obstacles",
    "EgoSpec", "MpcConfig", "ObstacleSpec", "RunLog", "Scenario", "TickRecord",
    "mpc_tick", "run_scenario",
    "collision_oracle", "constraint_audit", "road_containment",
]
