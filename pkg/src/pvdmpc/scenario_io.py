"""Scenario files: TOML documents with strict key and range validation.

Layout::

    name = "overtaking"            # optional, defaults to the file stem
    [road]      centerline, lane_width, lane_count        (all required)
    [ego]       x, y, theta, v (required), length, width
    [[obstacles]] x, y, theta, speed (required), length, width
    [params]    planner and loop parameters (see PARAM_DEFAULTS)
    [[vpref_schedule]]      t_from, v_pref                (at least one)
    [[goal_lane_schedule]]  t_from, lane                  (optional)
"""

import math
import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .path_layer import PathParams
from .sim.road import Road
from .sim.scenario import EgoSpec, MpcConfig, ObstacleSpec, Scenario
from .velocity_layer import VelocityParams


class ScenarioError(ValueError):
    pass


PARAM_DEFAULTS = {
    # path layer
    "w1": 1.0,
    "w2": 0.05,
    "kappa_max": 0.2,
    "omega_max": 0.5,
    "lat_accel_max": 2.0,
    "path_gate_time": 3.0,
    # velocity layer
    "v_min": 1.0,
    "v_max": 20.0,
    "a_min": -4.0,
    "a_max": 3.0,
    "velocity_gate_time": 3.0,
    "dt": 0.1,
    # loop
    "horizon_n": 10,
    "exec_fraction": 0.1,
    "pseudo_goal_speed": None,
    "duration": 30.0,
    "min_lookahead": 10.0,
    "max_lookahead": 30.0,
    "boundary_radius": 1.0,
    "boundary_spacing": 1.5,
    "safety_margin": 0.3,
    "sensor_range": 80.0,
}

# key -> (predicate, description of the bound)
_POSITIVE = (lambda x: x > 0, "> 0")
PARAM_BOUNDS = {
    "w1": _POSITIVE, "w2": _POSITIVE, "kappa_max": _POSITIVE, "omega_max": _POSITIVE,
    "lat_accel_max": _POSITIVE, "path_gate_time": _POSITIVE, "velocity_gate_time": _POSITIVE,
    "v_min": (lambda x: x > 0, "> 0 (the vehicle must not halt)"),
    "v_max": _POSITIVE,
    "a_min": (lambda x: x < 0, "< 0"),
    "a_max": _POSITIVE,
    "dt": _POSITIVE,
    "horizon_n": (lambda x: x >= 1, ">= 1"),
    "exec_fraction": (lambda x: 0 < x <= 1, "in (0, 1]"),
    "pseudo_goal_speed": (lambda x: x is None or x > 0, "> 0"),
    "duration": _POSITIVE,
    "min_lookahead": _POSITIVE, "max_lookahead": _POSITIVE,
    "boundary_radius": _POSITIVE, "boundary_spacing": _POSITIVE,
    "safety_margin": (lambda x: x >= 0, ">= 0"),
    "sensor_range": _POSITIVE,
}

_INT_KEYS = {"horizon_n", "lane_count", "lane"}
_TOP_KEYS = {"name", "road", "ego", "obstacles", "params", "vpref_schedule", "goal_lane_schedule"}


def _number(where, val, integer=False):
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ScenarioError(f"{where} must be a number, got {val!r}")
    if integer:
        if not isinstance(val, int):
            raise ScenarioError(f"{where} must be an integer, got {val!r}")
        return val
    if not math.isfinite(val):
        raise ScenarioError(f"{where} must be finite")
    return float(val)


def _table(doc, key, required, optional, where=None):
    where = where or key
    if not isinstance(doc, dict):
        raise ScenarioError(f"{where} must be a table")
    unknown = set(doc) - set(required) - set(optional)
    if unknown:
        raise ScenarioError(f"unknown key {where}.{sorted(unknown)[0]}")
    out = {}
    for k in required:
        if k not in doc:
            raise ScenarioError(f"missing required key {where}.{k}")
    for k, v in doc.items():
        if k == "centerline":
            out[k] = v
        else:
            out[k] = _number(f"{where}.{k}", v, k in _INT_KEYS)
    return out


def _params(doc):
    doc = doc or {}
    if not isinstance(doc, dict):
        raise ScenarioError("params must be a table")
    unknown = set(doc) - set(PARAM_DEFAULTS)
    if unknown:
        raise ScenarioError(f"unknown key params.{sorted(unknown)[0]}")
    out = dict(PARAM_DEFAULTS)
    for k, v in doc.items():
        out[k] = _number(f"params.{k}", v, k in _INT_KEYS)
    for k, (ok, desc) in PARAM_BOUNDS.items():
        if not ok(out[k]):
            raise ScenarioError(f"params.{k} must be {desc}, got {out[k]}")
    if not out["v_min"] < out["v_max"]:
        raise ScenarioError("params.v_max must be > params.v_min")
    if not out["min_lookahead"] <= out["max_lookahead"]:
        raise ScenarioError("params.max_lookahead must be >= params.min_lookahead")
    if out["boundary_spacing"] > 2 * out["boundary_radius"]:
        raise ScenarioError("params.boundary_spacing must be <= 2 * params.boundary_radius")
    return out


def _schedule(items, key, value_key, integer=False):
    if not isinstance(items, list):
        raise ScenarioError(f"{key} must be an array of tables")
    out = []
    for i, it in enumerate(items):
        t = _table(it, key, ("t_from", value_key), (), where=f"{key}[{i}]")
        out.append((t["t_from"], t[value_key]))
    if [t for t, _ in out] != sorted(t for t, _ in out):
        raise ScenarioError(f"{key} must be sorted by t_from")
    return out


def parse_scenario(text: str, name: str = "scenario") -> Scenario:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"parse error: {exc}") from None
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ScenarioError(f"unknown key {sorted(unknown)[0]}")
    for sec in ("road", "ego", "vpref_schedule"):
        if sec not in doc:
            raise ScenarioError(f"missing required section {sec}")
    name = doc.get("name", name)
    if not isinstance(name, str):
        raise ScenarioError("name must be a string")

    rd = _table(doc["road"], "road", ("centerline", "lane_width", "lane_count"), ())
    cl = rd["centerline"]
    if (not isinstance(cl, list) or len(cl) < 2
            or not all(isinstance(p, list) and len(p) == 2 for p in cl)):
        raise ScenarioError("road.centerline must be a list of at least two [x, y] points")
    pts = [(_number("road.centerline", p[0]), _number("road.centerline", p[1])) for p in cl]
    if rd["lane_width"] <= 0:
        raise ScenarioError(f"road.lane_width must be > 0, got {rd['lane_width']}")
    if rd["lane_count"] < 1:
        raise ScenarioError(f"road.lane_count must be >= 1, got {rd['lane_count']}")
    try:
        road = Road(pts, rd["lane_width"], rd["lane_count"])
    except ValueError as exc:
        raise ScenarioError(f"road: {exc}") from None

    eg = _table(doc["ego"], "ego", ("x", "y", "theta", "v"), ("length", "width"))
    if eg["v"] < 0:
        raise ScenarioError(f"ego.v must be >= 0, got {eg['v']}")
    for k in ("length", "width"):
        if k in eg and eg[k] <= 0:
            raise ScenarioError(f"ego.{k} must be > 0")
    ego = EgoSpec(**eg)
    if road.lane_width <= ego.width:
        raise ScenarioError("road.lane_width must exceed ego.width")

    obstacles = []
    obs_doc = doc.get("obstacles", [])
    if not isinstance(obs_doc, list):
        raise ScenarioError("obstacles must be an array of tables")
    for i, o in enumerate(obs_doc):
        od = _table(o, "obstacles", ("x", "y", "theta", "speed"), ("length", "width"),
                    where=f"obstacles[{i}]")
        for k in ("length", "width"):
            if k in od and od[k] <= 0:
                raise ScenarioError(f"obstacles[{i}].{k} must be > 0")
        obstacles.append(ObstacleSpec(**od))

    pr = _params(doc.get("params"))
    vpref = _schedule(doc["vpref_schedule"], "vpref_schedule", "v_pref")
    if not vpref:
        raise ScenarioError("vpref_schedule needs at least one entry")
    for t, v in vpref:
        if not pr["v_min"] <= v <= pr["v_max"]:
            raise ScenarioError(f"vpref_schedule.v_pref must be within [v_min, v_max], got {v}")
    lanes = None
    if "goal_lane_schedule" in doc:
        lanes = _schedule(doc["goal_lane_schedule"], "goal_lane_schedule", "lane", integer=True)
        for _, lane in lanes:
            if not 0 <= lane < road.lane_count:
                raise ScenarioError(f"goal_lane_schedule.lane must be in [0, {road.lane_count}), got {lane}")

    path = PathParams(pr["w1"], pr["w2"], pr["kappa_max"], pr["omega_max"], pr["dt"],
                      pr["horizon_n"], pr["lat_accel_max"], pr["path_gate_time"])
    vel = VelocityParams(pr["v_min"], pr["v_max"], pr["a_min"], pr["a_max"], vpref[0][1],
                         pr["dt"], pr["velocity_gate_time"])
    mpc = MpcConfig(pr["horizon_n"], pr["exec_fraction"], pr["pseudo_goal_speed"],
                    pr["duration"], pr["min_lookahead"], pr["max_lookahead"],
                    pr["boundary_radius"], pr["boundary_spacing"], pr["safety_margin"],
                    pr["sensor_range"])
    return Scenario(name, road, ego, obstacles, vpref, path, vel, mpc, lanes)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    return parse_scenario(text, path.stem)


def bundled_scenario_path(name: str) -> Path:
    return Path(__file__).parent / "scenarios" / f"{name}.toml"


def bundled_scenarios():
    return sorted(p.stem for p in (Path(__file__).parent / "scenarios").glob("*.toml"))
