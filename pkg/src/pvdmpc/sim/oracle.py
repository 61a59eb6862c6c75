"""Independent post-run checks: dense collision oracle and constraint audit."""

import math
from dataclasses import dataclass, field
from typing import List

from ..geometry import OrientedRect, polygon_separation
from ..kinematics import wrap_angle
from .scenario import RunLog, Scenario


def _ego_poses(log: RunLog, substeps: int):
    """Interpolated (t, x, y, theta) between consecutive logged ticks."""
    recs = log.records
    ends = [(r.t, r.x, r.y, r.theta) for r in recs]
    if log.end_state is not None:
        e = log.end_state
        ends.append((log.end_time, e.x, e.y, e.theta))
    if len(ends) == 1:
        yield ends[0]
        return
    for (t0, x0, y0, h0), (t1, x1, y1, h1) in zip(ends[:-1], ends[1:]):
        dh = wrap_angle(h1 - h0)
        for j in range(substeps):
            u = j / substeps
            yield (t0 + u * (t1 - t0), x0 + u * (x1 - x0), y0 + u * (y1 - y0), h0 + u * dh)
    yield ends[-1]


def collision_oracle(log: RunLog, sc: Scenario, substeps: int = 10) -> float:
    """Minimum exact rectangle separation between ego and obstacles over the run."""
    if substeps < 10:
        raise ValueError("substeps must be >= 10")
    best = math.inf
    reach_e = 0.5 * math.hypot(sc.ego.length, sc.ego.width)
    for t, x, y, h in _ego_poses(log, substeps):
        ego = None
        for ob in sc.obstacles:
            r = ob.rect_at(t)
            gap = math.hypot(r.center[0] - x, r.center[1] - y) - reach_e - 0.5 * math.hypot(ob.length, ob.width)
            if gap >= best:
                continue
            if ego is None:
                ego = OrientedRect((x, y), h, sc.ego.length, sc.ego.width).corners()
            best = min(best, polygon_separation(ego, r.corners()))
    return best


@dataclass
class AuditReport:
    ticks: int = 0
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def constraint_audit(log: RunLog, sc: Scenario, tol_v: float = 1e-6,
                     tol_a: float = 1e-6, tol_w: float = 1e-12) -> AuditReport:
    """Check executed omega, speed and per-axis acceleration on every tick."""
    p, vp = sc.path, sc.velocity
    lo_a, hi_a = vp.a_min / math.sqrt(2.0), vp.a_max / math.sqrt(2.0)
    rep = AuditReport(len(log.records))
    for k, r in enumerate(log.records):
        cap = min(p.kappa_max * r.v, p.omega_max)
        if abs(r.omega) > cap + tol_w:
            rep.violations.append(f"tick {k}: |omega|={abs(r.omega):.6g} > {cap:.6g}")
        if not vp.v_min - tol_v <= r.v <= vp.v_max + tol_v:
            rep.violations.append(f"tick {k}: v={r.v:.6g} outside speed bounds")
        for ax, ay in r.acc:
            for a in (ax, ay):
                if not lo_a - tol_a <= a <= hi_a + tol_a:
                    rep.violations.append(f"tick {k}: axis acceleration {a:.6g} outside bounds")
    return rep


def road_containment(log: RunLog, sc: Scenario) -> float:
    """Smallest margin between an ego corner and the road edge (negative = outside)."""
    best = math.inf
    hw = sc.road.half_width
    for r in log.records:
        rect = OrientedRect((r.x, r.y), r.theta, sc.ego.length, sc.ego.width)
        for c in rect.corners():
            _, d = sc.road.project(c)
            best = min(best, hw - abs(d))
    return best
