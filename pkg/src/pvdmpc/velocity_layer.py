"""Velocity layer: convex QP over z_i = sdot_i^2 along a fixed path.

Variables are z_1..z_N (z_0 = 1 keeps the current speed).  The objective
tracks the preferred speed, rows bound speed and per-axis acceleration, and
every relevant obstacle contributes TSCC bounds on its knot's z.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import tscc
from .kinematics import PlannedTrajectory, ScalingProfile, retime
from .qp_solver import ActiveSetSolver, QpProblem, QpSolution

SLACK_WEIGHT = 1e6
SQRT2 = math.sqrt(2.0)

INSIDE, NEAREST, EMPTY = "inside", "nearest", "empty"
# softening levels, tried in order until the QP is feasible
SOFT_EMPTY, SOFT_NEAREST, SOFT_ALL = 0, 1, 2

OK = "ok"
DEGRADED = "degraded"
ERROR = "error"


@dataclass(frozen=True)
class VelocityParams:
    v_min: float
    v_max: float
    a_min: float
    a_max: float
    v_pref: float
    dt: float
    gate_time: float = math.inf
    # heading-rate cap; retiming multiplies the path's omega by sdot
    omega_max: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.v_min < self.v_max:
            raise ValueError("need 0 < v_min < v_max")
        if not self.a_min < 0 < self.a_max:
            raise ValueError("need a_min < 0 < a_max")
        if not self.dt > 0 or not self.v_pref > 0 or not self.gate_time > 0:
            raise ValueError("dt, v_pref and gate_time must be positive")
        if self.omega_max is not None and not self.omega_max > 0:
            raise ValueError("omega_max must be positive")


def spref_profile(traj: PlannedTrajectory, v_pref: float) -> np.ndarray:
    speeds = traj.speeds
    if np.any(speeds <= 0):
        raise ValueError("knot speeds must be positive")
    return v_pref / speeds


@dataclass(frozen=True)
class TsccTerm:
    """One obstacle at one knot: the quadratic plus the range-rate data.

    ``re = r.e`` and ``ro = r.o`` decide for which sdot the obstacle is
    converging: r.(sdot e - o) < 0.
    """

    quad: tscc.TsccQuadratic
    re: float
    ro: float


def nonconverging_interval(re: float, ro: float):
    """z-interval where the obstacle is not converging; None when empty."""
    if re < 0:
        lim = ro / re
        return (0.0, lim * lim) if lim > 0 else None
    if re > 0:
        lim = max(0.0, ro / re)
        return (lim * lim, math.inf)
    return (0.0, math.inf) if ro <= 0 else None


def _distance(iv, z):
    lo, hi = iv
    if z < lo:
        return lo - z
    if z > hi:
        return z - hi
    return 0.0


def choose_constraints(term: TsccTerm, z_star: float):
    """Pick one convex piece of the safe set for this knot.

    The safe set is {cone quadratic <= 0} union {not converging}.  Returns
    (constraints, kind) where kind is INSIDE (the piece contains ``z_star``),
    NEAREST (no piece contains it; the closest one is returned) or EMPTY (no
    nonempty piece; the bounds pin z to the least-violating value and must
    be relaxed with a slack).
    """
    emitted = tscc.emit_constraints(term.quad, z_star)
    pieces = []
    if not isinstance(emitted, tscc.Infeasible):
        iv = tscc.z_interval(emitted)
        if iv[0] <= iv[1] and iv[1] > 0:
            pieces.append((iv, emitted))
    nc = nonconverging_interval(term.re, term.ro)
    if nc is not None:
        pieces.append((nc, [tscc.LinearZConstraint(lo=nc[0] if nc[0] > 0 else None,
                                                   hi=nc[1] if math.isfinite(nc[1]) else None)]))
    if not pieces:
        best = emitted.best_sdot if isinstance(emitted, tscc.Infeasible) else 0.0
        z = best * best
        rows = [tscc.LinearZConstraint(hi=z)]
        if z > 0:
            rows.append(tscc.LinearZConstraint(lo=z))
        return rows, EMPTY
    inside = [pc for pc in pieces if _distance(pc[0], z_star) == 0.0]
    if inside:
        return inside[0][1], INSIDE
    # the non-converging piece (listed last) wins ties
    best = min(reversed(pieces), key=lambda pc: _distance(pc[0], z_star))
    return best[1], NEAREST


def knot_terms(traj: PlannedTrajectory, disks_per_knot, p: VelocityParams, z_warm=None):
    """TSCC terms for knots 1..N (index 0 is always empty).

    An obstacle is kept when it converges within ``p.gate_time`` at either the
    incumbent scaling or the preferred scaling.
    """
    n = traj.n_intervals
    if z_warm is None:
        z_warm = np.ones(n + 1)
    spref = spref_profile(traj, p.v_pref)
    terms = [[] for _ in range(n + 1)]
    for i in range(1, n + 1):
        ex, ey = traj.velocities[i]
        px, py = traj.positions[i]
        for d in disks_per_knot[i]:
            rx, ry = px - d.center[0], py - d.center[1]
            ox, oy = d.velocity
            re = rx * ex + ry * ey
            ro = rx * ox + ry * oy
            relevant = False
            for s in (math.sqrt(max(z_warm[i], 0.0)), spref[i]):
                wx, wy = s * ex - ox, s * ey - oy
                rw = s * re - ro
                ww = wx * wx + wy * wy
                if rw < 0 and ww > 0 and -rw / ww <= p.gate_time:
                    relevant = True
            if relevant:
                q = tscc.tscc_coeffs((rx, ry), (ex, ey), (ox, oy), d.radius)
                terms[i].append(TsccTerm(q, re, ro))
    return terms


@dataclass
class VelocityQp:
    problem: QpProblem
    n_knots: int
    n_slack: int
    degraded: bool
    spref: np.ndarray


def assemble_qp(traj: PlannedTrajectory, terms, p: VelocityParams, z_warm=None,
                soften: int = SOFT_EMPTY) -> VelocityQp:
    """Build the z-space QP; variables are [z_1..z_N, slacks].

    TSCC rows get a slack when their piece is empty, additionally when the
    incumbent lies outside it (SOFT_NEAREST), or always (SOFT_ALL).
    """
    n = traj.n_intervals
    if n < 1:
        raise ValueError("horizon must have at least one interval")
    if z_warm is None:
        z_warm = np.ones(n + 1)
    dt = traj.times[1] - traj.times[0]
    spref = spref_profile(traj, p.v_pref)
    vel = traj.velocities
    acc = traj.accelerations
    speed2 = vel[:, 0] ** 2 + vel[:, 1] ** 2

    rows, rhs = [], []
    soft_rows = []  # (knot, coef, rhs) for g*z_i - s <= h

    def add(coefs, bound):
        row = np.zeros(n)
        for idx, val in coefs:
            row[idx] += val
        rows.append(row)
        rhs.append(bound)

    for i in range(1, n + 1):
        add([(i - 1, -speed2[i])], -p.v_min ** 2)
        add([(i - 1, speed2[i])], p.v_max ** 2)
    if p.omega_max is not None:
        # the executed rate on interval i is omega_i (sdot_i + sdot_{i+1}) / 2,
        # so capping both end knots caps the interval
        rates = np.abs(np.diff(np.unwrap(traj.headings))) / dt
        for i in range(1, n + 1):
            w = rates[i - 1] if i == n else max(rates[i - 1], rates[i])
            if w > 0:
                add([(i - 1, 1.0)], (p.omega_max / w) ** 2)
    lo_a, hi_a = p.a_min / SQRT2, p.a_max / SQRT2
    for i in range(n):
        for ax in (0, 1):
            cz_i = acc[i, ax] - vel[i, ax] / (2 * dt)
            cz_n = vel[i, ax] / (2 * dt)
            if i == 0:
                const = cz_i
                coefs = [(0, cz_n)]
            else:
                const = 0.0
                coefs = [(i - 1, cz_i), (i, cz_n)]
            add(coefs, hi_a - const)
            add([(k, -c) for k, c in coefs], -(lo_a - const))

    degraded = False
    for i in range(1, n + 1):
        z_star = z_warm[i] if z_warm[i] > 0 else 1.0
        for term in terms[i]:
            cons, kind = choose_constraints(term, z_star)
            soft = (kind == EMPTY or soften == SOFT_ALL
                    or (soften == SOFT_NEAREST and kind == NEAREST))
            for con in cons:
                if con.is_row:
                    entries = [(con.g, con.h)]
                else:
                    entries = []
                    if con.lo is not None:
                        entries.append((-1.0, -con.lo))
                    if con.hi is not None:
                        entries.append((1.0, con.hi))
                for g, h in entries:
                    if soft:
                        soft_rows.append((i - 1, g, h))
                    else:
                        add([(i - 1, g)], h)
            degraded |= soft

    m_s = len(soft_rows)
    nv = n + m_s
    G = np.zeros((len(rows) + m_s, nv))
    if rows:
        G[:len(rows), :n] = np.array(rows)
    h = np.array(rhs + [sr[2] for sr in soft_rows], dtype=float)
    for k, (idx, g, _) in enumerate(soft_rows):
        G[len(rows) + k, idx] = g
        G[len(rows) + k, n + k] = -1.0
    H = np.zeros((nv, nv))
    H[:n, :n] = 2.0 * np.eye(n)
    H[n:, n:] = 2.0 * SLACK_WEIGHT * np.eye(m_s)
    f = np.zeros(nv)
    f[:n] = -2.0 * spref[1:] ** 2
    lb = np.zeros(nv)
    prob = QpProblem(H, f, G, h, lower_bounds=lb)
    return VelocityQp(prob, n, m_s, degraded, spref)


def n_terms_of(terms) -> int:
    return sum(len(t) for t in terms)


@dataclass
class VelocityResult:
    profile: ScalingProfile
    retimed: PlannedTrajectory
    status: str
    solution: Optional[QpSolution] = None
    qp: Optional[VelocityQp] = None
    n_terms: int = 0


def solve_velocity(traj: PlannedTrajectory, disks_per_knot, p: VelocityParams,
                   z_warm=None, solver: Optional[ActiveSetSolver] = None) -> VelocityResult:
    """Assemble and solve the QP, then retime ``traj`` with sdot = sqrt(z).

    On solver failure the returned profile keeps the current speed
    (sdot = 1) and ``status`` is ``error``.
    """
    n = traj.n_intervals
    if z_warm is None:
        z_warm = np.ones(n + 1)
    solver = solver or ActiveSetSolver()
    terms = knot_terms(traj, disks_per_knot, p, z_warm)
    vqp = assemble_qp(traj, terms, p, z_warm)
    x0 = np.concatenate([z_warm[1:], np.zeros(vqp.n_slack)])
    sol = solver.solve(vqp.problem, x0=x0)
    level = SOFT_EMPTY
    while not sol.ok and level < SOFT_ALL and n_terms_of(terms):
        # the chosen cone pieces conflict with each other or with the
        # speed/acceleration rows: relax more of them
        level += 1
        vqp = assemble_qp(traj, terms, p, z_warm, soften=level)
        x0 = np.concatenate([z_warm[1:], np.zeros(vqp.n_slack)])
        sol = solver.solve(vqp.problem, x0=x0)
    n_terms = n_terms_of(terms)
    if not sol.ok:
        prof = ScalingProfile.from_z(np.ones(n + 1))
        return VelocityResult(prof, retime(traj, prof), ERROR, sol, vqp, n_terms)
    z = np.concatenate([[1.0], np.maximum(sol.x[:n], 0.0)])
    # speeds are bounded below by v_min > 0, so z stays positive
    z = np.maximum(z, 1e-12)
    prof = ScalingProfile.from_z(z)
    status = DEGRADED if vqp.degraded else OK
    return VelocityResult(prof, retime(traj, prof), status, sol, vqp, n_terms)
