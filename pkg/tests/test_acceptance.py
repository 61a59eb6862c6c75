"""Acceptance criteria 1-12, one test each; verdicts are summarized at session end."""

import math
import time

import numpy as np

from conftest import bundled, bundled_run
from oracles import (hull_of_sums, positive_roots,
                     qp_dual_projected_gradient, random_convex_polygon, same_cycle, scan_grid)
from pvdmpc import geometry as geo
from pvdmpc import tscc
from pvdmpc.collision_cone import cc_value
from pvdmpc.kinematics import ScalingProfile, VehicleState, retime, rollout
from pvdmpc.qp_solver import OPTIMAL, QpProblem, solve
from pvdmpc.sim import collision_oracle, constraint_audit, run_scenario

BEHAVIOR_RUNS = ("overtaking", "overtake_follow", "merge_overtake", "lane_change")


def _speeds(log):
    return np.array([r.v for r in log.records])


def _col(log, name):
    return np.array([getattr(r, name) for r in log.records])


def test_criterion_01_overtaking(criterion):
    sc = bundled("overtaking")
    t0 = time.perf_counter()
    log = run_scenario(sc)
    wall = time.perf_counter() - t0
    v_end = log.records[-1].v
    lane_y = sc.ego.y
    dy = abs(log.records[-1].y - lane_y)
    sep = collision_oracle(log, sc, substeps=10)
    departed = np.max(np.abs(_col(log, "y") - lane_y)) > sc.road.lane_width / 2
    ok = abs(v_end - 15.0) <= 0.5 and dy <= 0.5 and sep > 0 and departed and wall < 10.0
    criterion(1, ok, f"overtaking: terminal v {v_end:.3f} m/s, lane offset {dy:.3f} m, "
                     f"left lane {bool(departed)}, min sep {sep:.3f} m, wall {wall:.2f} s")
    assert abs(v_end - 15.0) <= 0.5
    assert dy <= 0.5
    assert departed
    assert sep > 0
    assert wall < 10.0


def test_criterion_02_overtake_follow(criterion):
    sc, log = bundled_run("overtake_follow")
    v = _speeds(log)
    t = _col(log, "t")
    y = _col(log, "y")
    away = np.abs(y - sc.ego.y) > 0.5
    v_dep = float(v[away].max()) if away.any() else 0.0
    v_peak = float(v.max())
    tail = v[t >= 0.8 * log.end_time]
    sep = collision_oracle(log, sc, substeps=10)
    ok = v_dep >= 7.5 and v_peak >= 10.0 and np.all(np.abs(tail - 4.0) <= 0.5) and sep > 0
    criterion(2, ok, f"overtake+follow: {v_dep:.2f} m/s off-lane, peak {v_peak:.2f} m/s, "
                     f"final 20% in [{tail.min():.3f}, {tail.max():.3f}] m/s, min sep {sep:.3f} m")
    assert v_dep >= 7.5
    assert v_peak >= 10.0
    assert np.all(np.abs(tail - 4.0) <= 0.5)
    assert sep > 0


def test_criterion_03_merge_overtake(criterion):
    sc, log = bundled_run("merge_overtake")
    v = _speeds(log)
    t = _col(log, "t")
    x = _col(log, "x")
    slow = sc.obstacles[0]
    slow_x = np.array([slow.rect_at(tk).center[0] for tk in t])
    passed = np.nonzero(x - slow_x > 0.5 * (sc.ego.length + slow.length))[0]
    i_pass = int(passed[0]) if passed.size else len(v)
    # first time the free-lane speed is reached, then the low point before the pass
    reached = np.nonzero(v[:i_pass] >= 7.5)[0]
    i_top = int(reached[0]) if reached.size else int(np.argmax(v[:i_pass]))
    v_top = float(v[:i_pass].max())
    v_low = float(v[i_top:i_pass].min()) if i_pass > i_top else math.nan
    sep = collision_oracle(log, sc, substeps=10)
    ok = abs(v_top - 8.0) <= 0.5 and abs(v_low - 4.0) <= 1.0 and passed.size > 0 and sep > 0
    when = f"t={t[i_pass]:.1f} s" if passed.size else "never"
    criterion(3, ok, f"merge+overtake: free-lane v {v_top:.2f} m/s, merge low {v_low:.2f} m/s, "
                     f"passed slow car at {when}, min sep {sep:.3f} m")
    assert abs(v_top - 8.0) <= 0.5
    assert abs(v_low - 4.0) <= 1.0
    assert passed.size > 0
    assert sep > 0


def test_criterion_04_lane_change(criterion):
    sc, log = bundled_run("lane_change")
    last = log.records[-1]
    offset = last.y - sc.ego.y
    ahead = [last.x - ob.rect_at(last.t).center[0] > 0.5 * (sc.ego.length + ob.length)
             for ob in sc.obstacles]
    sep = collision_oracle(log, sc, substeps=10)
    ok = abs(abs(offset) - sc.road.lane_width) <= 0.5 and all(ahead) and sep > 0
    criterion(4, ok, f"lane change: lateral offset {offset:.3f} m (lane width {sc.road.lane_width}), "
                     f"passed {sum(ahead)}/{len(ahead)} cars, min sep {sep:.3f} m")
    assert abs(abs(offset) - sc.road.lane_width) <= 0.5
    assert all(ahead)
    assert sep > 0


def test_criterion_05_constraint_audit(criterion):
    ticks, viol = 0, []
    for name in BEHAVIOR_RUNS:
        sc, log = bundled_run(name)
        rep = constraint_audit(log, sc, tol_v=1e-6, tol_a=1e-6, tol_w=1e-12)
        ticks += rep.ticks
        viol += [f"{name} {v}" for v in rep.violations]
    criterion(5, not viol, f"constraint audit: {len(viol)} violations over {ticks} ticks")
    assert not viol, viol[:5]


def _case_instances(rng, tag, count):
    out = []
    while len(out) < count:
        a, b, c = rng.normal(size=3) * rng.choice([0.1, 1.0, 10.0], size=3)
        if tag == tscc.A_POS_C_NEG:
            a, c = abs(a), -abs(c)
        elif tag == tscc.A_NEG_C_POS:
            a, c = -abs(a), abs(c)
        else:
            a, c = abs(a), abs(c)
        q = tscc.TsccQuadratic(a, b, c)
        if q.case_tag == tag:
            out.append(q)
    return out


def test_criterion_06_tscc_dense_scan(criterion):
    rng = np.random.default_rng(6)
    grid = scan_grid(1e-4, 10.0)
    z = grid * grid
    bad = 0
    worst = ""
    for tag in (tscc.A_POS_C_NEG, tscc.A_NEG_C_POS, tscc.A_POS_C_POS):
        for q in _case_instances(rng, tag, 1000):
            truth = (q.a * grid + q.b) * grid + q.c <= 0
            cons = tscc.emit_constraints(q, 1.0)
            if isinstance(cons, tscc.Infeasible):
                got = np.zeros_like(truth)
            else:
                got = np.ones_like(truth)
                for con in cons:
                    lo, hi = con.interval()
                    got &= (z >= lo) & (z <= hi)
            miss = np.nonzero(got != truth)[0]
            if miss.size:
                roots = positive_roots(q.a, q.b, q.c)
                far = [i for i in miss if not roots or min(abs(grid[i] - r) for r in roots) > 1e-3]
                if far:
                    bad += 1
                    worst = f" e.g. {tag} ({q.a:.3g}, {q.b:.3g}, {q.c:.3g}) at sdot={grid[far[0]]:.4f}"
    criterion(6, bad == 0, f"TSCC closed form vs dense scan: {bad}/3000 instances disagree{worst}")
    assert bad == 0


def test_criterion_07_conservativeness(criterion):
    rng = np.random.default_rng(7)
    bad = 0
    n = 0
    while n < 1000:
        a, c = -abs(rng.normal()) * rng.choice([0.1, 1, 10]), -abs(rng.normal()) * rng.choice([0.1, 1, 10])
        b = abs(rng.normal()) * rng.choice([0.1, 1, 10])
        q = tscc.TsccQuadratic(a, b, c)
        if q.case_tag != tscc.NONCONVEX:
            continue
        n += 1
        z_star = rng.uniform(0, 4)
        if z_star == 0:
            continue
        (row,) = tscc.emit_constraints(q, z_star)
        zs = rng.uniform(0, 16, size=10000)
        zs = zs[zs > 0]
        lin_ok = row.g * zs <= row.h
        orig = a * zs + b * np.sqrt(zs) + c
        bad += int(np.sum(lin_ok & (orig > 1e-12 * (1 + abs(a) * zs + abs(b) * np.sqrt(zs) + abs(c)))))
    criterion(7, bad == 0, f"linearized nonconvex row implies original: {bad} counterexamples in 1e7 samples")
    assert bad == 0


def test_criterion_08_coefficient_identity(criterion):
    rng = np.random.default_rng(8)
    worst = 0.0
    checked = 0
    while checked < 1000:
        r = rng.normal(size=2) * 10
        e = rng.normal(size=2) * 5
        o = rng.normal(size=2) * 5
        big_r = rng.uniform(0.5, 5)
        sdot = rng.uniform(0.01, 5)
        vs = sdot * e - o
        if np.linalg.norm(vs) <= 1e-6:
            continue
        q = tscc.tscc_coeffs(tuple(r), tuple(e), tuple(o), big_r)
        lhs = q.value(sdot)
        rhs = cc_value(tuple(r), tuple(vs), big_r) * float(vs @ vs)
        scale = max(abs(rhs), float(r @ r) * float(vs @ vs), 1e-300)
        worst = max(worst, abs(lhs - rhs) / scale)
        checked += 1
    criterion(8, worst <= 1e-9, f"TSCC coefficient identity: worst relative error {worst:.2e}")
    assert worst <= 1e-9


def test_criterion_09_qp_solver(criterion):
    rng = np.random.default_rng(9)
    worst_kkt = worst_obj = 0.0
    not_optimal = 0
    for _ in range(500):
        n = int(rng.integers(1, 13))
        m = int(rng.integers(0, 41))
        M = rng.normal(size=(n, n))
        H = M.T @ M + rng.choice([1e-2, 1e-1, 1.0]) * np.eye(n)
        f = rng.normal(size=n) * 3
        G = rng.normal(size=(m, n))
        h = G @ rng.normal(size=n) + rng.exponential(size=m)
        prob = QpProblem(H, f, G, h)
        sol = solve(prob)
        if sol.status != OPTIMAL:
            not_optimal += 1
            continue
        worst_kkt = max(worst_kkt, sol.kkt.max())
        ref, _ = qp_dual_projected_gradient(H, f, G, h)
        obj = prob.objective(sol.x)
        worst_obj = max(worst_obj, abs(obj - ref) / max(1.0, abs(ref)))
    ok = not_optimal == 0 and worst_kkt <= 1e-6 and worst_obj <= 1e-8
    criterion(9, ok, f"QP solver: {500 - not_optimal}/500 optimal, worst KKT {worst_kkt:.1e}, "
                     f"worst objective gap {worst_obj:.1e}")
    assert not_optimal == 0
    assert worst_kkt <= 1e-6
    assert worst_obj <= 1e-8


def _line_distance(center, p, direction):
    dx, dy = center[0] - p[0], center[1] - p[1]
    return abs(dx * direction[1] - dy * direction[0])


def test_criterion_10_geometry(criterion):
    rng = np.random.default_rng(10)
    mink_bad = 0
    for _ in range(100):
        q = random_convex_polygon(rng)
        p = random_convex_polygon(rng)
        got = geo.minkowski_sum(geo.ConvexPolygon.from_points(q),
                                geo.ConvexPolygon.from_points(p).negated())
        ref = hull_of_sums(q, -p)
        if not same_cycle(got.as_array(), ref, 1e-9):
            mink_bad += 1

    contain_bad = tangent_bad = subtense_bad = 0
    worst_margin = 0.0
    for _ in range(200):
        poly = geo.ConvexPolygon.from_points(random_convex_polygon(rng, center=(0, 0), scale=2.0))
        ang = rng.uniform(-math.pi, math.pi)
        dist = rng.uniform(6, 40)
        p = (dist * math.cos(ang), dist * math.sin(ang))
        disk = geo.encompassing_disk(p, poly)
        margin = geo.disk_containment_margin(disk, poly)
        worst_margin = min(worst_margin, margin)
        contain_bad += margin < -1e-9
        t1, t2 = geo.tangent_lines(p, poly)
        if max(abs(_line_distance(disk.center, p, t) - disk.radius) for t in (t1, t2)) > 1e-9:
            tangent_bad += 1
        d = math.hypot(disk.center[0] - p[0], disk.center[1] - p[1])
        if abs(2 * math.asin(disk.radius / d) - geo.enclosing_angle(p, poly)) > 1e-9:
            subtense_bad += 1

    ok = mink_bad == 0 and contain_bad == 0 and tangent_bad == 0 and subtense_bad == 0
    criterion(10, ok, f"geometry: minkowski mismatches {mink_bad}/100; encompassing disk "
                      f"containment failures {contain_bad}/200 (worst margin {worst_margin:.3g} m), "
                      f"tangency failures {tangent_bad}/200, subtense failures {subtense_bad}/200")
    assert mink_bad == 0
    assert tangent_bad == 0
    assert subtense_bad == 0
    assert contain_bad == 0


def test_criterion_11_retiming(criterion):
    rng = np.random.default_rng(11)
    traj = rollout(VehicleState(1.0, 2.0, 0.3, 4.0), rng.uniform(-0.4, 0.4, size=10), 4.0, 0.1)
    n = traj.n_intervals + 1
    same = retime(traj, ScalingProfile.from_sdot(np.ones(n)))
    ident = (np.array_equal(same.positions, traj.positions)
             and np.max(np.abs(same.velocities - traj.velocities)) <= 1e-12
             and np.max(np.abs(same.times - traj.times)) <= 1e-12)
    dbl = retime(traj, ScalingProfile.from_sdot(np.full(n, 2.0)))
    halves = (np.max(np.abs(np.diff(dbl.times) - 0.5 * np.diff(traj.times))) <= 1e-12
              and np.max(np.abs(dbl.speeds - 2 * traj.speeds)) <= 1e-12
              and np.array_equal(dbl.positions, traj.positions))
    invariant = True
    for _ in range(200):
        prof = ScalingProfile.from_sdot(rng.uniform(0.2, 5.0, size=n))
        invariant &= bool(np.array_equal(retime(traj, prof).positions, traj.positions))
    ok = ident and halves and invariant
    criterion(11, ok, f"retiming: identity {ident}, sdot=2 halves/doubles {halves}, "
                      f"path invariance over 200 profiles {invariant}")
    assert ident and halves and invariant


def test_criterion_12_performance(criterion):
    sc = bundled("bench10")
    assert len(sc.obstacles) == 10
    run_scenario(sc, max_ticks=20)  # warm-up
    log = run_scenario(sc)
    total = _col(log, "total_ms")
    mean, p95 = float(total.mean()), float(np.percentile(total, 95))
    rate = 1e3 / mean
    ok = mean <= 13.0 and rate >= 77.0
    criterion(12, ok, f"performance (10 obstacles, {len(total)} ticks): mean {mean:.3f} ms, "
                      f"p95 {p95:.3f} ms, {rate:.0f} Hz")
    assert mean <= 13.0
    assert rate >= 77.0
