"""Command line entry point: run, bench, verify and oracle."""

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .scenario_io import ScenarioError, bundled_scenario_path, bundled_scenarios, load_scenario
from .sim import collision_oracle, constraint_audit, road_containment, run_scenario
from .sim.runlog import log_to_csv, read_csv, untimed, write_csv

EXIT_OK = 0
EXIT_COLLISION = 1
EXIT_SOLVER = 2
EXIT_NONDETERMINISTIC = 3
EXIT_USAGE = 64

TIME_BUDGET_MS = 13.0


def resolve_scenario(arg: str):
    """A file path, or the name of a bundled scenario."""
    p = Path(arg)
    if p.exists():
        return load_scenario(p)
    b = bundled_scenario_path(arg)
    if b.exists():
        return load_scenario(b)
    raise ScenarioError(f"no such scenario file or bundled scenario: {arg} "
                        f"(bundled: {', '.join(bundled_scenarios())})")


def _summary_text(log, min_sep) -> str:
    s = log.summary()
    lines = [
        f"scenario: {log.scenario}",
        f"ticks: {s.get('ticks', 0)}",
        f"terminated: {log.terminated}",
        f"simulated time [s]: {log.end_time:.3f}",
        f"min separation [m]: {min_sep:.6g}",
    ]
    if s.get("ticks"):
        lines += [
            f"terminal speed [m/s]: {s['terminal_speed']:.6g}",
            f"mean path solve [ms]: {s['mean_path_ms']:.4f}",
            f"mean velocity solve [ms]: {s['mean_vel_ms']:.4f}",
            f"mean total solve [ms]: {s['mean_total_ms']:.4f}",
            f"max total solve [ms]: {s['max_total_ms']:.4f}",
            f"degraded ticks: {s['degraded_ticks']}",
            f"solver failures: {s['error_ticks']}",
            f"infeasible path ticks: {s['infeasible_path_ticks']}",
        ]
    return "\n".join(lines) + "\n"


def cmd_run(args) -> int:
    sc = resolve_scenario(args.scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log = run_scenario(sc, max_ticks=args.ticks)
    if args.seed_check:
        again = run_scenario(sc, max_ticks=args.ticks)
        if log_to_csv(untimed(log)) != log_to_csv(untimed(again)):
            print("determinism check failed: two runs differ", file=sys.stderr)
            return EXIT_NONDETERMINISTIC
    write_csv(log, out / "trajectory.csv", timing=not args.seed_check)
    min_sep = collision_oracle(log, sc, substeps=10)
    (out / "summary.txt").write_text(_summary_text(log, min_sep))
    if not args.no_plots:
        from .plots import write_plots
        write_plots(log, sc, out / "plots")
    s = log.summary()
    print(_summary_text(log, min_sep), end="")
    if s.get("degraded_ticks"):
        print(f"warning: {s['degraded_ticks']} ticks used relaxed (soft) collision rows")
    if min_sep <= 0:
        print("collision detected", file=sys.stderr)
        return EXIT_COLLISION
    if s.get("error_ticks"):
        print("velocity solver failed on some ticks", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def bench_stats(logs) -> dict:
    out = {}
    for key in ("path_ms", "vel_ms", "total_ms"):
        vals = np.array([getattr(r, key) for lg in logs for r in lg.records])
        out[key] = (float(vals.mean()), float(np.percentile(vals, 95))) if vals.size else (math.nan, math.nan)
    return out


def cmd_bench(args) -> int:
    sc = resolve_scenario(args.scenario)
    logs = [run_scenario(sc, max_ticks=args.ticks) for _ in range(args.repeats)]
    st = bench_stats(logs)
    n = sum(len(lg.records) for lg in logs)
    print(f"scenario: {sc.name}  obstacles: {len(sc.obstacles)}  repeats: {args.repeats}  ticks: {n}")
    print(f"{'layer':<10}{'mean [ms]':>12}{'p95 [ms]':>12}")
    for key, label in (("path_ms", "path"), ("vel_ms", "velocity"), ("total_ms", "total")):
        mean, p95 = st[key]
        print(f"{label:<10}{mean:>12.4f}{p95:>12.4f}")
    mean = st["total_ms"][0]
    rate = 1e3 / mean if mean > 0 else math.inf
    verdict = "within" if mean <= TIME_BUDGET_MS else "over"
    print(f"update rate: {rate:.1f} Hz; mean total {verdict} the {TIME_BUDGET_MS:g} ms budget")
    return EXIT_OK


def cmd_verify(args) -> int:
    sc = resolve_scenario(args.scenario)
    log = run_scenario(sc)
    checks = []
    min_sep = collision_oracle(log, sc, substeps=10)
    checks.append(("collision-free (rectangle oracle)", min_sep > 0, f"min separation {min_sep:.4g} m"))
    audit = constraint_audit(log, sc)
    checks.append(("constraint audit", audit.ok,
                   f"{len(audit.violations)} violations over {audit.ticks} ticks"))
    margin = road_containment(log, sc)
    checks.append(("ego inside road", margin >= 0, f"smallest edge margin {margin:.4g} m"))
    errors = log.summary().get("error_ticks", 0)
    checks.append(("velocity solver", errors == 0, f"{errors} failures"))
    ts = log.times
    checks.append(("log times increasing", all(b > a for a, b in zip(ts, ts[1:])), f"{len(ts)} ticks"))
    ok = True
    for name, passed, detail in checks:
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if ok else EXIT_COLLISION


def cmd_oracle(args) -> int:
    sc = resolve_scenario(args.scenario)
    log = read_csv(args.trajectory, sc.name)
    if not log.records:
        print("empty trajectory", file=sys.stderr)
        return EXIT_USAGE
    min_sep = collision_oracle(log, sc, substeps=args.substeps)
    print(f"min separation [m]: {min_sep:.6g}")
    return EXIT_OK if min_sep > 0 else EXIT_COLLISION


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pvdmpc", description="Two-layer MPC driving simulator")
    sub = ap.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="run a scenario and write logs and plots")
    r.add_argument("scenario", help="scenario file or bundled scenario name")
    r.add_argument("--out", default="out", help="output directory (default: out)")
    r.add_argument("--ticks", type=int, default=None, help="stop after N ticks")
    r.add_argument("--seed-check", action="store_true",
                   help="run twice, require identical logs, write timing columns as zero")
    r.add_argument("--no-plots", action="store_true", help="skip SVG output")
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="per-tick solve time statistics")
    b.add_argument("scenario")
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--ticks", type=int, default=None)
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="run a scenario and check safety and constraint properties")
    v.add_argument("scenario")
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="re-run the collision oracle on a trajectory.csv")
    o.add_argument("trajectory")
    o.add_argument("scenario")
    o.add_argument("--substeps", type=int, default=10)
    o.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "ticks", None) is not None and args.ticks < 1:
        print("--ticks must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "repeats", 1) < 1:
        print("--repeats must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
