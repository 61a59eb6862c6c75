"""CSV serialization of run logs."""

import csv
import io

from .scenario import RunLog, TickRecord

HEADER = ["t", "x", "y", "theta", "v", "omega", "min_dist", "path_ms", "vel_ms",
          "total_ms", "path_feasible", "vel_status"]


def _fmt(x: float) -> str:
    return "%.9g" % x


def log_to_csv(log: RunLog) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(HEADER)
    for r in log.records:
        wr.writerow([_fmt(r.t), _fmt(r.x), _fmt(r.y), _fmt(r.theta), _fmt(r.v), _fmt(r.omega),
                     _fmt(r.min_dist), _fmt(r.path_ms), _fmt(r.vel_ms), _fmt(r.total_ms),
                     int(r.path_feasible), r.vel_status])
    return buf.getvalue()


def untimed(log: RunLog) -> RunLog:
    """Copy of ``log`` with the wall-clock columns zeroed."""
    recs = [TickRecord(**{**r.__dict__, "path_ms": 0.0, "vel_ms": 0.0, "total_ms": 0.0})
            for r in log.records]
    return RunLog(log.scenario, recs, log.end_state, log.end_time, log.terminated)


def write_csv(log: RunLog, path, timing: bool = True) -> None:
    """Write the log; ``timing=False`` zeroes the wall-clock columns for reproducible files."""
    if not timing:
        log = untimed(log)
    with open(path, "w", newline="") as fh:
        fh.write(log_to_csv(log))


def read_csv(path, scenario: str = "") -> RunLog:
    log = RunLog(scenario)
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        head = next(rd)
        if head != HEADER:
            raise ValueError(f"unexpected header {head}")
        for row in rd:
            vals = [float(x) for x in row[:10]]
            log.records.append(TickRecord(*vals, path_feasible=bool(int(row[10])), vel_status=row[11]))
    return log
