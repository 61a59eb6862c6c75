"""Static SVG figures from a run log."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "pvdmpc"


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def write_plots(log, sc, out_dir) -> list:
    """Overhead path, speed and angular velocity over time; returns file paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    recs = log.records
    t = [r.t for r in recs]
    files = []

    fig, ax = plt.subplots(figsize=(10, 3))
    left, right = sc.road.boundary_polylines()
    for line in (left, right):
        ax.plot(line[:, 0], line[:, 1], color="0.3", lw=1)
    for lane in range(1, sc.road.lane_count):
        mark = sc.road.offset_polyline(lane * sc.road.lane_width - sc.road.half_width)
        ax.plot(mark[:, 0], mark[:, 1], color="0.6", lw=0.8, ls="--")
    t_end = log.end_time if recs else 0.0
    for ob in sc.obstacles:
        a, b = ob.rect_at(0.0).center, ob.rect_at(t_end).center
        ax.plot([a[0], b[0]], [a[1], b[1]], color="tab:red", lw=3, alpha=0.4)
    ax.plot([r.x for r in recs], [r.y for r in recs], color="tab:blue", lw=1.5, label="ego")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title(f"{sc.name}: path")
    ax.legend(loc="upper right")
    files.append(out / "path.svg")
    _save(fig, files[-1])

    fig, ax = plt.subplots(figsize=(6, 3))
    ax.plot(t, [r.v for r in recs], color="tab:blue")
    ax.plot(t, [sc.v_pref(x) for x in t], color="0.5", ls="--", label="v_pref")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("speed [m/s]")
    ax.legend()
    files.append(out / "speed.svg")
    _save(fig, files[-1])

    fig, ax = plt.subplots(figsize=(6, 3))
    ax.plot(t, [r.omega for r in recs], color="tab:green")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("omega [rad/s]")
    files.append(out / "omega.svg")
    _save(fig, files[-1])
    return files
