"""Independent reference computations used by the tests."""

import math

import numpy as np
from scipy.spatial import ConvexHull


def random_convex_polygon(rng, n_pts=None, center=(0.0, 0.0), scale=1.0):
    n_pts = n_pts or int(rng.integers(3, 12))
    while True:
        pts = rng.normal(size=(n_pts, 2)) * scale + np.asarray(center)
        try:
            hull = ConvexHull(pts)
        except Exception:
            continue
        if hull.volume > 1e-3 * scale * scale:
            return pts[hull.vertices]  # counter-clockwise


def hull_of_sums(p, q):
    """Vertices (ccw) of conv{p_i + q_j}."""
    sums = (np.asarray(p)[:, None, :] + np.asarray(q)[None, :, :]).reshape(-1, 2)
    hull = ConvexHull(sums)
    return sums[hull.vertices]


def same_cycle(a, b, tol):
    """True when two ccw vertex lists describe the same polygon (any rotation)."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        return False
    start = int(np.argmin(np.linalg.norm(b - a[0], axis=1)))
    return bool(np.all(np.abs(np.roll(b, -start, axis=0) - a) <= tol))


def qp_dual_projected_gradient(H, f, G, h, lb=None, tol=1e-16, max_iter=1000000):
    """Optimal value of min 1/2 x'Hx + f'x s.t. Gx <= h, x >= lb for H > 0.

    Accelerated projected gradient ascent on the dual (the only constraint
    on the multipliers is nonnegativity, so the projection is a clip), with
    gradient restarts.  Returns (value, x).
    """
    H = np.asarray(H, float)
    f = np.asarray(f, float)
    G = np.asarray(G, float).reshape(-1, len(f))
    h = np.asarray(h, float).reshape(-1)
    if lb is not None:
        fin = np.isfinite(lb)
        G = np.vstack([G, -np.eye(len(f))[fin]])
        h = np.concatenate([h, -np.asarray(lb, float)[fin]])
    Hinv = np.linalg.inv(H)
    if len(h) == 0:
        x = -Hinv @ f
        return float(0.5 * x @ H @ x + f @ x), x
    M = G @ Hinv @ G.T
    q = G @ Hinv @ f + h
    L = max(np.linalg.eigvalsh(M).max(), 1e-12)
    lam = np.zeros(len(h))
    y, t = lam.copy(), 1.0
    for _ in range(max_iter):
        grad = -(M @ y) - q
        new = np.maximum(0.0, y + grad / L)
        if np.max(np.abs(new - lam)) <= tol * max(1.0, np.max(np.abs(new))):
            lam = new
            break
        t_new = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
        if (new - lam) @ (y - new) > 0:  # restart on non-monotone step
            t_new, y = 1.0, new
        else:
            y = new + (t - 1) / t_new * (new - lam)
        lam, t = new, t_new
    x = -Hinv @ (f + G.T @ lam)
    return float(0.5 * x @ H @ x + f @ x), x


def positive_roots(a, b, c):
    if abs(a) < 1e-300:
        return [-c / b] if b != 0 and -c / b > 0 else []
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    sq = math.sqrt(disc)
    return [r for r in ((-b - sq) / (2 * a), (-b + sq) / (2 * a)) if r > 0]


def scan_grid(step=1e-4, top=10.0):
    return np.arange(1, int(round(top / step)) + 1) * step


def encompassing_scan(p, verts, phi, bis_angle, step=1e-4, d_max=None):
    """Smallest D on the bisector (grid ``step``) whose disk D*sin(phi/2) holds all vertices.

    Returns None when no D up to ``d_max`` works.
    """
    u = np.array([math.cos(bis_angle), math.sin(bis_angle)])
    q = np.asarray(verts) - np.asarray(p)
    far = float(np.max(np.linalg.norm(q, axis=1)))
    d_max = d_max or 4 * far
    ds = np.arange(step, d_max, step)
    centers = ds[:, None] * u
    dist = np.linalg.norm(q[None, :, :] - centers[:, None, :], axis=2)
    ok = np.all(dist <= (ds * math.sin(phi / 2))[:, None] + 1e-12, axis=1)
    return float(ds[np.argmax(ok)]) if ok.any() else None
