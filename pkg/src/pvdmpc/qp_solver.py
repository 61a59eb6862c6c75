"""Dense convex QP solver (dual active-set, Goldfarb-Idnani style).

Solves

    min  1/2 x^T H x + f^T x
    s.t. G x <= h,  A x = b,  x >= lb

for small problems and certifies the result with KKT residuals.  An
infeasible problem returns a Farkas certificate: nonnegative weights on the
inequality rows (plus free weights on the equalities) whose combination
reads ``0 . x <= negative``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
MAX_ITER = "max_iter"

KKT_TOL = 1e-6
_REG = 1e-10


@dataclass
class QpProblem:
    hessian: np.ndarray
    linear_cost: np.ndarray
    ineq_rows: Optional[np.ndarray] = None
    ineq_bounds: Optional[np.ndarray] = None
    eq_rows: Optional[np.ndarray] = None
    eq_vals: Optional[np.ndarray] = None
    lower_bounds: Optional[np.ndarray] = None

    def __post_init__(self):
        self.hessian = np.atleast_2d(np.asarray(self.hessian, dtype=float))
        self.linear_cost = np.atleast_1d(np.asarray(self.linear_cost, dtype=float))
        n = self.linear_cost.shape[0]
        if self.hessian.shape != (n, n):
            raise ValueError(f"hessian shape {self.hessian.shape} does not match n={n}")
        scale = max(1.0, float(np.max(np.abs(self.hessian))))
        if np.max(np.abs(self.hessian - self.hessian.T)) > 1e-12 * scale:
            raise ValueError("hessian is not symmetric")
        self.ineq_rows, self.ineq_bounds = _rows(self.ineq_rows, self.ineq_bounds, n, "ineq")
        self.eq_rows, self.eq_vals = _rows(self.eq_rows, self.eq_vals, n, "eq")
        if self.lower_bounds is None:
            self.lower_bounds = np.full(n, -np.inf)
        else:
            self.lower_bounds = np.asarray(self.lower_bounds, dtype=float).reshape(-1)
            if self.lower_bounds.shape != (n,):
                raise ValueError("lower_bounds must have one entry per variable")

    @property
    def n(self) -> int:
        return self.linear_cost.shape[0]

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.hessian @ x + self.linear_cost @ x)


def _rows(mat, vec, n, name):
    if mat is None and vec is None:
        return np.zeros((0, n)), np.zeros(0)
    if mat is None or vec is None:
        raise ValueError(f"{name} rows and values must be given together")
    mat = np.asarray(mat, dtype=float).reshape(-1, n) if np.size(mat) else np.zeros((0, n))
    vec = np.asarray(vec, dtype=float).reshape(-1)
    if mat.shape[0] != vec.shape[0]:
        raise ValueError(f"{name}: {mat.shape[0]} rows but {vec.shape[0]} values")
    return mat, vec


@dataclass
class KktResiduals:
    stationarity: float
    primal: float
    complementarity: float

    def max(self) -> float:
        return max(self.stationarity, self.primal, self.complementarity)


@dataclass
class QpSolution:
    x: np.ndarray
    duals: np.ndarray
    status: str
    kkt: KktResiduals
    eq_duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    bound_duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0
    # Farkas weights (ineq rows, lower-bound rows, equality rows) when infeasible.
    certificate: Optional[tuple] = None

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def check_kkt(p: QpProblem, sol: QpSolution) -> KktResiduals:
    """Recompute stationarity, primal violation and complementarity."""
    x = sol.x
    lam = sol.duals if sol.duals.size else np.zeros(p.ineq_rows.shape[0])
    nu = sol.eq_duals if sol.eq_duals.size else np.zeros(p.eq_rows.shape[0])
    mu = sol.bound_duals if sol.bound_duals.size else np.zeros(p.n)
    finite = np.isfinite(p.lower_bounds)

    grad = p.hessian @ x + p.linear_cost + p.ineq_rows.T @ lam + p.eq_rows.T @ nu
    grad = grad - np.where(finite, mu, 0.0)
    stationarity = float(np.max(np.abs(grad))) if grad.size else 0.0

    slack = p.ineq_rows @ x - p.ineq_bounds
    viol = [0.0]
    if slack.size:
        viol.append(float(np.max(slack)))
    if p.eq_rows.shape[0]:
        viol.append(float(np.max(np.abs(p.eq_rows @ x - p.eq_vals))))
    if finite.any():
        viol.append(float(np.max(p.lower_bounds[finite] - x[finite])))
    primal = max(0.0, max(viol))

    comp = [0.0]
    if slack.size:
        comp.append(float(np.max(np.abs(lam * slack))))
    if finite.any():
        comp.append(float(np.max(np.abs(mu[finite] * (x[finite] - p.lower_bounds[finite])))))
    return KktResiduals(stationarity, primal, max(comp))


class ActiveSetSolver:
    """Dual active-set QP solver.

    Starts at the unconstrained minimizer and adds the most violated
    constraint until the iterate is primal feasible, dropping constraints
    whose multipliers would turn negative.  The working set factorization is
    recomputed with a dense QR each iteration; problems here have tens of
    variables at most.
    """

    def __init__(self, max_iter: int = 200):
        self.max_iter = max_iter

    def solve(self, p: QpProblem, x0=None) -> QpSolution:
        n = p.n
        H = p.hessian
        try:
            L = np.linalg.cholesky(H)
        except np.linalg.LinAlgError:
            try:
                L = np.linalg.cholesky(H + _REG * np.eye(n))
            except np.linalg.LinAlgError:
                raise ValueError("hessian is not positive semidefinite") from None
        # J^T H J = I
        J0 = np.linalg.inv(L).T

        finite = np.flatnonzero(np.isfinite(p.lower_bounds))
        m_g = p.ineq_rows.shape[0]
        # inequality rows in the form C x <= d
        C = np.vstack([p.ineq_rows, -np.eye(n)[finite]]) if finite.size else p.ineq_rows
        d = np.concatenate([p.ineq_bounds, -p.lower_bounds[finite]])
        m = C.shape[0]
        E, e = p.eq_rows, p.eq_vals
        n_eq = E.shape[0]
        row_scale = 1.0 + np.abs(d)

        warm = np.zeros(m, dtype=bool)
        if x0 is not None and m:
            x0 = np.asarray(x0, dtype=float)
            warm = np.abs(C @ x0 - d) <= 1e-9 * row_scale

        # normals in ">=" convention: n_k^T x >= b_k
        def normal(k):
            return E[k] if k < n_eq else -C[k - n_eq]

        def rhs(k):
            return e[k] if k < n_eq else -d[k - n_eq]

        x = -np.linalg.solve(L.T, np.linalg.solve(L, p.linear_cost))
        active = []  # indices into the stacked [E; C] list
        u = []
        iters = 0

        def factor():
            q = len(active)
            if q == 0:
                return J0, np.zeros((0, 0))
            N = np.column_stack([normal(k) for k in active])
            Q, R = np.linalg.qr(J0.T @ N, mode="complete")
            return J0 @ Q, R[:q, :q]

        def directions(np_vec):
            Jc, R = factor()
            q = len(active)
            dv = Jc.T @ np_vec
            z = Jc[:, q:] @ dv[q:]
            r = np.linalg.solve(R, dv[:q]) if q else np.zeros(0)
            return z, r, dv

        for k in range(n_eq):
            nk = normal(k)
            z, r, dv = directions(nk)
            resid = nk @ x - rhs(k)
            if np.linalg.norm(dv[len(active):]) <= 1e-12 * max(1.0, np.linalg.norm(dv)):
                if abs(resid) > 1e-9 * (1.0 + abs(rhs(k))):
                    cert = np.zeros(n_eq)
                    cert[k] = 1.0
                    return self._finish(p, x, active, u, n_eq, m_g, finite, INFEASIBLE, iters,
                                        certificate=(np.zeros(m_g), np.zeros(finite.size), cert))
                continue
            t = -resid / (z @ nk)
            x = x + t * z
            u = list(np.asarray(u) - t * r) + [t]
            active.append(k)

        while True:
            if iters >= self.max_iter:
                return self._finish(p, x, active, u, n_eq, m_g, finite, MAX_ITER, iters)
            if m == 0:
                break
            viol = (C @ x - d) / row_scale
            inactive = np.ones(m, dtype=bool)
            for k in active:
                if k >= n_eq:
                    inactive[k - n_eq] = False
            cand = inactive & (viol > 1e-11)
            if not cand.any():
                break
            pool = cand & warm if (cand & warm).any() else cand
            j = int(np.argmax(np.where(pool, viol, -np.inf)))
            kp = n_eq + j
            np_vec = normal(kp)
            up = 0.0
            while True:
                iters += 1
                if iters > self.max_iter:
                    return self._finish(p, x, active, u, n_eq, m_g, finite, MAX_ITER, iters)
                z, r, dv = directions(np_vec)
                s_p = np_vec @ x - rhs(kp)
                q = len(active)
                full = np.inf
                if np.linalg.norm(dv[q:]) > 1e-12 * max(1.0, np.linalg.norm(dv)):
                    full = -s_p / (z @ np_vec)
                partial, drop = np.inf, -1
                for idx in range(q):
                    if active[idx] >= n_eq and r[idx] > 1e-14:
                        ratio = u[idx] / r[idx]
                        if ratio < partial:
                            partial, drop = ratio, idx
                step = min(full, partial)
                if not np.isfinite(step):
                    lam_c = np.zeros(m)
                    lam_c[j] = 1.0
                    nu = np.zeros(n_eq)
                    for idx, k in enumerate(active):
                        if k < n_eq:
                            nu[k] = r[idx]
                        else:
                            lam_c[k - n_eq] = max(0.0, -r[idx])
                    cert = (lam_c[:m_g], lam_c[m_g:], nu)
                    return self._finish(p, x, active, u, n_eq, m_g, finite, INFEASIBLE, iters,
                                        certificate=cert)
                if np.isfinite(full):
                    x = x + step * z
                u = [ui - step * ri for ui, ri in zip(u, r)]
                up += step
                if step == full:
                    active.append(kp)
                    u.append(up)
                    break
                del active[drop]
                del u[drop]
        return self._finish(p, x, active, u, n_eq, m_g, finite, OPTIMAL, iters)

    @staticmethod
    def _finish(p, x, active, u, n_eq, m_g, finite, status, iters, certificate=None):
        lam = np.zeros(m_g)
        mu_f = np.zeros(finite.size)
        nu = np.zeros(n_eq)
        for k, uk in zip(active, u):
            if k < n_eq:
                nu[k] = -uk
            elif k - n_eq < m_g:
                lam[k - n_eq] = uk
            else:
                mu_f[k - n_eq - m_g] = uk
        mu = np.zeros(p.n)
        mu[finite] = mu_f
        sol = QpSolution(x=x, duals=lam, status=status, kkt=KktResiduals(0.0, 0.0, 0.0),
                         eq_duals=nu, bound_duals=mu, iterations=iters, certificate=certificate)
        sol.kkt = check_kkt(p, sol)
        return sol


def solve(p: QpProblem, x0=None, max_iter: int = 200) -> QpSolution:
    return ActiveSetSolver(max_iter=max_iter).solve(p, x0)


def verify_certificate(p: QpProblem, cert, tol: float = 1e-8) -> bool:
    """True when ``cert`` proves ``p`` has no feasible point."""
    lam_g, lam_b, nu = cert
    finite = np.flatnonzero(np.isfinite(p.lower_bounds))
    if np.any(lam_g < 0) or np.any(lam_b < 0):
        return False
    combo = p.ineq_rows.T @ lam_g - np.eye(p.n)[finite].T @ lam_b + p.eq_rows.T @ nu
    rhs = lam_g @ p.ineq_bounds - lam_b @ p.lower_bounds[finite] + nu @ p.eq_vals
    scale = 1.0 + np.abs(lam_g).sum() + np.abs(lam_b).sum() + np.abs(nu).sum()
    return bool(np.max(np.abs(combo), initial=0.0) <= tol * scale and rhs < -tol)
