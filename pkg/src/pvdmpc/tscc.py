"""Time-scaled collision cone constraints in the scaling variable.

Scaling the ego velocity e by sdot turns the cone condition into the
quadratic a*sdot^2 + b*sdot + c <= 0.  Depending on the signs of (a, c) the
feasible set maps to bounds on z = sdot^2, or, in the nonconvex case, to a
single conservative affine row obtained by linearizing sqrt(z).
"""

import math
from dataclasses import dataclass
from typing import Optional

A_POS_C_NEG = "A_POS_C_NEG"
A_NEG_C_POS = "A_NEG_C_POS"
A_POS_C_POS = "A_POS_C_POS"
NONCONVEX = "NONCONVEX"
DEGENERATE = "DEGENERATE"

_TOL = 1e-12


@dataclass(frozen=True)
class TsccQuadratic:
    a: float
    b: float
    c: float
    case_tag: str = ""

    def __post_init__(self):
        if not self.case_tag:
            object.__setattr__(self, "case_tag", classify_case(self))

    def value(self, sdot: float) -> float:
        return (self.a * sdot + self.b) * sdot + self.c


@dataclass(frozen=True)
class LinearZConstraint:
    """Either bounds ``lo <= z <= hi`` (None = absent) or a row ``g*z <= h``."""

    lo: Optional[float] = None
    hi: Optional[float] = None
    g: Optional[float] = None
    h: Optional[float] = None

    def __post_init__(self):
        if self.lo is not None and self.hi is not None and self.lo > self.hi:
            raise ValueError("empty bound pair")

    @property
    def is_row(self) -> bool:
        return self.g is not None

    def holds(self, z: float, tol: float = 0.0) -> bool:
        if self.is_row:
            return self.g * z <= self.h + tol
        if self.lo is not None and z < self.lo - tol:
            return False
        if self.hi is not None and z > self.hi + tol:
            return False
        return True

    def interval(self):
        """Feasible z as (lo, hi); lo > hi when empty."""
        if not self.is_row:
            return (self.lo if self.lo is not None else -math.inf,
                    self.hi if self.hi is not None else math.inf)
        if self.g > 0:
            return (-math.inf, self.h / self.g)
        if self.g < 0:
            return (self.h / self.g, math.inf)
        return (-math.inf, math.inf) if self.h >= 0 else (math.inf, -math.inf)


@dataclass(frozen=True)
class Infeasible:
    """No sdot > 0 satisfies the quadratic; ``best_sdot`` minimizes it over sdot >= 0."""

    best_sdot: float


def tscc_coeffs(r, ego_vel, obs_vel, big_r: float) -> TsccQuadratic:
    """Quadratic coefficients of the scaled cone condition times |v_rel|^2."""
    rx, ry = r
    ex, ey = ego_vel
    ox, oy = obs_vel
    k = rx * rx + ry * ry - big_r * big_r
    re = rx * ex + ry * ey
    ro = rx * ox + ry * oy
    a = re * re - k * (ex * ex + ey * ey)
    b = -2.0 * re * ro + 2.0 * k * (ex * ox + ey * oy)
    c = ro * ro - k * (ox * ox + oy * oy)
    return TsccQuadratic(a, b, c)


def classify_case(q) -> str:
    tol = _TOL * max(abs(q.a), abs(q.b), abs(q.c))
    a_neg, a_pos = q.a < -tol, q.a > tol
    c_neg, c_pos = q.c < -tol, q.c > tol
    if not a_neg and not c_pos:
        return A_POS_C_NEG
    if not a_pos and not c_neg:
        return A_NEG_C_POS
    if a_pos and c_pos:
        return A_POS_C_POS
    return NONCONVEX if q.b >= -tol else DEGENERATE


def _roots(a, b, c):
    """Real roots of a x^2 + b x + c (a != 0) in ascending order, or None."""
    disc = b * b - 4.0 * a * c
    if disc < 0:
        return None
    sq = math.sqrt(disc)
    qq = -0.5 * (b + math.copysign(sq, b)) if b != 0 else -0.5 * sq
    if qq == 0.0:
        return (0.0, 0.0)
    r1, r2 = qq / a, c / qq
    return (min(r1, r2), max(r1, r2))


def _leading_zero(a, b, c):
    return abs(a) <= _TOL * max(abs(a), abs(b), abs(c), 1e-300)


def _linear_sdot_set(b, c):
    """Feasible sdot >= 0 for b*sdot + c <= 0 as (lo, hi); lo > hi when empty."""
    if b > 0:
        return (0.0, -c / b)
    if b < 0:
        return (max(0.0, -c / b), math.inf)
    return (0.0, math.inf) if c <= 0 else (1.0, 0.0)


def _best_sdot(q) -> float:
    if q.a > 0:
        return max(0.0, -q.b / (2.0 * q.a))
    return 0.0


def sdot_interval(q: TsccQuadratic):
    """Closed-form feasible sdot-interval (sdot >= 0) for the three convex cases.

    Returns (lo, hi) or None when empty.
    """
    a, b, c = q.a, q.b, q.c
    tag = q.case_tag
    if tag in (A_POS_C_NEG, A_POS_C_POS):
        if _leading_zero(a, b, c):
            lo, hi = _linear_sdot_set(b, c)
        else:
            roots = _roots(a, b, c)
            if roots is None:
                return None
            lo, hi = max(0.0, roots[0]), roots[1]
        # sdot must be strictly positive
        return (lo, hi) if hi > 0 and lo <= hi else None
    if tag == A_NEG_C_POS:
        # in u = 1/sdot: c u^2 + b u + a <= 0
        if _leading_zero(c, b, a):
            ulo, uhi = _linear_sdot_set(b, a)
        else:
            roots = _roots(c, b, a)
            if roots is None:
                return None
            ulo, uhi = max(0.0, roots[0]), roots[1]
        if uhi <= 0 or ulo > uhi:
            return None
        lo = 1.0 / uhi
        hi = math.inf if ulo <= 0 else 1.0 / ulo
        return (lo, hi)
    raise ValueError(f"no closed-form interval for case {tag}")


def emit_constraints(q: TsccQuadratic, z_star: float = 1.0):
    """Linear constraints on z = sdot^2 implied by the quadratic.

    Returns a list of :class:`LinearZConstraint` (possibly empty) or an
    :class:`Infeasible` marker.
    """
    if z_star <= 0:
        raise ValueError("linearization point must be positive")
    tag = q.case_tag
    if tag == DEGENERATE:
        return []
    if tag == NONCONVEX:
        rs = math.sqrt(z_star)
        g = q.a + q.b / (2.0 * rs)
        h = -q.c - 0.5 * q.b * rs
        return [LinearZConstraint(g=g, h=h)]
    iv = sdot_interval(q)
    if iv is None:
        return Infeasible(_best_sdot(q))
    lo, hi = iv
    return [LinearZConstraint(lo=lo * lo if lo > 0 else None,
                              hi=hi * hi if math.isfinite(hi) else None)]


def z_interval(cons) -> tuple:
    """Intersection of emitted constraints as a z-interval (lo, hi)."""
    lo, hi = 0.0, math.inf
    for con in cons:
        clo, chi = con.interval()
        lo, hi = max(lo, clo), min(hi, chi)
    return lo, hi
