"""
The pillowcase R^2 / (2 pi Z^2 x {+-1}) and the geometry drawn in it.

Canonical representatives live in ``[0, pi] x (-pi, pi]``; on the edges
``alpha in {0, pi}`` the representative with ``beta >= 0`` is chosen.

Two coordinate conventions are used.  *Untwisted* coordinates are the
holonomy angles of an honest SU(2) representation of the knot exterior, so
abelian representations sit on ``beta = 0``.  *Twisted* coordinates describe
the same points for the bundle with non-trivial determinant, and differ by
``beta -> beta + pi``: the reducibles then sit on ``beta = pi`` and the
trivial representation on ``(0, pi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .su2 import AnglePair

PI = math.pi
TWO_PI = 2.0 * math.pi
BETA_PI_TOL = 1e-12


class SlopeOutOfRange(ValueError):
    pass


class InvalidSlope(ValueError):
    pass


def wrap(x: float) -> float:
    """Reduce an angle into ``(-pi, pi]``."""
    y = math.remainder(x, TWO_PI)
    if y <= -PI:
        y += TWO_PI
    return y + 0.0  # drop a negative zero


def wrap_array(x):
    y = np.remainder(np.asarray(x, dtype=float) + PI, TWO_PI) - PI
    return np.where(y <= -PI, y + TWO_PI, y)


@dataclass(frozen=True)
class PillowcasePoint:
    alpha: float
    beta: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.alpha, self.beta)


def canonicalize(raw) -> PillowcasePoint:
    """Canonical representative of the orbit of ``raw`` (an AnglePair,
    PillowcasePoint or ``(alpha, beta)`` tuple)."""
    alpha, beta = _pair(raw)
    a, b = wrap(alpha), wrap(beta)
    if a < 0.0:
        a, b = -a, wrap(-b)
    if (a == 0.0 or a == PI) and b < 0.0:
        b = -b
    return PillowcasePoint(a + 0.0, b + 0.0)


def canonicalize_array(alpha, beta) -> tuple[np.ndarray, np.ndarray]:
    a, b = wrap_array(alpha), wrap_array(beta)
    neg = a < 0.0
    a = np.where(neg, -a, a)
    b = np.where(neg, wrap_array(-b), b)
    edge = ((a == 0.0) | (a == PI)) & (b < 0.0)
    b = np.where(edge, -b, b)
    return a + 0.0, b + 0.0


def _pair(x) -> tuple[float, float]:
    if isinstance(x, (AnglePair, PillowcasePoint)):
        return float(x.alpha), float(x.beta)
    a, b = x
    return float(a), float(b)


def pc_distance(x, y) -> float:
    """Quotient distance: minimum Euclidean distance over the orbit."""
    xa, xb = _pair(x)
    ya, yb = _pair(y)
    return min(math.hypot(wrap(xa - s * ya), wrap(xb - s * yb)) for s in (1.0, -1.0))


def pc_distance_array(xa, xb, ya, yb):
    best = None
    for s in (1.0, -1.0):
        d = np.hypot(wrap_array(xa - s * ya), wrap_array(xb - s * yb))
        best = d if best is None else np.minimum(best, d)
    return best


def shift_alpha_pi(x) -> PillowcasePoint:
    """The involution ``(alpha, beta) -> (alpha + pi, beta)``."""
    a, b = _pair(x)
    return canonicalize((a + PI, b))


def to_twisted(x) -> PillowcasePoint:
    a, b = _pair(x)
    return canonicalize((a, b + PI))


def to_untwisted(x) -> PillowcasePoint:
    a, b = _pair(x)
    return canonicalize((a, b - PI))


# ---------------------------------------------------------------------------
# slopes and lines

@dataclass(frozen=True)
class Slope:
    """The boundary curve ``p * meridian + q * longitude``; ``r = p/q``."""

    p: int
    q: int

    def __post_init__(self):
        p, q = int(self.p), int(self.q)
        if (p, q) == (0, 0):
            raise InvalidSlope("(0, 0) is not a slope")
        if q < 0:
            raise InvalidSlope("slopes are normalized with q >= 0")
        if q == 0 and p != 1:
            raise InvalidSlope("the only slope with q = 0 is (1, 0)")
        if math.gcd(p, q) != 1:
            raise InvalidSlope(f"p={p}, q={q} are not coprime")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def from_rational(cls, r) -> "Slope":
        if isinstance(r, str):
            text = r.strip()
            if text in ("1/0", "inf", "infinity", "meridian"):
                return cls(1, 0)
            r = Fraction(text)
        r = Fraction(r)
        return cls(r.numerator, r.denominator)

    @property
    def ratio(self) -> Fraction:
        if self.q == 0:
            raise InvalidSlope("the meridian slope has no finite ratio")
        return Fraction(self.p, self.q)

    def __str__(self):
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class FillingLine:
    """The locus ``p alpha + q beta = c (mod 2 pi)`` in one convention."""

    p: int
    q: int
    c: float
    twisted: bool = False

    def __post_init__(self):
        c = math.fmod(float(self.c), TWO_PI)
        if c < 0.0:
            c += TWO_PI
        if c >= TWO_PI:
            c = 0.0
        object.__setattr__(self, "c", c + 0.0)

    def residual(self, x) -> float:
        """Distance of ``p alpha + q beta`` from ``+-c`` modulo 2 pi.

        Both signs are tried so the value does not depend on the orbit
        representative; for ``c`` in {0, pi} the two agree.
        """
        a, b = _pair(x)
        v = self.p * a + self.q * b
        return min(abs(wrap(v - self.c)), abs(wrap(v + self.c)))

    def residual_array(self, alpha, beta):
        v = self.p * np.asarray(alpha) + self.q * np.asarray(beta)
        return np.minimum(np.abs(wrap_array(v - self.c)), np.abs(wrap_array(v + self.c)))

    def contains(self, x, tol: float = 1e-12) -> bool:
        return self.residual(x) <= tol

    def convert(self, twisted: bool) -> "FillingLine":
        """Same locus written in the other convention (beta shifts by pi)."""
        if twisted == self.twisted:
            return self
        shift = self.q * PI if twisted else -self.q * PI
        return FillingLine(self.p, self.q, self.c + shift, twisted)

    def shift_alpha_pi(self) -> "FillingLine":
        return FillingLine(self.p, self.q, self.c + self.p * PI, self.twisted)

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "c": self.c, "twisted": self.twisted}


def reducible_locus(twisted: bool) -> FillingLine:
    """Where reducible (abelian) representations of a knot exterior lie."""
    return FillingLine(0, 1, PI if twisted else 0.0, twisted)


def filling_lines(slope: Slope, twisted: bool = False) -> FillingLine:
    """Boundary condition for representations extending over the filling.

    Untwisted: ``p alpha + q beta = 0``; twisted: ``p alpha + q beta = q pi``.
    Both describe the same locus in their respective conventions.
    """
    if not isinstance(slope, Slope):
        slope = Slope(*slope)
    return FillingLine(slope.p, slope.q, (slope.q * PI) if twisted else 0.0, twisted)


def reducible_points_for_slope(slope: Slope) -> list[PillowcasePoint]:
    """Canonical forms of ``(2 pi k / p, pi)``, ``k = 0 .. p-1`` (twisted)."""
    if not isinstance(slope, Slope):
        slope = Slope(*slope)
    p = abs(slope.p)
    if p == 0:
        raise InvalidSlope("p = 0 has no reducible points of this form")
    out: list[PillowcasePoint] = []
    for k in range(p):
        pt = canonicalize((TWO_PI * k / p, PI))
        if all(pc_distance(pt, o) > 1e-12 for o in out):
            out.append(pt)
    return out


# ---------------------------------------------------------------------------
# the arc S and tubes around it

@dataclass(frozen=True)
class ArcS:
    """Six-vertex piecewise-linear arc for a slope with ``0 < p/q <= 2``
    (twisted coordinates)."""

    slope: Slope
    vertices: tuple

    @property
    def ratio(self) -> Fraction:
        return self.slope.ratio

    def unique_vertices(self) -> list[tuple[float, float]]:
        out = [self.vertices[0]]
        for v in self.vertices[1:]:
            if v != out[-1]:
                out.append(v)
        return out

    def segments(self) -> list[tuple[tuple[float, float], tuple[float, float]]]:
        v = self.vertices
        return [(v[i], v[i + 1]) for i in range(5)]

    def segment_lines(self) -> list[tuple[float, float, float]]:
        """Plane lines ``(a, b, c)`` with ``a alpha + b beta = c`` carrying
        each of the five segments."""
        p, q = self.slope.p, self.slope.q
        return [(1.0, 0.0, -PI), (p, q, -q * PI), (1.0, 0.0, 0.0),
                (p, q, q * PI), (1.0, 0.0, PI)]

    def sample(self, n_per_segment: int = 200) -> np.ndarray:
        pts = []
        for (a0, b0), (a1, b1) in self.segments():
            t = np.linspace(0.0, 1.0, n_per_segment, endpoint=False)
            pts.append(np.stack([a0 + t * (a1 - a0), b0 + t * (b1 - b0)], axis=1))
        pts.append(np.array([self.vertices[-1]]))
        return np.concatenate(pts)

    def to_dict(self) -> dict:
        return {
            "slope": {"p": self.slope.p, "q": self.slope.q},
            "vertices": [[float(a), float(b)] for a, b in self.vertices],
            "beta_pi_contacts": len(points_on_beta_pi(self)),
        }


def build_arc_S(slope: Slope) -> ArcS:
    if not isinstance(slope, Slope):
        slope = Slope(*slope)
    p, q = slope.p, slope.q
    if p <= 0 or q <= 0:
        raise SlopeOutOfRange("the arc needs p, q > 0")
    if Fraction(p, q) > 2:
        raise SlopeOutOfRange(f"p/q = {p}/{q} exceeds 2")
    h = (1.0 - p / q) * PI
    vertices = ((-PI, 0.0), (-PI, -h), (0.0, -PI), (0.0, PI), (PI, h), (PI, 0.0))
    return ArcS(slope, tuple((a + 0.0, b + 0.0) for a, b in vertices))


def points_on_beta_pi(arc: ArcS) -> list[tuple[float, float]]:
    """Raw points of the arc on ``beta = +-pi``; the arc lies in
    ``|beta| <= pi`` so these can only be vertices."""
    out = []
    for v in arc.vertices:
        if abs(abs(v[1]) - PI) <= BETA_PI_TOL and v not in out:
            out.append(v)
    return out


def _segment_distance(pa, pb, a0, b0, a1, b1):
    da, db = a1 - a0, b1 - b0
    length2 = da * da + db * db
    if length2 == 0.0:
        return np.hypot(pa - a0, pb - b0)
    t = np.clip(((pa - a0) * da + (pb - b0) * db) / length2, 0.0, 1.0)
    return np.hypot(pa - (a0 + t * da), pb - (b0 + t * db))


def distance_to_arc(arc: ArcS, alpha, beta):
    """Quotient distance from points to ``S + 2 pi Z^2`` (vectorized).

    ``S + 2 pi Z^2`` is symmetric, so lattice shifts of the point suffice.
    """
    a = wrap_array(alpha)
    b = wrap_array(beta)
    best = np.full(np.shape(a), np.inf)
    for k in (-1, 0, 1):
        for l in (-1, 0, 1):
            pa, pb = a + k * TWO_PI, b + l * TWO_PI
            for (a0, b0), (a1, b1) in arc.segments():
                best = np.minimum(best, _segment_distance(pa, pb, a0, b0, a1, b1))
    return best


@dataclass(frozen=True)
class Tube:
    """Closed epsilon-neighbourhood U of the arc; ``U*`` drops ``beta = +-pi``."""

    arc: ArcS
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("tube radius must be positive")

    def to_dict(self) -> dict:
        return {"arc": self.arc.to_dict(), "epsilon": float(self.epsilon)}


def on_beta_pi(beta, tol: float = BETA_PI_TOL):
    return np.abs(wrap_array(np.asarray(beta) - PI)) <= tol


def tube_contains(tube: Tube, x, star: bool = False) -> bool:
    a, b = _pair(x)
    if star and bool(on_beta_pi(b)):
        return False
    return bool(distance_to_arc(tube.arc, a, b) <= tube.epsilon)


def tube_contains_array(tube: Tube, alpha, beta, star: bool = False) -> np.ndarray:
    """Vectorized :func:`tube_contains` over arrays of coordinates."""
    inside = np.asarray(distance_to_arc(tube.arc, alpha, beta)) <= tube.epsilon
    if star:
        inside &= ~np.asarray(on_beta_pi(beta), dtype=bool)
    return inside
