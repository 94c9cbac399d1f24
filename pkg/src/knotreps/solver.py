"""
Numerical SU(2) representation varieties of knot groups.

Unknowns are one quaternion per generator (normalized inside the residual,
so radial directions are null).  The meridian is pinned to
``cos(alpha) + sin(alpha) k``; the remaining gauge freedom is rotation about
the z-axis, fixed after convergence by putting the first generator with a
non-trivial xy-component into the xz-plane with positive x.

Residuals, analytic Jacobians and the Levenberg-Marquardt loop run in
compiled kernels (see ``_kernels``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .knots import KnotPresentation, power
from .pillowcase import (FillingLine, PillowcasePoint, canonicalize, pc_distance,
                         reducible_locus, wrap)
from .su2 import SU2Element, commutator_norm, commuting_pair_angles, qnormalize

TOL_REP = 1e-9
TOL_IRR = 1e-6
TOL_COMMUTE = 1e-8
DEFAULT_RESTARTS = 64
DEFAULT_GRID = 2000

_GAUGE_TOL = 1e-7
_DEDUP_TOL = 1e-6


def grid_points(n: int) -> np.ndarray:
    """``n`` equally spaced meridian angles strictly inside ``(0, pi)``."""
    if n < 2:
        raise ValueError("grid needs at least 2 points")
    return math.pi * np.arange(1, n + 1) / (n + 1)


def grid_for_resolution(step: float) -> int:
    return max(2, int(math.ceil(math.pi / step)) - 1)


# ---------------------------------------------------------------------------
# residual system

class _System:
    """Residual ``F(X, alpha)`` of a presentation with pinned meridian.

    Layout: 4 components per relator, 4 for ``rho(m) - e^{alpha k}`` and,
    optionally, 4 for ``rho(filling word) - target``.
    """

    def __init__(self, knot: KnotPresentation, filling: tuple | None = None):
        self.knot = knot
        self.n = knot.n_generators
        words = [tuple(r) for r in knot.relators] + [tuple(knot.meridian)]
        targets = [(1.0, 0.0, 0.0, 0.0)] * len(knot.relators) + [(0.0, 0.0, 0.0, 0.0)]
        self.merid = len(knot.relators)
        if filling is not None:
            word, target = filling
            words.append(tuple(word))
            targets.append(tuple(float(t) for t in target))
        self.letters = np.array([g for w in words for g in w], dtype=np.int64)
        self.offsets = np.cumsum([0] + [len(w) for w in words]).astype(np.int64)
        self.targets = np.array(targets, dtype=float)
        self.m = 4 * len(words)
        self.n_relators = len(knot.relators)

    def word_value(self, Q, word) -> np.ndarray:
        w = np.asarray(word, dtype=np.int64)
        return _kernels.word_value(np.ascontiguousarray(Q, dtype=float), w, 0, len(w))

    def residual(self, X, alpha) -> np.ndarray:
        r, _ = _kernels.residual_jacobian(np.ascontiguousarray(X, dtype=float), float(alpha),
                                          self.letters, self.offsets, self.targets,
                                          self.merid, False, False)
        return r

    def jacobian(self, X, alpha, free_alpha: bool = False):
        """``(r, J)``; the last column of ``J`` is d/d(alpha) when it is free."""
        return _kernels.residual_jacobian(np.ascontiguousarray(X, dtype=float), float(alpha),
                                          self.letters, self.offsets, self.targets,
                                          self.merid, free_alpha, True)

    def relator_residual(self, Q) -> float:
        if not self.n_relators:
            return 0.0
        r = self.residual(Q, 0.0)[:4 * self.n_relators]
        return float(np.max(np.linalg.norm(r.reshape(-1, 4), axis=1)))


def _lm(system: _System, X, alpha, free_alpha=False, max_iter=80, lam0=1e-3,
        ftol=1e-14):
    """Levenberg-Marquardt on a batch ``X`` (B, n, 4), ``alpha`` (B,).

    Returns refined ``(X, alpha, rnorm)``.
    """
    X = np.ascontiguousarray(X, dtype=float)
    alpha = np.ascontiguousarray(alpha, dtype=float)
    return _kernels.levenberg_marquardt_batch(X, alpha, system.letters, system.offsets,
                                              system.targets, system.merid, free_alpha,
                                              max_iter, lam0, ftol)


# ---------------------------------------------------------------------------
# representation points

@dataclass(frozen=True)
class RepPoint:
    assignment: tuple
    relator_residual: float
    boundary: PillowcasePoint
    irreducible: bool
    commutator_gap: float
    alpha: float
    beta: float
    peripheral_gap: float = 0.0

    def quaternions(self) -> list[list[float]]:
        return [[float(v) for v in u.as_array()] for u in self.assignment]

    def to_dict(self) -> dict:
        return {
            "alpha": float(self.alpha),
            "beta": float(self.beta),
            "canonical": [float(self.boundary.alpha), float(self.boundary.beta)],
            "residual": float(self.relator_residual),
            "commutator_gap": float(self.commutator_gap),
            "generators": self.quaternions(),
        }


def relator_residual(knot: KnotPresentation, Q: np.ndarray, system: _System | None = None) -> float:
    """Largest ``||rho(r) - 1||`` over the relators."""
    system = system or _System(knot)
    return system.relator_residual(qnormalize(np.asarray(Q, dtype=float)))


def commutator_gap(Q: np.ndarray) -> float:
    """Max of ``||[g_i, g_j]||`` over generator pairs; 0 for abelian images."""
    return float(_kernels.commutator_gap(np.ascontiguousarray(Q, dtype=float)))


def canonical_gauge(Q: np.ndarray) -> np.ndarray:
    """Rotate about z so the first generator off the z-axis lies in the
    xz-plane with positive x."""
    Q = np.array(Q, dtype=float)
    for q in Q:
        rxy = math.hypot(q[1], q[2])
        if rxy > _GAUGE_TOL:
            # conjugation by exp(t k / 2) rotates the xy-plane by t
            c, s = q[1] / rxy, -q[2] / rxy
            x, y = Q[:, 1].copy(), Q[:, 2].copy()
            Q[:, 1] = c * x - s * y
            Q[:, 2] = s * x + c * y
            return Q
    return Q


def make_point(knot: KnotPresentation, Q: np.ndarray, system: _System | None = None) -> RepPoint:
    system = system or _System(knot)
    Q = qnormalize(np.asarray(Q, dtype=float))
    assignment = tuple(SU2Element.from_array(q) for q in Q)
    m = SU2Element.from_array(system.word_value(Q, knot.meridian))
    lam = SU2Element.from_array(system.word_value(Q, knot.longitude))
    pgap = commutator_norm(m, lam)
    ab = commuting_pair_angles(m, lam, tol_commute=max(TOL_COMMUTE, 10 * pgap))
    gap = commutator_gap(Q)
    return RepPoint(assignment, system.relator_residual(Q), canonicalize(ab),
                    gap > TOL_IRR, gap, ab.alpha, ab.beta, pgap)


def _random_starts(rng: np.random.Generator, n: int, count: int, alpha: float) -> np.ndarray:
    X = rng.standard_normal((count, n, 4))
    return qnormalize(X)


def _accept(knot, X, rnorm, alpha, tol_rep) -> list[np.ndarray]:
    out = []
    for Xi, ri in zip(X, rnorm):
        if not np.isfinite(ri) or ri > 1e-6:
            continue
        out.append(qnormalize(Xi))
    return out


def _dedupe(reps: list[np.ndarray]) -> list[np.ndarray]:
    kept: list[np.ndarray] = []
    for Q in reps:
        if all(np.max(np.abs(Q - K)) > _DEDUP_TOL for K in kept):
            kept.append(Q)
    return kept


def _finish(knot, system, candidates, alpha, tol_rep) -> list[np.ndarray]:
    """Polish, classify and gauge-fix converged candidates at fixed alpha."""
    if not candidates:
        return []
    X = np.stack(candidates)
    X, _, rnorm = _lm(system, X, np.full(len(X), alpha), max_iter=8, lam0=1e-12)
    out = []
    for Q, rn in zip(X, rnorm):
        Q = canonical_gauge(qnormalize(Q))
        if system.relator_residual(Q) > tol_rep:
            continue
        if commutator_gap(Q) <= TOL_IRR:
            continue
        out.append(Q)
    return _dedupe(out)


def solve_at_alpha(knot: KnotPresentation, alpha: float, restarts: int = DEFAULT_RESTARTS,
                   seed: int = 0, tol_rep: float = TOL_REP) -> list[RepPoint]:
    """Irreducible representations with meridian angle ``alpha``, one per
    conjugacy class, found by seeded multi-start."""
    if knot.n_generators < 2 or not (0.0 < alpha < math.pi):
        return []
    rng = np.random.default_rng(np.random.SeedSequence([seed, _alpha_key(alpha)]))
    system = _System(knot)
    return [make_point(knot, Q, system) for Q in _solve_raw(knot, alpha, restarts, rng, tol_rep, system)]


def refine_at_alpha(knot: KnotPresentation, Q0, alpha: float,
                    tol_rep: float = TOL_REP) -> np.ndarray | None:
    """Newton-polish an arbitrary start onto a representation with meridian
    angle ``alpha``; returns the canonical-gauge quaternions or ``None``."""
    system = _System(knot)
    X, _, _ = _lm(system, np.asarray(Q0, dtype=float)[None], np.array([alpha]))
    Q = canonical_gauge(qnormalize(X[0]))
    ok = float(np.max(np.abs(system.residual(Q, alpha)))) <= tol_rep
    return Q if ok else None


def _alpha_key(alpha: float) -> int:
    return int(round(alpha * 1e9)) & 0xFFFFFFFF


def _solve_raw(knot, alpha, restarts, rng, tol_rep, system=None) -> list[np.ndarray]:
    system = system or _System(knot)
    X0 = _random_starts(rng, knot.n_generators, restarts, alpha)
    X, _, rnorm = _lm(system, X0, np.full(restarts, alpha))
    return _finish(knot, system, _accept(knot, X, rnorm, alpha, tol_rep), alpha, tol_rep)


# ---------------------------------------------------------------------------
# images

@dataclass
class PillowcaseImage:
    knot: str
    samples: list
    alpha_grid: int
    solver_meta: dict = field(default_factory=dict)
    twisted: bool = False
    knot_hash: str = ""

    def points(self) -> np.ndarray:
        """Canonical (alpha, beta) of every sample, in this image's convention."""
        if not self.samples:
            return np.zeros((0, 2))
        pts = np.array([[s.boundary.alpha, s.boundary.beta] for s in self.samples])
        if self.twisted:
            pts = np.array([canonicalize((a, b + math.pi)).as_tuple() for a, b in pts])
        return pts

    def convert(self, twisted: bool) -> "PillowcaseImage":
        return PillowcaseImage(self.knot, self.samples, self.alpha_grid,
                               dict(self.solver_meta), twisted, self.knot_hash)

    def to_dict(self) -> dict:
        return {
            "metadata": {
                "knot": self.knot,
                "knot_hash": self.knot_hash,
                "alpha_grid": self.alpha_grid,
                "twisted": self.twisted,
                "n_samples": len(self.samples),
                "solver": self.solver_meta,
            },
            "samples": [s.to_dict() for s in self.samples],
        }


def _continue(system, knot, Q_prev, Q_prev2, a_prev, a_prev2, a_new, tol_rep):
    """One predictor-corrector step; returns the new solution or None."""
    if Q_prev2 is not None and a_prev2 != a_prev:
        t = (a_new - a_prev) / (a_prev - a_prev2)
        pred = Q_prev + t * (Q_prev - Q_prev2)
    else:
        pred = Q_prev
    X, _, rn = _lm(system, pred[None], np.array([a_new]), max_iter=12, lam0=1e-10)
    Q = canonical_gauge(qnormalize(X[0]))
    if system.relator_residual(Q) > tol_rep or commutator_gap(Q) <= TOL_IRR:
        return None
    # reject jumps onto another branch
    if np.max(np.abs(Q - Q_prev)) > 0.25 + 50.0 * abs(a_new - a_prev):
        return None
    return Q


def pillowcase_image(knot: KnotPresentation, grid: int = DEFAULT_GRID, seed: int = 0,
                     restarts: int = DEFAULT_RESTARTS, station_spacing: float = 0.1,
                     tol_rep: float = TOL_REP) -> PillowcaseImage:
    """Image of the irreducible representations in the pillowcase.

    Multi-start solves at *stations* (every ``station_spacing`` radians of the
    grid) seed predictor-corrector continuation across every grid point, in
    both directions.  Station seeds derive from ``(seed, grid index)``.
    """
    alphas = grid_points(grid)
    meta = {"seed": seed, "restarts": restarts, "grid": grid,
            "station_spacing": station_spacing, "tol_rep": tol_rep, "tol_irr": TOL_IRR}
    image = PillowcaseImage(knot.name, [], grid, meta, False, knot.hash())
    if knot.n_generators < 2:
        meta["branch_endpoints"] = []
        return image
    system = _System(knot)
    stride = max(1, int(round(station_spacing / (alphas[1] - alphas[0]))))
    stations = list(range(stride // 2, grid, stride))
    found: list[list[np.ndarray]] = [[] for _ in range(grid)]
    for i in stations:
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        found[i] = _solve_raw(knot, float(alphas[i]), restarts, rng, tol_rep, system)

    tracked: list[list[np.ndarray]] = [list(f) for f in found]
    endpoints = []
    for direction in (1, -1):
        order = range(grid) if direction == 1 else range(grid - 1, -1, -1)
        # live branches: (Q_prev, Q_prev2, a_prev, a_prev2)
        live: list[tuple] = []
        for i in order:
            a = float(alphas[i])
            nxt = []
            for Qp, Qp2, ap, ap2 in live:
                Q = _continue(system, knot, Qp, Qp2, ap, ap2, a, tol_rep)
                if Q is None:
                    endpoints.append(ap)
                    continue
                nxt.append((Q, Qp, a, ap))
            # merge with station solutions and anything already tracked here
            current = [b[0] for b in nxt]
            for Q in found[i]:
                if all(np.max(np.abs(Q - K)) > _DEDUP_TOL for K in current):
                    nxt.append((Q, None, a, a))
                    current.append(Q)
            live = []
            for b in nxt:
                if all(np.max(np.abs(b[0] - L[0])) > _DEDUP_TOL for L in live):
                    live.append(b)
            tracked[i] = _dedupe(tracked[i] + [b[0] for b in live])
    samples = [make_point(knot, Q, system) for i in range(grid) for Q in tracked[i]]
    image.samples = samples
    meta["branch_endpoints"] = sorted(set(round(e, 12) for e in endpoints))
    return image


# ---------------------------------------------------------------------------
# abelian locus and line intersections

def abelian_locus(knot: KnotPresentation, twisted: bool = False) -> FillingLine:
    """Abelian representations kill the (null-homologous) longitude."""
    return reducible_locus(twisted)


def filling_word(knot: KnotPresentation, p: int, q: int) -> tuple:
    return power(knot.meridian, p) + power(knot.longitude, q)


def polish_on_line(knot: KnotPresentation, Q: np.ndarray, alpha: float,
                   line: FillingLine, max_iter: int = 60):
    """Newton polish onto ``rho(m^p l^q) = e^{c' k}`` with alpha free.

    ``line`` must be untwisted (SU(2) coordinates).  Returns ``(Q, alpha)``
    or ``None``.
    """
    if line.twisted:
        line = line.convert(False)
    c = line.c
    # on the line, m^p l^q = exp((p alpha + q beta) k) = exp(+-c k); c is 0 or pi
    # for the symmetric lines used here, so the target is +-1
    target = np.array([math.cos(c), 0.0, 0.0, math.sin(c)])
    system = _System(knot, (filling_word(knot, line.p, line.q), target))
    X, a, rn = _lm(system, np.asarray(Q)[None], np.array([alpha]), free_alpha=True,
                   max_iter=max_iter, lam0=1e-8)
    if not np.isfinite(rn[0]) or rn[0] > 1e-10:
        return None
    Qn = canonical_gauge(qnormalize(X[0]))
    an = float(a[0])
    if an < 0:
        return None
    return Qn, an


def intersect_with_line(img: PillowcaseImage, knot: KnotPresentation, line: FillingLine,
                        tol: float = 0.05, avoid: Sequence[float] = (),
                        avoid_radius: float = 1e-4, limit: int | None = None) -> list[RepPoint]:
    """Representations in the image lying on ``line``, polished to 1e-9.

    Candidates are image samples within ``tol`` of the line (in the line's
    residual); each is polished with alpha free and kept if it converges to
    an irreducible representation on the line.
    """
    if not img.samples:
        return []
    su2_line = line.convert(False)
    system = _System(knot)
    cands = []
    for s in img.samples:
        res = su2_line.residual((s.alpha, s.beta))
        if res <= tol:
            cands.append((res, s))
    cands.sort(key=lambda t: t[0])
    found: list[RepPoint] = []
    for _, s in cands:
        Q = np.array([u.as_array() for u in s.assignment])
        out = polish_on_line(knot, Q, s.alpha, su2_line)
        if out is None:
            continue
        Qn, an = out
        pt = make_point(knot, Qn, system)
        if not pt.irreducible or pt.relator_residual > TOL_REP:
            continue
        if su2_line.residual((pt.alpha, pt.beta)) > TOL_REP:
            continue
        if any(abs(pt.alpha - e) < avoid_radius for e in avoid):
            continue
        if any(pc_distance(pt.boundary, f.boundary) < 1e-7 and
               np.max(np.abs(Qn - np.array([u.as_array() for u in f.assignment]))) < 1e-6
               for f in found):
            continue
        found.append(pt)
        if limit is not None and len(found) >= limit:
            break
    return found
