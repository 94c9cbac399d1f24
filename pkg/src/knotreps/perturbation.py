"""
Perturbation curves threading a tube around the arc S, the class functions
they induce, and the emptiness test for perturbed representation varieties.

A perturbation is an odd, 2 pi-periodic sine series ``g``; the perturbed
variety of the closed manifold corresponds to the points of the knot
exterior's pillowcase image lying on the graph ``beta = -g(alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .pillowcase import (PI, TWO_PI, ArcS, FillingLine, Tube, build_arc_S, canonicalize,
                         distance_to_arc, wrap_array)
from .su2 import ClassFunction, classfn_from_g

DEFAULT_MAX_DEGREE = 256
CERT_SAMPLES = 100_000
EMPTY_TOL = 1e-6
_DEGREES = (16, 32, 64, 128, 256, 512, 1024)
_FIT_POINTS = 1 << 16


class Infeasible(RuntimeError):
    """No certified sine series was found up to the maximum degree."""


class ConventionMismatch(ValueError):
    """Image and reducible lines are written in different conventions."""


@dataclass(frozen=True)
class PerturbationFn:
    """Sine series ``g(t) = sum_k c_k sin(kt)`` with its certification record."""

    phi: ClassFunction
    target_tube: Tube | None = None
    certification: dict = field(default_factory=dict)

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[float], tube: Tube | None = None,
                          certification: dict | None = None) -> "PerturbationFn":
        return cls(classfn_from_g(coeffs), tube, dict(certification or {}))

    @property
    def coefficients(self) -> np.ndarray:
        return self.phi.coeffs

    @property
    def degree(self) -> int:
        return self.phi.degree

    @property
    def derivative_bound(self) -> float:
        return self.phi.derivative_bound()

    @property
    def sup_norm(self) -> float:
        """Upper bound ``sum |c_k|`` for ``max |g|``."""
        return self.phi.sup_bound()

    def g(self, t):
        return _eval_sine(self.coefficients, t)

    def graph(self, alpha) -> np.ndarray:
        """Points ``(alpha, -g(alpha))``."""
        alpha = np.asarray(alpha, dtype=float)
        return np.stack([alpha, -self.g(alpha)], axis=-1)

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "coefficients": [float(c) for c in self.coefficients],
            "derivative_bound": self.derivative_bound,
            "sup_norm": self.sup_norm,
            "target_tube": self.target_tube.to_dict() if self.target_tube else None,
            "certification": dict(self.certification),
        }


def _eval_sine(coeffs, t, chunk: int = 8192) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    coeffs = np.asarray(coeffs, dtype=float)
    flat = t.reshape(-1)
    out = np.zeros(flat.shape)
    if coeffs.size:
        k = np.arange(1, coeffs.size + 1, dtype=float)
        for i in range(0, flat.size, chunk):
            out[i:i + chunk] = np.sin(np.multiply.outer(flat[i:i + chunk], k)) @ coeffs
    return out.reshape(t.shape)


# ---------------------------------------------------------------------------
# construction

def _target_graph(arc: ArcS, epsilon: float, alpha: np.ndarray) -> np.ndarray:
    """Single-valued stand-in for S over ``[0, pi]`` (extended oddly).

    The sloped segment ``beta = pi - (p/q) alpha`` is clipped ``epsilon/2``
    away from ``beta = +-pi``, and the vertical segments at ``alpha = 0, pi``
    are replaced by linear ramps of width ``delta``.
    """
    r = float(arc.ratio)
    delta = min(epsilon / 2.0, 0.01 * PI)
    a = np.abs(alpha)
    core = np.clip(PI - r * a, -PI + epsilon / 2.0, PI - epsilon / 2.0)
    ramp = np.minimum(1.0, np.minimum(a / delta, (PI - a) / delta))
    return np.sign(alpha) * core * np.clip(ramp, 0.0, 1.0)


def _sine_coefficients(arc: ArcS, epsilon: float, degree: int) -> np.ndarray:
    """Mollified sine coefficients of ``g = -target``.

    On a uniform grid the sine modes are orthogonal, so the FFT projection
    is the least-squares fit; a Gaussian factor ``exp(-k^2 s^2 / 2)``
    (convolution with a positive kernel) rounds the corners and damps the
    truncation ringing.
    """
    n = _FIT_POINTS
    t = TWO_PI * np.arange(n) / n
    t = np.where(t > PI, t - TWO_PI, t)
    samples = -_target_graph(arc, epsilon, t)
    spectrum = np.fft.rfft(samples) / n
    k = np.arange(1, degree + 1)
    b = -2.0 * spectrum.imag[1:degree + 1]
    sigma = 3.0 / degree
    return b * np.exp(-0.5 * (k * sigma) ** 2)


def certify_graph(coeffs: Sequence[float], tube: Tube, samples: int = CERT_SAMPLES) -> dict:
    """Sampling + Lipschitz certificate that the graph of ``-g`` lies in ``U*``.

    Between samples ``step`` apart, the graph moves at most
    ``sqrt(1 + L^2) step / 2`` in the plane and ``L step / 2`` in beta,
    ``L = sum k |c_k|``.  The record's ``ok`` is true iff every sample meets
    the tube condition and the ``epsilon/4`` clearance from ``beta = +-pi``
    with these margins added.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    k = np.arange(1, coeffs.size + 1, dtype=float)
    lip = float(np.sum(k * np.abs(coeffs)))
    alpha = np.linspace(-PI, PI, samples + 1)
    step = TWO_PI / samples
    beta = -_eval_sine(coeffs, alpha)
    dist = distance_to_arc(tube.arc, alpha, beta)
    clearance = np.abs(wrap_array(beta - PI))
    tube_margin = math.sqrt(1.0 + lip * lip) * step / 2.0
    clear_margin = lip * step / 2.0
    required_clear = tube.epsilon / 4.0
    max_dist = float(np.max(dist))
    min_clear = float(np.min(clearance))
    ok = max_dist + tube_margin <= tube.epsilon and min_clear - clear_margin >= required_clear
    return {
        "ok": bool(ok),
        "samples": samples,
        "step": step,
        "derivative_bound": lip,
        "margin": {"tube": tube_margin, "clearance": clear_margin},
        "max_tube_distance": max_dist,
        "min_beta_pi_clearance": min_clear,
        "required_clearance": required_clear,
    }


def construct_g(tube: Tube, max_degree: int = DEFAULT_MAX_DEGREE,
                samples: int = CERT_SAMPLES) -> PerturbationFn:
    """Smallest certified sine series (degrees 16, 32, ... up to ``max_degree``)
    whose graph ``beta = -g(alpha)`` stays in the tube and clears ``beta = +-pi``."""
    eps = float(tube.epsilon)
    degrees = [d for d in _DEGREES if d <= max_degree]
    if not degrees or degrees[-1] != max_degree:
        degrees.append(max_degree)
    last = None
    for degree in degrees:
        coeffs = _sine_coefficients(tube.arc, eps, degree)
        cert = certify_graph(coeffs, tube, samples)
        last = cert
        if cert["ok"]:
            cert["degree_tried"] = degree
            return PerturbationFn.from_coefficients(coeffs, tube, cert)
    raise Infeasible(
        f"no certified series up to degree {max_degree} for epsilon={eps:g} "
        f"(last: tube distance {last['max_tube_distance']:.3g}, "
        f"clearance {last['min_beta_pi_clearance']:.3g})")


def largest_certified_epsilon(img, arc: ArcS, reducibles: Iterable[FillingLine],
                              lo: float = 0.01, hi: float = 0.5 * PI, iters: int = 10,
                              max_degree: int = DEFAULT_MAX_DEGREE) -> float | None:
    """Bisection for the widest tube whose certified ``g`` still gives an
    empty perturbed variety; ``None`` if even ``lo`` fails.

    Success is assumed monotone in ``epsilon`` over ``[lo, hi]``, which is
    what the bisection reports, not something it proves.
    """
    reducibles = list(reducibles)

    def works(eps):
        try:
            g = construct_g(Tube(arc, eps), max_degree)
        except Infeasible:
            return False
        return perturbed_variety_is_empty(img, reducibles, g).empty

    if works(hi):
        return hi
    if not works(lo):
        return None
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if works(mid):
            lo = mid
        else:
            hi = mid
    return lo


def phi_from_g(g: PerturbationFn) -> ClassFunction:
    """The class function with ``f' = g`` (zero offset)."""
    return classfn_from_g(g.coefficients)


# ---------------------------------------------------------------------------
# emptiness

@dataclass(frozen=True)
class EmptinessResult:
    empty: bool
    witness: dict | None = None

    def __bool__(self) -> bool:
        return self.empty


def _line_crossings(line: FillingLine, g: PerturbationFn, tol: float,
                    samples: int) -> list[float]:
    """Values of alpha in ``[0, pi]`` where ``(alpha, -g(alpha))`` lies on ``line``."""
    p, q = line.p, line.q
    if q == 0:
        # a vertical line p alpha = c meets every graph
        if p == 0:
            return []
        return [float(canonicalize((line.c / p, 0.0)).alpha)]
    alpha = np.linspace(0.0, PI, samples + 1)
    gv = g.g(alpha)
    roots: list[float] = []
    for c in {line.c, wrap_scalar(-line.c)}:
        F = wrap_array(p * alpha - q * gv - c)
        hit = np.nonzero(np.abs(F) <= tol)[0]
        if hit.size:
            roots.append(float(alpha[hit[0]]))
            continue
        # sign changes that are not branch jumps of the wrap
        sc = np.nonzero((np.sign(F[:-1]) != np.sign(F[1:])) &
                        (np.abs(F[:-1] - F[1:]) < PI))[0]
        for i in sc[:1]:
            lo, hi = alpha[i], alpha[i + 1]
            flo = F[i]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                fm = float(wrap_array(p * mid - q * g.g(mid) - c))
                if np.sign(fm) == np.sign(flo):
                    lo, flo = mid, fm
                else:
                    hi = mid
            roots.append(0.5 * (lo + hi))
    return roots


def wrap_scalar(x: float) -> float:
    return float(wrap_array(x))


def perturbed_variety_is_empty(img, reducibles: Iterable[FillingLine], g: PerturbationFn,
                               tol: float = EMPTY_TOL,
                               line_samples: int = CERT_SAMPLES) -> EmptinessResult:
    """Whether no image point and no reducible point lies on ``beta = -g(alpha)``.

    ``img`` provides ``points()`` (canonical pairs in its convention) and a
    ``twisted`` flag; every line in ``reducibles`` must use the same
    convention.  The graph is invariant under the pillowcase involution, so
    canonical representatives suffice.
    """
    reducibles = list(reducibles)
    for line in reducibles:
        if bool(line.twisted) != bool(img.twisted):
            raise ConventionMismatch(
                f"image twisted={img.twisted} but line {line.to_dict()} twisted={line.twisted}")
    pts = img.points()
    if len(pts):
        res = np.abs(wrap_array(pts[:, 1] + g.g(pts[:, 0])))
        bad = np.nonzero(res <= tol)[0]
        if bad.size:
            i = int(bad[0])
            return EmptinessResult(False, {
                "kind": "image",
                "index": i,
                "raw": [float(pts[i, 0]), float(pts[i, 1])],
                "canonical": list(canonicalize((pts[i, 0], pts[i, 1])).as_tuple()),
                "graph_residual": float(res[i]),
            })
    for line in reducibles:
        roots = _line_crossings(line, g, tol, line_samples)
        if roots:
            a = roots[0]
            b = float(-g.g(a))
            return EmptinessResult(False, {
                "kind": "reducible",
                "line": line.to_dict(),
                "raw": [a, b],
                "canonical": list(canonicalize((a, b)).as_tuple()),
                "line_residual": float(line.residual((a, b))),
            })
    return EmptinessResult(True, None)


def default_tube(slope, epsilon: float) -> Tube:
    return Tube(build_arc_S(slope), epsilon)
