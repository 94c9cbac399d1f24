"""
Dehn-surgery certificates and the emptiness pipeline for perturbed varieties.

A certificate for slope ``r = p/q`` stores one SU(2) representation of the
knot group whose boundary holonomies satisfy the filling condition
``p alpha + q beta = 0 (mod 2 pi)``, i.e. ``rho(m^p l^q) = 1``.  Such a
representation factors through the surgered manifold, and if its image is
non-abelian that manifold's fundamental group is not cyclic.  Verification
re-evaluates everything from the stored quaternions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .knots import KnotPresentation, evaluate_word, mirror, power
from .perturbation import Infeasible, construct_g, perturbed_variety_is_empty, phi_from_g
from .pillowcase import (PI, FillingLine, Slope, SlopeOutOfRange, Tube, build_arc_S,
                         reducible_locus)
from .solver import (DEFAULT_GRID, TOL_COMMUTE, TOL_IRR, TOL_REP, PillowcaseImage,
                     intersect_with_line, pillowcase_image)
from .su2 import IDENTITY, SU2Element, commutator_norm, commuting_pair_angles

CERT_VERSION = 1
DEFAULT_CERT_RESTARTS = 32
FOUND, NOT_FOUND, OUT_OF_SCOPE = "Found", "NotFound", "OutOfScope"


class PresentationMismatch(ValueError):
    """The certificate was issued for a different presentation."""


def _as_slope(r) -> Slope:
    if isinstance(r, Slope):
        return r
    if isinstance(r, tuple):
        return Slope(*r)
    return Slope.from_rational(r)


# ---------------------------------------------------------------------------
# residuals from stored data

def rep_residuals(k: KnotPresentation, quaternions, p: int, q: int, c: float = 0.0) -> dict:
    """All certificate quantities recomputed from raw quaternions.

    Uses only word evaluation on ``SU2Element``; nothing from the solver.
    """
    gens = [SU2Element.from_array(np.asarray(x, dtype=float)) for x in quaternions]
    if len(gens) != k.n_generators:
        raise PresentationMismatch(
            f"{len(gens)} quaternions for {k.n_generators} generators")
    relator = max((evaluate_word(r, gens).distance(IDENTITY) for r in k.relators), default=0.0)
    m = evaluate_word(k.meridian, gens)
    lam = evaluate_word(k.longitude, gens)
    peripheral = commutator_norm(m, lam)
    ab = commuting_pair_angles(m, lam, tol_commute=math.inf)
    line = FillingLine(p, q, c, False)
    target = SU2Element(math.cos(c), 0.0, 0.0, math.sin(c))
    fill = evaluate_word(power(k.meridian, p) + power(k.longitude, q), gens)
    gap = max((commutator_norm(a, b) for i, a in enumerate(gens) for b in gens[i + 1:]),
              default=0.0)
    return {
        "relator": float(relator),
        "line": float(line.residual((ab.alpha, ab.beta))),
        "filling_word": float(min(fill.distance(target), fill.distance(target.inverse()))),
        "commutator": float(gap),
        "peripheral": float(peripheral),
        "alpha": float(ab.alpha),
        "beta": float(ab.beta),
    }


def residuals_pass(res: dict) -> bool:
    return (res["relator"] <= TOL_REP and res["line"] <= TOL_REP
            and res["commutator"] > TOL_IRR and res["peripheral"] <= TOL_COMMUTE)


# ---------------------------------------------------------------------------
# certificates

@dataclass(frozen=True)
class Certificate:
    knot_name: str
    knot_hash: str
    slope: Slope
    twist: bool
    verdict: str
    quaternions: tuple | None = None
    alpha: float | None = None
    beta: float | None = None
    residuals: dict = field(default_factory=dict)
    solver_meta: dict = field(default_factory=dict)
    notes: tuple = ()
    mirrored: bool = False
    line_c: float = 0.0

    @property
    def found(self) -> bool:
        return self.verdict == FOUND

    def to_dict(self) -> dict:
        rep = None
        if self.quaternions is not None:
            rep = {"quaternions": [list(map(float, x)) for x in self.quaternions],
                   "alpha": self.alpha, "beta": self.beta}
        return {
            "version": CERT_VERSION,
            "knot": {"name": self.knot_name, "hash": self.knot_hash},
            "slope": {"p": self.slope.p, "q": self.slope.q},
            "twist": self.twist,
            "verdict": self.verdict,
            "rep": rep,
            "residuals": dict(self.residuals),
            "meta": {
                "mirrored": self.mirrored,
                "line_c": self.line_c,
                "solver": dict(self.solver_meta),
                "notes": list(self.notes),
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        if d.get("version") != CERT_VERSION:
            raise ValueError(f"unsupported certificate version {d.get('version')!r}")
        rep = d.get("rep")
        meta = d.get("meta", {})
        return cls(
            knot_name=d["knot"]["name"], knot_hash=d["knot"]["hash"],
            slope=Slope(d["slope"]["p"], d["slope"]["q"]), twist=bool(d["twist"]),
            verdict=d["verdict"],
            quaternions=tuple(tuple(x) for x in rep["quaternions"]) if rep else None,
            alpha=rep["alpha"] if rep else None, beta=rep["beta"] if rep else None,
            residuals=dict(d.get("residuals", {})), solver_meta=dict(meta.get("solver", {})),
            notes=tuple(meta.get("notes", ())), mirrored=bool(meta.get("mirrored", False)),
            line_c=float(meta.get("line_c", 0.0)))


def _search(k: KnotPresentation, line: FillingLine, img: PillowcaseImage):
    endpoints = img.solver_meta.get("branch_endpoints", [])
    pts = intersect_with_line(img, k, line, avoid=endpoints, limit=1)
    return pts[0] if pts else None


def certify_surgery(k: KnotPresentation, r, seed: int = 0, grid: int = DEFAULT_GRID,
                    restarts: int = DEFAULT_CERT_RESTARTS, twist: bool = False) -> Certificate:
    """Search for a non-abelian representation of the group of ``Y_r``.

    Negative slopes are handled on the mirror with ``-r``.  With ``twist``
    the search is on the shifted line ``p alpha + q beta = q pi`` instead
    (projective representations of the surgered manifold).
    """
    slope = _as_slope(r)
    base = dict(knot_name=k.name, knot_hash=k.hash(), slope=slope, twist=twist)
    if slope.q == 0:
        return Certificate(verdict=OUT_OF_SCOPE, notes=(
            "the meridian slope 1/0 returns the 3-sphere and is not a surgery input",), **base)
    mirrored = slope.p < 0
    kk = mirror(k) if mirrored else k
    p, q = abs(slope.p), slope.q
    c = (q * PI) % (2 * PI) if twist else 0.0
    line = FillingLine(p, q, c, False)
    img = pillowcase_image(kk, grid=grid, seed=seed, restarts=restarts)
    ratio = Fraction(slope.p, slope.q)
    notes = ["InTheoremRange" if abs(ratio) <= 2 else "OutsideTheoremRange: |r| > 2"]
    if mirrored:
        notes.append("negative slope: solved on the mirror image with -r")
    if slope.p == 0:
        notes.append("r = 0: independent numerical check of a classically known case")
    meta = dict(img.solver_meta)
    meta["n_samples"] = len(img.samples)
    meta["solved_knot"] = kk.name
    meta["searched_line"] = line.to_dict()
    other = FillingLine(p, q, (q * PI) % (2 * PI) if not twist else 0.0, False)
    if other.c != line.c:
        meta["other_line"] = other.to_dict()
    pt = _search(kk, line, img)
    if pt is None:
        notes.append(f"no representation found: grid={grid}, restarts={restarts}, seed={seed}; "
                     "this is not a proof of nonexistence")
        return Certificate(verdict=NOT_FOUND, solver_meta=meta, notes=tuple(notes),
                           mirrored=mirrored, line_c=c, **base)
    quats = tuple(tuple(float(v) for v in u.as_array()) for u in pt.assignment)
    res = rep_residuals(kk, quats, p, q, c)
    verdict = FOUND if residuals_pass(res) else NOT_FOUND
    if verdict != FOUND:
        notes.append("candidate failed re-verification")
        quats = None
    return Certificate(verdict=verdict, quaternions=quats,
                       alpha=res["alpha"] if quats else None,
                       beta=res["beta"] if quats else None,
                       residuals=res, solver_meta=meta, notes=tuple(notes),
                       mirrored=mirrored, line_c=c, **base)


def verify_certificate(c: Certificate, k: KnotPresentation) -> bool:
    """Re-check a certificate against ``k`` from its stored quaternions only."""
    if c.knot_hash != k.hash():
        raise PresentationMismatch(f"certificate hash {c.knot_hash[:12]} != {k.hash()[:12]}")
    if c.quaternions is None:
        return False
    kk = mirror(k) if c.mirrored else k
    res = rep_residuals(kk, c.quaternions, abs(c.slope.p), c.slope.q, c.line_c)
    return residuals_pass(res)


# ---------------------------------------------------------------------------
# emptiness pipeline

@dataclass
class PipelineReport:
    knot_name: str
    knot_hash: str
    slope: Slope
    epsilon: float
    status: str
    hypothesis: dict
    witness: dict | None = None
    perturbation: dict | None = None
    notes: list = field(default_factory=list)

    @property
    def certified_empty(self) -> bool:
        return self.status == "empty"

    def to_dict(self) -> dict:
        return {
            "knot": {"name": self.knot_name, "hash": self.knot_hash},
            "slope": {"p": self.slope.p, "q": self.slope.q},
            "epsilon": self.epsilon,
            "status": self.status,
            "hypothesis": self.hypothesis,
            "witness": self.witness,
            "perturbation": self.perturbation,
            "notes": list(self.notes),
        }


def proposition_pipeline(k: KnotPresentation, slope, epsilon: float, seed: int = 0,
                         grid: int = DEFAULT_GRID,
                         restarts: int = DEFAULT_CERT_RESTARTS) -> PipelineReport:
    """Check the hypotheses numerically, then build and certify a perturbation.

    Hypothesis lines (SU(2) coordinates): ``alpha = 0`` for the meridian
    filling and ``p alpha + q beta = 0`` for slope ``s``.  The line shifted
    by ``q pi`` is searched too and reported, but does not gate the run.
    Everything after the hypothesis check uses twisted coordinates.
    """
    slope = _as_slope(slope)
    if slope.p <= 0 or slope.q <= 0 or Fraction(slope.p, slope.q) > 2:
        raise SlopeOutOfRange(f"slope {slope} needs p, q > 0 and p/q <= 2")
    img = pillowcase_image(k, grid=grid, seed=seed, restarts=restarts)
    p, q = slope.p, slope.q
    checks = {
        "meridian_filling": FillingLine(1, 0, 0.0, False),
        "slope_filling": FillingLine(p, q, 0.0, False),
        "slope_filling_shifted": FillingLine(p, q, (q * PI) % (2 * PI), False),
    }
    hypothesis = {"solver": dict(img.solver_meta)}
    witness = None
    for name, line in checks.items():
        pt = _search(k, line, img)
        hypothesis[name] = {"line": line.to_dict(), "verdict": FOUND if pt else NOT_FOUND}
        if pt is not None:
            hypothesis[name]["rep"] = pt.to_dict()
            if witness is None and name != "slope_filling_shifted":
                witness = {"stage": "hypothesis", "check": name, **pt.to_dict()}
    report = PipelineReport(k.name, k.hash(), slope, float(epsilon), "", hypothesis)
    if witness is not None:
        report.status = "hypothesis_fails"
        report.witness = witness
        return report
    tube = Tube(build_arc_S(slope), float(epsilon))
    try:
        g = construct_g(tube)
    except Infeasible as exc:
        report.status = "infeasible"
        report.notes.append(str(exc))
        return report
    phi = phi_from_g(g)
    result = perturbed_variety_is_empty(img.convert(True), [reducible_locus(True)], g)
    report.perturbation = {**g.to_dict(), "class_function": {
        "fourier_sine_coeffs": list(phi.fourier_sine_coeffs),
        "constant_offset": phi.constant_offset}}
    if result.empty:
        report.status = "empty"
    else:
        report.status = "nonempty"
        report.witness = {"stage": "emptiness", **result.witness}
    return report

