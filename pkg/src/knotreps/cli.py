"""
Command-line front end.

    knotreps reps     --torus 2 3 --grid 500 --seed 7
    knotreps certify  --torus 2 3 --slope 1/1
    knotreps arc      --slope 5/3
    knotreps perturb  --braid "1" --slope 1/1 --epsilon 0.15
    knotreps figure   --slope 5/3 --out fig.svg

Exit codes: 0 found/certified, 1 negative result, 2 parse error,
3 internal error (including a failed determinism check), 4 out of scope.
Any flag can also be given in a TOML job file (``--job``); flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from . import __version__
from .certify import FOUND, OUT_OF_SCOPE, certify_surgery, proposition_pipeline
from .knots import (InconsistentPD, KnotPresentation, MultiComponentLink, NotCoprime,
                    ParseError, mirror, named_knot, parse_braid, parse_pd,
                    torus_knot_presentation)
from .pillowcase import (PI, InvalidSlope, Slope, SlopeOutOfRange, build_arc_S,
                         points_on_beta_pi)
from .solver import DEFAULT_GRID, pillowcase_image

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

EXIT_OK, EXIT_NEGATIVE, EXIT_PARSE, EXIT_INTERNAL, EXIT_SCOPE = 0, 1, 2, 3, 4
COMMANDS = ("reps", "certify", "arc", "perturb", "figure")
KNOT_SOURCES = ("braid", "pd", "torus", "knot")


class UsageError(ValueError):
    """Invalid combination of options (exit code 2)."""


@dataclass
class JobConfig:
    command: str
    braid: str | None = None
    pd: str | None = None
    torus: list | None = None
    knot: str | None = None
    mirror: bool = False
    slope: str | None = None
    grid: int = DEFAULT_GRID
    seed: int = 0
    restarts: int = 32
    epsilon: float = 0.15
    twisted: bool = False
    out: str | None = None
    svg: str | None = None
    check_determinism: bool = False

    def knot_source(self) -> tuple[str, object]:
        given = [(k, getattr(self, k)) for k in KNOT_SOURCES if getattr(self, k) is not None]
        if len(given) != 1:
            raise UsageError("give exactly one of --braid, --pd, --torus, --knot")
        return given[0]

    def resolved(self) -> dict:
        d = asdict(self)
        d.pop("check_determinism")
        return d


_DEFAULTS = {f: JobConfig.__dataclass_fields__[f].default for f in JobConfig.__dataclass_fields__}


def resolve_config(args: argparse.Namespace) -> JobConfig:
    """Merge a TOML job file with the command line; flags win."""
    job: dict = {}
    if getattr(args, "job", None):
        with open(args.job, "rb") as fh:
            try:
                job = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ParseError(f"bad job file: {exc}") from exc
        unknown = set(job) - set(_DEFAULTS)
        if unknown:
            raise UsageError(f"unknown job keys: {', '.join(sorted(unknown))}")
    cli = {k: v for k, v in vars(args).items() if k in _DEFAULTS and v is not None}
    if any(k in cli for k in KNOT_SOURCES):
        job = {k: v for k, v in job.items() if k not in KNOT_SOURCES}
    merged = {**job, **cli}
    merged["command"] = args.command
    cfg = JobConfig(**merged)
    if cfg.torus is not None:
        cfg.torus = [int(x) for x in cfg.torus]
    return cfg


def load_knot(cfg: JobConfig) -> KnotPresentation:
    kind, value = cfg.knot_source()
    if kind == "braid":
        k = parse_braid(str(value))
    elif kind == "pd":
        k = parse_pd(str(value))
    elif kind == "torus":
        if len(value) != 2:
            raise UsageError("--torus takes two integers")
        try:
            k = torus_knot_presentation(int(value[0]), int(value[1]))
        except NotCoprime:
            raise
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    else:
        k = named_knot(str(value))
    return mirror(k) if cfg.mirror else k


def parse_slope(text: str | None) -> Slope:
    if text is None:
        raise UsageError("--slope is required")
    try:
        return Slope.from_rational(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidSlope(f"bad slope {text!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# SVG

_SCALE = 120.0  # pixels per pi
_PAD = 60.0


def _xy(alpha: float, beta: float) -> tuple[float, float]:
    return (_PAD + (alpha + PI) / PI * _SCALE, _PAD + (PI - beta) / PI * _SCALE)


def _pi_label(k: int, den: int = 3) -> str:
    f = Fraction(k, den)
    if f == 0:
        return "0"
    sign = "-" if f < 0 else ""
    f = abs(f)
    num = "" if f.numerator == 1 else str(f.numerator)
    return f"{sign}{num}π" + ("" if f.denominator == 1 else f"/{f.denominator}")


def render_svg(arc=None, points=None, title: str = "", metadata: dict | None = None) -> str:
    """Pillowcase square ``[-pi, pi]^2`` with optional arc S and sample points."""
    w = h = 2 * _PAD + 2 * _SCALE
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h:.0f}" '
           f'viewBox="0 0 {w:.0f} {h:.0f}" font-family="sans-serif" font-size="11">']
    if metadata is not None:
        out.append(f"<metadata>{json.dumps(metadata, sort_keys=True)}</metadata>")
    if title:
        out.append(f'<text x="{w / 2:.1f}" y="20" text-anchor="middle">{title}</text>')
    x0, y0 = _xy(-PI, -PI)
    x1, y1 = _xy(PI, PI)
    out.append(f'<rect x="{x0:.3f}" y="{y1:.3f}" width="{x1 - x0:.3f}" height="{y0 - y1:.3f}" '
               'fill="none" stroke="#999"/>')
    for k in range(-3, 4):
        t = k * PI / 3
        x, _ = _xy(t, 0.0)
        _, y = _xy(0.0, t)
        out.append(f'<line class="tick" x1="{x:.3f}" y1="{y0:.3f}" x2="{x:.3f}" y2="{y0 + 5:.3f}" stroke="#333"/>')
        out.append(f'<text x="{x:.3f}" y="{y0 + 18:.3f}" text-anchor="middle">{_pi_label(k)}</text>')
        out.append(f'<line class="tick" x1="{x0 - 5:.3f}" y1="{y:.3f}" x2="{x0:.3f}" y2="{y:.3f}" stroke="#333"/>')
        out.append(f'<text x="{x0 - 8:.3f}" y="{y + 4:.3f}" text-anchor="end">{_pi_label(k)}</text>')
    out.append(f'<text x="{x1 + 10:.3f}" y="{y0:.3f}">α</text>')
    out.append(f'<text x="{x0:.3f}" y="{y1 - 10:.3f}">β</text>')
    for b in (PI, -PI):
        _, y = _xy(0.0, b)
        out.append(f'<line class="reducible" data-beta="{b!r}" x1="{x0:.3f}" y1="{y:.3f}" '
                   f'x2="{x1:.3f}" y2="{y:.3f}" stroke="#c00" stroke-dasharray="6,4"/>')
    if points is not None and len(points):
        for a, b in points:
            for s in (1.0, -1.0):  # draw the whole orbit in [-pi, pi]^2
                x, y = _xy(s * a, s * b)
                out.append(f'<circle class="sample" cx="{x:.3f}" cy="{y:.3f}" r="0.8" fill="#06c"/>')
    if arc is not None:
        path = " ".join(f"{x:.6f},{y:.6f}" for x, y in (_xy(a, b) for a, b in arc.vertices))
        out.append(f'<polyline class="arc" points="{path}" fill="none" stroke="#000" stroke-width="2"/>')
        for i, (a, b) in enumerate(arc.vertices, start=1):
            x, y = _xy(a, b)
            dx = -14 if a < 0 else 6
            out.append(f'<circle class="vertex" cx="{x:.3f}" cy="{y:.3f}" r="3"/>')
            out.append(f'<text class="vertex-label" id="z{i}" data-alpha="{a!r}" data-beta="{b!r}" '
                       f'x="{x + dx:.3f}" y="{y - 6 - 10 * (i % 2):.3f}">z{i}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# commands

def _envelope(cfg: JobConfig, knot: KnotPresentation | None, body: dict) -> dict:
    doc = {"tool": {"name": "knotreps", "version": __version__},
           "config": cfg.resolved()}
    if knot is not None:
        doc["knot"] = {"name": knot.name, "hash": knot.hash()}
    doc.update(body)
    return doc


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _emit(cfg: JobConfig, doc: dict, stdout) -> None:
    text = _dump(doc)
    if cfg.out and cfg.command != "figure":
        path = Path(cfg.out)
        path.write_text(text)
        stamp = {"written": datetime.now(timezone.utc).isoformat(), "file": path.name}
        path.with_name(path.name + ".timestamp.json").write_text(json.dumps(stamp) + "\n")
    else:
        stdout.write(text)


def cmd_reps(cfg: JobConfig):
    knot = load_knot(cfg)
    img = pillowcase_image(knot, grid=cfg.grid, seed=cfg.seed, restarts=cfg.restarts)
    img = img.convert(cfg.twisted)
    doc = _envelope(cfg, knot, {"image": img.to_dict()})
    if cfg.svg:
        Path(cfg.svg).write_text(render_svg(points=img.points(), title=knot.name or "image"))
    return EXIT_OK, doc


def cmd_certify(cfg: JobConfig):
    knot = load_knot(cfg)
    cert = certify_surgery(knot, parse_slope(cfg.slope), seed=cfg.seed, grid=cfg.grid,
                           restarts=cfg.restarts, twist=cfg.twisted)
    doc = _envelope(cfg, knot, {"certificate": cert.to_dict()})
    if cert.verdict == OUT_OF_SCOPE:
        return EXIT_SCOPE, doc
    return (EXIT_OK if cert.verdict == FOUND else EXIT_NEGATIVE), doc


def _arc_summary(slope: Slope) -> dict:
    arc = build_arc_S(slope)
    contacts = points_on_beta_pi(arc)
    return {"arc": arc.to_dict(),
            "segment_lines": [list(map(float, l)) for l in arc.segment_lines()],
            "beta_pi_contacts": [list(v) for v in contacts],
            "n_beta_pi_contacts": len(contacts)}


def cmd_arc(cfg: JobConfig):
    return EXIT_OK, _envelope(cfg, None, _arc_summary(parse_slope(cfg.slope)))


def cmd_figure(cfg: JobConfig):
    slope = parse_slope(cfg.slope)
    summary = _arc_summary(slope)
    arc = build_arc_S(slope)
    meta = {"slope": str(slope), "n_beta_pi_contacts": summary["n_beta_pi_contacts"],
            "version": __version__}
    svg = render_svg(arc=arc, title=f"S for p/q = {slope}", metadata=meta)
    path = Path(cfg.out or f"figure_{slope.p}_{slope.q}.svg")
    path.write_text(svg)
    return EXIT_OK, _envelope(cfg, None, {**summary, "svg": str(path)})


def cmd_perturb(cfg: JobConfig):
    knot = load_knot(cfg)
    report = proposition_pipeline(knot, parse_slope(cfg.slope), cfg.epsilon, seed=cfg.seed,
                                  grid=cfg.grid, restarts=cfg.restarts)
    code = EXIT_OK if report.certified_empty else EXIT_NEGATIVE
    return code, _envelope(cfg, knot, {"report": report.to_dict()})


HANDLERS = {"reps": cmd_reps, "certify": cmd_certify, "arc": cmd_arc,
            "perturb": cmd_perturb, "figure": cmd_figure}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="knotreps", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"knotreps {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--job", help="TOML job file (flags override it)")
        p.add_argument("--out", default=None)
        if name in ("arc", "figure", "certify", "perturb"):
            p.add_argument("--slope", default=None, help="p/q, e.g. 5/3")
        if name in ("reps", "certify", "perturb"):
            src = p.add_argument_group("knot (exactly one)")
            src.add_argument("--braid", default=None)
            src.add_argument("--pd", default=None)
            src.add_argument("--torus", nargs=2, type=int, metavar=("P", "Q"), default=None)
            src.add_argument("--knot", default=None, help="named knot, e.g. trefoil")
            p.add_argument("--mirror", action="store_true", default=None)
            p.add_argument("--grid", type=int, default=None)
            p.add_argument("--seed", type=int, default=None)
            p.add_argument("--restarts", type=int, default=None)
            p.add_argument("--check-determinism", action="store_true", default=None,
                           help="run twice and fail (exit 3) if outputs differ")
        if name in ("reps", "certify"):
            p.add_argument("--twisted", action="store_true", default=None)
        if name == "reps":
            p.add_argument("--svg", default=None)
        if name == "perturb":
            p.add_argument("--epsilon", type=float, default=None)
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with code 2
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        handler = HANDLERS[cfg.command]
        code, doc = handler(cfg)
        if cfg.check_determinism:
            code2, doc2 = handler(cfg)
            if code2 != code or _dump(doc2) != _dump(doc):
                stderr.write("error: repeated run produced different output\n")
                return EXIT_INTERNAL
    except (ParseError, MultiComponentLink, InconsistentPD, NotCoprime, InvalidSlope,
            UsageError, OSError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except SlopeOutOfRange as exc:
        stderr.write(f"out of scope: {exc}\n")
        return EXIT_SCOPE
    except Exception as exc:  # noqa: BLE001 - mapped to the internal-error exit code
        stderr.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL
    _emit(cfg, doc, stdout)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
