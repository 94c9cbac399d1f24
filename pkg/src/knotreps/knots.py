"""
Knot group presentations with a distinguished meridian and Seifert longitude.

Words are tuples of non-zero integers: ``+i`` is generator ``i`` (1-based)
and ``-i`` its inverse.  Diagrams (closed braids and PD codes) are reduced
to a common list of oriented crossings and then read off as Wirtinger
presentations; torus knots also have the closed form ``<x, y | x^p = y^q>``.

Braid grammar::

    braid   := [ "[" ] [ letter { sep letter } ] [ "]" ]
    letter  := [ "-" ] [ "s" | "S" ] digits      (S or "-" inverts; "-S" cancels)
    sep     := whitespace | ","

PD codes follow the KnotTheory convention: ``X[i, j, k, l]`` lists edge labels
counterclockwise starting from the incoming under-edge, edges being numbered
consecutively along the orientation.  With that convention the code
``PD[(1,4,2,5),(3,6,4,1),(5,2,6,3)]`` is the left-handed trefoil, while the
braid ``1 1 1`` is the right-handed one.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from typing import Sequence

from .su2 import IDENTITY, SU2Element

Word = tuple


class ParseError(ValueError):
    pass


class MultiComponentLink(ValueError):
    pass


class InconsistentPD(ValueError):
    pass


class NotCoprime(ValueError):
    pass


class IndexOutOfRange(IndexError):
    pass


# ---------------------------------------------------------------------------
# words

def free_reduce(word: Sequence[int]) -> Word:
    out: list[int] = []
    for letter in word:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def invert(word: Sequence[int]) -> Word:
    return tuple(-letter for letter in reversed(word))


def power(word: Sequence[int], n: int) -> Word:
    if n >= 0:
        return tuple(word) * n
    return invert(word) * (-n)


def exponent_sum(word: Sequence[int], weights: Sequence[int] | None = None) -> int:
    if weights is None:
        return sum(1 if g > 0 else -1 for g in word)
    return sum(weights[abs(g) - 1] * (1 if g > 0 else -1) for g in word)


def evaluate_word(word: Sequence[int], assignment: Sequence[SU2Element]) -> SU2Element:
    """Image of ``word`` under the assignment ``generator i -> assignment[i-1]``."""
    result = IDENTITY
    n = len(assignment)
    for letter in word:
        i = abs(letter)
        if letter == 0 or i > n:
            raise IndexOutOfRange(f"generator {letter} not in 1..{n}")
        u = assignment[i - 1]
        result = result * (u if letter > 0 else u.inverse())
    return result


# ---------------------------------------------------------------------------
# presentations

@dataclass(frozen=True)
class KnotPresentation:
    """Group presentation of a knot exterior.

    ``weights`` are the images of the generators under abelianization onto
    Z (all 1 for Wirtinger presentations).  The meridian has weight 1 and the
    longitude weight 0.
    """

    n_generators: int
    relators: tuple
    meridian: Word
    longitude: Word
    writhe: int = 0
    name: str = ""
    weights: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "relators", tuple(tuple(r) for r in self.relators))
        object.__setattr__(self, "meridian", tuple(self.meridian))
        object.__setattr__(self, "longitude", tuple(self.longitude))
        if not self.weights:
            object.__setattr__(self, "weights", (1,) * self.n_generators)
        else:
            object.__setattr__(self, "weights", tuple(self.weights))
        for w in self.relators + (self.meridian, self.longitude):
            for letter in w:
                if letter == 0 or abs(letter) > self.n_generators:
                    raise IndexOutOfRange(f"generator {letter} not in 1..{self.n_generators}")

    @property
    def is_wirtinger(self) -> bool:
        return all(w == 1 for w in self.weights)

    def hash(self) -> str:
        """Digest of the group data (generators, relators, peripheral words)."""
        payload = json.dumps([self.n_generators, [list(r) for r in self.relators],
                              list(self.meridian), list(self.longitude)],
                             separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()

    def abelianization_ok(self) -> bool:
        return (all(exponent_sum(r, self.weights) == 0 for r in self.relators)
                and exponent_sum(self.meridian, self.weights) == 1
                and exponent_sum(self.longitude, self.weights) == 0)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "hash": self.hash(),
            "n_generators": self.n_generators,
            "relators": [list(r) for r in self.relators],
            "meridian": list(self.meridian),
            "longitude": list(self.longitude),
            "writhe": self.writhe,
            "weights": list(self.weights),
        }


def mirror(k: KnotPresentation) -> KnotPresentation:
    """Mirror image: same group, longitude reversed relative to the meridian."""
    if k.name.startswith("mirror(") and k.name.endswith(")"):
        name = k.name[len("mirror("):-1]
    else:
        name = f"mirror({k.name})" if k.name else "mirror"
    return KnotPresentation(k.n_generators, k.relators, k.meridian,
                            invert(k.longitude), -k.writhe, name, k.weights)


# ---------------------------------------------------------------------------
# diagrams -> Wirtinger

@dataclass(frozen=True)
class _Crossing:
    under_in: int
    under_out: int
    over_in: int
    over_out: int
    sign: int


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _wirtinger(crossings: Sequence[_Crossing], n_edges: int, name: str) -> KnotPresentation:
    """Wirtinger presentation of a one-component diagram.

    Edges are ``0 .. n_edges-1`` in traversal order.  At a crossing of sign
    ``e`` the outgoing under-arc is ``o^-e * in * o^e``; the longitude is the
    product of ``o^e`` over the under-passes met along the traversal, then
    writhe-corrected.
    """
    if not crossings:
        return KnotPresentation(1, (), (1,), (), 0, name)
    uf = _UnionFind(n_edges)
    for c in crossings:
        uf.union(c.over_in, c.over_out)
    # every edge change not at an under-pass keeps the arc
    under_ends = {c.under_in for c in crossings}
    for e in range(n_edges):
        if e not in under_ends:
            uf.union(e, (e + 1) % n_edges)
    labels: dict[int, int] = {}
    for e in range(n_edges):
        root = uf.find(e)
        if root not in labels:
            labels[root] = len(labels) + 1
    gen = [labels[uf.find(e)] for e in range(n_edges)]
    n = len(labels)

    ordered = sorted(crossings, key=lambda c: c.under_in)
    relators = []
    for c in ordered:
        o, a, b, s = gen[c.over_in], gen[c.under_in], gen[c.under_out], c.sign
        relators.append(free_reduce((-s * o, a, s * o, -b)))
    relators = [r for r in relators if r][: max(n - 1, 0)]
    writhe = sum(c.sign for c in crossings)
    m = gen[0]
    longitude = tuple(c.sign * gen[c.over_in] for c in ordered) + power((m,), -writhe)
    return KnotPresentation(n, tuple(relators), (m,), free_reduce(longitude), writhe, name)


_LETTER = re.compile(r"^(-?)([sS]?)(\d+)$")


def _braid_letters(text: str) -> list[int]:
    body = text.strip()
    if body.startswith("[") and body.endswith("]"):
        body = body[1:-1]
    letters = []
    for tok in re.split(r"[\s,]+", body.strip()):
        if not tok:
            continue
        match = _LETTER.match(tok)
        if not match:
            raise ParseError(f"bad braid letter {tok!r}")
        neg, s, digits = match.groups()
        i = int(digits)
        if i < 1:
            raise ParseError("braid generators are numbered from 1")
        sign = -1 if (neg == "-") != (s == "S") else 1
        letters.append(sign * i)
    return letters


def braid_crossings(letters: Sequence[int]) -> tuple[list[_Crossing], int]:
    """Crossings of the closure of a braid word, edges in traversal order.

    Strands run downward; for a positive letter the strand entering from the
    right passes over, which is a positive crossing.
    """
    n_strands = max([abs(i) for i in letters], default=0) + 1
    # segment ids: one per strand piece between crossings
    next_id = n_strands
    cur = list(range(n_strands))
    top = list(cur)
    succ: dict[int, tuple[int, int | None]] = {}  # seg -> (next seg, crossing index)
    raw = []
    for idx, letter in enumerate(letters):
        a = abs(letter) - 1
        b = a + 1
        sa, sb = cur[a], cur[b]
        ta, tb = next_id, next_id + 1
        next_id += 2
        succ[sa] = (tb, idx)
        succ[sb] = (ta, idx)
        cur[a], cur[b] = ta, tb
        if letter > 0:
            over, under = (sb, ta), (sa, tb)
        else:
            over, under = (sa, tb), (sb, ta)
        raw.append((under, over, 1 if letter > 0 else -1))
    for pos in range(n_strands):
        succ[cur[pos]] = (top[pos], None)
    # segments joined through the closure are the same edge
    merged = {cur[pos]: top[pos] for pos in range(n_strands)}

    def canon(seg):
        return merged.get(seg, seg)

    # walk once around starting at the top of strand 0
    order: list[int] = []
    seg = top[0]
    seen = set()
    while True:
        if seg in seen:
            break
        seen.add(seg)
        order.append(seg)
        nxt, _ = succ[seg]
        seg = merged.get(nxt, nxt)  # a bottom segment continues through the closure
    all_edges = {canon(s) for s in succ}
    if len(order) != len(all_edges):
        raise MultiComponentLink(f"braid closure has more than one component")
    edge_of = {s: i for i, s in enumerate(order)}
    crossings = []
    for (u_in, u_out), (o_in, o_out), sign in raw:
        crossings.append(_Crossing(edge_of[canon(u_in)], edge_of[canon(u_out)],
                                   edge_of[canon(o_in)], edge_of[canon(o_out)], sign))
    return crossings, len(order)


def _braid_components(letters: Sequence[int]) -> int:
    n = max([abs(i) for i in letters], default=0) + 1
    perm = list(range(n))
    for letter in letters:
        a = abs(letter) - 1
        perm[a], perm[a + 1] = perm[a + 1], perm[a]
    seen, cycles = set(), 0
    for start in range(n):
        if start in seen:
            continue
        cycles += 1
        j = start
        while j not in seen:
            seen.add(j)
            j = perm[j]
    return cycles


def parse_braid(text: str, name: str | None = None) -> KnotPresentation:
    letters = _braid_letters(text)
    if _braid_components(letters) != 1:
        raise MultiComponentLink(f"closure of {text!r} is a link")
    crossings, n_edges = braid_crossings(letters)
    return _wirtinger(crossings, n_edges, name or f"braid[{' '.join(map(str, letters))}]")


def braid_to_pd(text: str) -> list[tuple[int, int, int, int]]:
    """PD code (KnotTheory convention, 1-based edges) of a braid closure."""
    letters = _braid_letters(text)
    if _braid_components(letters) != 1:
        raise MultiComponentLink(f"closure of {text!r} is a link")
    crossings, _ = braid_crossings(letters)
    return [crossing_to_pd(c) for c in crossings]


def crossing_to_pd(c: _Crossing) -> tuple[int, int, int, int]:
    if c.sign > 0:
        return (c.under_in + 1, c.over_out + 1, c.under_out + 1, c.over_in + 1)
    return (c.under_in + 1, c.over_in + 1, c.under_out + 1, c.over_out + 1)


_PD_TUPLE = re.compile(r"[\(\[]\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*[\)\]]")


def _pd_tuples(text) -> list[tuple[int, int, int, int]]:
    if not isinstance(text, str):
        tuples = [tuple(int(v) for v in t) for t in text]
        if any(len(t) != 4 for t in tuples):
            raise ParseError("PD crossings need four labels")
        return tuples
    body = text.strip()
    if body.upper().startswith("PD"):
        body = body[2:].strip()
    if not body:
        return []
    if not (body.startswith("[") and body.endswith("]")) and not (body.startswith("(") and body.endswith(")")):
        raise ParseError("PD code must look like PD[(a,b,c,d), ...]")
    inner = body[1:-1].replace("X", "")
    tuples = [tuple(int(v) for v in m.groups()) for m in _PD_TUPLE.finditer(inner)]
    leftover = _PD_TUPLE.sub("", inner)
    if re.sub(r"[\s,]", "", leftover):
        raise ParseError(f"unparsed PD content {leftover.strip()!r}")
    return tuples


def parse_pd(text: str, name: str | None = None) -> KnotPresentation:
    tuples = _pd_tuples(text)
    name = name or "pd"
    if not tuples:
        return KnotPresentation(1, (), (1,), (), 0, name)
    n_edges = 2 * len(tuples)
    counts: dict[int, int] = {}
    for t in tuples:
        for e in t:
            counts[e] = counts.get(e, 0) + 1
    if set(counts) != set(range(1, n_edges + 1)) or any(v != 2 for v in counts.values()):
        raise InconsistentPD("edge labels must be 1..2n, each used exactly twice")
    # components: edges joined through crossings (under i-k, over j-l)
    uf = _UnionFind(n_edges + 1)
    for i, j, k, l in tuples:
        uf.union(i, k)
        uf.union(j, l)
    if len({uf.find(e) for e in range(1, n_edges + 1)}) != 1:
        raise MultiComponentLink("PD code describes a link")

    def nxt(e):
        return e % n_edges + 1

    crossings = []
    for i, j, k, l in tuples:
        if k != nxt(i):
            raise InconsistentPD(f"under-strand labels {i}->{k} are not consecutive")
        if l == nxt(j) and j != nxt(l):
            sign, o_in, o_out = -1, j, l
        elif j == nxt(l) and l != nxt(j):
            sign, o_in, o_out = 1, l, j
        elif j == nxt(l) and l == nxt(j):  # two-edge diagram; orientation is ambiguous
            sign, o_in, o_out = 1, l, j
        else:
            raise InconsistentPD(f"over-strand labels {j},{l} are not consecutive")
        crossings.append(_Crossing(i - 1, k - 1, o_in - 1, o_out - 1, sign))
    return _wirtinger(crossings, n_edges, name)


# ---------------------------------------------------------------------------
# torus knots

def _bezout(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, s, t)`` with ``s a + t b = g = gcd(a, b)``."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        quo = old_r // r
        old_r, r = r, old_r - quo * r
        old_s, s = s, old_s - quo * s
        old_t, t = t, old_t - quo * t
    return old_r, old_s, old_t


def torus_knot_presentation(p: int, q: int) -> KnotPresentation:
    """``<x, y | x^p y^-q>`` with meridian ``x^a y^b`` (``qa + pb = 1``) and
    longitude ``x^p m^{-pq}``.  Negative ``p q`` gives the mirror."""
    if abs(p) < 2 or abs(q) < 2:
        raise ValueError("torus knot parameters need |p|, |q| >= 2")
    if math.gcd(p, q) != 1:
        raise NotCoprime(f"gcd({p}, {q}) != 1")
    if p * q < 0:
        return mirror(torus_knot_presentation(abs(p), abs(q)))
    p, q = abs(p), abs(q)
    g, a, b = _bezout(q, p)
    assert g == 1
    meridian = power((1,), a) + power((2,), b)
    longitude = free_reduce(power((1,), p) + power(meridian, -p * q))
    relator = power((1,), p) + power((2,), -q)
    return KnotPresentation(2, (relator,), meridian, longitude, p * q,
                            f"T({p},{q})", weights=(q, p))


# ---------------------------------------------------------------------------
# named knots

NAMED_BRAIDS = {
    "unknot": "",
    "trefoil": "1 1 1",
    "3_1": "1 1 1",
    "figure-eight": "1 -2 1 -2",
    "figure8": "1 -2 1 -2",
    "4_1": "1 -2 1 -2",
    "5_1": "1 1 1 1 1",
    "5_2": "1 1 1 2 -1 2",
}


def named_knot(name: str) -> KnotPresentation:
    key = name.strip().lower()
    if key not in NAMED_BRAIDS:
        raise ParseError(f"unknown knot name {name!r}; known: {', '.join(sorted(NAMED_BRAIDS))}")
    return parse_braid(NAMED_BRAIDS[key], name=key)
