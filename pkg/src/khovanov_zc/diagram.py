"""Oriented link diagrams as planar combinatorial maps.

A diagram is a set of darts (half-edges).  ``alpha`` pairs darts into arcs;
each crossing lists its four darts counterclockwise.  Darts that sit at no
crossing come in pairs forming crossingless loops.  A dart ``d`` also names
one side of its arc: the face on the right when travelling from ``d`` along
the arc.  For a crossing dart the face permutation is ``phi(d) =
sigma(alpha(d))`` with ``sigma`` the counterclockwise successor; a loop dart
is its own face.

Faces of different connected pieces are glued into planar *regions*; exactly
one region is unbounded.  ``orient[d]`` is +1 when travelling from ``d``
follows the link orientation, and ``comp[d]`` names the link component (kept
stable through R2 moves so endpoints of a movie can be matched).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

POSITIVE = 1
NEGATIVE = -1


class DiagramError(ValueError):
    pass


class MoveError(DiagramError):
    pass


@dataclass(frozen=True)
class Crossing:
    id: int
    darts: tuple[int, int, int, int]
    over: int  # 0: darts[0]-darts[2] is the overstrand, 1: darts[1]-darts[3]
    sign: int

    def index(self, d: int) -> int:
        return self.darts.index(d)

    def is_over(self, d: int) -> bool:
        return (self.darts.index(d) - self.over) % 2 == 0


@dataclass(frozen=True)
class MoveRecord:
    kind: str
    params: dict = field(default_factory=dict)
    new_crossings: tuple = ()
    removed_crossings: tuple = ()
    new_darts: frozenset = frozenset()
    removed_darts: frozenset = frozenset()
    touched_old: frozenset = frozenset()
    touched_new: frozenset = frozenset()
    bigon_face: int | None = None
    dart_map: dict | None = None  # only for isotopies; otherwise survivors keep ids


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra
        return ra


def crossing_sign(darts, over: int, orient: dict) -> int:
    """Right-hand rule: positive when the outgoing understrand sits a quarter
    turn counterclockwise from the outgoing overstrand."""
    o = over if orient[darts[over]] > 0 else over + 2
    u = over + 1 if orient[darts[over + 1]] > 0 else (over + 3) % 4
    return POSITIVE if u == (o + 1) % 4 else NEGATIVE


class Diagram:
    """Immutable oriented link diagram; see the module docstring."""

    def __init__(self, crossings, alpha, orient, regions=None, unbounded=None, comp=None):
        if isinstance(crossings, dict):
            crossings = crossings.values()
        self.crossings: dict[int, Crossing] = {c.id: c for c in sorted(crossings, key=lambda c: c.id)}
        self.alpha: dict[int, int] = dict(alpha)
        self.orient: dict[int, int] = dict(orient)
        self.darts: tuple[int, ...] = tuple(sorted(self.alpha))
        self._pos: dict[int, tuple[int, int]] = {}
        for c in self.crossings.values():
            for k, d in enumerate(c.darts):
                self._pos[d] = (c.id, k)
        self._face_cache = None
        self._piece_cache = None
        self.broken = None
        try:
            self.comp = dict(comp) if comp is not None else self._trace_components()
            if regions is None:
                regions, unbounded = self._default_regions()
            self.region, self.unbounded = _canonical_regions(self, regions, unbounded)
        except (KeyError, IndexError) as exc:
            # malformed structure; kept so that validate() can list the problems
            self.comp = dict(comp or {})
            self.region, self.unbounded = {}, None
            self._face_cache = None
            self.broken = f"cannot trace dart {exc}"

    # basic structure -----------------------------------------------------

    @property
    def crossing_ids(self) -> tuple[int, ...]:
        return tuple(self.crossings)

    @property
    def n_crossings(self) -> int:
        return len(self.crossings)

    def at_crossing(self, d: int) -> bool:
        return d in self._pos

    def position(self, d: int) -> tuple[int, int]:
        return self._pos[d]

    def crossing_of(self, d: int) -> Crossing:
        return self.crossings[self._pos[d][0]]

    def sigma(self, d: int, k: int = 1) -> int:
        cid, i = self._pos[d]
        return self.crossings[cid].darts[(i + k) % 4]

    def phi(self, d: int) -> int:
        if d not in self._pos:
            return d
        return self.sigma(self.alpha[d])

    def edge(self, d: int) -> tuple[int, int]:
        if d not in self.alpha:
            raise DiagramError(f"unknown dart {d}")
        return (d, self.alpha[d])

    def free_loops(self) -> list[tuple[int, int]]:
        out = []
        for d in self.darts:
            if d not in self._pos and d < self.alpha[d]:
                out.append((d, self.alpha[d]))
        return out

    def faces(self) -> dict[int, int]:
        """Map every dart to its face key (the smallest dart on the face)."""
        if self._face_cache is None:
            key = {}
            for d in self.darts:
                if d in key:
                    continue
                orbit = [d]
                x = self.phi(d)
                while x != d:
                    orbit.append(x)
                    x = self.phi(x)
                k = min(orbit)
                for x in orbit:
                    key[x] = k
            self._face_cache = key
        return self._face_cache

    def face_orbit(self, d: int) -> list[int]:
        orbit = [d]
        x = self.phi(d)
        while x != d:
            orbit.append(x)
            x = self.phi(x)
        return orbit

    def face_keys(self) -> list[int]:
        return sorted(set(self.faces().values()))

    def region_of_dart(self, d: int) -> int:
        return self.region[self.faces()[d]]

    def pieces(self) -> dict[int, int]:
        """Map every dart to its connected piece (smallest dart in the piece)."""
        if self._piece_cache is None:
            uf = _UnionFind()
            for d in self.darts:
                uf.union(d, self.alpha[d])
            for c in self.crossings.values():
                for d in c.darts[1:]:
                    uf.union(c.darts[0], d)
            self._piece_cache = {d: uf.find(d) for d in self.darts}
        return self._piece_cache

    def _trace_components(self) -> dict[int, int]:
        uf = _UnionFind()
        for d in self.darts:
            uf.union(d, self.alpha[d])
        for c in self.crossings.values():
            uf.union(c.darts[0], c.darts[2])
            uf.union(c.darts[1], c.darts[3])
        return {d: uf.find(d) for d in self.darts}

    def components(self) -> list[list[int]]:
        groups: dict[int, list[int]] = {}
        for d in self.darts:
            groups.setdefault(self.comp[d], []).append(d)
        return [groups[k] for k in sorted(groups)]

    def _default_regions(self):
        # one face per piece (the face of its smallest dart) is glued into
        # the unbounded region; every other face is a region of its own
        faces = self.faces()
        pieces = self.pieces()
        outer = {faces[p] for p in set(pieces.values())}
        regions = {}
        for k in set(faces.values()):
            regions[k] = -1 if k in outer else k
        return regions, (-1 if outer else None)

    def writhe(self) -> int:
        return sum(c.sign for c in self.crossings.values())

    def next_dart(self) -> int:
        return (max(self.darts) + 1) if self.darts else 0

    def next_crossing_id(self) -> int:
        return (max(self.crossings) + 1) if self.crossings else 0

    def regions_as_lists(self) -> list[list[int]]:
        groups: dict[int, list[int]] = {}
        for k, r in self.region.items():
            groups.setdefault(r, []).append(k)
        return sorted(sorted(g) for g in groups.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Diagram):
            return NotImplemented
        return (
            self.crossings == other.crossings
            and self.alpha == other.alpha
            and self.orient == other.orient
            and self.region == other.region
            and self.unbounded == other.unbounded
        )

    def __hash__(self):
        return hash((tuple(self.crossings.items()), tuple(sorted(self.alpha.items()))))

    def __repr__(self) -> str:
        return (
            f"Diagram(crossings={self.n_crossings}, darts={len(self.darts)}, "
            f"free_loops={len(self.free_loops())}, writhe={self.writhe()})"
        )

    # serialization -------------------------------------------------------

    def to_json(self) -> dict:
        out = {
            "darts": list(self.darts) if self.darts != tuple(range(len(self.darts))) else len(self.darts),
            "edges": [[d, self.alpha[d]] for d in self.darts if d < self.alpha[d]],
            "crossings": [
                {
                    "id": c.id,
                    "ccw": list(c.darts),
                    "over": [c.darts[c.over], c.darts[c.over + 2]],
                    "sign": c.sign,
                }
                for c in self.crossings.values()
            ],
            "orient": [self.orient[d] for d in self.darts],
            "free_loops": len(self.free_loops()),
            "regions": self.regions_as_lists(),
            "unbounded": self.unbounded,
        }
        return out

    @classmethod
    def from_json(cls, data: dict) -> Diagram:
        """Parse the JSON diagram format; structural problems raise
        ``DiagramError`` (use :func:`validate` for the full list)."""
        try:
            darts = data["darts"]
            dart_ids = list(range(darts)) if isinstance(darts, int) else [int(x) for x in darts]
            alpha = {}
            for a, b in data["edges"]:
                if a in alpha or b in alpha or a == b:
                    raise DiagramError(f"dart reused in edges: {a}, {b}")
                alpha[int(a)] = int(b)
                alpha[int(b)] = int(a)
            if sorted(alpha) != sorted(dart_ids):
                raise DiagramError("edges must pair every dart exactly once")
            crossings = []
            seen = set()
            for k, c in enumerate(data.get("crossings", [])):
                ccw = tuple(int(x) for x in c["ccw"])
                if len(ccw) != 4:
                    raise DiagramError("a crossing needs four darts")
                for d in ccw:
                    if d in seen:
                        raise DiagramError(f"dart reused: {d} appears in two crossings")
                    seen.add(d)
                over = {ccw.index(int(x)) for x in c["over"]}
                if over not in ({0, 2}, {1, 3}):
                    raise DiagramError("overstrand must be a pair of opposite darts")
                crossings.append(Crossing(int(c.get("id", k)), ccw, min(over), int(c.get("sign", 0))))
            orient_list = data["orient"]
            if isinstance(orient_list, dict):
                orient = {int(k): int(v) for k, v in orient_list.items()}
            else:
                orient = {d: int(o) for d, o in zip(dart_ids, orient_list)}
            if sorted(orient) != sorted(dart_ids):
                raise DiagramError("orient must give a direction for every dart")
            if "free_loops" in data:
                n_free = sum(1 for d in dart_ids if d not in seen and d < alpha[d])
                if int(data["free_loops"]) != n_free:
                    raise DiagramError(f"free_loops says {data['free_loops']}, edges give {n_free}")
            crossings = [
                c if c.sign else Crossing(c.id, c.darts, c.over, crossing_sign(c.darts, c.over, orient))
                for c in crossings
            ]
            regions = None
            unbounded = None
            if data.get("regions") is not None:
                regions, unbounded = _regions_from_lists(data["regions"], data.get("unbounded"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DiagramError):
                raise
            raise DiagramError(f"malformed diagram: {exc}") from exc
        d = cls(crossings, alpha, orient, regions=regions, unbounded=unbounded)
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _regions_from_lists(lists, unbounded):
    # lists of darts; faces are resolved once the diagram exists
    return ("darts", [list(map(int, g)) for g in lists]), unbounded


def _canonical_regions(d: Diagram, regions, unbounded):
    faces = d.faces()
    keys = set(faces.values())
    if isinstance(regions, tuple) and regions and regions[0] == "darts":
        raw = {}
        for label, group in enumerate(regions[1]):
            for x in group:
                if x not in faces:
                    raise DiagramError(f"region names unknown dart {x}")
                raw[faces[x]] = ("g", label)
        for k in keys:
            raw.setdefault(k, ("f", k))
        if unbounded is not None:
            if unbounded not in faces:
                raise DiagramError(f"unbounded names unknown dart {unbounded}")
            unbounded = raw[faces[unbounded]]
        regions = raw
    groups: dict = {}
    for k in keys:
        if k not in regions:
            raise DiagramError(f"face {k} has no region")
        groups.setdefault(regions[k], []).append(k)
    canon = {}
    label_map = {}
    for lab, ks in groups.items():
        m = min(ks)
        label_map[lab] = m
        for k in ks:
            canon[k] = m
    if not keys:
        return {}, None
    if unbounded is None or unbounded not in label_map:
        # fall back to the region of the smallest dart
        ub = canon[faces[d.darts[0]]]
    else:
        ub = label_map[unbounded]
    return canon, ub


# ---------------------------------------------------------------------------
# validation


def validate(d: Diagram) -> list[str]:
    """Every invariant violation found, as human-readable strings (empty = ok)."""
    problems = []
    for x, y in d.alpha.items():
        if d.alpha.get(y) != x or x == y:
            problems.append(f"edges: dart {x} is not paired by an involution")
    seen: dict[int, int] = {}
    for c in d.crossings.values():
        if len(set(c.darts)) != 4:
            problems.append(f"dart reused within crossing {c.id}")
        for x in c.darts:
            if x in seen and seen[x] != c.id:
                problems.append(f"dart reused: {x} in crossings {seen[x]} and {c.id}")
            seen[x] = c.id
            if x not in d.alpha:
                problems.append(f"crossing {c.id} uses dart {x} that is not on any edge")
        if c.over not in (0, 1):
            problems.append(f"crossing {c.id}: bad overstrand index")
        if c.sign not in (1, -1):
            problems.append(f"crossing {c.id}: sign must be +1 or -1")
    for x in d.darts:
        if x not in seen and d.alpha.get(x) in seen:
            problems.append(f"dart {x} dangles: its partner is at a crossing but it is not")
        if d.orient.get(x) not in (1, -1):
            problems.append(f"dart {x} has no orientation")
    if not problems and d.broken:
        problems.append(d.broken)
    if problems:
        return problems
    for x in d.darts:
        if d.orient[x] != -d.orient[d.alpha[x]]:
            problems.append(f"orientation flips along edge ({x}, {d.alpha[x]})")
    for c in d.crossings.values():
        for k in (0, 1):
            if d.orient[c.darts[k]] != -d.orient[c.darts[k + 2]]:
                problems.append(f"orientation inconsistent through crossing {c.id}")
        if not problems and crossing_sign(c.darts, c.over, d.orient) != c.sign:
            problems.append(f"crossing {c.id}: sign {c.sign} disagrees with orientation")
    # Euler characteristic per piece
    faces = d.faces()
    pieces = d.pieces()
    by_piece: dict[int, list[int]] = {}
    for x in d.darts:
        by_piece.setdefault(pieces[x], []).append(x)
    for p, darts in sorted(by_piece.items()):
        if not any(d.at_crossing(x) for x in darts):
            continue
        v = len({d.position(x)[0] for x in darts})
        e = len(darts) // 2
        f = len({faces[x] for x in darts})
        if v - e + f != 2:
            problems.append(f"non-planar: piece at dart {p} has V-E+F = {v - e + f} (genus {(2 - (v - e + f)) // 2})")
    # pieces and regions must form a tree
    if d.darts:
        uf = _UnionFind()
        n_edges = 0
        for k in set(faces.values()):
            uf.union(("p", pieces[k]), ("r", d.region[k]))
            n_edges += 1
        nodes = {("p", p) for p in set(pieces.values())} | {("r", r) for r in set(d.region.values())}
        roots = {uf.find(n) for n in nodes}
        if len(roots) != 1 or n_edges != len(nodes) - 1:
            problems.append("regions: piece/region incidence is not a tree (inconsistent nesting)")
        if d.unbounded not in set(d.region.values()):
            problems.append("regions: unbounded region missing")
    return problems


def check(d: Diagram) -> Diagram:
    problems = validate(d)
    if problems:
        raise DiagramError("; ".join(problems))
    return d


# ---------------------------------------------------------------------------
# markings and resolutions


class Resolution:
    """Circles of a smoothing, ordered by smallest dart."""

    __slots__ = ("circles", "circle_of")

    def __init__(self, circles):
        self.circles: tuple[frozenset, ...] = tuple(sorted(circles, key=min))
        self.circle_of = {x: i for i, c in enumerate(self.circles) for x in c}

    def __len__(self) -> int:
        return len(self.circles)

    def __repr__(self) -> str:
        return f"Resolution({[sorted(c) for c in self.circles]})"


def smoothing_partner(c: Crossing, k: int, marker: int) -> int:
    """Index joined to position ``k`` by the smoothing ``marker`` selects.

    A positive marker takes the A-smoothing: rotating the overstrand
    counterclockwise sweeps the regions (o, o+1) and (o+2, o+3), and the
    smoothing opens those two regions into one, so it joins o+1 to o+2 and
    o+3 to o.
    """
    r = (k - c.over) % 4
    if marker == POSITIVE:
        partner = {0: 3, 3: 0, 1: 2, 2: 1}[r]
    else:
        partner = {0: 1, 1: 0, 2: 3, 3: 2}[r]
    return (partner + c.over) % 4


def normalize_marking(d: Diagram, marking) -> tuple[int, ...]:
    ids = d.crossing_ids
    if isinstance(marking, dict):
        missing = [c for c in ids if c not in marking]
        if missing:
            raise DiagramError(f"marking misses crossings {missing}")
        marking = tuple(marking[c] for c in ids)
    marking = tuple(marking)
    if len(marking) != len(ids):
        raise DiagramError(f"marking has {len(marking)} markers for {len(ids)} crossings")
    if any(m not in (POSITIVE, NEGATIVE) for m in marking):
        raise DiagramError("markers must be +1 or -1")
    return marking


def resolve(d: Diagram, marking) -> Resolution:
    """Smooth every crossing per ``marking`` and trace the resulting circles."""
    marking = normalize_marking(d, marking)
    mk = dict(zip(d.crossing_ids, marking))
    partner = {}
    for cid, c in d.crossings.items():
        for k, x in enumerate(c.darts):
            partner[x] = c.darts[smoothing_partner(c, k, mk[cid])]
    circles = []
    done = set()
    for x in d.darts:
        if x in done:
            continue
        circle = []
        y = x
        while True:
            circle.append(y)
            done.add(y)
            z = d.alpha[y]
            circle.append(z)
            done.add(z)
            if z not in partner:
                break
            y = partner[z]
            if y == x:
                break
        circles.append(frozenset(circle))
    return Resolution(circles)


def writhe(d: Diagram) -> int:
    return d.writhe()


# ---------------------------------------------------------------------------
# moves


def _rebuild(old: Diagram, crossings, alpha, orient, comp, anchors=(), merges=(), forced=None) -> Diagram:
    """New diagram whose regions are inherited from ``old`` by surviving darts."""
    probe = _Probe(crossings, alpha, orient)
    faces = probe.faces()
    pieces = probe.pieces()
    old_faces = old.faces()
    old_reg = {x: old.region[old_faces[x]] for x in old.darts}
    uf = _UnionFind()
    for r in set(old.region.values()):
        uf.find(("old", r))
    for a, b in merges:
        uf.union(("old", a), ("old", b))
    orbits: dict[int, list[int]] = {}
    for x, k in faces.items():
        orbits.setdefault(k, []).append(x)
    forced = forced or {}
    src = {}
    for k, xs in orbits.items():
        forced_here = [forced[x] for x in xs if x in forced]
        if forced_here:
            src[k] = [("old", forced_here[0])] if forced_here[0] != "fresh" else []
            continue
        olds = [("old", old_reg[x]) for x in xs if x in old_reg]
        for o in olds[1:]:
            uf.union(olds[0], o)
        src[k] = olds
    claims: dict = {}
    for k, olds in src.items():
        if olds:
            claims.setdefault((pieces[k], uf.find(olds[0])), []).append(k)
    region = {}
    for (piece, root), ks in claims.items():
        if len(ks) == 1:
            winner = ks[0]
        else:
            anchored = [k for k in ks if any(a in orbits[k] for a in anchors)]
            winner = anchored[0] if anchored else max(ks, key=lambda k: (len(src[k]), -k))
        for k in ks:
            region[k] = root if k == winner else ("fresh", k)
    for k in orbits:
        region.setdefault(k, ("fresh", k))
    unbounded = None
    if old.unbounded is not None:
        root = uf.find(("old", old.unbounded))
        if root in region.values():
            unbounded = root
    if unbounded is None and region:
        unbounded = region[faces[min(faces)]]
    return Diagram(crossings, alpha, orient, regions=region, unbounded=unbounded, comp=comp)


class _Probe(Diagram):
    """Face and piece structure of a diagram under construction."""

    def __init__(self, crossings, alpha, orient):
        if isinstance(crossings, dict):
            crossings = crossings.values()
        self.crossings = {c.id: c for c in sorted(crossings, key=lambda c: c.id)}
        self.alpha = dict(alpha)
        self.orient = dict(orient)
        self.darts = tuple(sorted(self.alpha))
        self._pos = {}
        for c in self.crossings.values():
            for k, x in enumerate(c.darts):
                self._pos[x] = (c.id, k)
        self._face_cache = None
        self._piece_cache = None


def _sides(d: Diagram, arc_a: int, arc_b: int, face: int | None, allow_same: bool = False):
    ea, eb = d.edge(arc_a), d.edge(arc_b)
    same = set(ea) == set(eb)
    if same and not allow_same:
        raise MoveError("both arcs are the same edge")
    reg_a = {d.region_of_dart(x): x for x in ea}
    reg_b = {d.region_of_dart(x): x for x in eb}
    if same:
        if face is not None:
            r = d.region_of_dart(face)
        else:
            r = d.region_of_dart(arc_a)
        if r not in reg_a:
            raise MoveError("face does not border the arc")
        return reg_a[r], reg_a[r], r
    if face is not None:
        r = d.region_of_dart(face)
        if r not in reg_a or r not in reg_b:
            raise MoveError(f"arcs {arc_a} and {arc_b} are not co-facial in the named face")
    else:
        common = set(reg_a) & set(reg_b)
        if not common:
            raise MoveError(f"arcs {arc_a} and {arc_b} are not co-facial")
        if len(common) > 1:
            raise MoveError(f"arcs {arc_a} and {arc_b} share two faces; name the face")
        r = common.pop()
    return reg_a[r], reg_b[r], r


def r2_up(d: Diagram, arc_a: int, arc_b: int, face: int | None = None, over: str = "a", anchor: int | None = None):
    """Push arc ``b`` across arc ``a`` inside a common face, adding a bigon.

    ``over`` names the arc that passes over at both new crossings.  When the
    face is cut in two, the piece holding ``anchor`` (an old dart on that
    face) keeps the face's region; by default the piece with more old darts.
    Returns ``(new_diagram, MoveRecord)``.
    """
    if over not in ("a", "b"):
        raise MoveError("over must be 'a' or 'b'")
    a_s, b_s, _ = _sides(d, arc_a, arc_b, face)
    a_e, b_e = d.alpha[a_s], d.alpha[b_s]
    free_a, free_b = not d.at_crossing(a_s), not d.at_crossing(b_s)
    nxt = d.next_dart()
    n = {}
    for k in range(1, 9):
        if free_a and k in (1, 4):
            continue
        if free_b and k in (5, 8):
            continue
        n[k] = nxt
        nxt += 1
    if free_a:
        n[4], n[1] = a_s, a_e
    if free_b:
        n[8], n[5] = b_s, b_e
    alpha = dict(d.alpha)
    pairs = [(n[2], n[3]), (n[6], n[7]), (n[4], n[1]) if free_a else None, (n[8], n[5]) if free_b else None]
    if not free_a:
        pairs += [(a_s, n[1]), (n[4], a_e)]
    if not free_b:
        pairs += [(b_s, n[5]), (n[8], b_e)]
    for p in pairs:
        if p is None:
            continue
        alpha[p[0]] = p[1]
        alpha[p[1]] = p[0]
    oa, ob = d.orient[a_s], d.orient[b_s]
    orient = dict(d.orient)
    for k, s in ((1, -oa), (2, oa), (3, -oa), (4, oa), (5, -ob), (6, ob), (7, -ob), (8, ob)):
        orient[n[k]] = s
    comp = dict(d.comp)
    for k in (1, 2, 3, 4):
        comp[n[k]] = d.comp[a_s]
    for k in (5, 6, 7, 8):
        comp[n[k]] = d.comp[b_s]
    ov = 0 if over == "a" else 1
    x1 = d.next_crossing_id()
    x2 = x1 + 1
    t1 = (n[4], n[6], n[3], n[5])
    t2 = (n[2], n[7], n[1], n[8])
    crossings = dict(d.crossings)
    crossings[x1] = Crossing(x1, t1, ov, crossing_sign(t1, ov, orient))
    crossings[x2] = Crossing(x2, t2, ov, crossing_sign(t2, ov, orient))
    anchors = (anchor,) if anchor is not None else ()
    new = _rebuild(d, crossings, alpha, orient, comp, anchors=anchors)
    new_darts = frozenset(v for k, v in n.items() if v not in d.alpha)
    rec = MoveRecord(
        "r2_up",
        {"arc_a": arc_a, "arc_b": arc_b, "face": face, "over": over},
        new_crossings=(x1, x2),
        new_darts=new_darts,
        bigon_face=n[3],
    )
    return new, rec


def bigon_faces(d: Diagram, x: int, y: int) -> list[int]:
    """Darts ``p`` at crossing ``x`` whose face is a bigon shared with ``y``."""
    if x not in d.crossings or y not in d.crossings or x == y:
        return []
    out = []
    ydarts = set(d.crossings[y].darts)
    for p in d.crossings[x].darts:
        q = d.phi(p)
        if q in ydarts and d.phi(q) == p:
            out.append(p)
    return out


def _removable(d: Diagram, p: int) -> str | None:
    """Reason the bigon at dart ``p`` cannot be removed, or None."""
    cx = d.crossing_of(p)
    pp = d.alpha[p]
    cy = d.crossing_of(pp)
    if cx.is_over(p) != cy.is_over(pp):
        return "the bigon is not a Reidemeister-2 bigon (overstrand changes)"
    if cx.sign == cy.sign:
        return "bigon crossings have equal signs"
    r = d.region_of_dart(p)
    if r == d.unbounded:
        return "the bigon face is the unbounded region"
    if sum(1 for v in d.region.values() if v == r) > 1:
        return "the bigon encloses other components"
    return None


def r2_down(d: Diagram, crossings=None, rec: MoveRecord | None = None, face: int | None = None):
    """Remove two crossings bounding a Reidemeister-2 bigon."""
    if rec is not None:
        if rec.kind != "r2_up":
            raise MoveError("record is not an r2_up record")
        crossings = rec.new_crossings
        face = rec.bigon_face if face is None else face
    if crossings is None or len(crossings) != 2:
        raise MoveError("r2_down needs two crossings")
    x, y = crossings
    cands = bigon_faces(d, x, y)
    if face is not None:
        fk = d.faces().get(face)
        cands = [p for p in cands if d.faces()[p] == fk]
    if not cands:
        raise MoveError(f"crossings {x} and {y} do not bound a bigon")
    reasons = [(p, _removable(d, p)) for p in cands]
    ok = [p for p, why in reasons if why is None]
    if not ok:
        raise MoveError(f"not a removable bigon: {reasons[0][1]}")
    if len(ok) > 1:
        raise MoveError(f"crossings {x} and {y} bound two removable bigons; name the face")
    p = ok[0]
    pp = d.alpha[p]
    q = d.phi(p)
    qq = d.alpha[q]
    s_x1, s_y1 = d.sigma(p, 2), d.sigma(pp, 2)
    s_x2, s_y2 = d.sigma(qq, 2), d.sigma(q, 2)
    through = {s_x1: s_y1, s_y1: s_x1, s_x2: s_y2, s_y2: s_x2}
    removed = set(d.crossings[x].darts) | set(d.crossings[y].darts)
    alpha = {k: v for k, v in d.alpha.items() if k not in removed}
    for w in list(alpha):
        if alpha[w] in removed:
            cur = alpha[w]
            for _ in range(8):
                nxt = d.alpha[through[cur]]
                if nxt not in removed:
                    alpha[w] = nxt
                    alpha[nxt] = w
                    break
                cur = nxt
            else:
                raise MoveError("inconsistent strand structure at the bigon")
    # ports whose strands close up entirely become crossingless loops
    kept = set()
    visited = set()
    for s in sorted(through):
        if s in visited:
            continue
        cycle = []
        cur = s
        closed = True
        for _ in range(8):
            cycle.append(cur)
            o = through[cur]
            cycle.append(o)
            nxt = d.alpha[o]
            if nxt not in removed:
                closed = False
                break
            if nxt == s:
                break
            cur = nxt
        if closed:
            visited.update(cycle)
            s0 = min(c for c in cycle if c in through)
            alpha[s0] = d.alpha[s0]
            alpha[d.alpha[s0]] = s0
            kept.update((s0, d.alpha[s0]))
        else:
            visited.add(s)
    orient = {k: v for k, v in d.orient.items() if k in alpha}
    comp = {k: v for k, v in d.comp.items() if k in alpha}
    crossings_new = {k: v for k, v in d.crossings.items() if k not in (x, y)}
    new = _rebuild(d, crossings_new, alpha, orient, comp)
    rec_out = MoveRecord(
        "r2_down",
        {"crossings": [x, y], "face": p},
        removed_crossings=(x, y),
        removed_darts=frozenset(removed - kept),
        bigon_face=p,
    )
    return new, rec_out


def birth(d: Diagram, face: int | None = None):
    """Add a crossingless loop in the region of ``face`` (default: unbounded)."""
    m = d.next_dart()
    alpha = dict(d.alpha)
    alpha[m], alpha[m + 1] = m + 1, m
    orient = dict(d.orient)
    orient[m], orient[m + 1] = 1, -1
    comp = dict(d.comp)
    label = max(comp.values(), default=-1) + 1
    comp[m] = comp[m + 1] = max(label, m)
    target = d.region_of_dart(face) if face is not None else d.unbounded
    forced = {m + 1: "fresh"}
    if target is not None:
        forced[m] = target
    new = _rebuild(d, d.crossings, alpha, orient, comp, forced=forced)
    if target is None:
        new = Diagram(new.crossings, new.alpha, new.orient,
                      regions={m: "out", m + 1: "in"}, unbounded="out", comp=new.comp)
    return new, MoveRecord("birth", {"face": face}, new_darts=frozenset((m, m + 1)),
                           touched_new=frozenset((m, m + 1)))


def death(d: Diagram, circle: int):
    """Remove the crossingless loop through dart ``circle``."""
    if circle not in d.alpha:
        raise MoveError(f"unknown dart {circle}")
    if d.at_crossing(circle):
        raise MoveError(f"dart {circle} lies on a circle that passes through a crossing")
    u, v = circle, d.alpha[circle]
    if d.at_crossing(v):
        raise MoveError(f"dart {circle} lies on a circle that passes through a crossing")
    ru, rv = d.region_of_dart(u), d.region_of_dart(v)
    alpha = {k: w for k, w in d.alpha.items() if k not in (u, v)}
    orient = {k: w for k, w in d.orient.items() if k in alpha}
    comp = {k: w for k, w in d.comp.items() if k in alpha}
    new = _rebuild(d, d.crossings, alpha, orient, comp, merges=[(ru, rv)])
    return new, MoveRecord("death", {"circle": circle}, removed_darts=frozenset((u, v)),
                           touched_old=frozenset((u, v)))


def saddle(d: Diagram, arc_a: int, arc_b: int, face: int | None = None):
    """Attach an oriented band between two co-facial arcs."""
    a_s, b_s, r = _sides(d, arc_a, arc_b, face, allow_same=True)
    if d.orient[a_s] != d.orient[b_s]:
        raise MoveError("saddle would produce a non-orientable band")
    a_e, b_e = d.alpha[a_s], d.alpha[b_s]
    free_a, free_b = not d.at_crossing(a_s), not d.at_crossing(b_s)
    alpha = dict(d.alpha)
    orient = dict(d.orient)
    comp = dict(d.comp)
    merges = []
    forced = {}
    new_darts = frozenset()
    removed = frozenset()
    touched_old = frozenset((a_s, a_e, b_s, b_e))
    if a_s == b_s:
        m = d.next_dart()
        alpha[m], alpha[m + 1] = m + 1, m
        orient[m], orient[m + 1] = orient[a_s], -orient[a_s]
        comp[m] = comp[m + 1] = max(max(comp.values()) + 1, m)
        forced = {m: "fresh", m + 1: d.region_of_dart(a_e)}
        new_darts = frozenset((m, m + 1))
        touched_new = frozenset((a_s, a_e, m, m + 1))
    elif free_a or free_b:
        # a crossingless loop is absorbed into the other arc
        keep_s, keep_e, gone_s, gone_e = (b_s, b_e, a_s, a_e) if not free_b else (a_s, a_e, b_s, b_e)
        for x in (gone_s, gone_e):
            del alpha[x], orient[x], comp[x]
        lab_keep, lab_gone = d.comp[keep_s], d.comp[gone_s]
        for x in comp:
            if comp[x] == lab_gone:
                comp[x] = lab_keep
        merges = [(d.region_of_dart(keep_e), d.region_of_dart(gone_e))]
        removed = frozenset((gone_s, gone_e))
        touched_new = frozenset((keep_s, keep_e))
    else:
        alpha[a_e], alpha[b_s] = b_s, a_e
        alpha[a_s], alpha[b_e] = b_e, a_s
        touched_new = frozenset((a_s, a_e, b_s, b_e))
    probe = _Probe(d.crossings, alpha, orient)
    comp = _relabel_components(probe, comp, d.comp)
    new = _rebuild(d, d.crossings, alpha, orient, comp, merges=merges, forced=forced)
    rec = MoveRecord(
        "saddle",
        {"arc_a": arc_a, "arc_b": arc_b, "face": face},
        new_darts=new_darts,
        removed_darts=removed,
        touched_old=touched_old,
        touched_new=touched_new,
    )
    return new, rec


def _relabel_components(probe: _Probe, comp: dict, old_comp: dict) -> dict:
    # link components after a saddle: keep an old label per new component,
    # the smallest one available; split-off parts get fresh labels
    traced = probe._trace_components()
    groups: dict[int, list[int]] = {}
    for x, k in traced.items():
        groups.setdefault(k, []).append(x)
    used = set()
    out = {}
    fresh = max(list(old_comp.values()) + list(comp.values()) + [-1]) + 1
    for k in sorted(groups, key=lambda k: min(groups[k])):
        labels = sorted({old_comp[x] for x in groups[k] if x in old_comp} - used)
        if labels:
            lab = labels[0]
        else:
            lab = fresh
            fresh += 1
        used.add(lab)
        for x in groups[k]:
            out[x] = lab
    return out


# ---------------------------------------------------------------------------
# isomorphism (planar isotopy)


def find_isomorphism(d1: Diagram, d2: Diagram, components: str = "equal", accept=None) -> dict | None:
    """Dart bijection ``d1 -> d2`` preserving the whole planar structure.

    ``components="equal"`` additionally requires link-component labels to
    agree, which is how movie endpoints are matched.  Candidates that keep
    dart ids fixed are tried first.  ``accept(mapping)`` can reject
    otherwise valid bijections.
    """
    if len(d1.darts) != len(d2.darts) or d1.n_crossings != d2.n_crossings:
        return None
    p1, p2 = d1.pieces(), d2.pieces()
    groups1: dict[int, list[int]] = {}
    for x in d1.darts:
        groups1.setdefault(p1[x], []).append(x)
    groups2: dict[int, list[int]] = {}
    for x in d2.darts:
        groups2.setdefault(p2[x], []).append(x)
    order = sorted(groups1, key=lambda k: (-len(groups1[k]), k))

    def extend(mapping, a, b):
        stack = [(a, b)]
        new = {}
        while stack:
            x, y = stack.pop()
            cur = new.get(x, mapping.get(x))
            if cur is not None:
                if cur != y:
                    return None
                continue
            if y in used_targets or y in new_targets:
                return None
            if d1.orient[x] != d2.orient[y]:
                return None
            if components == "equal" and d1.comp[x] != d2.comp[y]:
                return None
            if d1.at_crossing(x) != d2.at_crossing(y):
                return None
            new[x] = y
            new_targets.add(y)
            stack.append((d1.alpha[x], d2.alpha[y]))
            if d1.at_crossing(x):
                c1, c2 = d1.crossing_of(x), d2.crossing_of(y)
                if c1.is_over(x) != c2.is_over(y) or c1.sign != c2.sign:
                    return None
                i, j = c1.index(x), c2.index(y)
                for k in range(1, 4):
                    stack.append((c1.darts[(i + k) % 4], c2.darts[(j + k) % 4]))
        return new

    used_targets: set = set()
    new_targets: set = set()

    def search(idx, mapping, used_pieces):
        nonlocal new_targets
        if idx == len(order):
            if not _regions_match(d1, d2, mapping):
                return None
            return mapping if accept is None or accept(mapping) else None
        piece = groups1[order[idx]]
        anchor = min(piece)
        for key2 in sorted(groups2, key=lambda k: (k not in groups2.get(k, []), k)):
            if key2 in used_pieces or len(groups2[key2]) != len(piece):
                continue
            cands = sorted(groups2[key2], key=lambda y: (y != anchor, y))
            for y in cands:
                new_targets = set()
                ext = extend(mapping, anchor, y)
                if ext is None or len(ext) != len(piece):
                    continue
                merged = dict(mapping)
                merged.update(ext)
                used_targets.update(ext.values())
                res = search(idx + 1, merged, used_pieces | {key2})
                if res is not None:
                    return res
                used_targets.difference_update(ext.values())
        return None

    return search(0, {}, frozenset())


def _regions_match(d1: Diagram, d2: Diagram, mapping: dict) -> bool:
    f1, f2 = d1.faces(), d2.faces()
    rmap = {}
    back = {}
    for k in set(f1.values()):
        r1 = d1.region[k]
        r2 = d2.region[f2[mapping[k]]]
        if rmap.setdefault(r1, r2) != r2 or back.setdefault(r2, r1) != r1:
            return False
    if d1.unbounded is not None and rmap.get(d1.unbounded) != d2.unbounded:
        return False
    return True


def isotopy(d: Diagram, target: Diagram, components: str = "equal"):
    """Identify ``d`` with ``target``; the record carries the dart bijection."""
    mapping = find_isomorphism(d, target, components=components)
    if mapping is None:
        raise MoveError("diagrams are not related by a planar isotopy")
    return target, MoveRecord("isotopy", {}, dart_map=mapping)


# ---------------------------------------------------------------------------
# constructors and fixtures


def from_pd(pd, regions=None) -> Diagram:
    """Diagram from a PD code (KnotTheory convention: ``X[i, j, k, l]`` lists
    the incoming understrand first, then counterclockwise)."""
    slots = {}
    crossings = []
    for cid, x in enumerate(pd):
        darts = tuple(4 * cid + k for k in range(4))
        for k, label in enumerate(x):
            slots.setdefault(label, []).append(darts[k])
        crossings.append((cid, darts))
    alpha = {}
    for label, ds in slots.items():
        if len(ds) != 2:
            raise DiagramError(f"PD label {label} must appear exactly twice")
        alpha[ds[0]], alpha[ds[1]] = ds[1], ds[0]
    orient: dict[int, int] = {}
    stack = []
    for cid, darts in crossings:
        stack += [(darts[0], -1), (darts[2], 1)]
    while stack:
        x, o = stack.pop()
        if x in orient:
            if orient[x] != o:
                raise DiagramError("PD code orientation is inconsistent")
            continue
        orient[x] = o
        stack.append((alpha[x], -o))
        cid, k = divmod(x, 4)
        stack.append((4 * cid + (k + 2) % 4, -o))
    if len(orient) != len(alpha):
        raise DiagramError("PD code has a component that never passes under")
    cs = [Crossing(cid, darts, 1, crossing_sign(darts, 1, orient)) for cid, darts in crossings]
    return Diagram(cs, alpha, orient, regions=regions)


def from_braid(word, strands: int) -> Diagram:
    """Closure of a braid word: ``k`` is the generator sigma_k (positive
    crossing), ``-k`` its inverse; strands are numbered from 1."""
    pending: dict[int, int | None] = {p: None for p in range(1, strands + 1)}
    top: dict[int, int] = {}
    alpha = {}
    orient = {}
    crossings = []
    nxt = 0

    def link(upper, lower, p):
        if upper is None:
            top[p] = lower
        else:
            alpha[upper], alpha[lower] = lower, upper

    for cid, g in enumerate(word):
        i = abs(g)
        if not 1 <= i < strands:
            raise DiagramError(f"generator {g} out of range for {strands} strands")
        ne, nw, sw, se = nxt, nxt + 1, nxt + 2, nxt + 3
        nxt += 4
        orient.update({ne: -1, nw: -1, sw: 1, se: 1})
        link(pending[i], nw, i)
        link(pending[i + 1], ne, i + 1)
        pending[i], pending[i + 1] = sw, se
        darts = (ne, nw, sw, se)
        ov = 0 if g > 0 else 1
        crossings.append(Crossing(cid, darts, ov, crossing_sign(darts, ov, orient)))
    for p in range(1, strands + 1):
        if pending[p] is None:
            alpha[nxt], alpha[nxt + 1] = nxt + 1, nxt
            orient[nxt], orient[nxt + 1] = 1, -1
            nxt += 2
        else:
            alpha[pending[p]], alpha[top[p]] = top[p], pending[p]
    return Diagram(crossings, alpha, orient)


def unlink(n: int) -> Diagram:
    """``n`` crossingless circles side by side."""
    alpha = {}
    orient = {}
    for k in range(n):
        alpha[2 * k], alpha[2 * k + 1] = 2 * k + 1, 2 * k
        orient[2 * k], orient[2 * k + 1] = 1, -1
    return Diagram([], alpha, orient)


def mirror(d: Diagram) -> Diagram:
    """Mirror image: every crossing switches which strand is over."""
    orient = d.orient
    cs = [Crossing(c.id, c.darts, 1 - c.over, crossing_sign(c.darts, 1 - c.over, orient)) for c in d.crossings.values()]
    return Diagram(cs, d.alpha, d.orient, regions=dict(d.region), unbounded=d.unbounded, comp=d.comp)


FIXTURE_NAMES = (
    "empty",
    "unknot0",
    "unknot1",
    "unlink2",
    "hopf_pos",
    "hopf_neg",
    "trefoil_right",
    "trefoil_left",
    "figure_eight",
)


def load_fixture(name: str) -> Diagram:
    path = resources.files("khovanov_zc") / "data" / f"{name}.json"
    if not path.is_file():
        raise DiagramError(f"unknown fixture {name!r}")
    return Diagram.from_json(json.loads(path.read_text()))


def load(path_or_name: str) -> Diagram:
    """Diagram from a JSON file path, or a fixture name."""
    from pathlib import Path

    p = Path(path_or_name)
    if p.suffix == ".json" or p.exists():
        try:
            data = json.loads(p.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DiagramError(f"cannot read diagram {path_or_name}: {exc}") from exc
        if not isinstance(data, dict):
            raise DiagramError("diagram JSON must be an object")
        return Diagram.from_json(data)
    return load_fixture(path_or_name)


# ---------------------------------------------------------------------------
# random diagrams


def cofacial_pairs(d: Diagram) -> list[tuple[int, int, int]]:
    """``(arc_a, arc_b, face)`` for distinct arcs sharing the region of ``face``."""
    by_region: dict[int, list[int]] = {}
    for x in d.darts:
        by_region.setdefault(d.region_of_dart(x), []).append(x)
    out = []
    for darts in by_region.values():
        for k, x in enumerate(darts):
            for y in darts[k + 1 :]:
                if y != d.alpha[x]:
                    out.append((x, y, x))
    return sorted(out)


def random_r2_up(d: Diagram, rng):
    pairs = cofacial_pairs(d)
    if not pairs:
        raise MoveError("no co-facial arcs")
    x, y, f = rng.choice(pairs)
    return r2_up(d, x, y, face=f, over=rng.choice("ab"))


def random_diagram(rng, max_crossings: int = 6) -> Diagram:
    """Braid closure on 1 to 4 strands, then R2 moves, at most ``max_crossings``."""
    strands = rng.randint(1, 4)
    length = rng.randint(0, max_crossings) if strands > 1 else 0
    word = [rng.choice((1, -1)) * rng.randint(1, strands - 1) for _ in range(length)]
    d = from_braid(word, strands)
    while d.n_crossings + 2 <= max_crossings and rng.random() < 0.5 and cofacial_pairs(d):
        d, _ = random_r2_up(d, rng)
    return d
