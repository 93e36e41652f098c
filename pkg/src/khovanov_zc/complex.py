"""The bigraded chain complex C^{i,j}(D) over Z2[c]."""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass

from khovanov_zc.diagram import NEGATIVE, POSITIVE, Diagram, Resolution, normalize_marking, resolve
from khovanov_zc.linalg import SparseMatrix

ONE = "1"
X = "X"
LABELS = (ONE, X)

DEFAULT_MAX_CROSSINGS = 12
MAX_CROSSINGS_ENV = "KHOVANOV_ZC_MAX_CROSSINGS"


class GradingError(ValueError):
    pass


class SizeGuardError(ValueError):
    pass


@dataclass(frozen=True)
class Frobenius:
    """Merge and split rules on labels; coefficients are Z2[c] bitmasks.

    ``merge[(a, b)]`` lists ``(label, coeff)`` and ``split[a]`` lists
    ``((label1, label2), coeff)``.
    """

    merge: dict
    split: dict
    unit: str = ONE
    counit: dict = None  # label -> coefficient of the circle's death

    def replace(self, merge=None, split=None) -> Frobenius:
        m = dict(self.merge)
        m.update(merge or {})
        s = dict(self.split)
        s.update(split or {})
        return Frobenius(m, s, self.unit, self.counit)


FROBENIUS = Frobenius(
    merge={
        (ONE, ONE): ((ONE, 1),),
        (ONE, X): ((X, 1),),
        (X, ONE): ((X, 1),),
        (X, X): (),
    },
    split={
        ONE: (((ONE, X), 1), ((X, ONE), 1), ((X, X), 2)),
        X: (((X, X), 1),),
    },
    counit={ONE: 2, X: 1},
)


@dataclass(frozen=True, order=True)
class EnhancedState:
    """Markers per crossing (in crossing-id order) and one label per circle of
    the resolution (circles ordered by smallest dart)."""

    marking: tuple
    labels: tuple
    c_exp: int = 0

    @property
    def sigma(self) -> int:
        return sum(self.marking)

    @property
    def tau(self) -> int:
        return sum(1 if lab == X else -1 for lab in self.labels)

    def sort_key(self):
        return (
            tuple(0 if m == POSITIVE else 1 for m in self.marking),
            tuple(0 if lab == ONE else 1 for lab in self.labels),
        )

    def describe(self) -> dict:
        return {
            "marking": "".join("+" if m == POSITIVE else "-" for m in self.marking),
            "labels": "".join(self.labels),
        }

    def __str__(self) -> str:
        m = "".join("+" if x == POSITIVE else "-" for x in self.marking)
        return f"[{m}|{''.join(self.labels)}]" if m else f"[{''.join(self.labels)}]"


def _grading_parts(w: int, sigma: int, tau: int, k: int) -> tuple[int, int]:
    i2 = w - sigma
    j2 = -(sigma + 2 * tau - 3 * w)
    if i2 % 2 or j2 % 2:
        raise GradingError(f"non-integer grading (w={w}, sigma={sigma}, tau={tau}); malformed diagram or state")
    return i2 // 2, j2 // 2 + 2 * k


def gradings(d: Diagram, s: EnhancedState) -> tuple[int, int]:
    """``(i, j)`` of an enhanced state."""
    if len(s.marking) != d.n_crossings:
        raise GradingError("state marking does not match the diagram")
    return _grading_parts(d.writhe(), s.sigma, s.tau, s.c_exp)


def _incidences(old: Resolution, new: Resolution, touched):
    """Circle correspondence across one marker flip.

    Returns ``(kept, src, dst)``: pairs of unaffected circles (old index,
    new index) and the sorted indices of the affected circles on each side.
    """
    src = sorted({old.circle_of[x] for x in touched})
    dst = sorted({new.circle_of[x] for x in touched})
    kept = []
    for a, circle in enumerate(old.circles):
        if a in src:
            continue
        kept.append((a, new.circle_of[next(iter(circle))]))
    return kept, src, dst


def _apply_table(table: Frobenius, labels, kept, src, dst, n_new):
    out = []
    if len(src) == 2 and len(dst) == 1:
        rules = [((lab,), coeff) for lab, coeff in table.merge[(labels[src[0]], labels[src[1]])]]
    elif len(src) == 1 and len(dst) == 2:
        rules = list(table.split[labels[src[0]]])
    else:
        raise AssertionError("a marker flip must merge or split exactly")
    for new_labels, coeff in rules:
        lab = [None] * n_new
        for a, b in kept:
            lab[b] = labels[a]
        for b, v in zip(dst, new_labels):
            lab[b] = v
        out.append((tuple(lab), coeff))
    return out


def incident_states(d: Diagram, s: EnhancedState, table: Frobenius = FROBENIUS):
    """States ``T`` with nonzero coefficient in ``d(S)``, each as ``(T, coeff)``."""
    if s.c_exp:
        raise ValueError("incident_states expects a generator (c_exp = 0)")
    marking = normalize_marking(d, s.marking)
    old = resolve(d, marking)
    out = []
    for k, cid in enumerate(d.crossing_ids):
        if marking[k] != POSITIVE:
            continue
        flipped = marking[:k] + (NEGATIVE,) + marking[k + 1 :]
        new = resolve(d, flipped)
        kept, src, dst = _incidences(old, new, d.crossings[cid].darts)
        for labels, coeff in _apply_table(table, s.labels, kept, src, dst, len(new)):
            out.append((EnhancedState(flipped, labels), coeff))
    return out


def max_crossings() -> int:
    raw = os.environ.get(MAX_CROSSINGS_ENV)
    if raw is None:
        return DEFAULT_MAX_CROSSINGS
    try:
        bound = int(raw)
    except ValueError as exc:
        raise SizeGuardError(f"{MAX_CROSSINGS_ENV} must be an integer, got {raw!r}") from exc
    if bound < 0:
        raise SizeGuardError(f"{MAX_CROSSINGS_ENV} must be nonnegative")
    return bound


class ChainComplex:
    """Finite bigraded complex over Z2[c].

    ``basis[i]`` is the ordered generator list in homological degree ``i``
    and ``jdeg[i]`` their quantum degrees.  ``differential[i]`` is a
    :class:`SparseMatrix` from ``basis[i]`` (columns) to ``basis[i + 1]``
    (rows).  Entries are homogeneous: a ``c^e`` entry joins a generator of
    degree ``j`` to one of degree ``j - 2e``, so the map has bidegree (1, 0)
    once ``c`` is given degree 2.
    """

    def __init__(self, basis: dict, jdeg: dict, differential: dict, diagram: Diagram | None = None):
        self.basis = {i: list(v) for i, v in sorted(basis.items()) if v}
        self.jdeg = {i: list(jdeg[i]) for i in self.basis}
        self.differential = {}
        for i, m in differential.items():
            if i in self.basis and not m.is_zero():
                if m.shape != (self.rank(i + 1), self.rank(i)):
                    raise ValueError(f"differential at {i} has shape {m.shape}")
                self.differential[i] = m
        self.diagram = diagram
        self.violations = []
        self._index = {i: {g: n for n, g in enumerate(v)} for i, v in self.basis.items()}

    @classmethod
    def zero(cls) -> ChainComplex:
        return cls({}, {}, {})

    @property
    def degrees(self) -> list:
        return list(self.basis)

    @property
    def generators(self) -> dict:
        """Generators grouped by bidegree ``(i, j)``."""
        out: dict = {}
        for i, gens in self.basis.items():
            for g, j in zip(gens, self.jdeg[i]):
                out.setdefault((i, j), []).append(g)
        return dict(sorted(out.items()))

    def bidegrees(self) -> list:
        return list(self.generators)

    def rank(self, i: int, j: int | None = None) -> int:
        if j is None:
            return len(self.basis.get(i, ()))
        return sum(1 for x in self.jdeg.get(i, ()) if x == j)

    def total_rank(self) -> int:
        return sum(len(v) for v in self.basis.values())

    def index(self, i: int, gen) -> int:
        return self._index[i][gen]

    def d(self, i: int) -> SparseMatrix:
        m = self.differential.get(i)
        if m is not None:
            return m
        return SparseMatrix(self.rank(i + 1), self.rank(i))

    def is_zero_differential(self) -> bool:
        return not self.differential

    def j_values(self):
        return sorted({j for js in self.jdeg.values() for j in js})

    def check_d_squared(self) -> list:
        """Degrees ``i`` where ``d^{i+1} d^i`` is nonzero."""
        return [i for i in self.basis if not (self.d(i + 1) @ self.d(i)).is_zero()]

    def homogeneity_violations(self) -> list:
        """Entries ``(i, row, col, bits)`` that are not ``c^e`` with the matching j-gap."""
        bad = []
        for i, m in self.differential.items():
            for r, c, v in m.entries():
                e = v.bit_length() - 1
                if v & (v - 1) or self.jdeg[i + 1][r] + 2 * e != self.jdeg[i][c]:
                    bad.append((i, r, c, v))
        return bad

    def entry_alphabet_ok(self) -> bool:
        return all(v in (1, 2) for m in self.differential.values() for _, _, v in m.entries())

    def to_json(self) -> dict:
        out = []
        for i, gens in self.basis.items():
            descr = []
            for g, j in zip(gens, self.jdeg[i]):
                item = g.describe() if isinstance(g, EnhancedState) else {"name": str(g)}
                item["j"] = j
                descr.append(item)
            out.append({"i": i, "generators": descr, "d": self.d(i).to_triplets()})
        return {"degrees": out}

    def __repr__(self) -> str:
        return f"ChainComplex(rank={self.total_rank()}, degrees={self.degrees})"


def enumerate_states(d: Diagram):
    """Yield ``(marking, resolution)`` for every marking, in generator order."""
    for bits in itertools.product((POSITIVE, NEGATIVE), repeat=d.n_crossings):
        yield bits, resolve(d, bits)


def build_complex(
    d: Diagram,
    table: Frobenius = FROBENIUS,
    max_crossings_bound: int | None = None,
    strict: bool = True,
) -> ChainComplex:
    """Enumerate enhanced states and fill the differential.

    With ``strict=False`` entries that break homogeneity are dropped and
    listed in ``cx.violations`` instead of raising.
    """
    bound = max_crossings() if max_crossings_bound is None else max_crossings_bound
    if d.n_crossings > bound:
        raise SizeGuardError(f"diagram has {d.n_crossings} crossings; the bound is {bound}")
    w = d.writhe()
    resolutions = dict(enumerate_states(d))
    basis: dict = {}
    jdeg: dict = {}
    where: dict = {}
    for marking, res in resolutions.items():
        for labels in itertools.product(LABELS, repeat=len(res)):
            s = EnhancedState(marking, labels)
            i, j = _grading_parts(w, s.sigma, s.tau, 0)
            gens = basis.setdefault(i, [])
            where[s] = (i, j, len(gens))
            gens.append(s)
            jdeg.setdefault(i, []).append(j)
    triplets: dict = {}
    violations = []
    for marking, old in resolutions.items():
        for k, cid in enumerate(d.crossing_ids):
            if marking[k] != POSITIVE:
                continue
            flipped = marking[:k] + (NEGATIVE,) + marking[k + 1 :]
            new = resolutions[flipped]
            kept, src, dst = _incidences(old, new, d.crossings[cid].darts)
            for labels in itertools.product(LABELS, repeat=len(old)):
                s = EnhancedState(marking, labels)
                si, sj, col = where[s]
                for new_labels, coeff in _apply_table(table, labels, kept, src, dst, len(new)):
                    t = EnhancedState(flipped, new_labels)
                    ti, tj, row = where[t]
                    e = coeff.bit_length() - 1
                    if ti != si + 1 or tj + 2 * e != sj or coeff & (coeff - 1):
                        violations.append((s, t, coeff))
                        if strict:
                            raise GradingError(f"entry {coeff} from {s} to {t} is not homogeneous")
                        continue
                    triplets.setdefault(si, []).append((row, col, coeff))
    differential = {
        i: SparseMatrix.from_triplets(len(basis.get(i + 1, ())), len(basis[i]), trips)
        for i, trips in triplets.items()
    }
    cx = ChainComplex(basis, jdeg, differential, diagram=d)
    cx.violations = violations
    return cx


def dump_complex(cx: ChainComplex) -> dict:
    return cx.to_json()
