"""Homology over Z2[c], Euler characteristic and a Kauffman-bracket oracle."""

from __future__ import annotations

from dataclasses import dataclass

from khovanov_zc import kernels
from khovanov_zc.complex import ChainComplex, max_crossings, SizeGuardError
from khovanov_zc.diagram import Diagram
from khovanov_zc.linalg import SparseMatrix
from khovanov_zc.poly_gf2 import Polynomial


class HomologyError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Smith normal form with transforms


def _deg(v: int) -> int:
    return v.bit_length() - 1


def snf(m: SparseMatrix):
    """``(factors, U, V)`` with ``U @ m @ V`` diagonal.

    ``factors`` are the nonzero diagonal entries as polynomials, each dividing
    the next.  Pivots are entries of minimal degree, ties broken by
    ``(row, column)``.
    """
    nr, nc = m.shape
    a = [[m.bits(i, j) for j in range(nc)] for i in range(nr)]
    u = [[int(i == k) for k in range(nr)] for i in range(nr)]
    v = [[int(j == k) for k in range(nc)] for j in range(nc)]

    def row_axpy(mat, dst, f, src):
        # mat[dst] += f * mat[src]
        rs, rd = mat[src], mat[dst]
        for k, x in enumerate(rs):
            if x:
                rd[k] ^= kernels.clmul(f, x)

    def col_axpy(mat, dst, f, src):
        for row in mat:
            if row[src]:
                row[dst] ^= kernels.clmul(f, row[src])

    def swap_rows(mat, i, k):
        mat[i], mat[k] = mat[k], mat[i]

    def swap_cols(mat, j, k):
        for row in mat:
            row[j], row[k] = row[k], row[j]

    t = 0
    while t < min(nr, nc):
        best = None
        for i in range(t, nr):
            for j in range(t, nc):
                if a[i][j] and (best is None or (_deg(a[i][j]), i, j) < best):
                    best = (_deg(a[i][j]), i, j)
        if best is None:
            break
        _, pi, pj = best
        swap_rows(a, t, pi)
        swap_rows(u, t, pi)
        swap_cols(a, t, pj)
        swap_cols(v, t, pj)
        while True:
            p = a[t][t]
            changed = False
            for i in range(t + 1, nr):
                if a[i][t]:
                    q, r = kernels.pdivmod(a[i][t], p)
                    row_axpy(a, i, q, t)
                    row_axpy(u, i, q, t)
                    if r:
                        swap_rows(a, t, i)
                        swap_rows(u, t, i)
                        changed = True
                        break
            if changed:
                continue
            for j in range(t + 1, nc):
                if a[t][j]:
                    q, r = kernels.pdivmod(a[t][j], p)
                    col_axpy(a, j, q, t)
                    col_axpy(v, j, q, t)
                    if r:
                        swap_cols(a, t, j)
                        swap_cols(v, t, j)
                        changed = True
                        break
            if changed:
                continue
            # the pivot must divide the rest of the matrix
            bad = None
            for i in range(t + 1, nr):
                for j in range(t + 1, nc):
                    if a[i][j] and kernels.pdivmod(a[i][j], p)[1]:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            row_axpy(a, t, 1, bad)
            row_axpy(u, t, 1, bad)
        t += 1
    factors = [Polynomial(a[k][k]) for k in range(t)]
    return factors, SparseMatrix.from_dense(u), SparseMatrix.from_dense(v)


# ---------------------------------------------------------------------------
# homology


@dataclass(frozen=True)
class HomologyTable:
    """``entries[(i, j)] = (free_rank, torsion_exponents)``; zero groups omitted."""

    entries: dict

    def free_rank(self, i: int, j: int) -> int:
        return self.entries.get((i, j), (0, ()))[0]

    def torsion(self, i: int, j: int) -> tuple:
        return self.entries.get((i, j), (0, ()))[1]

    def has_torsion(self) -> bool:
        return any(t for _, t in self.entries.values())

    def is_zero(self) -> bool:
        return not self.entries

    def poincare(self) -> dict:
        return {k: v[0] for k, v in self.entries.items() if v[0]}

    def to_json(self) -> dict:
        return {f"({i},{j})": {"free": f, "torsion": list(t)} for (i, j), (f, t) in sorted(self.entries.items())}

    def render(self) -> str:
        if not self.entries:
            return "0"
        lines = []
        for (i, j), (f, t) in sorted(self.entries.items()):
            parts = []
            if f:
                parts.append("Z2[c]" if f == 1 else f"Z2[c]^{f}")
            parts += ["Z2[c]/(c)" if e == 1 else f"Z2[c]/(c^{e})" for e in t]
            lines.append(f"H^({i},{j}) = " + " + ".join(parts))
        return "\n".join(lines)


def graded_pivots(m: SparseMatrix) -> list[tuple[int, int, int]]:
    """Pivots ``(row, col, e)`` of a homogeneous monomial matrix.

    Eliminating with minimal-degree pivots only ever uses monomial
    multipliers, so row ``r`` and column ``c`` of each pivot keep their
    original degrees and the pivot value is ``c^e``.
    """
    out = []
    for r, c, v in kernels.eliminate({i: dict(row) for i, row in m.rows.items()}, m.ncols):
        if v & (v - 1):
            raise HomologyError(f"invariant factor {Polynomial(v)} is not a power of c")
        out.append((r, c, v.bit_length() - 1))
    return out


def homology(cx: ChainComplex) -> HomologyTable:
    """Free ranks and torsion per bidegree.

    With graded bases adapted to every differential, ``H^i`` is free on the
    non-pivot columns of ``d^i`` minus the pivot rows of ``d^{i-1}`` (counted
    by degree), plus a ``Z2[c]/(c^e)`` summand at each pivot row of
    ``d^{i-1}`` whose pivot is ``c^e`` with ``e >= 1``.
    """
    bad = cx.check_d_squared()
    if bad:
        raise HomologyError(f"d^2 != 0 in homological degrees {bad}")
    if cx.homogeneity_violations():
        raise HomologyError("differential is not homogeneous")
    pivots = {i: graded_pivots(m) for i, m in cx.differential.items()}
    free: dict = {}
    torsion: dict = {}
    for i, js in cx.jdeg.items():
        out_cols = {c for _, c, _ in pivots.get(i, ())}
        for c, j in enumerate(js):
            if c not in out_cols:
                free[(i, j)] = free.get((i, j), 0) + 1
        for r, _, e in pivots.get(i - 1, ()):
            j = js[r]
            free[(i, j)] = free.get((i, j), 0) - 1
            if e:
                torsion.setdefault((i, j), []).append(e)
    entries = {}
    for key in sorted(set(free) | set(torsion)):
        f = free.get(key, 0)
        if f < 0:
            raise HomologyError(f"negative free rank at {key}")
        t = tuple(sorted(torsion.get(key, ())))
        if f or t:
            entries[key] = (f, t)
    return HomologyTable(entries)


def euler_characteristic(cx: ChainComplex) -> LaurentPoly:
    """Chain-level graded Euler characteristic ``sum (-1)^i q^j rank C^{i,j}``."""
    out: dict = {}
    for i, js in cx.jdeg.items():
        for j in js:
            out[j] = out.get(j, 0) + (-1) ** (i % 2)
    return LaurentPoly(out)


# ---------------------------------------------------------------------------
# Laurent polynomials


class LaurentPoly:
    """Integer Laurent polynomial ``{exponent: coefficient}`` without zeros."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        self.coeffs = {int(e): int(c) for e, c in (coeffs or {}).items() if c}

    @classmethod
    def monomial(cls, e: int, c: int = 1) -> LaurentPoly:
        return cls({e: c})

    def __add__(self, other: LaurentPoly) -> LaurentPoly:
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0) + c
        return LaurentPoly(out)

    def __neg__(self) -> LaurentPoly:
        return LaurentPoly({e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other: LaurentPoly) -> LaurentPoly:
        return self + (-other)

    def __mul__(self, other) -> LaurentPoly:
        if isinstance(other, int):
            return LaurentPoly({e: c * other for e, c in self.coeffs.items()})
        out: dict = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return LaurentPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> LaurentPoly:
        out = LaurentPoly({0: 1})
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, LaurentPoly):
            return self.coeffs == other.coeffs
        if isinstance(other, int):
            return self.coeffs == ({0: other} if other else {})
        return NotImplemented

    def __hash__(self):
        return hash(tuple(sorted(self.coeffs.items())))

    def to_json(self) -> dict:
        return {str(e): self.coeffs[e] for e in sorted(self.coeffs)}

    @classmethod
    def from_json(cls, data: dict) -> LaurentPoly:
        return cls({int(e): c for e, c in data.items()})

    def render(self, var: str = "q") -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for e in sorted(self.coeffs, reverse=True):
            c = self.coeffs[e]
            mono = "" if e == 0 else var if e == 1 else f"{var}^{e}"
            if mono:
                coef = "" if abs(c) == 1 else str(abs(c))
            else:
                coef = str(abs(c))
            sign = "-" if c < 0 else "+"
            terms.append((sign, coef + mono))
        s = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, body in terms[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self) -> str:
        return f"LaurentPoly({self.render()})"


Q_PLUS_QINV = LaurentPoly({1: 1, -1: 1})


# ---------------------------------------------------------------------------
# Kauffman bracket oracle
#
# Deliberately shares no code with the complex: smoothings are derived from
# the corner picture and circles are counted with a union-find.


def _a_smoothing_pairs(darts, over):
    # Rotating the overstrand counterclockwise sweeps the corners
    # (o, o+1) and (o+2, o+3); the A-smoothing joins those two corners, so
    # the new arcs hug the other two.
    o = over
    return ((darts[(o + 1) % 4], darts[(o + 2) % 4]), (darts[(o + 3) % 4], darts[o]))


def _b_smoothing_pairs(darts, over):
    o = over
    return ((darts[o], darts[(o + 1) % 4]), (darts[(o + 2) % 4], darts[(o + 3) % 4]))


def _count_loops(d: Diagram, choice) -> int:
    parent = {x: x for x in d.darts}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def join(x, y):
        parent[find(x)] = find(y)

    for x in d.darts:
        join(x, d.alpha[x])
    for c, a_side in zip(d.crossings.values(), choice):
        pairs = _a_smoothing_pairs(c.darts, c.over) if a_side else _b_smoothing_pairs(c.darts, c.over)
        for x, y in pairs:
            join(x, y)
    return len({find(x) for x in d.darts})


def _state_sum_A(d: Diagram, extra_loop: int) -> LaurentPoly:
    n = d.n_crossings
    if n > max_crossings():
        raise SizeGuardError(f"diagram has {n} crossings; the bound is {max_crossings()}")
    delta = LaurentPoly({2: -1, -2: -1})
    total = LaurentPoly()
    for mask in range(1 << n):
        choice = [not (mask >> k) & 1 for k in range(n)]
        n_a = sum(choice)
        loops = _count_loops(d, choice) + extra_loop
        total = total + LaurentPoly.monomial(n_a - (n - n_a)) * delta ** loops
    w = d.writhe()
    # (-A^3)^(-w)
    return total * LaurentPoly.monomial(-3 * w, (-1) ** (w % 2))


def kauffman_bracket_A(d: Diagram) -> LaurentPoly:
    """Writhe-normalised bracket ``(-A^3)^{-w} <D>`` in the variable ``A``."""
    if not d.darts:
        raise ValueError("the normalised bracket of the empty diagram is not a Laurent polynomial")
    return _state_sum_A(d, -1)


def substitute_q(p: LaurentPoly) -> LaurentPoly:
    """The frozen variable change ``A^2 = -q^{-1}``."""
    out = {}
    for e, c in p.coeffs.items():
        if e % 2:
            raise ValueError("odd power of A cannot be rewritten in q")
        h = e // 2
        out[-h] = out.get(-h, 0) + c * (-1) ** (h % 2)
    return LaurentPoly(out)


def kauffman_bracket(d: Diagram) -> LaurentPoly:
    """Normalised bracket in ``q`` (unknot 1, 2-unlink ``q + q^-1``)."""
    return substitute_q(kauffman_bracket_A(d))


def bracket_oracle(d: Diagram) -> LaurentPoly:
    """What the Euler characteristic must equal: ``(q + q^-1)`` times the
    normalised bracket, read off the state sum directly (so it also covers
    the empty diagram)."""
    return substitute_q(_state_sum_A(d, 0))
