"""Pure-Python kernels over GF(2)[c].

Polynomials are plain ``int`` bitmasks: bit ``k`` is the coefficient of
``c**k``.  Sparse matrices are ``dict[row, dict[col, int]]`` with no stored
zeros.  The compiled module ``_ckernels`` exposes the same functions.
"""

from __future__ import annotations

IMPLEMENTATION = "python"


def degree(a: int) -> int:
    return a.bit_length() - 1


def clmul(a: int, b: int) -> int:
    """Carry-less product of two bitmask polynomials."""
    if a.bit_length() < b.bit_length():
        a, b = b, a
    out = 0
    shift = 0
    while b:
        if b & 1:
            out ^= a << shift
        b >>= 1
        shift += 1
    return out


def pdivmod(a: int, b: int) -> tuple[int, int]:
    if b == 0:
        raise ZeroDivisionError("polynomial division by zero")
    db = b.bit_length() - 1
    q = 0
    while a and a.bit_length() - 1 >= db:
        s = a.bit_length() - 1 - db
        q |= 1 << s
        a ^= b << s
    return q, a


def pgcd(a: int, b: int) -> int:
    while b:
        a, b = b, pdivmod(a, b)[1]
    return a


def sparse_matmul(a: dict, b: dict) -> dict:
    """Product ``a @ b`` of two row-sparse matrices."""
    out = {}
    for i, row in a.items():
        acc: dict[int, int] = {}
        for k, x in row.items():
            brow = b.get(k)
            if not brow:
                continue
            for j, y in brow.items():
                v = acc.get(j, 0) ^ (x if y == 1 else y if x == 1 else clmul(x, y))
                if v:
                    acc[j] = v
                else:
                    acc.pop(j, None)
        if acc:
            out[i] = acc
    return out


def _row_axpy(target: dict, factor: int, source: dict) -> None:
    # target += factor * source, in place
    for j, v in source.items():
        w = target.get(j, 0) ^ (v if factor == 1 else clmul(factor, v))
        if w:
            target[j] = w
        else:
            del target[j]


def invariant_factors(rows: dict, ncols: int) -> list[int]:
    """Nonzero Smith invariant factors, sorted so each divides the next."""
    return _normalize_diagonal([v for _, _, v in eliminate(rows, ncols)])


def eliminate(rows: dict, ncols: int) -> list[tuple[int, int, int]]:
    """Diagonalize by row and column operations; return the pivots
    ``(row, col, value)`` in the order they were found.

    Pivots are entries of minimal degree, ties broken by (row, column).  When
    every entry is a monomial all multipliers are monomials too, so a graded
    basis stays graded and each pivot pairs original row and column indices.
    """
    rows = {i: dict(r) for i, r in rows.items() if r}
    cols: dict[int, set[int]] = {}
    for i, r in rows.items():
        for j in r:
            cols.setdefault(j, set()).add(i)
    diag: list[tuple[int, int, int]] = []

    def drop_entry(i: int, j: int) -> None:
        s = cols[j]
        s.discard(i)
        if not s:
            del cols[j]

    def set_row(i: int, new: dict) -> None:
        old = rows.get(i, {})
        for j in old:
            if j not in new:
                drop_entry(i, j)
        for j in new:
            if j not in old:
                cols.setdefault(j, set()).add(i)
        if new:
            rows[i] = new
        else:
            rows.pop(i, None)

    while rows:
        best = None
        for i in sorted(rows):
            for j, v in rows[i].items():
                key = (v.bit_length(), i, j)
                if best is None or key < best:
                    best = key
            if best is not None and best[0] == 1 and best[1] == i:
                break
        _, pi, pj = best
        while True:
            p = rows[pi][pj]
            moved = False
            # clear the pivot column with row operations
            for i in sorted(cols.get(pj, ())):
                if i == pi:
                    continue
                q, r = pdivmod(rows[i][pj], p)
                new = dict(rows[i])
                _row_axpy(new, q, rows[pi])
                set_row(i, new)
                if r:
                    pi, moved = i, True
                    break
            if moved:
                continue
            # clear the pivot row with column operations
            prow = rows[pi]
            for j in sorted(prow):
                if j == pj:
                    continue
                # column j -= q * column pj; column pj is zero outside pi
                r = pdivmod(prow[j], p)[1]
                if r:
                    new = dict(prow)
                    new[j] = r
                    set_row(pi, new)
                    pj, moved = j, True
                    break
                new = dict(prow)
                del new[j]
                set_row(pi, new)
                prow = rows[pi]
            if moved:
                continue
            break
        diag.append((pi, pj, rows[pi][pj]))
        set_row(pi, {})
    return diag


def _normalize_diagonal(diag: list[int]) -> list[int]:
    # gcd/lcm sweeps turn any diagonal into a divisibility chain
    d = list(diag)
    n = len(d)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = d[i], d[j]
            g = pgcd(a, b)
            if g == a:
                continue
            lcm = clmul(pdivmod(a, g)[0], b)
            d[i], d[j] = g, lcm
    return d
