"""Independent reference computations used to check the package.

Nothing here imports the arithmetic under test: polynomials are plain
coefficient lists and GF(2) ranks use list-based elimination.
"""

import itertools


def coeffs(bits):
    out = []
    while bits:
        out.append(bits & 1)
        bits >>= 1
    return out


def to_bits(cs):
    return sum(1 << k for k, v in enumerate(cs) if v % 2)


def naive_mul(a, b):
    ca, cb = coeffs(a), coeffs(b)
    out = [0] * (len(ca) + len(cb))
    for i, x in enumerate(ca):
        for j, y in enumerate(cb):
            out[i + j] += x * y
    return to_bits(out)


def naive_divmod(a, b):
    """Long division on coefficient lists."""
    if b == 0:
        raise ZeroDivisionError
    r = coeffs(a)
    d = coeffs(b)
    q = [0] * max(len(r) - len(d) + 1, 0)
    for k in range(len(r) - len(d), -1, -1):
        if r[k + len(d) - 1] % 2:
            q[k] = 1
            for t, v in enumerate(d):
                r[k + t] = (r[k + t] + v) % 2
    return to_bits(q), to_bits(r)


def naive_gcd(a, b):
    while b:
        a, b = b, naive_divmod(a, b)[1]
    return a


def det(m):
    """Laplace expansion over Z2[c]; ``m`` is a list of lists of bitmasks."""
    n = len(m)
    if n == 0:
        return 1
    if n == 1:
        return m[0][0]
    total = 0
    for j in range(n):
        if m[0][j]:
            minor = [row[:j] + row[j + 1 :] for row in m[1:]]
            total ^= naive_mul(m[0][j], det(minor))
    return total


def determinantal_factors(m):
    """Invariant factors from gcds of k x k minors (d_k / d_{k-1})."""
    nr = len(m)
    nc = len(m[0]) if m else 0
    divisors = [1]
    for k in range(1, min(nr, nc) + 1):
        g = 0
        for rows in itertools.combinations(range(nr), k):
            for cols in itertools.combinations(range(nc), k):
                g = naive_gcd(g, det([[m[r][c] for c in cols] for r in rows]))
        if g == 0:
            break
        divisors.append(g)
    return [naive_divmod(divisors[k], divisors[k - 1])[0] for k in range(1, len(divisors))]


def gf2_rank(rows):
    """Rank of a 0/1 matrix given as a list of int row masks."""
    rank = 0
    rows = [r for r in rows if r]
    while rows:
        pivot = rows.pop()
        low = pivot & -pivot
        rows = [r ^ pivot if r & low else r for r in rows]
        rows = [r for r in rows if r]
        rank += 1
    return rank


def homology_at_c0(cx):
    """``{(i, j): dim}`` of the homology of ``C / c`` over GF(2).

    Only constant entries survive; they preserve j, so each j is separate.
    """
    out = {}
    for i, js in cx.jdeg.items():
        for j in set(js):
            cols = [k for k, x in enumerate(js) if x == j]
            n = len(cols)
            rk_out = _block_rank(cx, i, j, cols)
            prev = [k for k, x in enumerate(cx.jdeg.get(i - 1, [])) if x == j]
            rk_in = _block_rank(cx, i - 1, j, prev)
            dim = n - rk_out - rk_in
            if dim:
                out[(i, j)] = dim
    return out


def _block_rank(cx, i, j, cols):
    m = cx.differential.get(i)
    if m is None or not cols:
        return 0
    targets = [k for k, x in enumerate(cx.jdeg.get(i + 1, [])) if x == j]
    tpos = {t: n for n, t in enumerate(targets)}
    rows = []
    for c in cols:
        mask = 0
        for r in targets:
            if m.rows.get(r, {}).get(c, 0) & 1:
                mask |= 1 << tpos[r]
        rows.append(mask)
    return gf2_rank(rows)


def count_loops_brute(d, choice):
    """Loops after smoothing; ``choice[cid]`` is True for the A-smoothing.

    Walks the planar map directly: at a crossing with darts (a, b, c, e)
    counterclockwise, the A-smoothing opens a channel between the two
    corners swept when the overstrand turns counterclockwise, so its arcs
    hug the other two corners.
    """
    partner = {}
    for c in d.crossings.values():
        a, b, cc, e = c.darts
        if c.over == 0:  # overstrand a-cc sweeps corners (a, b) and (cc, e)
            pairs = ((b, cc), (e, a)) if choice[c.id] else ((a, b), (cc, e))
        else:  # overstrand b-e sweeps corners (b, cc) and (e, a)
            pairs = ((cc, e), (a, b)) if choice[c.id] else ((b, cc), (e, a))
        for x, y in pairs:
            partner[x], partner[y] = y, x
    seen = set()
    loops = 0
    for start in d.darts:
        if start in seen:
            continue
        loops += 1
        x = start
        while x not in seen:
            seen.add(x)
            y = d.alpha[x]
            seen.add(y)
            x = partner.get(y, y)
            if x == y:
                break
    return loops
