# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernels over GF(2)[c]; same contract as ``_pykernels``.

Word-sized operands take the C path; anything wider than 64 bits is handed
to the pure-Python routines.
"""

from libc.stdint cimport uint64_t

from khovanov_zc import _pykernels

IMPLEMENTATION = "cython"


cdef inline int _bitlen(uint64_t a) nogil:
    cdef int n = 0
    while a:
        a >>= 1
        n += 1
    return n


cdef inline uint64_t _clmul64(uint64_t a, uint64_t b) nogil:
    cdef uint64_t out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
    return out


cdef inline uint64_t _pmod64(uint64_t a, uint64_t b, uint64_t *quot) nogil:
    cdef int db = _bitlen(b) - 1
    cdef int da = _bitlen(a) - 1
    cdef uint64_t q = 0
    while a and da >= db:
        q |= (<uint64_t>1) << (da - db)
        a ^= b << (da - db)
        da = _bitlen(a) - 1
    quot[0] = q
    return a


def degree(a):
    return a.bit_length() - 1


cpdef object clmul(object a, object b):
    if a == 0 or b == 0:
        return 0
    if a.bit_length() + b.bit_length() <= 64:
        return _clmul64(<uint64_t>a, <uint64_t>b)
    return _pykernels.clmul(a, b)


cpdef tuple pdivmod(object a, object b):
    cdef uint64_t q = 0
    cdef uint64_t r
    if b == 0:
        raise ZeroDivisionError("polynomial division by zero")
    if a.bit_length() <= 64 and b.bit_length() <= 64:
        r = _pmod64(<uint64_t>a, <uint64_t>b, &q)
        return q, r
    return _pykernels.pdivmod(a, b)


def pgcd(a, b):
    while b:
        a, b = b, pdivmod(a, b)[1]
    return a


def sparse_matmul(dict a, dict b):
    cdef dict out = {}
    cdef dict acc
    cdef dict brow
    for i, row in a.items():
        acc = {}
        for k, x in (<dict>row).items():
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


cdef void _row_axpy(dict target, object factor, dict source):
    for j, v in source.items():
        w = target.get(j, 0) ^ (v if factor == 1 else clmul(factor, v))
        if w:
            target[j] = w
        else:
            del target[j]


cdef class _Sparse:
    cdef dict rows
    cdef dict cols

    def __init__(self, dict rows):
        self.rows = {}
        self.cols = {}
        for i, r in rows.items():
            if r:
                self.rows[i] = dict(r)
                for j in r:
                    self.cols.setdefault(j, set()).add(i)

    cdef void set_row(self, object i, dict new):
        cdef dict old = self.rows.get(i, {})
        for j in old:
            if j not in new:
                s = self.cols[j]
                s.discard(i)
                if not s:
                    del self.cols[j]
        for j in new:
            if j not in old:
                self.cols.setdefault(j, set()).add(i)
        if new:
            self.rows[i] = new
        else:
            self.rows.pop(i, None)


def invariant_factors(dict rows, ncols):
    return _pykernels._normalize_diagonal([v for _, _, v in eliminate(rows, ncols)])


def eliminate(dict rows, ncols):
    cdef _Sparse m = _Sparse(rows)
    cdef list diag = []
    cdef dict prow
    cdef dict new
    cdef bint moved
    cdef tuple best
    while m.rows:
        best = None
        for i in sorted(m.rows):
            for j, v in (<dict>m.rows[i]).items():
                key = (v.bit_length(), i, j)
                if best is None or key < best:
                    best = key
            if best is not None and best[0] == 1 and best[1] == i:
                break
        pi = best[1]
        pj = best[2]
        while True:
            p = m.rows[pi][pj]
            moved = False
            for i in sorted(m.cols.get(pj, ())):
                if i == pi:
                    continue
                q, r = pdivmod(m.rows[i][pj], p)
                new = dict(m.rows[i])
                _row_axpy(new, q, m.rows[pi])
                m.set_row(i, new)
                if r:
                    pi = i
                    moved = True
                    break
            if moved:
                continue
            prow = m.rows[pi]
            for j in sorted(prow):
                if j == pj:
                    continue
                r = pdivmod(prow[j], p)[1]
                new = dict(prow)
                if r:
                    new[j] = r
                    m.set_row(pi, new)
                    pj = j
                    moved = True
                    break
                del new[j]
                m.set_row(pi, new)
                prow = m.rows[pi]
            if moved:
                continue
            break
        diag.append((pi, pj, m.rows[pi][pj]))
        m.set_row(pi, {})
    return diag
