"""Sparse matrices over Z2[c] with int-bitmask entries."""

from __future__ import annotations

from khovanov_zc import kernels
from khovanov_zc.poly_gf2 import Polynomial, exponent_list, render


class SparseMatrix:
    """``nrows x ncols`` matrix stored as ``{row: {col: bits}}``.

    Columns index the source, rows the target, so ``(A @ B)`` composes maps
    the usual way.  Instances are treated as immutable once built.
    """

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows: dict | None = None):
        self.nrows = nrows
        self.ncols = ncols
        self.rows = {i: dict(r) for i, r in (rows or {}).items() if r}

    @classmethod
    def identity(cls, n: int) -> SparseMatrix:
        return cls(n, n, {i: {i: 1} for i in range(n)})

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> SparseMatrix:
        return cls(nrows, ncols)

    @classmethod
    def from_dense(cls, dense) -> SparseMatrix:
        rows = {}
        ncols = len(dense[0]) if dense else 0
        for i, row in enumerate(dense):
            r = {}
            for j, v in enumerate(row):
                b = v.bits if isinstance(v, Polynomial) else int(v)
                if b:
                    r[j] = b
            if r:
                rows[i] = r
        return cls(len(dense), ncols, rows)

    @classmethod
    def from_triplets(cls, nrows: int, ncols: int, triplets) -> SparseMatrix:
        rows: dict = {}
        for i, j, v in triplets:
            b = v.bits if isinstance(v, Polynomial) else int(v)
            r = rows.setdefault(i, {})
            w = r.get(j, 0) ^ b
            if w:
                r[j] = w
            else:
                r.pop(j, None)
        return cls(nrows, ncols, rows)

    def get(self, i: int, j: int) -> Polynomial:
        return Polynomial(self.rows.get(i, {}).get(j, 0))

    def bits(self, i: int, j: int) -> int:
        return self.rows.get(i, {}).get(j, 0)

    def entries(self):
        """Nonzero entries as ``(row, col, bits)``, in row-major order."""
        for i in sorted(self.rows):
            r = self.rows[i]
            for j in sorted(r):
                yield i, j, r[j]

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows.values())

    def is_zero(self) -> bool:
        return not self.rows

    def __matmul__(self, other: SparseMatrix) -> SparseMatrix:
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        return SparseMatrix(self.nrows, other.ncols, kernels.sparse_matmul(self.rows, other.rows))

    def __add__(self, other: SparseMatrix) -> SparseMatrix:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        rows = {i: dict(r) for i, r in self.rows.items()}
        for i, r in other.rows.items():
            acc = rows.setdefault(i, {})
            for j, v in r.items():
                w = acc.get(j, 0) ^ v
                if w:
                    acc[j] = w
                else:
                    del acc[j]
        return SparseMatrix(self.nrows, self.ncols, rows)

    __sub__ = __add__

    def scale(self, bits: int) -> SparseMatrix:
        if bits == 0:
            return SparseMatrix(self.nrows, self.ncols)
        return SparseMatrix(
            self.nrows,
            self.ncols,
            {i: {j: kernels.clmul(v, bits) for j, v in r.items()} for i, r in self.rows.items()},
        )

    def mod_c(self) -> SparseMatrix:
        """Reduction modulo ``c`` (keep constant terms)."""
        return SparseMatrix(
            self.nrows,
            self.ncols,
            {i: {j: 1 for j, v in r.items() if v & 1} for i, r in self.rows.items()},
        )

    def transpose(self) -> SparseMatrix:
        rows: dict = {}
        for i, r in self.rows.items():
            for j, v in r.items():
                rows.setdefault(j, {})[i] = v
        return SparseMatrix(self.ncols, self.nrows, rows)

    def submatrix(self, row_idx, col_idx) -> SparseMatrix:
        rpos = {r: k for k, r in enumerate(row_idx)}
        cpos = {c: k for k, c in enumerate(col_idx)}
        rows = {}
        for i, r in self.rows.items():
            if i in rpos:
                sub = {cpos[j]: v for j, v in r.items() if j in cpos}
                if sub:
                    rows[rpos[i]] = sub
        return SparseMatrix(len(row_idx), len(col_idx), rows)

    def to_dense(self) -> list[list[Polynomial]]:
        return [[self.get(i, j) for j in range(self.ncols)] for i in range(self.nrows)]

    def to_triplets(self) -> list:
        """JSON form: ``[[row, col, [exponents]], ...]``."""
        return [[i, j, exponent_list(v)] for i, j, v in self.entries()]

    def render(self) -> str:
        cells = [[render(self.bits(i, j)) for j in range(self.ncols)] for i in range(self.nrows)]
        width = max((len(c) for row in cells for c in row), default=1)
        return "\n".join("[ " + "  ".join(c.rjust(width) for c in row) + " ]" for row in cells)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __repr__(self) -> str:
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz()})"


def invariant_factors(m: SparseMatrix) -> list[int]:
    """Nonzero Smith invariant factors of ``m`` as bitmasks, in divisibility order."""
    return kernels.invariant_factors({i: dict(r) for i, r in m.rows.items()}, m.ncols)
