"""The coefficient ring Z2[c]."""

from __future__ import annotations

from khovanov_zc import kernels


class Polynomial:
    """Immutable element of Z2[c].

    Stored as an int bitmask (bit ``k`` is the coefficient of ``c**k``), which
    is the canonical dense bit sequence: no trailing zeros, and zero is the
    empty mask.
    """

    __slots__ = ("_bits",)

    def __init__(self, bits: int = 0):
        if bits < 0:
            raise ValueError("bitmask must be nonnegative")
        object.__setattr__(self, "_bits", int(bits))

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    @classmethod
    def from_coefficients(cls, coeffs) -> Polynomial:
        bits = 0
        for k, a in enumerate(coeffs):
            if a % 2:
                bits |= 1 << k
        return cls(bits)

    @classmethod
    def from_exponents(cls, exps) -> Polynomial:
        bits = 0
        for k in exps:
            bits ^= 1 << k
        return cls(bits)

    @classmethod
    def monomial(cls, k: int) -> Polynomial:
        return cls(1 << k)

    @property
    def bits(self) -> int:
        return self._bits

    @property
    def coefficients(self) -> tuple[int, ...]:
        return tuple((self._bits >> k) & 1 for k in range(self._bits.bit_length()))

    def exponents(self) -> list[int]:
        return [k for k in range(self._bits.bit_length()) if (self._bits >> k) & 1]

    @property
    def degree(self) -> float | int:
        """Degree; ``-inf`` for the zero polynomial."""
        if not self._bits:
            return float("-inf")
        return self._bits.bit_length() - 1

    def is_zero(self) -> bool:
        return self._bits == 0

    def is_unit(self) -> bool:
        return self._bits == 1

    def is_monomial(self) -> bool:
        return self._bits != 0 and self._bits & (self._bits - 1) == 0

    def __add__(self, other: Polynomial) -> Polynomial:
        return Polynomial(self._bits ^ _bits_of(other))

    __radd__ = __add__
    __sub__ = __add__
    __rsub__ = __add__

    def __neg__(self) -> Polynomial:
        return self

    def __mul__(self, other: Polynomial) -> Polynomial:
        return Polynomial(kernels.clmul(self._bits, _bits_of(other)))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Polynomial:
        out, base = 1, self._bits
        while n:
            if n & 1:
                out = kernels.clmul(out, base)
            base = kernels.clmul(base, base)
            n >>= 1
        return Polynomial(out)

    def __divmod__(self, other: Polynomial) -> tuple[Polynomial, Polynomial]:
        q, r = kernels.pdivmod(self._bits, _bits_of(other))
        return Polynomial(q), Polynomial(r)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __call__(self, value: int) -> int:
        """Evaluate at ``c = value`` in GF(2)."""
        if value % 2 == 0:
            return self._bits & 1
        return bin(self._bits).count("1") % 2

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self._bits == other._bits
        if isinstance(other, int):
            return other in (0, 1) and self._bits == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("Polynomial", self._bits))

    def __bool__(self) -> bool:
        return bool(self._bits)

    def __repr__(self) -> str:
        return f"Polynomial({self})"

    def __str__(self) -> str:
        return render(self._bits)


def _bits_of(x) -> int:
    if isinstance(x, Polynomial):
        return x.bits
    if isinstance(x, int):
        return x & 1
    raise TypeError(f"not a Z2[c] element: {x!r}")


ZERO = Polynomial(0)
ONE = Polynomial(1)
C = Polynomial(2)


def add(p: Polynomial, q: Polynomial) -> Polynomial:
    return p + q


def mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q


def poly_divmod(p: Polynomial, q: Polynomial) -> tuple[Polynomial, Polynomial]:
    """Euclidean division; raises ``ZeroDivisionError`` when ``q`` is zero."""
    return divmod(p, q)


def render(bits: int) -> str:
    """Text form, highest power first: ``c^2 + c + 1``; zero renders as ``0``."""
    if not bits:
        return "0"
    terms = []
    for k in range(bits.bit_length() - 1, -1, -1):
        if (bits >> k) & 1:
            terms.append("1" if k == 0 else "c" if k == 1 else f"c^{k}")
    return " + ".join(terms)


def exponent_list(bits: int) -> list[int]:
    """Compact JSON form: ascending exponents, e.g. ``[0, 2]`` for ``c^2 + 1``."""
    return [k for k in range(bits.bit_length()) if (bits >> k) & 1]


def from_exponent_list(exps) -> int:
    bits = 0
    for k in exps:
        bits ^= 1 << int(k)
    return bits
