"""Arithmetic over GF(2^m) and incremental row reduction.

Field elements are plain ints in [0, 2^m); ``GF`` holds the log/antilog
tables. ``FieldElement`` wraps an int with operators for callers that want
them, but the hot paths in :class:`FieldMatrix` work on raw ints.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache

# Primitive polynomials, bit i = coefficient of x^i. Fixed so that runs are
# bit-reproducible across machines.
PRIMITIVE_POLYS = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1011011,
    7: 0b10000011,
    8: 0x11D,      # x^8 + x^4 + x^3 + x^2 + 1
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1002D,   # x^16 + x^5 + x^3 + x^2 + 1
}

DEFAULT_M = 16


class GF:
    """GF(2^m) with exp/log tables built from a primitive polynomial."""

    def __init__(self, m: int = DEFAULT_M):
        if m not in PRIMITIVE_POLYS:
            raise ValueError(f"unsupported field exponent m={m}")
        self.m = m
        self.order = 1 << m
        self.poly = PRIMITIVE_POLYS[m]
        size = self.order - 1
        exp = [0] * (2 * size)
        log = [0] * self.order
        x = 1
        for i in range(size):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & self.order:
                x ^= self.poly
        if x != 1:
            raise ValueError(f"polynomial {self.poly:#x} is not primitive")
        exp[size:] = exp[:size]
        self.exp = exp
        self.log = log
        self._size = size

    def __repr__(self):
        return f"GF(2^{self.m})"

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self.exp[self.log[a] + self.log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return self.exp[self._size - self.log[a]]

    def div(self, a: int, b: int) -> int:
        if b == 0:
            raise ZeroDivisionError("division by 0")
        if a == 0:
            return 0
        return self.exp[self.log[a] - self.log[b] + self._size]

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 0 if e > 0 else 1
        return self.exp[(self.log[a] * e) % self._size]

    def random_nonzero(self, rng: random.Random) -> int:
        return rng.randrange(1, self.order)


@lru_cache(maxsize=None)
def get_field(m: int = DEFAULT_M) -> GF:
    return GF(m)


class FieldElement:
    __slots__ = ("value", "field")

    def __init__(self, value: int, field: GF | None = None):
        field = field or get_field()
        if not 0 <= value < field.order:
            raise ValueError(f"{value} is not an element of {field}")
        self.value = value
        self.field = field

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field.m != self.field.m:
                raise TypeError("elements from different fields")
            return other.value
        return NotImplemented

    def __add__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return FieldElement(self.value ^ v, self.field)

    __sub__ = __add__

    def __neg__(self):
        return self

    def __mul__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return FieldElement(self.field.mul(self.value, v), self.field)

    def __truediv__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return FieldElement(self.field.div(self.value, v), self.field)

    def inverse(self) -> FieldElement:
        return FieldElement(self.field.inv(self.value), self.field)

    def __eq__(self, other):
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.value == other.value and self.field.m == other.field.m

    def __hash__(self):
        return hash((self.value, self.field.m))

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"FieldElement({self.value:#x}, m={self.field.m})"


@dataclass(frozen=True)
class CodedVector:
    """Coefficient vector of one coded packet, coordinate j <-> packet j+1."""

    coefficients: tuple[int, ...]

    @property
    def support(self) -> frozenset[int]:
        return frozenset(j + 1 for j, c in enumerate(self.coefficients) if c)


def random_coded_vector(m_set, k: int, rng: random.Random, field: GF | None = None) -> CodedVector:
    """Random nonzero coefficients on ``m_set`` (1-based packets), zero elsewhere."""
    field = field or get_field()
    m_set = set(m_set)
    if not m_set:
        raise ValueError("coding set must be non-empty")
    if not all(1 <= p <= k for p in m_set):
        raise ValueError(f"coding set {sorted(m_set)} not within 1..{k}")
    coeffs = [0] * k
    for p in sorted(m_set):
        coeffs[p - 1] = field.random_nonzero(rng)
    return CodedVector(tuple(coeffs))


def ones_vector(m_set, k: int) -> CodedVector:
    coeffs = [0] * k
    for p in m_set:
        coeffs[p - 1] = 1
    return CodedVector(tuple(coeffs))


class FieldMatrix:
    """Row space kept in reduced row-echelon form.

    Each stored row is normalised so its pivot entry is 1 and every other
    row is zero in that pivot column. Columns are 0-based here.
    """

    def __init__(self, width: int, field: GF | None = None):
        self.width = width
        self.field = field or get_field()
        self.rows: list[list[int]] = []
        self.pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.rows)

    def copy(self) -> FieldMatrix:
        other = FieldMatrix.__new__(FieldMatrix)
        other.width = self.width
        other.field = self.field
        other.rows = [r[:] for r in self.rows]
        other.pivots = self.pivots[:]
        return other

    def reduce(self, v) -> list[int]:
        """Remainder of ``v`` after eliminating every pivot column."""
        if len(v) != self.width:
            raise ValueError(f"vector of length {len(v)} for width {self.width}")
        mul = self.field.mul
        v = list(v)
        for row, piv in zip(self.rows, self.pivots):
            c = v[piv]
            if c:
                for j, x in enumerate(row):
                    if x:
                        v[j] ^= mul(c, x)
        return v

    def insert(self, v) -> bool:
        """Add ``v`` to the span. Returns True iff the rank went up."""
        r = self.reduce(v)
        piv = next((j for j, x in enumerate(r) if x), None)
        if piv is None:
            return False
        f = self.field
        inv = f.inv(r[piv])
        r = [f.mul(inv, x) if x else 0 for x in r]
        # clear the new pivot column from existing rows
        for row in self.rows:
            c = row[piv]
            if c:
                for j, x in enumerate(r):
                    if x:
                        row[j] ^= f.mul(c, x)
        self.rows.append(r)
        self.pivots.append(piv)
        return True

    def contains(self, v) -> bool:
        return not any(self.reduce(v))

    def contains_unit(self, col: int) -> bool:
        """Whether the unit vector at 0-based ``col`` lies in the row span."""
        if not 0 <= col < self.width:
            raise IndexError(f"column {col} outside 0..{self.width - 1}")
        e = [0] * self.width
        e[col] = 1
        return self.contains(e)


def naive_rank(vectors, width: int, field: GF | None = None) -> int:
    """One-shot Gaussian elimination; independent of :class:`FieldMatrix`."""
    f = field or get_field()
    m = [list(v) for v in vectors]
    rank = 0
    for col in range(width):
        pivot = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for i in range(rank + 1, len(m)):
            if m[i][col]:
                factor = f.div(m[i][col], m[rank][col])
                m[i] = [a ^ f.mul(factor, b) for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank
