"""Exact arithmetic in the localized rings Z[1/N].

A :class:`RingTag` names the ring, a :class:`LocalizedScalar` is an element
of it, and :class:`ScalarMatrix` is a matrix whose entries all live in the
same ring. Two tags compare equal when they invert the same primes, since
Z[1/6] and Z[1/12] are the same subring of Q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence, Union

from sympy import factorint, primerange

from .errors import InputError, NonIntegerTrace, NotIdempotent, NotInvertible, ShapeMismatch, TagError, TagMismatch

Number = Union[int, Fraction]


@lru_cache(maxsize=None)
def _prime_support(n: int) -> frozenset[int]:
    return frozenset(factorint(n))


@dataclass(frozen=True, eq=False)
class RingTag:
    """The ring Z[1/N]; ``inverted_integer=None`` stands for all of Q."""

    inverted_integer: int | None
    prime_support: frozenset[int] = field(init=False)

    def __post_init__(self):
        n = self.inverted_integer
        if n is None:
            object.__setattr__(self, "prime_support", frozenset())
            return
        if isinstance(n, bool) or not isinstance(n, int):
            raise TagError(f"inverted integer must be an int, got {n!r}")
        if n <= 0:
            raise TagError(f"cannot invert {n}: the inverted integer must be positive")
        object.__setattr__(self, "prime_support", _prime_support(n))

    @classmethod
    def rationals(cls) -> "RingTag":
        return cls(None)

    @classmethod
    def inverting_factorial(cls, k: int) -> "RingTag":
        return cls(math.factorial(k))

    @property
    def is_field(self) -> bool:
        return self.inverted_integer is None

    def inverts(self, p: int) -> bool:
        return self.is_field or p in self.prime_support

    def contains(self, x: Number) -> bool:
        """True if the rational ``x`` lies in this subring of Q."""
        x = Fraction(x)
        return self.is_field or _strip(x.denominator, self.prime_support) == 1

    def is_unit(self, x: Number) -> bool:
        x = Fraction(x)
        if x == 0 or not self.contains(x):
            return False
        return self.is_field or _strip(abs(x.numerator), self.prime_support) == 1

    def embeds_into(self, other: "RingTag") -> bool:
        return other.is_field or (not self.is_field and self.prime_support <= other.prime_support)

    def __eq__(self, other):
        if not isinstance(other, RingTag):
            return NotImplemented
        return self.is_field == other.is_field and self.prime_support == other.prime_support

    def __hash__(self):
        return hash((self.is_field, self.prime_support))

    def __repr__(self):
        if self.is_field:
            return "RingTag(Q)"
        return f"RingTag(Z[1/{self.inverted_integer}])"

    def __str__(self):
        if self.is_field:
            return "Q"
        if self.inverted_integer == 1:
            return "Z"
        return f"Z[1/{self.inverted_integer}]"

    def to_json(self):
        return "Q" if self.is_field else self.inverted_integer


ZZ = RingTag(1)
QQ = RingTag.rationals()


def _strip(n: int, primes: Iterable[int]) -> int:
    """Remove from ``n`` every factor of the given primes."""
    for p in primes:
        while n % p == 0:
            n //= p
    return n


def uninvertible_primes(x: Number, tag: RingTag) -> list[int]:
    """Primes in the denominator of ``x`` that ``tag`` does not invert."""
    x = Fraction(x)
    if tag.is_field:
        return []
    rest = _strip(x.denominator, tag.prime_support)
    return sorted(factorint(rest)) if rest != 1 else []


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise TagError(f"not a rational number: {text!r}") from exc


def format_rational(x: Number) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class LocalizedScalar:
    """An element of Z[1/N]. The rational is stored reduced by :class:`Fraction`."""

    value: Fraction
    tag: RingTag

    def __post_init__(self):
        v = Fraction(self.value)
        object.__setattr__(self, "value", v)
        bad = uninvertible_primes(v, self.tag)
        if bad:
            raise TagError(f"{format_rational(v)} is not in {self.tag}: denominator prime(s) {bad}")

    @property
    def numerator(self) -> int:
        return self.value.numerator

    @property
    def denominator(self) -> int:
        return self.value.denominator

    def retag(self, tag: RingTag) -> "LocalizedScalar":
        if not self.tag.embeds_into(tag):
            raise TagMismatch(f"{self.tag} does not embed into {tag}")
        return LocalizedScalar(self.value, tag)

    def _coerce(self, other) -> Fraction:
        if isinstance(other, LocalizedScalar):
            if other.tag != self.tag:
                raise TagMismatch(f"{self.tag} vs {other.tag}")
            return other.value
        if isinstance(other, int):
            return Fraction(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return LocalizedScalar(self.value + o, self.tag)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return LocalizedScalar(self.value - o, self.tag)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return LocalizedScalar(o - self.value, self.tag)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return LocalizedScalar(self.value * o, self.tag)

    __rmul__ = __mul__

    def __neg__(self):
        return LocalizedScalar(-self.value, self.tag)

    def inverse(self) -> "LocalizedScalar":
        if not scalar_is_invertible(self):
            raise NotInvertible(f"{self} is not a unit of {self.tag}")
        return LocalizedScalar(1 / self.value, self.tag)

    def __truediv__(self, other):
        if isinstance(other, int):
            other = LocalizedScalar(Fraction(other), self.tag)
        if not isinstance(other, LocalizedScalar):
            return NotImplemented
        return self * other.inverse()

    def __eq__(self, other):
        if isinstance(other, LocalizedScalar):
            return self.tag == other.tag and self.value == other.value
        if isinstance(other, (int, Fraction)):
            return self.value == other
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.tag))

    def __str__(self):
        return format_rational(self.value)


def scalar_is_invertible(x: LocalizedScalar) -> bool:
    """Unit test in Z[1/N]: nonzero with numerator supported on the inverted primes."""
    return x.tag.is_unit(x.value)


def todd_denominator(m: int) -> int:
    """T_m = prod_p p^floor(m/(p-1)) over all primes p."""
    if m < 0:
        raise InputError("m must be non-negative")
    t = 1
    for p in primerange(2, m + 2):
        t *= p ** (m // (p - 1))
    return t


def lemma_arith_check(m: int, d: int, which: str) -> bool:
    """Check that m! (``which='factorial'``) or T_m (``which='todd'``) is a unit of Z[1/(2d)!]."""
    tag = RingTag.inverting_factorial(2 * d)
    if which == "factorial":
        n = math.factorial(m)
    elif which == "todd":
        n = todd_denominator(m)
    else:
        raise InputError(f"which must be 'factorial' or 'todd', got {which!r}")
    return scalar_is_invertible(LocalizedScalar(Fraction(n), tag))


# -- matrices -----------------------------------------------------------------


def _det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    a = [list(r) for r in rows]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            if a[r][c] != 0:
                f = a[r][c] / a[c][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


def _inverse(rows: Sequence[Sequence[Fraction]]) -> list[list[Fraction]] | None:
    n = len(rows)
    a = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return None
        a[c], a[piv] = a[piv], a[c]
        p = a[c][c]
        a[c] = [x / p for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [row[n:] for row in a]


class ScalarMatrix:
    """Dense matrix over one ring Z[1/N], stored as rows of Fractions."""

    __slots__ = ("_rows", "tag")

    def __init__(self, rows: Iterable[Iterable[Number | LocalizedScalar]], tag: RingTag):
        data = []
        for row in rows:
            data.append(tuple(_entry_value(x, tag) for x in row))
        if not data or not data[0]:
            raise ShapeMismatch("matrix must have at least one row and one column")
        if any(len(r) != len(data[0]) for r in data):
            raise ShapeMismatch("ragged matrix rows")
        for r in data:
            for x in r:
                bad = uninvertible_primes(x, tag)
                if bad:
                    raise TagError(f"entry {format_rational(x)} is not in {tag}")
        self._rows = tuple(data)
        self.tag = tag

    @classmethod
    def identity(cls, n: int, tag: RingTag) -> "ScalarMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], tag)

    @classmethod
    def zero(cls, rows: int, cols: int, tag: RingTag) -> "ScalarMatrix":
        return cls([[0] * cols for _ in range(rows)], tag)

    @property
    def rows(self) -> int:
        return len(self._rows)

    @property
    def cols(self) -> int:
        return len(self._rows[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def values(self) -> tuple[tuple[Fraction, ...], ...]:
        return self._rows

    def __getitem__(self, idx: tuple[int, int]) -> LocalizedScalar:
        r, c = idx
        return LocalizedScalar(self._rows[r][c], self.tag)

    def value(self, r: int, c: int) -> Fraction:
        return self._rows[r][c]

    def is_zero(self) -> bool:
        return all(x == 0 for row in self._rows for x in row)

    def _check_tag(self, other: "ScalarMatrix"):
        if self.tag != other.tag:
            raise TagMismatch(f"{self.tag} vs {other.tag}")

    def __matmul__(self, other: "ScalarMatrix") -> "ScalarMatrix":
        self._check_tag(other)
        if self.cols != other.rows:
            raise ShapeMismatch(f"cannot multiply {self.shape} by {other.shape}")
        cols = list(zip(*other._rows))
        return ScalarMatrix([[sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in cols] for r in self._rows], self.tag)

    def __add__(self, other: "ScalarMatrix") -> "ScalarMatrix":
        self._check_tag(other)
        if self.shape != other.shape:
            raise ShapeMismatch(f"cannot add {self.shape} and {other.shape}")
        return ScalarMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self._rows, other._rows)], self.tag)

    def __sub__(self, other: "ScalarMatrix") -> "ScalarMatrix":
        return self + (-other)

    def __neg__(self) -> "ScalarMatrix":
        return ScalarMatrix([[-a for a in r] for r in self._rows], self.tag)

    def scale(self, c: Number) -> "ScalarMatrix":
        return ScalarMatrix([[c * a for a in r] for r in self._rows], self.tag)

    def transpose(self) -> "ScalarMatrix":
        return ScalarMatrix(zip(*self._rows), self.tag)

    def trace(self) -> Fraction:
        if self.rows != self.cols:
            raise ShapeMismatch("trace of a non-square matrix")
        return sum((self._rows[i][i] for i in range(self.rows)), Fraction(0))

    def determinant(self) -> Fraction:
        if self.rows != self.cols:
            raise ShapeMismatch("determinant of a non-square matrix")
        return _det(self._rows)

    def inverse(self) -> "ScalarMatrix | None":
        """Inverse over the tag ring, or None when the determinant is not a unit."""
        if self.rows != self.cols:
            raise ShapeMismatch("inverse of a non-square matrix")
        if not self.tag.is_unit(self.determinant()):
            return None
        return ScalarMatrix(_inverse(self._rows), self.tag)

    def retag(self, tag: RingTag) -> "ScalarMatrix":
        if not self.tag.embeds_into(tag):
            raise TagMismatch(f"{self.tag} does not embed into {tag}")
        return ScalarMatrix(self._rows, tag)

    def __eq__(self, other):
        if not isinstance(other, ScalarMatrix):
            return NotImplemented
        return self.tag == other.tag and self._rows == other._rows

    def __hash__(self):
        return hash((self._rows, self.tag))

    def __repr__(self):
        body = "; ".join(" ".join(format_rational(x) for x in r) for r in self._rows)
        return f"ScalarMatrix([{body}], {self.tag})"

    def to_json(self) -> list[list[str]]:
        return [[format_rational(x) for x in r] for r in self._rows]

    @classmethod
    def from_json(cls, data, tag: RingTag) -> "ScalarMatrix":
        return cls([[parse_rational(x) for x in r] for r in data], tag)


def _entry_value(x, tag: RingTag) -> Fraction:
    if isinstance(x, LocalizedScalar):
        if x.tag != tag:
            raise TagMismatch(f"entry carries {x.tag}, matrix is over {tag}")
        return x.value
    if isinstance(x, float):
        raise TypeError("floating point entries are not allowed")
    return Fraction(x)


# -- idempotent splitting -----------------------------------------------------


def _integer_row_basis(rows: list[list[int]]) -> list[list[int]]:
    """Z-basis (row echelon form) of the lattice spanned by integer rows."""
    rows = [r[:] for r in rows if any(r)]
    basis = []
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        live = [r for r in rows if r[c] != 0]
        rest = [r for r in rows if r[c] == 0]
        # Euclid on column c with row operations.
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[c]))
            piv = live[0]
            nxt = [piv]
            for r in live[1:]:
                q = r[c] // piv[c]
                r = [a - q * b for a, b in zip(r, piv)]
                (nxt if r[c] != 0 else rest).append(r)
            live = nxt
        if live:
            piv = live[0]
            if piv[c] < 0:
                piv = [-a for a in piv]
            basis.append(piv)
        rows = [r for r in rest if any(r)]
    return basis


@dataclass(frozen=True)
class IdempotentSplit:
    """Image of an idempotent E as a free module: ``basis @ coordinates == E``."""

    rank: int
    image_basis: list[tuple[LocalizedScalar, ...]]
    coordinates: ScalarMatrix | None

    def basis_matrix(self) -> ScalarMatrix | None:
        if not self.rank:
            return None
        tag = self.image_basis[0][0].tag
        return ScalarMatrix(zip(*[[x.value for x in v] for v in self.image_basis]), tag)


def idempotent_split(E: ScalarMatrix) -> IdempotentSplit:
    """Split an idempotent matrix over Z[1/N] into a free image with explicit basis."""
    if E.rows != E.cols:
        raise ShapeMismatch("idempotent_split needs a square matrix")
    if E @ E != E:
        raise NotIdempotent("E @ E != E")
    tr = E.trace()
    if tr.denominator != 1:
        raise NonIntegerTrace(f"trace {tr} of an idempotent is not an integer")
    rank = int(tr)
    tag = E.tag
    n = E.rows
    if rank == 0:
        if not E.is_zero():
            raise NonIntegerTrace("trace 0 but E is nonzero")
        return IdempotentSplit(0, [], None)

    # Scale by a unit of the tag ring to get an integral matrix with the same image.
    scale = math.lcm(*(x.denominator for row in E.values() for x in row))
    cols = [[int(E.value(r, c) * scale) for r in range(n)] for c in range(n)]
    basis = _integer_row_basis(cols)
    if len(basis) != rank:
        raise NonIntegerTrace(f"image has rank {len(basis)} but trace is {rank}")
    normalized = []
    for v in basis:
        g = math.gcd(*v)
        unit = g if tag.is_field else g // _strip(g, tag.prime_support)
        normalized.append([Fraction(a, unit) for a in v])

    B = ScalarMatrix(zip(*normalized), tag)
    if E @ B != B:
        raise NonIntegerTrace("E does not fix its image basis")
    # Coordinates C with B @ C = E: B has full column rank, solve on a pivot minor.
    pivots = _pivot_rows(B)
    minor_inv = _inverse([B.values()[r] for r in pivots])
    rhs = [E.values()[r] for r in pivots]
    C = [[sum((minor_inv[i][k] * rhs[k][j] for k in range(rank)), Fraction(0)) for j in range(n)] for i in range(rank)]
    if any(uninvertible_primes(x, tag) for row in C for x in row):
        raise NonIntegerTrace("image coordinates leave the tag ring")
    coords = ScalarMatrix(C, tag)
    if B @ coords != E:
        raise NonIntegerTrace("basis and coordinates do not reproduce E")
    image_basis = [tuple(LocalizedScalar(a, tag) for a in v) for v in normalized]
    return IdempotentSplit(rank, image_basis, coords)


def _pivot_rows(B: ScalarMatrix) -> list[int]:
    """Indices of rows forming an invertible square minor of a full-column-rank matrix."""
    chosen: list[list[Fraction]] = []
    picked = []
    for i, row in enumerate(B.values()):
        trial = chosen + [list(row)]
        if _rank(trial) == len(trial):
            chosen = trial
            picked.append(i)
        if len(picked) == B.cols:
            break
    return picked


def _rank(rows: list[list[Fraction]]) -> int:
    a = [r[:] for r in rows]
    rank = 0
    ncols = len(a[0]) if a else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(a)) if a[r][c] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for r in range(rank + 1, len(a)):
            if a[r][c] != 0:
                f = a[r][c] / a[rank][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[rank])]
        rank += 1
    return rank
