"""Brauer classes of Q through their local invariants.

A class is a finite table ``place -> invariant in Q/Z`` whose entries sum
to zero, with the real invariant in {0, 1/2}. Quaternion symbols are built
from Hilbert symbols. :class:`CyclicClass` is a stand-in for central simple
algebras over fields other than Q: only the group law of Z/e is modeled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Mapping, Union

from sympy import factorint, isprime, legendre_symbol

from .arith import format_rational, parse_rational
from .errors import InputError

Rational = Union[int, Fraction]


@total_ordering
@dataclass(frozen=True)
class Place:
    """A place of Q: ``prime=None`` is the real place."""

    prime: int | None = None

    def __post_init__(self):
        if self.prime is not None and not isprime(self.prime):
            raise InputError(f"{self.prime} is not prime")

    @property
    def is_real(self) -> bool:
        return self.prime is None

    def __lt__(self, other: "Place"):
        return self._key() < other._key()

    def _key(self):
        return (0, 0) if self.prime is None else (1, self.prime)

    def __str__(self):
        return "inf" if self.prime is None else str(self.prime)

    def __repr__(self):
        return f"Place({self})"

    @classmethod
    def parse(cls, text) -> "Place":
        s = str(text).strip().lower()
        if s in ("inf", "infinity", "oo", "r", "real"):
            return REAL
        try:
            return cls(int(s))
        except ValueError as exc:
            raise InputError(f"not a place: {text!r}") from exc


REAL = Place(None)


def _as_place(v) -> Place:
    if isinstance(v, Place):
        return v
    if v is None:
        return REAL
    return Place(v)


def squarefree_part(x: Rational) -> int:
    """Signed squarefree integer representing x modulo squares."""
    x = Fraction(x)
    if x == 0:
        raise InputError("0 has no square class")
    n = x.numerator * x.denominator
    sign = -1 if n < 0 else 1
    out = 1
    for p, e in factorint(abs(n)).items():
        if e % 2:
            out *= p
    return sign * out


def _valuation(n: int, p: int) -> tuple[int, int]:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def hilbert_symbol(a: Rational, b: Rational, v) -> int:
    """(a, b)_v: +1 iff z^2 = a x^2 + b y^2 has a nonzero solution over Q_v."""
    place = _as_place(v)
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise InputError("Hilbert symbol of zero")
    if place.is_real:
        return -1 if a < 0 and b < 0 else 1
    # a and a*den^2 share a square class
    A = a.numerator * a.denominator
    B = b.numerator * b.denominator
    p = place.prime
    alpha, u = _valuation(A, p)
    beta, w = _valuation(B, p)
    if p != 2:
        eps = (p - 1) // 2
        sign = (-1) ** (alpha * beta * eps)
        lu = legendre_symbol(u % p, p)
        lw = legendre_symbol(w % p, p)
        return sign * lu ** beta * lw ** alpha
    def e(x):
        return ((x - 1) // 2) % 2

    def om(x):
        return ((x * x - 1) // 8) % 2

    exponent = e(u) * e(w) + alpha * om(w) + beta * om(u)
    return -1 if exponent % 2 else 1


def relevant_places(values: Iterable[Rational]) -> list[Place]:
    """The real place, 2, and every prime dividing a numerator or denominator."""
    primes = {2}
    for x in values:
        x = Fraction(x)
        primes.update(factorint(abs(x.numerator)))
        primes.update(factorint(x.denominator))
    primes.discard(1)
    return [REAL] + [Place(p) for p in sorted(primes)]


def _reduce(x: Fraction) -> Fraction:
    return x - math.floor(x)


@dataclass(frozen=True)
class BrauerClass:
    """Element of Br(Q), stored as its nonzero local invariants."""

    invariants: Mapping[Place, Fraction] = field(default_factory=dict)
    provenance: str | None = field(default=None, compare=False)

    def __post_init__(self):
        clean = {}
        for v, x in dict(self.invariants).items():
            place = _as_place(v)
            r = _reduce(Fraction(x))
            if r:
                clean[place] = r
        if REAL in clean and clean[REAL] != Fraction(1, 2):
            raise InputError(f"real invariant must be 0 or 1/2, got {clean[REAL]}")
        if _reduce(sum(clean.values(), Fraction(0))) != 0:
            raise InputError("local invariants must sum to 0 mod 1")
        object.__setattr__(self, "invariants", dict(sorted(clean.items())))

    def __hash__(self):
        return hash(tuple(self.invariants.items()))

    @classmethod
    def trivial(cls) -> "BrauerClass":
        return cls({})

    def tensor(self, other: "BrauerClass") -> "BrauerClass":
        if not isinstance(other, BrauerClass):
            raise InputError("cannot tensor a Brauer class of Q with a class over another field")
        acc = dict(self.invariants)
        for v, x in other.invariants.items():
            acc[v] = acc.get(v, Fraction(0)) + x
        return BrauerClass(acc)

    def power(self, i: int) -> "BrauerClass":
        return BrauerClass({v: x * i for v, x in self.invariants.items()})

    def inverse(self) -> "BrauerClass":
        return self.power(-1)

    def order(self) -> int:
        return math.lcm(1, *(x.denominator for x in self.invariants.values()))

    def is_trivial(self) -> bool:
        return not self.invariants

    def ramified_places(self) -> list[Place]:
        return list(self.invariants)

    def to_json(self) -> dict:
        return {"inv": {str(v): format_rational(x) for v, x in self.invariants.items()}}

    @classmethod
    def from_json(cls, data: Mapping) -> "BrauerClass":
        table = data.get("inv", data)
        return cls({Place.parse(k): parse_rational(x) for k, x in table.items()})

    def __str__(self):
        if self.provenance:
            return self.provenance
        if not self.invariants:
            return "0"
        return "{" + ", ".join(f"{v}: {format_rational(x)}" for v, x in self.invariants.items()) + "}"


def from_quaternion(a: Rational, b: Rational) -> BrauerClass:
    """Class of the quaternion algebra (a, b)_Q."""
    a, b = Fraction(a), Fraction(b)
    inv = {v: Fraction(1, 2) for v in relevant_places([a, b]) if hilbert_symbol(a, b, v) == -1}
    return BrauerClass(inv, provenance=f"({format_rational(a)},{format_rational(b)})")


@dataclass(frozen=True)
class CyclicClass:
    """Abstract class ``g^exponent`` in a cyclic group of order ``modulus``.

    Used to express Severi-Brauer examples over fields whose Brauer group is
    not modeled; the only arithmetic is the group law of Z/modulus.
    """

    modulus: int
    exponent: int = 1

    def __post_init__(self):
        if self.modulus < 1:
            raise InputError("cyclic class needs a positive modulus")
        object.__setattr__(self, "exponent", self.exponent % self.modulus)

    def tensor(self, other: "CyclicClass") -> "CyclicClass":
        if not isinstance(other, CyclicClass) or other.modulus != self.modulus:
            raise InputError("abstract classes can only be combined within one cyclic group")
        return CyclicClass(self.modulus, self.exponent + other.exponent)

    def power(self, i: int) -> "CyclicClass":
        return CyclicClass(self.modulus, self.exponent * i)

    def inverse(self) -> "CyclicClass":
        return self.power(-1)

    def order(self) -> int:
        return self.modulus // math.gcd(self.modulus, self.exponent)

    def is_trivial(self) -> bool:
        return self.exponent == 0

    def to_json(self) -> dict:
        return {"order": self.modulus, "exponent": self.exponent}

    def __str__(self):
        return f"g^{self.exponent} in Z/{self.modulus}"


def abstract_class(order: int) -> CyclicClass:
    """A generator of a cyclic group of the given order."""
    return CyclicClass(order, 1)


AnyClass = Union[BrauerClass, CyclicClass]


def tensor(x: AnyClass, y: AnyClass) -> AnyClass:
    return x.tensor(y)


def power(x: AnyClass, i: int) -> AnyClass:
    return x.power(i)


def order(x: AnyClass) -> int:
    return x.order()


def is_trivial(x: AnyClass) -> bool:
    return x.is_trivial()


def parse_class(text: str) -> BrauerClass:
    """Parse ``"(a,b)"`` as a quaternion symbol or ``"inf:1/2,2:1/2"`` as an invariant table."""
    s = text.strip()
    if s.startswith("(") and s.endswith(")"):
        parts = [p for p in s[1:-1].split(",")]
        if len(parts) != 2:
            raise InputError(f"quaternion symbol needs two entries: {text!r}")
        a, b = (parse_rational(p) for p in parts)
        if a == 0 or b == 0:
            raise InputError("quaternion symbol entries must be nonzero")
        return from_quaternion(a, b)
    if s in ("0", ""):
        return BrauerClass.trivial()
    table = {}
    for item in s.split(","):
        if ":" not in item:
            raise InputError(f"expected place:invariant, got {item!r}")
        k, x = item.split(":", 1)
        table[Place.parse(k)] = parse_rational(x)
    return BrauerClass(table)
