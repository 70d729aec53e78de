"""Universal Chern character and Todd polynomials in formal Chern classes.

Polynomials carry an explicit truncation degree ``D``: every monomial of
weight above ``D`` is dropped, and arithmetic between polynomials with
different ``D`` raises :class:`TruncationMismatch`.

Both universal polynomials come out of the power-sum basis. The numerator
of the m-th Chern character term is the m-th power sum of the Chern roots,
rewritten in Chern classes with Newton's identities. The Todd class is
``exp(sum_k a_k p_k)`` where ``log(x / (1 - e^-x)) = sum_k a_k x^k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .errors import InputError, TruncationMismatch


@dataclass(frozen=True, order=True)
class Var:
    """A graded generator: ``c3`` has weight 3, roots and hyperplane classes weight 1."""

    name: str
    weight: int = 1

    def __str__(self):
        return self.name


def chern_var(i: int) -> Var:
    if i < 1:
        raise InputError("Chern class index must be >= 1")
    return Var(f"c{i}", i)


@dataclass(frozen=True, order=True)
class ClassMonomial:
    """Product of generators, stored as sorted ``(var, multiplicity)`` pairs."""

    exponents: tuple[tuple[Var, int], ...] = ()

    @classmethod
    def of(cls, powers: Mapping[Var, int]) -> "ClassMonomial":
        return cls(tuple(sorted((v, e) for v, e in powers.items() if e)))

    @property
    def weight(self) -> int:
        return sum(v.weight * e for v, e in self.exponents)

    def degree_in(self, v: Var) -> int:
        for w, e in self.exponents:
            if w == v:
                return e
        return 0

    def __mul__(self, other: "ClassMonomial") -> "ClassMonomial":
        if not self.exponents:
            return other
        if not other.exponents:
            return self
        acc = dict(self.exponents)
        for v, e in other.exponents:
            acc[v] = acc.get(v, 0) + e
        return ClassMonomial.of(acc)

    def __str__(self):
        if not self.exponents:
            return "1"
        return "*".join(v.name if e == 1 else f"{v.name}^{e}" for v, e in self.exponents)


ONE = ClassMonomial()


def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class GradedClassPolynomial:
    """Truncated graded polynomial with exact rational coefficients."""

    __slots__ = ("terms", "truncation")

    def __init__(self, terms: Mapping[ClassMonomial, Fraction | int] | None = None, truncation: int = 0):
        if truncation < 0:
            raise InputError("truncation degree must be non-negative")
        self.truncation = truncation
        self.terms: dict[ClassMonomial, Fraction] = {}
        for mono, c in (terms or {}).items():
            c = Fraction(c)
            if c and mono.weight <= truncation:
                self.terms[mono] = self.terms.get(mono, Fraction(0)) + c
        self.terms = {m: c for m, c in self.terms.items() if c}

    # constructors
    @classmethod
    def constant(cls, c, truncation: int) -> "GradedClassPolynomial":
        return cls({ONE: Fraction(c)}, truncation)

    @classmethod
    def generator(cls, v: Var, truncation: int) -> "GradedClassPolynomial":
        return cls({ClassMonomial(((v, 1),)): Fraction(1)}, truncation)

    @classmethod
    def chern(cls, i: int, truncation: int) -> "GradedClassPolynomial":
        return cls.generator(chern_var(i), truncation)

    # structure
    def _check(self, other: "GradedClassPolynomial"):
        if self.truncation != other.truncation:
            raise TruncationMismatch(f"truncation {self.truncation} vs {other.truncation}")

    def _lift(self, other) -> "GradedClassPolynomial":
        if isinstance(other, GradedClassPolynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return GradedClassPolynomial.constant(other, self.truncation)
        return NotImplemented

    def is_zero(self) -> bool:
        return not self.terms

    def constant_term(self) -> Fraction:
        return self.terms.get(ONE, Fraction(0))

    def homogeneous_part(self, k: int) -> "GradedClassPolynomial":
        return GradedClassPolynomial({m: c for m, c in self.terms.items() if m.weight == k}, self.truncation)

    def is_homogeneous(self, k: int) -> bool:
        return all(m.weight == k for m in self.terms)

    def variables(self) -> set[Var]:
        return {v for m in self.terms for v, _ in m.exponents}

    def retruncate(self, truncation: int) -> "GradedClassPolynomial":
        return GradedClassPolynomial(self.terms, truncation)

    def denominator_lcm(self) -> int:
        return math.lcm(1, *(c.denominator for c in self.terms.values()))

    # arithmetic
    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        acc = dict(self.terms)
        for m, c in other.terms.items():
            acc[m] = acc.get(m, Fraction(0)) + c
        return GradedClassPolynomial(acc, self.truncation)

    __radd__ = __add__

    def __neg__(self):
        return GradedClassPolynomial({m: -c for m, c in self.terms.items()}, self.truncation)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return GradedClassPolynomial({m: c * other for m, c in self.terms.items()}, self.truncation)
        other = self._lift(other)
        if other is NotImplemented:
            return other
        D = self.truncation
        acc: dict[ClassMonomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            w1 = m1.weight
            for m2, c2 in other.terms.items():
                if w1 + m2.weight > D:
                    continue
                m = m1 * m2
                acc[m] = acc.get(m, Fraction(0)) + c1 * c2
        return GradedClassPolynomial(acc, D)

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            return self.reciprocal() ** (-k)
        result = GradedClassPolynomial.constant(1, self.truncation)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def reciprocal(self) -> "GradedClassPolynomial":
        """Formal inverse within the truncation; needs a nonzero constant term."""
        c0 = self.constant_term()
        if c0 == 0:
            raise ZeroDivisionError("polynomial with zero constant term is not invertible")
        nil = (self - c0) * (1 / c0)
        # 1/(c0 (1 + nil)) = (1/c0) sum_k (-nil)^k; nil is nilpotent past D.
        acc = GradedClassPolynomial.constant(1, self.truncation)
        power = GradedClassPolynomial.constant(1, self.truncation)
        for _ in range(self.truncation):
            power = power * (-nil)
            if power.is_zero():
                break
            acc = acc + power
        return acc * (1 / c0)

    def substitute(self, assignment: Mapping[Var, "GradedClassPolynomial"], truncation: int | None = None) -> "GradedClassPolynomial":
        """Replace generators by polynomials; unassigned generators stay as they are."""
        D = truncation
        for value in assignment.values():
            if D is None:
                D = value.truncation
            elif value.truncation != D:
                raise TruncationMismatch("assignments carry different truncations")
        if D is None:
            D = self.truncation
        powers: dict[tuple[Var, int], GradedClassPolynomial] = {}

        def pw(v: Var, e: int) -> GradedClassPolynomial:
            key = (v, e)
            if key not in powers:
                base = assignment[v] if v in assignment else GradedClassPolynomial.generator(v, D)
                powers[key] = base ** e
            return powers[key]

        total = GradedClassPolynomial({}, D)
        for mono, c in self.terms.items():
            term = GradedClassPolynomial.constant(c, D)
            for v, e in mono.exponents:
                term = term * pw(v, e)
                if term.is_zero():
                    break
            total = total + term
        return total

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = GradedClassPolynomial.constant(other, self.truncation)
        if not isinstance(other, GradedClassPolynomial):
            return NotImplemented
        return self.truncation == other.truncation and self.terms == other.terms

    def __hash__(self):
        return hash((frozenset(self.terms.items()), self.truncation))

    def sorted_terms(self) -> list[tuple[ClassMonomial, Fraction]]:
        return sorted(self.terms.items(), key=lambda mc: (mc[0].weight, [(v.name, -e) for v, e in mc[0].exponents]))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono, c in self.sorted_terms():
            if mono == ONE:
                body = _fmt_coeff(abs(c))
            elif abs(c) == 1:
                body = str(mono)
            else:
                body = f"{_fmt_coeff(abs(c))}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"GradedClassPolynomial({self}, D={self.truncation})"


def poly_multiply(a: GradedClassPolynomial, b: GradedClassPolynomial) -> GradedClassPolynomial:
    if a.truncation != b.truncation:
        raise TruncationMismatch(f"truncation {a.truncation} vs {b.truncation}")
    return a * b


# -- univariate series helpers -------------------------------------------------


def _series_inverse(a: Sequence[Fraction], n: int) -> list[Fraction]:
    b = [Fraction(0)] * (n + 1)
    b[0] = 1 / a[0]
    for k in range(1, n + 1):
        s = sum((a[i] * b[k - i] for i in range(1, min(k, len(a) - 1) + 1)), Fraction(0))
        b[k] = -s / a[0]
    return b


def _series_log(a: Sequence[Fraction], n: int) -> list[Fraction]:
    """log of a series with constant term 1, via (log a)' = a'/a."""
    inv = _series_inverse(a, n)
    deriv = [k * a[k] for k in range(1, n + 1)] + [Fraction(0)]
    out = [Fraction(0)] * (n + 1)
    for k in range(n):
        coeff = sum((deriv[i] * inv[k - i] for i in range(k + 1)), Fraction(0))
        out[k + 1] = coeff / (k + 1)
    return out


@lru_cache(maxsize=None)
def todd_log_coefficients(n: int) -> tuple[Fraction, ...]:
    """Coefficients a_k of log(x / (1 - e^-x)) up to x^n."""
    # (1 - e^-x)/x = sum_j (-1)^j x^j / (j+1)!
    g = [Fraction((-1) ** j, math.factorial(j + 1)) for j in range(n + 1)]
    log_g = _series_log(g, n)
    return tuple(-c for c in log_g)


# -- universal polynomials -----------------------------------------------------


@lru_cache(maxsize=None)
def _power_sums(m: int) -> tuple[GradedClassPolynomial, ...]:
    """p_1..p_m in Chern classes (index 0 unused), each at truncation m."""
    ps: list[GradedClassPolynomial] = [GradedClassPolynomial({}, m)]
    c = [None] + [GradedClassPolynomial.chern(i, m) for i in range(1, m + 1)]
    for k in range(1, m + 1):
        # Newton: p_k = sum_{i<k} (-1)^(i-1) c_i p_{k-i} + (-1)^(k-1) k c_k
        acc = c[k] * ((-1) ** (k - 1) * k)
        for i in range(1, k):
            acc = acc + c[i] * ps[k - i] * ((-1) ** (i - 1))
        ps.append(acc)
    return tuple(ps)


def chern_numerator(m: int) -> GradedClassPolynomial:
    """S_m: the m-th power sum of the Chern roots, as an integral polynomial in c_1..c_m."""
    if m < 1:
        raise InputError("chern_numerator needs m >= 1")
    return _power_sums(m)[m]


@lru_cache(maxsize=None)
def todd_class(D: int) -> GradedClassPolynomial:
    """The total Todd class truncated at weight D."""
    if D == 0:
        return GradedClassPolynomial.constant(1, 0)
    a = todd_log_coefficients(D)
    ps = _power_sums(D)
    # exp by weight: if T = exp(L) then m T_m = sum_k k L_k T_{m-k}
    parts = [GradedClassPolynomial.constant(1, D)]
    for m in range(1, D + 1):
        acc = GradedClassPolynomial({}, D)
        for k in range(1, m + 1):
            if a[k] and not parts[m - k].is_zero():
                acc = acc + ps[k] * parts[m - k] * (k * a[k])
        parts.append(acc * Fraction(1, m))
    return sum(parts[1:], parts[0])


def todd_polynomial(m: int) -> GradedClassPolynomial:
    """Weight-m part of the Todd class, at truncation m."""
    if m < 0:
        raise InputError("m must be non-negative")
    return todd_class(m).homogeneous_part(m)


@lru_cache(maxsize=None)
def chern_character(D: int) -> GradedClassPolynomial:
    """sum_{m=1..D} S_m / m! (the rank term is added by :func:`ch_of`)."""
    acc = GradedClassPolynomial({}, D)
    for m in range(1, D + 1):
        acc = acc + chern_numerator(m).retruncate(D) * Fraction(1, math.factorial(m))
    return acc


def ch_of(rank: int, chern_classes: Sequence[GradedClassPolynomial], D: int) -> GradedClassPolynomial:
    """Chern character of a class with the given rank and Chern classes c_1, c_2, ...

    ``chern_classes[i-1]`` is the value of c_i; missing entries beyond the list
    are taken to be zero.
    """
    for value in chern_classes:
        if value.truncation != D:
            raise TruncationMismatch(f"Chern class assignment at truncation {value.truncation}, expected {D}")
    assignment = {chern_var(i): GradedClassPolynomial({}, D) for i in range(1, D + 1)}
    for i, value in enumerate(chern_classes[:D], start=1):
        assignment[chern_var(i)] = value
    return chern_character(D).substitute(assignment, D) + rank


def elementary_symmetric(values: Sequence[GradedClassPolynomial], D: int) -> list[GradedClassPolynomial]:
    """e_1..e_D of the given classes: the Chern classes of a sum of line bundles."""
    e = [GradedClassPolynomial.constant(1, D)] + [GradedClassPolynomial({}, D) for _ in range(D)]
    for x in values:
        for k in range(D, 0, -1):
            e[k] = e[k] + e[k - 1] * x
    return e[1:]


def line_bundle_sum_ch(first_chern: Iterable[GradedClassPolynomial], D: int) -> GradedClassPolynomial:
    """ch of a sum of line bundles computed through its Chern classes."""
    xs = list(first_chern)
    return ch_of(len(xs), elementary_symmetric(xs, D), D)
