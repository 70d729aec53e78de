"""K_0 and Chow rings of products of projective spaces.

For X = P^{n_1} x ... x P^{n_k}:

* CH*(X) = Z[h_1..h_k] / (h_j^{n_j+1}), basis the monomials h^a;
* K_0(X) = Z[t_1..t_k] / ((t_j - 1)^{n_j+1}) with t_j = [O(e_j)], basis the
  line bundles O(i) with 0 <= i_j <= n_j.

Everything is computed over Q first and then checked against a coefficient
ring Z[1/N]; a denominator outside the ring raises
:class:`DenominatorOutsideTag` naming the offending prime.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Mapping, Sequence

from .arith import LocalizedScalar, QQ, RingTag, ScalarMatrix, _det, _inverse, uninvertible_primes
from .errors import DenominatorOutsideTag, InputError, NonIntegerEuler

MultiIndex = tuple[int, ...]


@dataclass(frozen=True)
class ToyScheme:
    """P^{n_1} x ... x P^{n_k}; the point is ``ToyScheme((0,))``."""

    factors: tuple[int, ...]

    def __post_init__(self):
        f = tuple(int(n) for n in self.factors)
        if not f:
            raise InputError("a toy scheme needs at least one factor")
        if f != (0,) and any(n < 1 for n in f):
            raise InputError(f"factors must be positive (or a single P0), got {f}")
        object.__setattr__(self, "factors", f)

    @classmethod
    def point(cls) -> "ToyScheme":
        return cls((0,))

    @classmethod
    def projective(cls, n: int) -> "ToyScheme":
        return cls((n,))

    @property
    def dimension(self) -> int:
        return sum(self.factors)

    @property
    def is_point(self) -> bool:
        return self.factors == (0,)

    @property
    def rank(self) -> int:
        return math.prod(n + 1 for n in self.factors)

    def indices(self) -> list[MultiIndex]:
        """Multi-indices 0 <= a_j <= n_j in lexicographic order."""
        return list(product(*(range(n + 1) for n in self.factors)))

    def top(self) -> MultiIndex:
        return self.factors

    def __mul__(self, other: "ToyScheme") -> "ToyScheme":
        return product_scheme(self, other)

    def __str__(self):
        return "x".join(f"P{n}" for n in self.factors)

    @classmethod
    def parse(cls, text: str) -> "ToyScheme":
        s = text.strip().replace(" ", "")
        if s.lower() in ("pt", "point"):
            return cls.point()
        parts = s.split("x") if "x" in s else [s]
        out = []
        for part in parts:
            m = re.fullmatch(r"[Pp]\^?(\d+)", part)
            if not m:
                raise InputError(f"cannot parse scheme {text!r}; expected e.g. P2 or P1xP1")
            out.append(int(m.group(1)))
        nonzero = [n for n in out if n]
        return cls(tuple(nonzero) if nonzero else (0,))


def product_scheme(x: ToyScheme, y: ToyScheme) -> ToyScheme:
    f = tuple(n for n in x.factors + y.factors if n)
    return ToyScheme(f or (0,))


def _offset(x: ToyScheme) -> int:
    return 0 if x.is_point else len(x.factors)


# -- Chow ring -----------------------------------------------------------------


def _check_tag(coeffs: Mapping[MultiIndex, Fraction], tag: RingTag, where: str):
    for c in coeffs.values():
        bad = uninvertible_primes(c, tag)
        if bad:
            raise DenominatorOutsideTag(bad[0], where)


class ChowClass:
    """Element of CH*(X) with coefficients in the tag ring."""

    __slots__ = ("scheme", "coeffs", "tag")

    def __init__(self, scheme: ToyScheme, coeffs: Mapping[MultiIndex, Fraction | int], tag: RingTag = QQ, where: str = ""):
        clean = {}
        for idx, c in coeffs.items():
            idx = tuple(idx)
            if len(idx) != len(scheme.factors):
                raise InputError(f"multi-index {idx} does not match {scheme}")
            if any(a < 0 for a in idx):
                raise InputError(f"negative exponent in {idx}")
            if any(a > n for a, n in zip(idx, scheme.factors)):
                continue
            c = Fraction(c)
            if c:
                clean[idx] = clean.get(idx, Fraction(0)) + c
        clean = {k: v for k, v in clean.items() if v}
        _check_tag(clean, tag, where or f"class on {scheme}")
        self.scheme = scheme
        self.coeffs = dict(sorted(clean.items()))
        self.tag = tag

    @classmethod
    def one(cls, scheme: ToyScheme, tag: RingTag = QQ) -> "ChowClass":
        return cls(scheme, {(0,) * len(scheme.factors): 1}, tag)

    @classmethod
    def hyperplane(cls, scheme: ToyScheme, j: int = 0, tag: RingTag = QQ) -> "ChowClass":
        idx = [0] * len(scheme.factors)
        idx[j] = 1
        return cls(scheme, {tuple(idx): 1}, tag)

    def coefficient(self, idx: MultiIndex) -> LocalizedScalar:
        return LocalizedScalar(self.coeffs.get(tuple(idx), Fraction(0)), self.tag)

    def top_coefficient(self) -> Fraction:
        return self.coeffs.get(self.scheme.top(), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.coeffs.get((0,) * len(self.scheme.factors), Fraction(0))

    def _same(self, other: "ChowClass"):
        if self.scheme != other.scheme:
            raise InputError(f"classes live on {self.scheme} and {other.scheme}")

    def __add__(self, other: "ChowClass") -> "ChowClass":
        self._same(other)
        acc = dict(self.coeffs)
        for k, v in other.coeffs.items():
            acc[k] = acc.get(k, Fraction(0)) + v
        return ChowClass(self.scheme, acc, self.tag)

    def __sub__(self, other: "ChowClass") -> "ChowClass":
        return self + other.scale(-1)

    def scale(self, c) -> "ChowClass":
        return ChowClass(self.scheme, {k: v * c for k, v in self.coeffs.items()}, self.tag)

    def __mul__(self, other: "ChowClass") -> "ChowClass":
        self._same(other)
        acc: dict[MultiIndex, Fraction] = {}
        bounds = self.scheme.factors
        for i1, c1 in self.coeffs.items():
            for i2, c2 in other.coeffs.items():
                idx = tuple(a + b for a, b in zip(i1, i2))
                if any(a > n for a, n in zip(idx, bounds)):
                    continue
                acc[idx] = acc.get(idx, Fraction(0)) + c1 * c2
        return ChowClass(self.scheme, acc, self.tag)

    def reciprocal(self) -> "ChowClass":
        c0 = self.constant_term()
        if c0 == 0:
            raise ZeroDivisionError("class with zero degree-0 part is not invertible")
        one = ChowClass.one(self.scheme, QQ)
        nil = ChowClass(self.scheme, self.coeffs, QQ).scale(1 / c0) - one
        acc, power = one, one
        for _ in range(self.scheme.dimension):
            power = power * nil.scale(-1)
            acc = acc + power
        return ChowClass(self.scheme, acc.scale(1 / c0).coeffs, self.tag, where="reciprocal")

    def retag(self, tag: RingTag) -> "ChowClass":
        return ChowClass(self.scheme, self.coeffs, tag)

    def __eq__(self, other):
        if not isinstance(other, ChowClass):
            return NotImplemented
        return self.scheme == other.scheme and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.scheme, tuple(self.coeffs.items())))

    def __str__(self):
        if not self.coeffs:
            return "0"
        names = [f"h{j + 1}" for j in range(len(self.scheme.factors))] if len(self.scheme.factors) > 1 else ["h"]
        parts = []
        for idx, c in self.coeffs.items():
            mono = "*".join(n if a == 1 else f"{n}^{a}" for n, a in zip(names, idx) if a)
            cs = str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
            parts.append(cs if not mono else (mono if c == 1 else f"{cs}*{mono}"))
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"ChowClass({self}, on={self.scheme}, tag={self.tag})"

    def to_json(self) -> dict:
        return {",".join(map(str, k)): (str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}") for k, v in self.coeffs.items()}


# -- K_0 -------------------------------------------------------------------------


def _gen_binom(i: int, k: int) -> int:
    """binomial(i, k) for any integer i."""
    num = 1
    for r in range(k):
        num *= i - r
    return num // math.factorial(k)


def _line_bundle_coords(i: int, n: int) -> list[int]:
    """t^i mod (t-1)^{n+1} in the basis 1, t, ..., t^n."""
    # t^i = sum_k C(i,k) u^k with u = t - 1, truncated at u^n
    out = [0] * (n + 1)
    for k in range(n + 1):
        c = _gen_binom(i, k)
        # u^k = sum_r C(k,r) (-1)^(k-r) t^r
        for r in range(k + 1):
            out[r] += c * math.comb(k, r) * (-1) ** (k - r)
    return out


@dataclass(frozen=True)
class K0Class:
    """Element of K_0(X) in the basis [O(i)], 0 <= i_j <= n_j."""

    scheme: ToyScheme
    coefficients: Mapping[MultiIndex, int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for idx, c in dict(self.coefficients).items():
            idx = tuple(idx)
            if len(idx) != len(self.scheme.factors) or any(not 0 <= a <= n for a, n in zip(idx, self.scheme.factors)):
                raise InputError(f"basis index {idx} out of range for {self.scheme}")
            if int(c) != c:
                raise InputError("K_0 coefficients must be integers")
            if c:
                clean[idx] = clean.get(idx, 0) + int(c)
        object.__setattr__(self, "coefficients", {k: v for k, v in sorted(clean.items()) if v})

    def __hash__(self):
        return hash((self.scheme, tuple(self.coefficients.items())))

    def __add__(self, other: "K0Class") -> "K0Class":
        if other.scheme != self.scheme:
            raise InputError("K_0 classes on different schemes")
        acc = dict(self.coefficients)
        for k, v in other.coefficients.items():
            acc[k] = acc.get(k, 0) + v
        return K0Class(self.scheme, acc)

    def __sub__(self, other: "K0Class") -> "K0Class":
        return self + other.scale(-1)

    def scale(self, c: int) -> "K0Class":
        return K0Class(self.scheme, {k: c * v for k, v in self.coefficients.items()})

    def __mul__(self, other: "K0Class") -> "K0Class":
        """Tensor product of classes, reduced back to the line-bundle basis."""
        if other.scheme != self.scheme:
            raise InputError("K_0 classes on different schemes")
        acc = K0Class(self.scheme, {})
        for i1, c1 in self.coefficients.items():
            for i2, c2 in other.coefficients.items():
                acc = acc + line_bundle(self.scheme, tuple(a + b for a, b in zip(i1, i2))).scale(c1 * c2)
        return acc

    @property
    def rank(self) -> int:
        return sum(self.coefficients.values())


def line_bundle(scheme: ToyScheme, degrees: Sequence[int] | int) -> K0Class:
    """[O(i_1, ..., i_k)] for arbitrary integer degrees."""
    if isinstance(degrees, int):
        degrees = (degrees,)
    degrees = tuple(degrees)
    if scheme.is_point:
        return K0Class(scheme, {(0,): 1})
    if len(degrees) != len(scheme.factors):
        raise InputError(f"{scheme} needs {len(scheme.factors)} degrees, got {degrees}")
    per = [_line_bundle_coords(i, n) for i, n in zip(degrees, scheme.factors)]
    coeffs = {}
    for idx in scheme.indices():
        c = math.prod(per[j][a] for j, a in enumerate(idx))
        if c:
            coeffs[idx] = c
    return K0Class(scheme, coeffs)


def point_class(scheme: ToyScheme) -> K0Class:
    """[O_pt] = prod_j (1 - [O(-e_j)])^{n_j} (Koszul resolution)."""
    acc = line_bundle(scheme, (0,) * len(scheme.factors))
    for j, n in enumerate(scheme.factors):
        if n == 0:
            continue
        e = [0] * len(scheme.factors)
        e[j] = -1
        step = line_bundle(scheme, (0,) * len(scheme.factors)) - line_bundle(scheme, tuple(e))
        for _ in range(n):
            acc = acc * step
    return acc


def parse_bundle(text: str, scheme: ToyScheme) -> K0Class:
    m = re.fullmatch(r"\s*O\(\s*(-?\d+(?:\s*,\s*-?\d+)*)\s*\)\s*", text)
    if not m:
        raise InputError(f"cannot parse bundle {text!r}; expected O(i) or O(i,j)")
    return line_bundle(scheme, tuple(int(x) for x in m.group(1).split(",")))


# -- Chern character and Todd class ---------------------------------------------


def _exp_coeffs(i: int, n: int) -> list[Fraction]:
    return [Fraction(i**a, math.factorial(a)) for a in range(n + 1)]


def _ch_rational(x: K0Class) -> dict[MultiIndex, Fraction]:
    scheme = x.scheme
    acc: dict[MultiIndex, Fraction] = {}
    for deg, c in x.coefficients.items():
        per = [_exp_coeffs(i, n) for i, n in zip(deg, scheme.factors)]
        for idx in scheme.indices():
            v = math.prod((per[j][a] for j, a in enumerate(idx)), start=Fraction(1))
            if v:
                acc[idx] = acc.get(idx, Fraction(0)) + c * v
    return acc


def ch_map(x: K0Class, tag: RingTag = QQ) -> ChowClass:
    """ch(x) = sum coeff * prod_j exp(i_j h_j) in CH*(X) over the tag ring."""
    return ChowClass(x.scheme, _ch_rational(x), tag, where=f"ch on {x.scheme}")


def _todd_series(n: int) -> list[Fraction]:
    """x / (1 - e^-x) up to x^n."""
    g = [Fraction((-1) ** j, math.factorial(j + 1)) for j in range(n + 1)]
    b = [Fraction(0)] * (n + 1)
    b[0] = Fraction(1)
    for k in range(1, n + 1):
        b[k] = -sum((g[i] * b[k - i] for i in range(1, k + 1)), Fraction(0))
    return b


def todd_of(scheme: ToyScheme, tag: RingTag = QQ) -> ChowClass:
    """Td(X) = prod_j (h_j / (1 - e^-h_j))^{n_j + 1}, checked invertible."""
    acc = ChowClass.one(scheme, QQ)
    for j, n in enumerate(scheme.factors):
        if n == 0:
            continue
        series = _todd_series(n)
        coeffs = {}
        for a, c in enumerate(series):
            idx = [0] * len(scheme.factors)
            idx[j] = a
            coeffs[tuple(idx)] = c
        factor = ChowClass(scheme, coeffs, QQ)
        for _ in range(n + 1):
            acc = acc * factor
    td = ChowClass(scheme, acc.coeffs, tag, where=f"Td({scheme})")
    inv = td.reciprocal()
    if td * inv != ChowClass.one(scheme):
        raise AssertionError("Todd class reciprocal check failed")
    return td


def pullback(c: ChowClass, target: ToyScheme, offset: int) -> ChowClass:
    """Pull back along a projection target -> c.scheme whose factors sit at ``offset``."""
    k = len(target.factors)
    coeffs = {}
    for idx, v in c.coeffs.items():
        full = [0] * k
        if not c.scheme.is_point:
            full[offset : offset + len(idx)] = idx
        coeffs[tuple(full)] = v
    return ChowClass(target, coeffs, c.tag)


def pushforward(c: ChowClass, keep: Sequence[int], target: ToyScheme) -> ChowClass:
    """Push forward along the projection onto the factors ``keep`` of c.scheme.

    For products of projective spaces this extracts the coefficient of the top
    power of every forgotten factor.
    """
    src = c.scheme.factors
    drop = [j for j in range(len(src)) if j not in keep]
    coeffs = {}
    for idx, v in c.coeffs.items():
        if all(idx[j] == src[j] for j in drop):
            new = tuple(idx[j] for j in keep) if keep else (0,)
            coeffs[new] = coeffs.get(new, Fraction(0)) + v
    return ChowClass(target, coeffs, c.tag)


def psi_map(alpha: K0Class, x: ToyScheme, y: ToyScheme, tag: RingTag = QQ) -> ChowClass:
    """alpha -> ch(alpha) * pr_Y^* Td(Y) on X x Y, checked to lie over the tag ring."""
    xy = product_scheme(x, y)
    if alpha.scheme != xy:
        raise InputError(f"alpha lives on {alpha.scheme}, expected {xy}")
    ch = ChowClass(xy, _ch_rational(alpha), QQ)
    td = pullback(todd_of(y, QQ), xy, _offset(x)) if not y.is_point else ChowClass.one(xy)
    return ChowClass(xy, (ch * td).coeffs, tag, where="psi")


def compose_correspondences(g1: ChowClass, g2: ChowClass, x: ToyScheme, y: ToyScheme, z: ToyScheme) -> ChowClass:
    """g2 o g1 = p13_* (p12^* g1 . p23^* g2) for g1 on X x Y and g2 on Y x Z."""
    nx, ny = _offset(x), _offset(y)
    factors = tuple(f for f in x.factors + y.factors + z.factors if f) or (0,)
    xyz = ToyScheme(factors)
    a = pullback(g1, xyz, 0)
    b = pullback(g2, xyz, nx)
    keep = list(range(nx)) + list(range(nx + ny, len(xyz.factors) if not xyz.is_point else 0))
    tag = g1.tag if g1.tag == g2.tag else QQ
    return pushforward((a * b), keep, product_scheme(x, z)).retag(tag)


# -- checks --------------------------------------------------------------------


@dataclass(frozen=True)
class ChIsoReport:
    """Outcome of the Chern character isomorphism test on the explicit bases."""

    scheme: ToyScheme
    tag: RingTag
    is_isomorphism: bool
    determinant: Fraction
    matrix: ScalarMatrix
    obstruction_primes: tuple[int, ...]
    witness_entry: tuple[MultiIndex, MultiIndex, Fraction] | None

    def to_json(self) -> dict:
        d = self.determinant
        return {
            "scheme": str(self.scheme),
            "tag": self.tag.to_json(),
            "is_isomorphism": self.is_isomorphism,
            "determinant": str(d.numerator) if d.denominator == 1 else f"{d.numerator}/{d.denominator}",
            "determinant_is_unit": self.tag.is_unit(d),
            "obstruction_primes": list(self.obstruction_primes),
            "witness_entry": None
            if self.witness_entry is None
            else {
                "bundle": list(self.witness_entry[0]),
                "monomial": list(self.witness_entry[1]),
                "value": f"{self.witness_entry[2].numerator}/{self.witness_entry[2].denominator}",
            },
        }


def ch_matrix(scheme: ToyScheme) -> list[list[Fraction]]:
    """Rows: O(i) basis of K_0; columns: monomial basis h^a of CH*."""
    idx = scheme.indices()
    rows = []
    for deg in idx:
        ch = _ch_rational(K0Class(scheme, {deg: 1}))
        rows.append([ch.get(a, Fraction(0)) for a in idx])
    return rows


def ch_iso_check(scheme: ToyScheme, tag: RingTag) -> ChIsoReport:
    """Is ch: K_0(X) (x) R -> CH*(X) (x) R an isomorphism for R = tag?

    Both the matrix and its inverse must have entries in R, which is the same
    as integral entries plus a unit determinant.
    """
    M = ch_matrix(scheme)
    idx = scheme.indices()
    det = _det(M)
    inv = _inverse(M)
    bad: set[int] = set()
    witness = None
    for r, row in enumerate(M):
        for c, v in enumerate(row):
            primes = uninvertible_primes(v, tag)
            if primes:
                bad.update(primes)
                if witness is None:
                    witness = (idx[r], idx[c], v)
    for row in inv:
        for v in row:
            bad.update(uninvertible_primes(v, tag))
    ok = not bad and tag.is_unit(det)
    return ChIsoReport(scheme, tag, ok, det, ScalarMatrix(M, QQ), tuple(sorted(bad)), witness)


def euler_characteristic(x: K0Class, scheme: ToyScheme | None = None) -> int:
    """chi(X, x) = top-degree coefficient of ch(x) * Td(X)."""
    if scheme is not None and scheme != x.scheme:
        raise InputError(f"class lives on {x.scheme}, not {scheme}")
    scheme = x.scheme
    val = (ChowClass(scheme, _ch_rational(x)) * todd_of(scheme)).top_coefficient()
    if val.denominator != 1:
        raise NonIntegerEuler(f"Euler characteristic {val} of a class on {scheme} is not an integer")
    return int(val)
