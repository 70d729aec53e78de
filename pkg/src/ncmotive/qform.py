"""Nonsingular quadratic forms over Q and their classical invariants.

Forms are kept diagonal. Anisotropy is decided with the Hasse-Minkowski
local-global principle; for dimension at most 4 an isotropic vector is
also produced and checked exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Sequence

import numpy as np
from sympy import primerange

from .arith import format_rational, parse_rational
from .brauer import BrauerClass, Place, hilbert_symbol, relevant_places, squarefree_part
from .errors import InputError, NotSymmetric, Singular

WITNESS_HEIGHT_BOUND = 10**4


@dataclass(frozen=True)
class SquareClass:
    """Element of Q*/Q*^2, represented by a signed squarefree integer."""

    representative: int

    def __post_init__(self):
        r = self.representative
        if r == 0 or squarefree_part(r) != r:
            raise InputError(f"{r} is not a squarefree nonzero integer")

    @classmethod
    def of(cls, x) -> "SquareClass":
        return cls(squarefree_part(x))

    def is_trivial(self) -> bool:
        return self.representative == 1

    def __mul__(self, other: "SquareClass") -> "SquareClass":
        return SquareClass.of(self.representative * other.representative)

    def __int__(self):
        return self.representative

    def __str__(self):
        return str(self.representative)


@dataclass(frozen=True)
class QuadraticForm:
    """Diagonal form <a_1, ..., a_n> over Q, optionally remembering its Gram matrix."""

    diagonal: tuple[Fraction, ...]
    provenance: tuple[tuple[Fraction, ...], ...] | None = field(default=None, compare=False)
    witness: tuple[tuple[Fraction, ...], ...] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        diag = tuple(Fraction(a) for a in self.diagonal)
        if not diag:
            raise InputError("a quadratic form needs at least one entry")
        if any(a == 0 for a in diag):
            raise Singular(f"zero diagonal entry in <{', '.join(map(format_rational, diag))}>")
        object.__setattr__(self, "diagonal", diag)
        if self.provenance is not None:
            if self.witness is None or not _is_congruence(self.provenance, self.witness, diag):
                raise InputError("diagonal form is not congruent to its recorded Gram matrix")

    @classmethod
    def of(cls, *entries) -> "QuadraticForm":
        if len(entries) == 1 and not isinstance(entries[0], (int, Fraction, str)):
            entries = tuple(entries[0])
        return cls(tuple(parse_rational(a) if isinstance(a, str) else Fraction(a) for a in entries))

    @property
    def dimension(self) -> int:
        return len(self.diagonal)

    def __call__(self, x: Sequence) -> Fraction:
        if len(x) != self.dimension:
            raise InputError("vector length does not match the form dimension")
        return sum((a * Fraction(v) ** 2 for a, v in zip(self.diagonal, x)), Fraction(0))

    def square_classes(self) -> list[int]:
        return sorted(squarefree_part(a) for a in self.diagonal)

    def signature(self) -> tuple[int, int]:
        pos = sum(1 for a in self.diagonal if a > 0)
        return pos, self.dimension - pos

    def is_definite(self) -> bool:
        pos, neg = self.signature()
        return pos == 0 or neg == 0

    def __str__(self):
        return "<" + ", ".join(format_rational(a) for a in self.diagonal) + ">"

    def to_json(self) -> dict:
        return {"diag": [format_rational(a) for a in self.diagonal]}

    @classmethod
    def from_json(cls, data) -> "QuadraticForm":
        if "diag" in data:
            return cls.of([parse_rational(x) for x in data["diag"]])
        if "gram" in data:
            return diagonalize([[parse_rational(x) for x in row] for row in data["gram"]])
        raise InputError("form JSON needs a 'diag' or 'gram' key")


def parse_form(text: str) -> QuadraticForm:
    """Parse ``"1,1,1,-7"``, ``"1/2, 3"`` or a JSON object with a "diag" or "gram" key."""
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"bad form JSON: {exc}") from exc
        return QuadraticForm.from_json(data)
    parts = [p for p in text.replace(" ", "").strip("<>").split(",") if p]
    if not parts:
        raise InputError("empty form")
    return QuadraticForm.of([parse_rational(p) for p in parts])


# -- diagonalization ----------------------------------------------------------


def _matmul(a, b):
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in zip(*b)] for row in a]


def _transpose(a):
    return [list(r) for r in zip(*a)]


def _is_congruence(gram, P, diag) -> bool:
    n = len(diag)
    D = _matmul(_matmul(_transpose(P), gram), P)
    return all(D[i][j] == (diag[i] if i == j else 0) for i in range(n) for j in range(n))


def diagonalize(gram: Sequence[Sequence]) -> QuadraticForm:
    """Diagonal form congruent to a symmetric matrix; ``P^T G P`` is kept as witness."""
    G = [[Fraction(x) for x in row] for row in gram]
    n = len(G)
    if n == 0 or any(len(r) != n for r in G):
        raise InputError("Gram matrix must be square and nonempty")
    if any(G[i][j] != G[j][i] for i in range(n) for j in range(n)):
        raise NotSymmetric("Gram matrix is not symmetric")
    A = [r[:] for r in G]
    P = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]

    def col_op(dst, src, f):
        # basis change e_dst += f e_src, applied as A -> E^T A E
        for r in range(n):
            A[r][dst] += f * A[r][src]
        for c in range(n):
            A[dst][c] += f * A[src][c]
        for r in range(n):
            P[r][dst] += f * P[r][src]

    def swap(i, j):
        for r in range(n):
            A[r][i], A[r][j] = A[r][j], A[r][i]
        A[i], A[j] = A[j], A[i]
        for r in range(n):
            P[r][i], P[r][j] = P[r][j], P[r][i]

    for i in range(n):
        if A[i][i] == 0:
            k = next((k for k in range(i + 1, n) if A[k][k] != 0), None)
            if k is not None:
                swap(i, k)
            else:
                j = next((j for j in range(i + 1, n) if A[i][j] != 0), None)
                if j is None:
                    raise Singular("Gram matrix is singular")
                col_op(i, j, Fraction(1))
        for j in range(i + 1, n):
            if A[i][j] != 0:
                col_op(j, i, -A[i][j] / A[i][i])
    diag = tuple(A[i][i] for i in range(n))
    if any(a == 0 for a in diag):
        raise Singular("Gram matrix is singular")
    return QuadraticForm(diag, provenance=tuple(map(tuple, G)), witness=tuple(map(tuple, P)))


# -- determinants and discriminant -------------------------------------------


def determinant(q: QuadraticForm) -> SquareClass:
    return SquareClass.of(math.prod(q.diagonal))


def signed_determinant(q: QuadraticForm) -> SquareClass:
    n = q.dimension
    return SquareClass.of((-1) ** (n * (n - 1) // 2) * math.prod(q.diagonal))


def has_trivial_discriminant(q: QuadraticForm) -> bool:
    return signed_determinant(q).is_trivial()


def hasse_invariant(q: QuadraticForm, v) -> int:
    """prod_{i<j} (a_i, a_j)_v."""
    s = 1
    a = q.diagonal
    for i in range(len(a)):
        for j in range(i + 1, len(a)):
            s *= hilbert_symbol(a[i], a[j], v)
    return s


def places_of(q: QuadraticForm) -> list[Place]:
    """Places where a local invariant of q can be nontrivial."""
    return relevant_places(q.diagonal)


def clifford_invariant(q: QuadraticForm) -> BrauerClass:
    """Brauer class of C(q) (even n) or of C_0(q) (odd n).

    Computed from the Hasse invariant with the n mod 8 correction:
    1,2: none; 3,4: (-1,-d); 5,6: (-1,-1); 7,0: (-1,d), with d = det q.
    For even n with trivial discriminant, C_0(q) = A x A and A has this class.
    """
    d = math.prod(q.diagonal)
    r = q.dimension % 8
    inv = {}
    for v in places_of(q):
        s = hasse_invariant(q, v)
        if r in (3, 4):
            s *= hilbert_symbol(-1, -d, v)
        elif r in (5, 6):
            s *= hilbert_symbol(-1, -1, v)
        elif r in (7, 0):
            s *= hilbert_symbol(-1, d, v)
        if s == -1:
            inv[v] = Fraction(1, 2)
    return BrauerClass(inv)


# -- local-global anisotropy ---------------------------------------------------


def _is_local_square(x: Fraction, v: Place) -> bool:
    if v.is_real:
        return x > 0
    n = x.numerator * x.denominator
    p = v.prime
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    if k % 2:
        return False
    if p == 2:
        return n % 8 == 1
    return pow(n % p, (p - 1) // 2, p) == 1


def locally_isotropic(q: QuadraticForm, v) -> bool:
    v = v if isinstance(v, Place) else Place(v)
    n = q.dimension
    if v.is_real:
        return not q.is_definite()
    d = math.prod(q.diagonal)
    if n == 1:
        return False
    if n == 2:
        return _is_local_square(-d, v)
    eps = hasse_invariant(q, v)
    if n == 3:
        return hilbert_symbol(-1, -d, v) == eps
    if n == 4:
        return (not _is_local_square(d, v)) or eps == hilbert_symbol(-1, -1, v)
    return True


def _locally_isotropic_everywhere(q: QuadraticForm) -> bool:
    if q.dimension == 2:
        return squarefree_part(-math.prod(q.diagonal)) == 1
    return all(locally_isotropic(q, v) for v in places_of(q))


@dataclass(frozen=True)
class AnisotropyReport:
    anisotropic: bool
    witness: tuple[int, ...] | None = None


def anisotropy(q: QuadraticForm, find_witness: bool = True) -> AnisotropyReport:
    n = q.dimension
    if n == 1:
        return AnisotropyReport(True)
    if n >= 5:
        return AnisotropyReport(q.is_definite())
    if q.is_definite() or not _locally_isotropic_everywhere(q):
        return AnisotropyReport(True)
    w = isotropy_witness(q) if find_witness else None
    if w is not None and q(w) != 0:
        raise AssertionError(f"isotropy witness {w} does not vanish on {q}")
    return AnisotropyReport(False, w)


def is_anisotropic(q: QuadraticForm) -> bool:
    return anisotropy(q, find_witness=False).anisotropic


def _integral_scaling(a: Fraction) -> tuple[int, Fraction]:
    """a = s * t^2 with s squarefree integer; returns (s, t)."""
    s = squarefree_part(a)
    t2 = a / s
    num, den = math.isqrt(t2.numerator), math.isqrt(t2.denominator)
    if num * num != t2.numerator or den * den != t2.denominator:
        raise AssertionError("square-class scaling failed")
    return s, Fraction(num, den)


def _primitive(vec: Sequence[Fraction]) -> tuple[int, ...]:
    den = math.lcm(*(Fraction(x).denominator for x in vec))
    ints = [int(Fraction(x) * den) for x in vec]
    g = math.gcd(*ints) or 1
    return tuple(x // g for x in ints)


def _solve_ternary_squarefree(a: int, b: int, c: int, bound: int) -> tuple[int, int, int] | None:
    """Nonzero integer solution of a x^2 + b y^2 + c z^2 = 0 (squarefree coefficients)."""
    coeffs = [a, b, c]
    scale = [1, 1, 1]  # original variable = scale * new variable
    g = math.gcd(*coeffs)
    coeffs = [x // g for x in coeffs]
    changed = True
    while changed:
        changed = False
        for i, j, k in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
            g = math.gcd(coeffs[i], coeffs[j])
            if g > 1:
                coeffs[i] //= g
                coeffs[j] //= g
                coeffs[k] *= g
                scale[k] *= g
                g2 = math.gcd(*coeffs)
                coeffs = [x // g2 for x in coeffs]
                changed = True
    # solve for the variable with the smallest coefficient
    order = sorted(range(3), key=lambda i: abs(coeffs[i]))
    k, i, j = order[0], order[1], order[2]
    A, B, C = coeffs[i], coeffs[j], coeffs[k]
    bi = min(math.isqrt(abs(B * C)) + 1, bound)
    bj = min(math.isqrt(abs(A * C)) + 1, bound)
    ys = np.arange(-bj, bj + 1, dtype=np.int64)
    for x in range(0, bi + 1):
        rhs = -(A * x * x + B * ys * ys)
        ok = (rhs % C == 0)
        zz = np.where(ok, rhs // C, -1)
        ok &= zz >= 0
        if not ok.any():
            continue
        roots = np.round(np.sqrt(np.where(ok, zz, 0).astype(np.float64))).astype(np.int64)
        hits = np.nonzero(ok & (roots * roots == zz))[0]
        for h in hits:
            y = int(ys[h])
            z2 = -(A * x * x + B * y * y)
            if z2 % C:
                continue
            z = math.isqrt(z2 // C)
            if z * z != z2 // C or (x == 0 and y == 0 and z == 0):
                continue
            sol = [0, 0, 0]
            sol[i], sol[j], sol[k] = x, y, z
            return tuple(s * v for s, v in zip(scale, sol))
    return None


def _ternary_witness(diag: Sequence[Fraction], bound: int) -> tuple[Fraction, ...] | None:
    scaled = [_integral_scaling(a) for a in diag]
    sol = _solve_ternary_squarefree(*(s for s, _ in scaled), bound=bound)
    if sol is None:
        return None
    return tuple(Fraction(x) / t for x, (_, t) in zip(sol, scaled))


def isotropy_witness(q: QuadraticForm, bound: int = WITNESS_HEIGHT_BOUND) -> tuple[int, ...] | None:
    """A primitive integer vector with q(x) = 0, searched for dimensions 2 to 4."""
    a = q.diagonal
    n = q.dimension
    vec = None
    if n == 2:
        r = -a[1] / a[0]
        sn, sd = math.isqrt(r.numerator) if r > 0 else -1, math.isqrt(r.denominator)
        if r > 0 and sn * sn == r.numerator and sd * sd == r.denominator:
            vec = (Fraction(sn), Fraction(sd))
    elif n == 3:
        vec = _ternary_witness(a, bound)
    elif n == 4:
        vec = _quaternary_witness(a, bound)
    if vec is None:
        return None
    w = _primitive(vec)
    if q(w) != 0 or not any(w):
        return None
    return w


def _quaternary_witness(a: Sequence[Fraction], bound: int) -> tuple[Fraction, ...] | None:
    # A binary sub-form may already be isotropic.
    for i, j in ((0, 1), (2, 3), (0, 2), (0, 3), (1, 2), (1, 3)):
        sub = QuadraticForm((a[i], a[j]))
        w = isotropy_witness(sub, bound)
        if w is not None:
            out = [Fraction(0)] * 4
            out[i], out[j] = Fraction(w[0]), Fraction(w[1])
            return tuple(out)
    # Split q = <a0,a1> + <a2,a3> through a common value t: both <a0,a1,-t> and
    # <a2,a3,t> must be isotropic. The square class of t can be taken as
    # +-(product of bad primes) * (one auxiliary prime), so search those.
    bad = sorted({v.prime for v in relevant_places(a) if not v.is_real})
    subsets = [math.prod(c) for r in range(len(bad) + 1) for c in combinations(bad, r)]
    for aux in [1] + [p for p in primerange(3, 2000) if p not in bad]:
        for base, sign in product(subsets, (1, -1)):
            t = Fraction(sign * base * aux)
            left = QuadraticForm((a[0], a[1], -t))
            right = QuadraticForm((a[2], a[3], t))
            if not (_locally_isotropic_everywhere(left) and _locally_isotropic_everywhere(right)):
                continue
            l, r_ = _ternary_witness(left.diagonal, bound), _ternary_witness(right.diagonal, bound)
            # a zero last coordinate would mean an isotropic binary part, handled above
            if l is None or r_ is None or l[2] == 0 or r_[2] == 0:
                continue
            return (l[0] / l[2], l[1] / l[2], r_[0] / r_[2], r_[1] / r_[2])
    return None


# -- constructions -------------------------------------------------------------


def orthogonal_sum(q1: QuadraticForm, q2: QuadraticForm) -> QuadraticForm:
    return QuadraticForm(q1.diagonal + q2.diagonal)


def tensor_product(q1: QuadraticForm, q2: QuadraticForm) -> QuadraticForm:
    return QuadraticForm(tuple(a * b for a in q1.diagonal for b in q2.diagonal))


def pfister(slots: Iterable) -> QuadraticForm:
    """<<a_1, ..., a_k>> = <1, a_1> (x) ... (x) <1, a_k>."""
    q = QuadraticForm((Fraction(1),))
    for a in slots:
        a = parse_rational(a) if isinstance(a, str) else Fraction(a)
        q = tensor_product(q, QuadraticForm((Fraction(1), a)))
    return q


# -- the I^3 criterion -----------------------------------------------------------


def in_I3_wittclass(q: QuadraticForm) -> bool:
    """Witt class in I^3: even dimension, trivial discriminant, trivial Clifford invariant."""
    return q.dimension % 2 == 0 and has_trivial_discriminant(q) and clifford_invariant(q).is_trivial()


@dataclass(frozen=True)
class Prop2Report:
    even_dimension: bool
    trivial_discriminant: bool
    trivial_clifford_invariant: bool
    anisotropic: bool

    @property
    def in_I3(self) -> bool:
        return self.even_dimension and self.trivial_discriminant and self.trivial_clifford_invariant

    @property
    def all_hypotheses(self) -> bool:
        return self.in_I3 and self.anisotropic

    def to_json(self) -> dict:
        return {
            "even_dimension": self.even_dimension,
            "trivial_discriminant": self.trivial_discriminant,
            "trivial_clifford_invariant": self.trivial_clifford_invariant,
            "anisotropic": self.anisotropic,
            "in_I3": self.in_I3,
            "all_hypotheses": self.all_hypotheses,
        }


def prop2_hypotheses(q: QuadraticForm) -> Prop2Report:
    return Prop2Report(
        even_dimension=q.dimension % 2 == 0,
        trivial_discriminant=has_trivial_discriminant(q),
        trivial_clifford_invariant=clifford_invariant(q).is_trivial(),
        anisotropic=is_anisotropic(q),
    )


def analyze(q: QuadraticForm) -> dict:
    """Every invariant of q in JSON-ready form."""
    aniso = anisotropy(q)
    places = places_of(q)
    return {
        "form": q.to_json()["diag"],
        "dimension": q.dimension,
        "determinant": determinant(q).representative,
        "signed_determinant": signed_determinant(q).representative,
        "trivial_discriminant": has_trivial_discriminant(q),
        "signature": list(q.signature()),
        "hasse_invariants": {str(v): hasse_invariant(q, v) for v in places if hasse_invariant(q, v) == -1},
        "clifford_invariant": clifford_invariant(q).to_json()["inv"],
        "anisotropic": aniso.anisotropic,
        "isotropy_witness": list(aniso.witness) if aniso.witness is not None else None,
        "in_I3": in_I3_wittclass(q),
        "prop2": prop2_hypotheses(q).to_json(),
    }
