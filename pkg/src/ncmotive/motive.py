"""Formal Chow and noncommutative motives, and the orbit-category calculus.

Lefschetz-type objects are lists of twists ``[l_1, ..., l_m]`` standing for
``L^l_1 + ... + L^l_m``. In the orbit category for tensoring with the Tate
motive O = L^-1, a morphism ``a -> b`` is a family ``{f_j}`` with
``f_j: a -> b (x) O^j``; between Lefschetz objects the entry (r, s) of f_j
can be nonzero only when ``target[r] - j == source[s]``, so each pair (r, s)
has exactly one admissible degree.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .arith import IdempotentSplit, RingTag, ScalarMatrix, idempotent_split
from .brauer import AnyClass, BrauerClass, CyclicClass
from .errors import (
    DimensionTooSmall,
    InputError,
    NonFreeFactor,
    NotInverse,
    RangeViolation,
    ShapeMismatch,
    SupportViolation,
    TagMismatch,
    TagTooSmall,
)
from .qform import QuadraticForm, clifford_invariant, has_trivial_discriminant, signed_determinant

Components = Mapping[int, ScalarMatrix]


# -- orbit category -------------------------------------------------------------


def orbit_hom_shape(source: Sequence[int], target: Sequence[int]) -> list[tuple[int, int, int]]:
    """Admissible ``(j, row, col)`` slots (0-based) of Hom(source, target)."""
    return sorted((t - s, r, c) for r, t in enumerate(target) for c, s in enumerate(source))


@dataclass(frozen=True, eq=False)
class OrbitMorphism:
    source: tuple[int, ...]
    target: tuple[int, ...]
    components: Mapping[int, ScalarMatrix]
    tag: RingTag

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "target", tuple(self.target))
        comps = {}
        for j, M in dict(self.components).items():
            if M.tag != self.tag:
                raise TagMismatch(f"component {j} over {M.tag}, morphism over {self.tag}")
            if M.shape != (len(self.target), len(self.source)):
                raise ShapeMismatch(f"component {j} has shape {M.shape}, expected {(len(self.target), len(self.source))}")
            if not M.is_zero():
                comps[int(j)] = M
        object.__setattr__(self, "components", dict(sorted(comps.items())))
        check_support(self)

    @classmethod
    def identity(cls, twists: Sequence[int], tag: RingTag) -> "OrbitMorphism":
        n = len(twists)
        return cls(twists, twists, {0: ScalarMatrix.identity(n, tag)} if n else {}, tag)

    @classmethod
    def from_flat(cls, source: Sequence[int], target: Sequence[int], flat: ScalarMatrix) -> "OrbitMorphism":
        """Distribute a |target| x |source| matrix over the admissible degrees."""
        if flat.shape != (len(target), len(source)):
            raise ShapeMismatch("flat matrix shape does not match the objects")
        buckets: dict[int, list[list[Fraction]]] = {}
        for r, t in enumerate(target):
            for c, s in enumerate(source):
                v = flat.value(r, c)
                if v:
                    j = t - s
                    if j not in buckets:
                        buckets[j] = [[Fraction(0)] * len(source) for _ in target]
                    buckets[j][r][c] = v
        return cls(source, target, {j: ScalarMatrix(rows, flat.tag) for j, rows in buckets.items()}, flat.tag)

    def flat(self) -> ScalarMatrix:
        rows = [[Fraction(0)] * len(self.source) for _ in self.target]
        for M in self.components.values():
            for r in range(M.rows):
                for c in range(M.cols):
                    v = M.value(r, c)
                    if v:
                        rows[r][c] += v
        return ScalarMatrix(rows, self.tag)

    def component(self, j: int) -> ScalarMatrix:
        return self.components.get(j) or ScalarMatrix.zero(len(self.target), len(self.source), self.tag)

    def stripped(self) -> dict[int, ScalarMatrix]:
        """The components alone, with the source and target twists removed."""
        return dict(self.components)

    def __eq__(self, other):
        if not isinstance(other, OrbitMorphism):
            return NotImplemented
        return (self.source, self.target, self.tag, self.components) == (other.source, other.target, other.tag, other.components)

    def __hash__(self):
        return hash((self.source, self.target, tuple(self.components.items())))

    def to_json(self) -> dict:
        return {
            "source": list(self.source),
            "target": list(self.target),
            "tag": self.tag.to_json(),
            "components": {str(j): M.to_json() for j, M in self.components.items()},
        }


def check_support(f: OrbitMorphism) -> None:
    for j, M in f.components.items():
        for r, t in enumerate(f.target):
            for c, s in enumerate(f.source):
                if M.value(r, c) != 0 and t - j != s:
                    raise SupportViolation(f"entry ({r},{c}) of component {j} breaks {t} - {j} == {s}")


def _convolve(g: Components, f: Components) -> dict[int, ScalarMatrix]:
    out: dict[int, ScalarMatrix] = {}
    for j, fj in f.items():
        for k, gk in g.items():
            prod = gk @ fj
            l = j + k
            out[l] = out[l] + prod if l in out else prod
    return {l: M for l, M in out.items() if not M.is_zero()}


def orbit_compose(g: OrbitMorphism, f: OrbitMorphism) -> OrbitMorphism:
    """(g o f)_l = sum_j g_{l-j} f_j."""
    if f.target != g.source:
        raise ShapeMismatch(f"cannot compose: f lands in {list(f.target)}, g starts at {list(g.source)}")
    if f.tag != g.tag:
        raise TagMismatch(f"{f.tag} vs {g.tag}")
    if not f.source or not g.target:
        return OrbitMorphism(f.source, g.target, {}, f.tag)
    return OrbitMorphism(f.source, g.target, _convolve(g.components, f.components), f.tag)


def orbit_is_isomorphism(f: OrbitMorphism) -> OrbitMorphism | None:
    """Inverse of f in the orbit category, or None if the flattened determinant is not a unit."""
    if len(f.source) != len(f.target):
        return None
    if not f.source:
        return OrbitMorphism((), (), {}, f.tag)
    inv = f.flat().inverse()
    if inv is None:
        return None
    return OrbitMorphism.from_flat(f.target, f.source, inv)


# -- random isomorphisms ----------------------------------------------------------


def _random_unit(tag: RingTag, rng: random.Random) -> Fraction:
    u = Fraction(rng.choice((-1, 1)))
    for p in sorted(tag.prime_support):
        u *= Fraction(p) ** rng.randint(-1, 1)
    return u


def random_invertible_matrix(n: int, tag: RingTag, rng: random.Random, spread: int = 3) -> tuple[ScalarMatrix, ScalarMatrix]:
    """(F, F^-1) with F = permutation * unit diagonal * unipotent upper triangular."""
    perm = list(range(n))
    rng.shuffle(perm)
    units = [_random_unit(tag, rng) for _ in range(n)]
    P = ScalarMatrix([[units[r] if perm[r] == c else 0 for c in range(n)] for r in range(n)], tag)
    U = ScalarMatrix([[1 if r == c else (rng.randint(-spread, spread) if c > r else 0) for c in range(n)] for r in range(n)], tag)
    F = P @ U
    inv = F.inverse()
    assert inv is not None
    return F, inv


def random_orbit_isomorphism(hidden: Sequence[int], tag: RingTag, rng: random.Random) -> tuple[OrbitMorphism, OrbitMorphism]:
    """An orbit isomorphism f: (+)_s L^hidden[s] -> 1^m and its inverse g."""
    m = len(hidden)
    F, G = random_invertible_matrix(m, tag, rng)
    units = tuple([0] * m)
    f = OrbitMorphism.from_flat(hidden, units, F)
    g = OrbitMorphism.from_flat(units, hidden, G)
    return f, g


def random_lefschetz_morphism(source: Sequence[int], target: Sequence[int], tag: RingTag, rng: random.Random, spread: int = 3) -> OrbitMorphism:
    if not source or not target:
        return OrbitMorphism(source, target, {}, tag)
    flat = ScalarMatrix([[rng.randint(-spread, spread) for _ in source] for _ in target], tag)
    return OrbitMorphism.from_flat(source, target, flat)


# -- twist reconstruction ---------------------------------------------------------


@dataclass(frozen=True)
class Reconstruction:
    twists: tuple[int, ...]
    block_ranks: dict[int, int]
    splittings: dict[int, IdempotentSplit] = field(repr=False)


def _common_tag(*families: Components) -> RingTag:
    tags = {M.tag for fam in families for M in fam.values()}
    if len(tags) != 1:
        raise TagMismatch(f"components carry tags {tags}")
    return tags.pop()


def _shape(comps: Components) -> tuple[int, int]:
    shapes = {M.shape for M in comps.values()}
    if len(shapes) != 1:
        raise ShapeMismatch(f"components have shapes {shapes}")
    return shapes.pop()


def theorem1_reconstruct(f: OrbitMorphism | Components, g: OrbitMorphism | Components, d: int) -> Reconstruction:
    """Recover twists l_1..l_m with X = L^l_1 + ... + L^l_m from an orbit isomorphism X ~ 1^m.

    Only the components of f and g are read. Steps: check that f_j, g_k vanish
    outside -d <= j <= 0 and 0 <= k <= d; check g o f and f o g are identities;
    assemble alpha = (f_{-l})_l and beta = (g_l)_l and check beta alpha = 1;
    split each diagonal block f_{-l} g_l of the idempotent alpha beta over
    the coefficient ring; l appears with multiplicity equal to that block's rank.
    """
    fc = f.stripped() if isinstance(f, OrbitMorphism) else {j: M for j, M in f.items() if not M.is_zero()}
    gc = g.stripped() if isinstance(g, OrbitMorphism) else {j: M for j, M in g.items() if not M.is_zero()}
    if d < 0:
        raise InputError("dimension bound must be non-negative")
    if not fc and not gc:
        return Reconstruction((), {}, {})
    if not fc or not gc:
        raise NotInverse("one of the morphisms is zero")
    tag = _common_tag(fc, gc)
    m, n = _shape(fc)
    if _shape(gc) != (n, m):
        raise ShapeMismatch("g must go the opposite way to f")
    for j in fc:
        if not -d <= j <= 0:
            raise RangeViolation(f"f has a nonzero component in degree {j}, outside [-{d}, 0]")
    for k in gc:
        if not 0 <= k <= d:
            raise RangeViolation(f"g has a nonzero component in degree {k}, outside [0, {d}]")

    gf = _convolve(gc, fc)
    fg = _convolve(fc, gc)
    if gf != {0: ScalarMatrix.identity(n, tag)} or fg != {0: ScalarMatrix.identity(m, tag)}:
        raise NotInverse("g o f and f o g must both be the identity")

    zero_f = ScalarMatrix.zero(m, n, tag)
    zero_g = ScalarMatrix.zero(n, m, tag)
    alpha = [fc.get(-l, zero_f) for l in range(d + 1)]
    beta = [gc.get(l, zero_g) for l in range(d + 1)]
    ba = ScalarMatrix.zero(n, n, tag)
    for a, b in zip(alpha, beta):
        ba = ba + b @ a
    if ba != ScalarMatrix.identity(n, tag):
        raise NotInverse("beta o alpha is not the identity")

    ranks: dict[int, int] = {}
    splits: dict[int, IdempotentSplit] = {}
    twists: list[int] = []
    for l in range(d + 1):
        for l2 in range(d + 1):
            if l2 != l and not (alpha[l] @ beta[l2]).is_zero():
                raise SupportViolation(f"alpha beta has a nonzero block ({l}, {l2})")
        block = alpha[l] @ beta[l]
        split = idempotent_split(block)
        if split.rank:
            ranks[l] = split.rank
            splits[l] = split
            twists.extend([l] * split.rank)
    if len(twists) != m:
        raise NonFreeFactor(f"selected subsum has {len(twists)} terms, expected {m}")
    return Reconstruction(tuple(twists), ranks, splits)


def reconstruction_trial(m: int, d: int, rng: random.Random) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """One randomized round: returns (hidden twists, reconstructed twists)."""
    tag = RingTag.inverting_factorial(2 * d)
    hidden = tuple(sorted(rng.randint(0, d) for _ in range(m)))
    order = list(hidden)
    rng.shuffle(order)
    f, g = random_orbit_isomorphism(order, tag, rng)
    # only the bare components cross over to the algorithm
    result = theorem1_reconstruct(f.stripped(), g.stripped(), d)
    return hidden, tuple(sorted(result.twists))


def orbit_law_trial(rng: random.Random, tag: RingTag | None = None, size: int = 3, max_twist: int = 3) -> bool:
    """Associativity and unit laws on one random composable triple."""
    tag = tag or RingTag(6)
    objs = [[rng.randint(-max_twist, max_twist) for _ in range(rng.randint(1, size))] for _ in range(4)]
    f = random_lefschetz_morphism(objs[0], objs[1], tag, rng)
    g = random_lefschetz_morphism(objs[1], objs[2], tag, rng)
    h = random_lefschetz_morphism(objs[2], objs[3], tag, rng)
    left = orbit_compose(h, orbit_compose(g, f))
    right = orbit_compose(orbit_compose(h, g), f)
    unit_ok = orbit_compose(OrbitMorphism.identity(objs[1], tag), f) == f and orbit_compose(f, OrbitMorphism.identity(objs[0], tag)) == f
    return left == right and unit_ok


# -- formal motives ---------------------------------------------------------------


@dataclass(frozen=True)
class UnitAtom:
    """Motive of the point."""

    dimension: int = 0

    def __str__(self):
        return "1"


@dataclass(frozen=True)
class OpaqueAtom:
    """M(X) for a variety the artifact treats as a black box."""

    label: str
    dimension: int
    nc_image: "NCMotiveExpr | None" = field(default=None, compare=False)

    def __str__(self):
        return f"M({self.label})"


ChowAtom = Union[UnitAtom, OpaqueAtom]


@dataclass(frozen=True)
class ChowMotiveExpr:
    terms: tuple[tuple[ChowAtom, int], ...] = ()

    @classmethod
    def lefschetz(cls, twists: Iterable[int]) -> "ChowMotiveExpr":
        return cls(tuple((UnitAtom(), int(l)) for l in twists))

    def __add__(self, other: "ChowMotiveExpr") -> "ChowMotiveExpr":
        return ChowMotiveExpr(self.terms + other.terms)

    def twist(self, l: int) -> "ChowMotiveExpr":
        return ChowMotiveExpr(tuple((a, t + l) for a, t in self.terms))

    @property
    def dimension(self) -> int:
        return max((a.dimension for a, _ in self.terms), default=0)

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for a, t in self.terms:
            if isinstance(a, UnitAtom):
                out.append("1" if t == 0 else ("L" if t == 1 else f"L^{t}"))
            else:
                out.append(str(a) if t == 0 else f"{a}({t})")
        return " + ".join(out)


def is_lefschetz_type(e: ChowMotiveExpr) -> tuple[int, ...] | None:
    if any(not isinstance(a, UnitAtom) or t < 0 for a, t in e.terms):
        return None
    return tuple(sorted(t for _, t in e.terms))


@dataclass(frozen=True)
class UnitNC:
    def __str__(self):
        return "1"


@dataclass(frozen=True)
class AlgebraAtom:
    """U(A^{(x) power}) for a central simple algebra known through its Brauer class."""

    klass: AnyClass
    power: int = 1
    label: str = "A"

    def __post_init__(self):
        if self.power < 1:
            raise InputError("algebra atoms need a positive tensor power")

    @property
    def effective_class(self) -> AnyClass:
        return self.klass.power(self.power)

    def __str__(self):
        return f"U({self.label})" if self.power == 1 else f"U({self.label}^{self.power})"

    def to_json(self) -> dict:
        return {**self.klass.to_json(), "power": self.power, "label": self.label}


@dataclass(frozen=True)
class OpaqueNC:
    label: str
    data: tuple = ()

    def __str__(self):
        return f"U({self.label})"

    def to_json(self) -> dict:
        return {"label": self.label, **dict(self.data)}


NCAtom = Union[UnitNC, AlgebraAtom, OpaqueNC]


@dataclass(frozen=True)
class NCMotiveExpr:
    """Formal direct sum of noncommutative motive atoms, kept normalized."""

    terms: tuple[NCAtom, ...] = ()

    def __post_init__(self):
        out = []
        for a in self.terms:
            if isinstance(a, AlgebraAtom) and a.effective_class.is_trivial():
                a = UnitNC()
            out.append(a)
        units = [a for a in out if isinstance(a, UnitNC)]
        algs = [a for a in out if isinstance(a, AlgebraAtom)]
        opq = [a for a in out if isinstance(a, OpaqueNC)]
        object.__setattr__(self, "terms", tuple(units + algs + opq))

    @classmethod
    def units(cls, m: int) -> "NCMotiveExpr":
        return cls(tuple(UnitNC() for _ in range(m)))

    def __add__(self, other: "NCMotiveExpr") -> "NCMotiveExpr":
        return NCMotiveExpr(self.terms + other.terms)

    def __len__(self):
        return len(self.terms)

    @property
    def unit_count(self) -> int:
        return sum(1 for a in self.terms if isinstance(a, UnitNC))

    def is_decomposable(self) -> bool:
        return len(self.terms) >= 2

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        k = self.unit_count
        if k:
            parts.append("1" if k == 1 else f"{k}*1")
        parts.extend(str(a) for a in self.terms if not isinstance(a, UnitNC))
        return " + ".join(parts)

    def to_json(self) -> dict:
        return {
            "unit": self.unit_count,
            "algebras": [a.to_json() for a in self.terms if isinstance(a, AlgebraAtom)],
            "opaque": [a.to_json() for a in self.terms if isinstance(a, OpaqueNC)],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "NCMotiveExpr":
        terms: list[NCAtom] = [UnitNC() for _ in range(int(data.get("unit", 0)))]
        for alg in data.get("algebras", []):
            if "order" in alg:
                klass: AnyClass = CyclicClass(int(alg["order"]), int(alg.get("exponent", 1)))
            else:
                klass = BrauerClass.from_json(alg)
            terms.append(AlgebraAtom(klass, int(alg.get("power", 1)), alg.get("label", "A")))
        for op in data.get("opaque", []):
            label = op["label"]
            terms.append(OpaqueNC(label, tuple((k, v) for k, v in op.items() if k != "label")))
        return cls(tuple(terms))


def is_unit_type(e: NCMotiveExpr) -> int | None:
    if all(isinstance(a, UnitNC) for a in e.terms):
        return len(e.terms)
    return None


# -- decompositions ---------------------------------------------------------------


def quadric_nc_motive(q: QuadraticForm) -> NCMotiveExpr:
    """U(perf(Q_q)) = U(C_0(q)) + 1^(dim q - 2) from perf(Q_q) = <perf C_0(q), O(-d+1), ..., O>."""
    n = q.dimension
    if n < 3:
        raise DimensionTooSmall(f"a form of dimension {n} does not cut out a positive-dimensional quadric")
    lines = NCMotiveExpr.units(n - 2)
    beta = clifford_invariant(q)
    if n % 2:
        c0 = NCMotiveExpr((AlgebraAtom(beta, 1, "C0"),))
    elif has_trivial_discriminant(q):
        # C_0(q) = B x B with [B] = beta
        c0 = NCMotiveExpr((AlgebraAtom(beta, 1, "C0+"), AlgebraAtom(beta, 1, "C0-")))
    else:
        dpm = signed_determinant(q).representative
        c0 = NCMotiveExpr((OpaqueNC("C0", (("center", f"Q(sqrt({dpm}))"), ("signed_determinant", dpm))),))
    return c0 + lines


def severi_brauer_nc_motive(klass: AnyClass, degree: int) -> NCMotiveExpr:
    """1 + U(A) + U(A^2) + ... + U(A^{d-1}) for SB(A), deg A = d."""
    if degree < 1:
        raise InputError("degree must be at least 1")
    if isinstance(klass, BrauerClass) and degree % klass.order():
        raise InputError(f"a class of order {klass.order()} has no algebra of degree {degree}")
    if isinstance(klass, CyclicClass) and degree % klass.order():
        raise InputError(f"a class of order {klass.order()} has no algebra of degree {degree}")
    return NCMotiveExpr((UnitNC(),) + tuple(AlgebraAtom(klass, i) for i in range(1, degree)))


def chow_indecomposable_by_citation(klass: AnyClass, degree: int, division: bool) -> bool:
    """Karpenko's criterion, recorded from degree and order data only (not computed).

    True when A is declared a division algebra with deg A = order = p^s, s >= 1.
    """
    if not division or degree < 2 or klass.order() != degree:
        return False
    from sympy import factorint

    return len(factorint(degree)) == 1


def _nc_image(atom: ChowAtom) -> NCMotiveExpr:
    if isinstance(atom, UnitAtom):
        return NCMotiveExpr((UnitNC(),))
    if atom.nc_image is not None:
        return atom.nc_image
    return NCMotiveExpr((OpaqueNC(f"perf({atom.label})"),))


def _as_expr(side: ChowMotiveExpr | Iterable[ChowMotiveExpr]) -> ChowMotiveExpr:
    if isinstance(side, ChowMotiveExpr):
        return side
    out = ChowMotiveExpr()
    for e in side:
        out = out + e
    return out


def theorem3_transfer(
    lhs: ChowMotiveExpr | Iterable[ChowMotiveExpr],
    rhs: ChowMotiveExpr | Iterable[ChowMotiveExpr],
    tag: RingTag,
    assume_isomorphic: bool = True,
) -> tuple[NCMotiveExpr, NCMotiveExpr] | None:
    """From an assumed twisted Chow isomorphism, the induced claim between NC motives.

    Twists are dropped (the orbit projection forgets them) and every atom is sent
    to its declared NC image. The coefficient ring must invert (2d)!.
    """
    lhs, rhs = _as_expr(lhs), _as_expr(rhs)
    d = max(lhs.dimension, rhs.dimension)
    if not tag.is_unit(math.factorial(2 * d)):
        raise TagTooSmall(f"{tag} does not invert (2*{d})! = {math.factorial(2 * d)}")
    if not assume_isomorphic:
        return None
    left = NCMotiveExpr(tuple(a for atom, _ in lhs.terms for a in _nc_image(atom).terms))
    right = NCMotiveExpr(tuple(a for atom, _ in rhs.terms for a in _nc_image(atom).terms))
    lu, ru = is_unit_type(left), is_unit_type(right)
    if lu is not None and ru is not None and lu != ru:
        raise InputError(f"the assumed isomorphism is impossible: {lu} vs {ru} unit summands")
    return left, right
