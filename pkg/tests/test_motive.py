import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncmotive.arith import ZZ, RingTag, ScalarMatrix
from ncmotive.brauer import BrauerClass, abstract_class, from_quaternion
from ncmotive.errors import (
    DimensionTooSmall,
    NotInverse,
    RangeViolation,
    ShapeMismatch,
    SupportViolation,
    TagTooSmall,
)
from ncmotive.motive import (
    AlgebraAtom,
    ChowMotiveExpr,
    NCMotiveExpr,
    OpaqueAtom,
    OrbitMorphism,
    UnitAtom,
    UnitNC,
    chow_indecomposable_by_citation,
    is_lefschetz_type,
    is_unit_type,
    orbit_compose,
    orbit_hom_shape,
    orbit_is_isomorphism,
    quadric_nc_motive,
    random_lefschetz_morphism,
    random_orbit_isomorphism,
    reconstruction_trial,
    severi_brauer_nc_motive,
    theorem1_reconstruct,
    theorem3_transfer,
)
from ncmotive.qform import QuadraticForm, pfister

T6 = RingTag(6)


def brute_compose(g, f):
    """Sum over every pair (j, k) of components and every inner index, slot by slot."""
    out = {}
    for j, fj in f.components.items():
        for k, gk in g.components.items():
            for r in range(len(g.target)):
                for c in range(len(f.source)):
                    v = sum((gk.value(r, i) * fj.value(i, c) for i in range(len(f.target))), Fraction(0))
                    if v:
                        out[(j + k, r, c)] = out.get((j + k, r, c), 0) + v
    return {key: v for key, v in out.items() if v}


def as_slots(h):
    return {(l, r, c): M.value(r, c) for l, M in h.components.items() for r in range(M.rows) for c in range(M.cols) if M.value(r, c)}


class TestHomShape:
    def test_examples(self):
        assert orbit_hom_shape([0], [0]) == [(0, 0, 0)]
        assert orbit_hom_shape([1], [0]) == [(-1, 0, 0)]
        slots = orbit_hom_shape([0, 1], [0, 1])
        assert {(j, r, c) for j, r, c in slots} == {(0, 0, 0), (0, 1, 1), (-1, 0, 1), (1, 1, 0)}


class TestCompose:
    def test_identity(self):
        rng = random.Random(3)
        f = random_lefschetz_morphism([0, 2], [1, 1, 3], T6, rng)
        assert orbit_compose(OrbitMorphism.identity([1, 1, 3], T6), f) == f
        assert orbit_compose(f, OrbitMorphism.identity([0, 2], T6)) == f

    def test_concentrated(self):
        f = OrbitMorphism.from_flat([0], [2], ScalarMatrix([[3]], ZZ))
        g = OrbitMorphism.from_flat([2], [5], ScalarMatrix([[2]], ZZ))
        h = orbit_compose(g, f)
        assert list(h.components) == [5] and h.component(5).value(0, 0) == 6

    @pytest.mark.parametrize("seed", range(10))
    def test_brute_force(self, seed):
        rng = random.Random(seed)
        a, b, c = ([rng.randint(-2, 2) for _ in range(3)] for _ in range(3))
        f = random_lefschetz_morphism(a, b, T6, rng)
        g = random_lefschetz_morphism(b, c, T6, rng)
        assert as_slots(orbit_compose(g, f)) == brute_compose(g, f)

    def test_shape_mismatch(self):
        f = OrbitMorphism.identity([0], ZZ)
        g = OrbitMorphism.identity([0, 1], ZZ)
        with pytest.raises(ShapeMismatch):
            orbit_compose(g, f)

    def test_support_enforced(self):
        with pytest.raises(SupportViolation):
            OrbitMorphism([0], [0], {1: ScalarMatrix([[1]], ZZ)}, ZZ)


class TestIsomorphism:
    def test_identity(self):
        e = OrbitMorphism.identity([0, 1], ZZ)
        assert orbit_is_isomorphism(e) == e

    def test_swap(self):
        f = OrbitMorphism.from_flat([0, 1], [1, 0], ScalarMatrix([[0, 1], [1, 0]], ZZ))
        inv = orbit_is_isomorphism(f)
        assert inv.flat() == f.flat()
        assert orbit_compose(inv, f) == OrbitMorphism.identity([0, 1], ZZ)

    def test_unit_depends_on_tag(self):
        assert orbit_is_isomorphism(OrbitMorphism.from_flat([0], [0], ScalarMatrix([[3]], RingTag(2)))) is None
        assert orbit_is_isomorphism(OrbitMorphism.from_flat([0], [0], ScalarMatrix([[3]], T6))) is not None


class TestReconstruct:
    def test_point(self):
        tag = RingTag(2)
        f, g = random_orbit_isomorphism([0], tag, random.Random(0))
        assert theorem1_reconstruct(f, g, 0).twists == (0,)

    @pytest.mark.parametrize("hidden", [(0, 1), (1, 0), (0, 1, 2), (2, 2, 0, 1)])
    def test_known(self, hidden):
        d = max(hidden)
        tag = RingTag.inverting_factorial(2 * d)
        for seed in range(5):
            f, g = random_orbit_isomorphism(list(hidden), tag, random.Random(seed))
            assert orbit_compose(g, f) == OrbitMorphism.identity(hidden, tag)
            out = theorem1_reconstruct(f.stripped(), g.stripped(), d)
            assert sorted(out.twists) == sorted(hidden)

    def test_not_inverse(self):
        tag = RingTag(2)
        f, _ = random_orbit_isomorphism([0, 1], tag, random.Random(1))
        with pytest.raises(NotInverse):
            theorem1_reconstruct(f, {1: ScalarMatrix.identity(2, tag)}, 1)

    def test_range(self):
        tag = RingTag(24)
        f, g = random_orbit_isomorphism([0, 3], tag, random.Random(1))
        with pytest.raises(RangeViolation):
            theorem1_reconstruct(f, g, 2)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6))
    def test_random(self, seed):
        rng = random.Random(seed)
        hidden, found = reconstruction_trial(rng.randint(1, 6), rng.randint(0, 4), rng)
        assert hidden == found


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_orbit_laws(seed):
    rng = random.Random(seed)
    objs = [[rng.randint(-3, 3) for _ in range(rng.randint(1, 3))] for _ in range(4)]
    f, g, h = (random_lefschetz_morphism(objs[i], objs[i + 1], T6, rng) for i in range(3))
    assert orbit_compose(h, orbit_compose(g, f)) == orbit_compose(orbit_compose(h, g), f)


class TestClassification:
    def test_unit_type(self):
        h = from_quaternion(-1, -1)
        assert is_unit_type(NCMotiveExpr.units(2)) == 2
        assert is_unit_type(NCMotiveExpr((UnitNC(), AlgebraAtom(h)))) is None
        assert is_unit_type(NCMotiveExpr((UnitNC(), AlgebraAtom(h, 2)))) == 2

    def test_lefschetz_type(self):
        assert is_lefschetz_type(ChowMotiveExpr.lefschetz([2, 0, 1])) == (0, 1, 2)
        assert is_lefschetz_type(ChowMotiveExpr(((OpaqueAtom("X", 2), 0),))) is None


class TestQuadric:
    def test_pfister(self):
        nc = quadric_nc_motive(pfister([1, 1, 1]))
        assert is_unit_type(nc) == 8

    def test_sum_of_four_squares(self):
        # trivial discriminant: C_0 is a product of two copies of the quaternions
        nc = quadric_nc_motive(QuadraticForm.of(1, 1, 1, 1))
        assert nc.unit_count == 2 and is_unit_type(nc) is None
        algs = [a for a in nc.terms if isinstance(a, AlgebraAtom)]
        assert [a.klass for a in algs] == [from_quaternion(-1, -1)] * 2

    def test_conic(self):
        nc = quadric_nc_motive(QuadraticForm.of(1, 1, 1))
        assert str(nc) == "1 + U(C0)"
        assert quadric_nc_motive(QuadraticForm.of(1, 1, -1)) == NCMotiveExpr.units(2)

    def test_nontrivial_discriminant(self):
        nc = quadric_nc_motive(QuadraticForm.of(1, 1, 1, 2))
        assert nc.unit_count == 2 and nc.to_json()["opaque"][0]["signed_determinant"] == 2

    def test_too_small(self):
        with pytest.raises(DimensionTooSmall):
            quadric_nc_motive(QuadraticForm.of(1, 1))


class TestSeveriBrauer:
    def test_split(self):
        assert severi_brauer_nc_motive(BrauerClass.trivial(), 2) == NCMotiveExpr.units(2)

    def test_quaternion(self):
        nc = severi_brauer_nc_motive(from_quaternion(-1, -1), 2)
        assert str(nc) == "1 + U(A)" and nc.is_decomposable() and is_unit_type(nc) is None

    def test_order_three(self):
        nc = severi_brauer_nc_motive(abstract_class(3), 3)
        assert str(nc) == "1 + U(A) + U(A^2)"

    def test_karpenko_flag(self):
        assert chow_indecomposable_by_citation(abstract_class(3), 3, True)
        assert not chow_indecomposable_by_citation(abstract_class(3), 3, False)
        assert not chow_indecomposable_by_citation(abstract_class(6), 6, True)

    def test_json_roundtrip(self):
        nc = severi_brauer_nc_motive(from_quaternion(-1, 3), 4)
        assert NCMotiveExpr.from_json(nc.to_json()) == nc


class TestTransfer:
    def test_point(self):
        lhs = [ChowMotiveExpr(((UnitAtom(), 3),))]
        rhs = [ChowMotiveExpr(((UnitAtom(), 0),))]
        assert theorem3_transfer(lhs, rhs, ZZ) == (NCMotiveExpr.units(1), NCMotiveExpr.units(1))

    def test_projective_line(self):
        p1 = OpaqueAtom("P1", 1, nc_image=NCMotiveExpr.units(2))
        lhs = ChowMotiveExpr(((p1, 0),))
        rhs = ChowMotiveExpr(((UnitAtom(), 1), (UnitAtom(), 0)))
        left, right = theorem3_transfer(lhs, rhs, RingTag(2))
        assert is_unit_type(left) == is_unit_type(right) == 2

    def test_tag_too_small(self):
        x = ChowMotiveExpr(((OpaqueAtom("S", 2), 0),))
        with pytest.raises(TagTooSmall):
            theorem3_transfer(x, x, ZZ)
        assert theorem3_transfer(x, x, RingTag(24)) is not None
