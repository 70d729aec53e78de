from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncmotive.arith import (
    QQ,
    ZZ,
    LocalizedScalar,
    RingTag,
    ScalarMatrix,
    idempotent_split,
    lemma_arith_check,
    scalar_is_invertible,
    todd_denominator,
)
from ncmotive.errors import NotIdempotent, TagError, TagMismatch

# T_m by trial-division primes, computed once outside the package
T_TABLE = [1, 2, 12, 24, 720, 1440, 60480, 120960, 3628800, 7257600, 479001600, 958003200, 2615348736000]


def S(x, n):
    return LocalizedScalar(Fraction(x), RingTag(n))


class TestRingTag:
    def test_support(self):
        assert RingTag(720).prime_support == {2, 3, 5}
        assert ZZ.prime_support == frozenset()

    def test_zero_rejected(self):
        with pytest.raises(TagError):
            RingTag(0)

    def test_equal_by_support(self):
        assert RingTag(6) == RingTag(36)
        assert RingTag(6) != RingTag(10)

    def test_rationals(self):
        assert QQ.contains(Fraction(1, 7))
        assert not RingTag(6).contains(Fraction(1, 7))


class TestScalars:
    def test_spec_examples(self):
        assert scalar_is_invertible(S(6, 6))
        assert not scalar_is_invertible(S(5, 6))
        assert scalar_is_invertible(S(720, 720))

    def test_zero_not_unit(self):
        assert not scalar_is_invertible(S(0, 6))

    def test_denominator_outside_tag(self):
        with pytest.raises(TagError):
            S(Fraction(1, 5), 6)

    def test_mismatch(self):
        with pytest.raises(TagMismatch):
            S(1, 2) + S(1, 3)

    def test_retag(self):
        x = S(Fraction(1, 2), 2).retag(RingTag(6))
        assert x.tag == RingTag(6) and x.value == Fraction(1, 2)
        with pytest.raises(TagMismatch):
            S(Fraction(1, 6), 6).retag(RingTag(2))


class TestToddDenominator:
    def test_table(self):
        assert [todd_denominator(m) for m in range(13)] == T_TABLE

    @pytest.mark.parametrize("m", range(30))
    def test_no_large_primes(self, m):
        from sympy import factorint

        assert all(p - 1 <= m for p in factorint(todd_denominator(m)))


class TestLemma:
    def test_examples(self):
        assert lemma_arith_check(6, 3, "factorial")
        assert lemma_arith_check(3, 3, "todd")
        assert not lemma_arith_check(5, 1, "factorial")

    def test_bad_which(self):
        with pytest.raises(ValueError):
            lemma_arith_check(1, 1, "other")


class TestMatrices:
    def test_inverse_and_det(self):
        M = ScalarMatrix([[2, 1], [1, 1]], ZZ)
        assert M.determinant() == 1
        assert M @ M.inverse() == ScalarMatrix.identity(2, ZZ)
        assert ScalarMatrix([[3]], RingTag(2)).inverse() is None
        assert ScalarMatrix([[3]], RingTag(6)).inverse() is not None

    def test_json_roundtrip(self):
        M = ScalarMatrix([[Fraction(1, 2), 3], [0, -1]], RingTag(2))
        assert ScalarMatrix.from_json(M.to_json(), RingTag(2)) == M
        assert M.to_json() == [["1/2", "3"], ["0", "-1"]]


class TestIdempotentSplit:
    def test_identity(self):
        sp = idempotent_split(ScalarMatrix.identity(2, RingTag(2)))
        assert sp.rank == 2

    def test_zero(self):
        sp = idempotent_split(ScalarMatrix.zero(3, 3, ZZ))
        assert sp.rank == 0 and sp.image_basis == []

    def test_half(self):
        E = ScalarMatrix([[Fraction(1, 2)] * 2] * 2, RingTag(2))
        sp = idempotent_split(E)
        assert sp.rank == 1
        assert [tuple(v) for v in sp.image_basis] == [(1, 1)]

    def test_not_idempotent(self):
        with pytest.raises(NotIdempotent):
            idempotent_split(ScalarMatrix([[2]], ZZ))


small = st.integers(-30, 30)
frac = st.builds(lambda n, k: Fraction(n, 6**k), small, st.integers(0, 2))


@given(frac, frac, frac)
def test_ring_axioms(a, b, c):
    x, y, z = (LocalizedScalar(v, RingTag(6)) for v in (a, b, c))
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x + y == y + x and x * y == y * x


@given(st.integers(0, 12), st.integers(0, 12))
def test_lemma_holds(m, d):
    if m <= 2 * d:
        assert lemma_arith_check(m, d, "factorial")
    if m <= d:
        assert lemma_arith_check(m, d, "todd")


@st.composite
def idempotents(draw):
    """P D P^-1 with D a 0/1 diagonal and P unimodular-ish over Z[1/6]."""
    n = draw(st.integers(1, 4))
    diag = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    U = [[1 if r == c else (draw(st.integers(-3, 3)) if c > r else 0) for c in range(n)] for r in range(n)]
    L = [[1 if r == c else (draw(st.integers(-3, 3)) if c < r else 0) for c in range(n)] for r in range(n)]
    tag = RingTag(6)
    P = ScalarMatrix(U, tag) @ ScalarMatrix(L, tag)
    D = ScalarMatrix([[diag[r] if r == c else 0 for c in range(n)] for r in range(n)], tag)
    return P @ D @ P.inverse(), sum(diag)


@settings(max_examples=60)
@given(idempotents())
def test_split_roundtrip(data):
    E, rank = data
    sp = idempotent_split(E)
    assert sp.rank == rank == E.trace()
    if rank:
        B = sp.basis_matrix()
        # E fixes its image and B C = E
        assert E @ B == B
        assert B @ sp.coordinates == E
