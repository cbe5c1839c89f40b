import itertools
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from planarstat.field import (
    ONE, PHI, PHI_INV, SQRT5, ZERO, FieldElement, FieldVec3, cross, det3, dist2, dot, inv3,
    matmul3, sign, IDENTITY3,
)
from planarstat.geometry import build_solid

mpmath.mp.dps = 60
SQRT5_HP = mpmath.sqrt(5)

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=40)
elements = st.builds(FieldElement, fractions, fractions)


def hp(u: FieldElement):
    return mpmath.mpf(u.a.numerator) / u.a.denominator + mpmath.mpf(u.b.numerator) / u.b.denominator * SQRT5_HP


def test_golden_ratio_identities():
    assert PHI * PHI == PHI + 1
    assert PHI * PHI_INV == ONE
    assert SQRT5 * SQRT5 == FieldElement(5)
    assert (PHI - PHI_INV) == ONE


def test_sign_of_known_values():
    assert sign(SQRT5 - 2) == 1
    assert sign(FieldElement(Fraction(9, 4)) - SQRT5) == 1
    assert sign(FieldElement(Fraction(-9, 4), 1)) == -1
    assert sign(ZERO) == 0
    assert sign(PHI - FieldElement(Fraction(1618, 1000))) == 1


def test_inverse_of_zero_raises():
    with pytest.raises(ZeroDivisionError):
        ZERO.inverse()
    with pytest.raises(ZeroDivisionError):
        ONE / ZERO


@settings(max_examples=400, deadline=None)
@given(elements, elements, elements)
def test_field_axioms(x, y, z):
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x - x == ZERO
    if x:
        assert x * x.inverse() == ONE
        assert (y / x) * x == y


def test_field_axioms_randomized_bulk():
    rng = random.Random(7)

    def draw():
        return FieldElement(Fraction(rng.randint(-30, 30), rng.randint(1, 12)),
                            Fraction(rng.randint(-30, 30), rng.randint(1, 12)))

    for _ in range(10_000):
        x, y, z = draw(), draw(), draw()
        assert x * (y + z) == x * y + x * z
        assert (x + y) - y == x
        if x:
            assert x * x.inverse() == ONE


@settings(max_examples=500, deadline=None)
@given(elements)
def test_sign_matches_high_precision(x):
    ref = hp(x)
    expected = 0 if x.a == 0 and x.b == 0 else (1 if ref > 0 else -1)
    assert sign(x) == expected


@given(elements, elements)
def test_order_is_total_and_consistent(x, y):
    assert (x < y) + (x == y) + (x > y) == 1
    assert (x < y) == (hp(x) < hp(y))


def test_norm_is_multiplicative_and_conjugate_is_automorphism():
    xs = [FieldElement(Fraction(a), Fraction(b, 3)) for a in range(-3, 4) for b in range(-3, 4)]
    for x, y in itertools.product(xs[::5], xs[::3]):
        assert (x * y).norm() == x.norm() * y.norm()
        assert (x * y).conjugate() == x.conjugate() * y.conjugate()


def test_hash_agrees_with_equality():
    assert hash(FieldElement(2)) == hash(FieldElement(Fraction(4, 2), 0))
    assert len({PHI, PHI_INV + 1, FieldElement(Fraction(1, 2), Fraction(1, 2))}) == 1


def test_vector_helpers():
    e1, e2, e3 = FieldVec3.of(1, 0, 0), FieldVec3.of(0, 1, 0), FieldVec3.of(0, 0, 1)
    assert cross(e1, e2) == e3
    assert dot(e1, e2) == ZERO
    v = FieldVec3(PHI, ONE, ZERO)
    assert dot(cross(v, e3), v) == ZERO


def test_matrix_inverse():
    m = ((PHI, ONE, ZERO), (ZERO, PHI_INV, ONE), (ONE, ZERO, SQRT5))
    assert det3(m) != ZERO
    assert matmul3(m, inv3(m)) == IDENTITY3


def test_dodecahedron_distance_set_is_finite_with_expected_minimum():
    model = build_solid("dodecahedron")
    d = {dist2(p, q) for p, q in itertools.combinations(model.vertices, 2)}
    assert len(d) == 5
    assert min(d) == 4 * (PHI - 1) * (PHI - 1)
    assert max(d) == FieldElement(12)


def test_worked_examples():
    assert PHI + PHI_INV == SQRT5
    assert PHI + PHI.conjugate() == ONE
    assert sign(ONE - SQRT5) == -1
    assert sign(2 * PHI - 2 - (SQRT5 - 1)) == 0
    v8 = build_solid("dodecahedron").vertices[8]
    assert dot(v8, v8) == FieldElement(3)
    assert (v8 - v8).is_zero()
