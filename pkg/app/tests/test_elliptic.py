"""Tests for Weierstrass invariants and the group law."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.arith import QuadElem
from app.elliptic import (
    INFINITY,
    CurvePoint,
    curve_from_ainvs,
    invariants,
    negate,
    on_curve,
    parse_point,
    point_add,
    require_on_curve,
    scalar_mul,
)
from app.errors import MixedFields, NotOnCurve, SingularCurve


multiples = st.integers(-20, 20)

# (label, a-invariants, seed point); the seeds on 11a1, 15a1 and 27a1 are torsion
SEEDED_FAMILIES = [
    ("11a1", (0, -1, 1, -10, -20), (5, 5)),
    ("15a1", (1, 1, 1, -10, -10), (-2, 3)),
    ("27a1", (0, 0, 1, 0, -7), (3, 4)),
    ("37a1", (0, 0, 1, -1, 0), (0, 0)),
    ("43a1", (0, 1, 1, 0, 0), (0, 0)),
    ("53a1", (1, -1, 1, 0, 0), (0, 0)),
]


def k_point_53() -> CurvePoint:
    """(-2, (1 + sqrt(-47))/2) on y^2 + xy + y = x^3 - x^2."""
    return CurvePoint(
        QuadElem(47, Fraction(-2), Fraction(0)), QuadElem(47, Fraction(1, 2), Fraction(1, 2))
    )


@pytest.mark.unit
class TestInvariants:
    """Test b-, c-invariants and the discriminant."""

    def test_curve_43(self, curve_43):
        assert (curve_43.b2, curve_43.b4, curve_43.b6, curve_43.b8) == (4, 0, 1, 1)
        assert curve_43.discriminant == -43

    def test_curve_53(self, curve_53):
        assert (curve_53.b2, curve_53.b4, curve_53.b6, curve_53.b8) == (-3, 1, 1, -1)
        assert curve_53.discriminant == -53

    @pytest.mark.parametrize(
        "ainvs", [(0, 1, 1, 0, 0), (1, -1, 1, 0, 0), (0, -1, 1, -10, -20), (1, 0, 1, 4, -6)]
    )
    def test_classical_identities(self, ainvs):
        E = invariants(*ainvs)
        assert 4 * E.b8 == E.b2 * E.b6 - E.b4**2
        assert 1728 * E.discriminant == E.c4**3 - E.c6**2
        assert E.j == Fraction(E.c4**3, E.discriminant)

    def test_singular(self):
        with pytest.raises(SingularCurve):
            invariants(0, 0, 0, 0, 0)

    def test_str(self, curve_43):
        assert str(curve_43) == "[0,1,1,0,0]"

    @pytest.mark.parametrize("ainvs", [[0, 1, 1, 0], [0, 1, 1, 0, 0.5], [True, 0, 0, 1, 0]])
    def test_rejects_malformed_ainvs(self, ainvs):
        with pytest.raises(ValueError):
            curve_from_ainvs(ainvs)


@pytest.mark.unit
class TestPoints:
    """Test point construction, parsing and membership."""

    def test_integers_become_fractions(self, origin):
        assert origin.x == Fraction(0)
        assert isinstance(origin.x, Fraction)

    def test_parse_literals(self):
        assert parse_point("O") == INFINITY
        assert parse_point(["1/2", "-3"]) == CurvePoint(Fraction(1, 2), Fraction(-3))
        quad = parse_point([{"u": "-2", "v": "0", "d": 47}, {"u": "1/2", "v": "1/2", "d": 47}])
        assert quad == k_point_53()
        assert quad.field == 47

    def test_parse_rejects_mixed_coordinates(self):
        with pytest.raises(MixedFields):
            parse_point([{"u": "0", "v": "1", "d": 11}, "3"])
        with pytest.raises(MixedFields):
            parse_point([{"u": "0", "v": "1", "d": 11}, {"u": "0", "v": "1", "d": 7}])

    @pytest.mark.parametrize("literal", ["P", ["1"], ["1", "2", "3"], 5])
    def test_parse_rejects_bad_shapes(self, literal):
        with pytest.raises(ValueError):
            parse_point(literal)

    def test_on_curve(self, curve_43, curve_53, origin):
        assert on_curve(curve_43, origin)
        assert on_curve(curve_43, INFINITY)
        assert on_curve(curve_53, k_point_53())
        with pytest.raises(NotOnCurve):
            require_on_curve(curve_43, CurvePoint(1, 2))

    def test_json_round_trip(self):
        for P in (INFINITY, CurvePoint(Fraction(-1, 4), Fraction(3)), k_point_53()):
            assert parse_point(P.to_json()) == P

    def test_rational_view_of_quadratic_point(self, origin):
        lifted = origin.over(11)
        assert lifted.field == 11
        assert lifted.is_rational
        assert lifted.as_rational() == origin
        with pytest.raises(ValueError):
            k_point_53().as_rational()


@pytest.mark.unit
class TestGroupLaw:
    """Test the chord-tangent law."""

    def test_identity_and_inverse(self, curve_43, origin):
        assert point_add(curve_43, origin, INFINITY) == origin
        assert point_add(curve_43, INFINITY, origin) == origin
        assert point_add(curve_43, origin, negate(curve_43, origin)).is_infinity

    def test_doubling(self, curve_43, origin):
        assert scalar_mul(curve_43, 2, origin) == CurvePoint(-1, -1)

    def test_zero_and_negative_multiples(self, curve_43, origin):
        assert scalar_mul(curve_43, 0, origin).is_infinity
        assert scalar_mul(curve_43, -3, origin) == negate(
            curve_43, scalar_mul(curve_43, 3, origin)
        )

    def test_golden_multiple_on_curve_53(self, curve_53, origin):
        """28*(0,0) lies in the kernel of reduction mod 31."""
        Q = scalar_mul(curve_53, 28, origin)
        assert abs(Q.x.numerator) == 41 * 1811 * 4019 * 20047 * 511337 * 12164057487289
        assert Q.x.denominator == 2**2 * 3**4 * 31**4 * 607**2 * 467258663**2
        assert abs(Q.y.numerator) == (
            5**2 * 41**2 * 61 * 239 * 4409 * 27329 * 32251 * 12164057487289**2
        )
        assert Q.y.denominator == 2**3 * 3**6 * 31**6 * 607**3 * 467258663**3
        assert on_curve(curve_53, Q)

    def test_quadratic_arithmetic_matches_rational(self, curve_53, origin):
        rational = scalar_mul(curve_53, 7, origin)
        lifted = scalar_mul(curve_53, 7, origin.over(11))
        assert lifted.field == 11
        assert lifted.as_rational() == rational

    def test_quadratic_point_multiples_stay_on_curve(self, curve_53):
        P = k_point_53()
        for n in (2, 3, 5):
            assert on_curve(curve_53, scalar_mul(curve_53, n, P))

    def test_mixed_fields(self, curve_53, origin):
        with pytest.raises(MixedFields):
            point_add(curve_53, origin, k_point_53())
        with pytest.raises(MixedFields):
            point_add(curve_53, origin.over(11), k_point_53())


@pytest.mark.slow
@pytest.mark.parametrize(
    "ainvs, xy",
    [(ainvs, xy) for _, ainvs, xy in SEEDED_FAMILIES],
    ids=[label for label, _, _ in SEEDED_FAMILIES],
)
class TestGroupLawProperties:
    """Randomized group axioms on multiples of a seeded point, 1000 draws per curve."""

    @settings(max_examples=1000, deadline=None)
    @given(m=multiples, n=multiples)
    def test_scalar_multiplication_is_additive(self, ainvs, xy, m, n):
        E, P = invariants(*ainvs), CurvePoint(*xy)
        mP = scalar_mul(E, m, P)
        nP = scalar_mul(E, n, P)
        assert point_add(E, mP, nP) == scalar_mul(E, m + n, P)
        assert point_add(E, mP, negate(E, mP)).is_infinity

    @settings(max_examples=1000, deadline=None)
    @given(a=multiples, b=multiples, c=multiples)
    def test_associative_and_commutative(self, ainvs, xy, a, b, c):
        E, P = invariants(*ainvs), CurvePoint(*xy)
        A, B, C = (scalar_mul(E, k, P) for k in (a, b, c))
        assert point_add(E, A, B) == point_add(E, B, A)
        left = point_add(E, point_add(E, A, B), C)
        right = point_add(E, A, point_add(E, B, C))
        assert left == right
        assert on_curve(E, left)
