"""Weierstrass models over Q and the chord-tangent group law.

Coordinates may be Fractions, elements of Q(sqrt(-d)), or any field element
supporting ``+ - * /`` with integers (the reduction code feeds sympy ``GF(p)``
elements through the same formulas).
"""

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .arith import QuadElem, as_rat, format_rat, require_imaginary_field
from .errors import MixedFields, NotOnCurve, SingularCurve


@dataclass(frozen=True, slots=True)
class WeierstrassModel:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 with its standard invariants."""

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    b2: int
    b4: int
    b6: int
    b8: int
    c4: int
    c6: int
    discriminant: int
    j: Fraction

    @property
    def ainvs(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def __str__(self) -> str:
        return "[" + ",".join(str(a) for a in self.ainvs) + "]"


def invariants(a1: int, a2: int, a3: int, a4: int, a6: int) -> WeierstrassModel:
    """Build the model and its b-, c-invariants, discriminant and j-invariant."""
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    c4 = b2 * b2 - 24 * b4
    c6 = -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6
    discriminant = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    if discriminant == 0:
        raise SingularCurve(
            f"[{a1},{a2},{a3},{a4},{a6}] has zero discriminant", ainvs=[a1, a2, a3, a4, a6]
        )
    return WeierstrassModel(
        a1, a2, a3, a4, a6, b2, b4, b6, b8, c4, c6, discriminant, Fraction(c4**3, discriminant)
    )


def curve_from_ainvs(ainvs: Sequence[int]) -> WeierstrassModel:
    if len(ainvs) != 5 or not all(isinstance(a, int) and not isinstance(a, bool) for a in ainvs):
        raise ValueError(f"expected five integers [a1,a2,a3,a4,a6], got {list(ainvs)!r}")
    return invariants(*ainvs)


def _field_key(c: Any) -> tuple[Any, ...]:
    if isinstance(c, QuadElem):
        return ("quad", c.d)
    if isinstance(c, Fraction | int):
        return ("rat",)
    return ("other", type(c).__name__)


def _is_zero(c: Any) -> bool:
    return not c


@dataclass(frozen=True, slots=True)
class CurvePoint:
    """An affine point (x, y), or the point at infinity when both are None."""

    x: Any = None
    y: Any = None

    def __post_init__(self) -> None:
        if (self.x is None) != (self.y is None):
            raise ValueError("a point needs both coordinates or neither")
        for name in ("x", "y"):
            value = getattr(self, name)
            if isinstance(value, int) and not isinstance(value, bool):
                object.__setattr__(self, name, Fraction(value))
        if self.x is not None and _field_key(self.x) != _field_key(self.y):
            raise MixedFields("coordinates live in different fields", x=self.x, y=self.y)

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    @property
    def field(self) -> int | None:
        """d for a point over Q(sqrt(-d)), None for a rational point or infinity."""
        if isinstance(self.x, QuadElem):
            return self.x.d
        return None

    @property
    def is_rational(self) -> bool:
        if self.is_infinity or isinstance(self.x, Fraction):
            return True
        return isinstance(self.x, QuadElem) and self.x.is_rational and self.y.is_rational

    def as_rational(self) -> "CurvePoint":
        """Collapse a Q(sqrt(-d)) point with zero sqrt(-d) parts to rational coordinates."""
        if isinstance(self.x, QuadElem):
            if not self.is_rational:
                raise ValueError(f"{self} is not defined over Q")
            return CurvePoint(self.x.u, self.y.u)
        return self

    def over(self, d: int) -> "CurvePoint":
        """View a rational point as a point over Q(sqrt(-d))."""
        if self.is_infinity or isinstance(self.x, QuadElem):
            return self
        return CurvePoint(QuadElem.rational(d, self.x), QuadElem.rational(d, self.y))

    def to_json(self) -> Any:
        if self.is_infinity:
            return "O"
        if isinstance(self.x, QuadElem):
            return [self.x.to_json(), self.y.to_json()]
        return [format_rat(self.x), format_rat(self.y)]

    def __str__(self) -> str:
        if self.is_infinity:
            return "O"
        return f"({self.x}, {self.y})"


INFINITY = CurvePoint()


def parse_point(literal: Any) -> CurvePoint:
    """Decode ``"O"``, ``["x", "y"]`` or ``[{"u":..,"v":..,"d":..}, {...}]``."""
    if literal == "O":
        return INFINITY
    if not isinstance(literal, list | tuple) or len(literal) != 2:
        raise ValueError(f'a point is "O" or a pair of coordinates, got {literal!r}')
    x, y = literal
    if isinstance(x, dict) and isinstance(y, dict):
        qx, qy = QuadElem.from_json(x), QuadElem.from_json(y)
        if qx.d != qy.d:
            raise MixedFields("point coordinates over different fields", x=qx.d, y=qy.d)
        return CurvePoint(qx, qy)
    if isinstance(x, dict) or isinstance(y, dict):
        raise MixedFields("one coordinate rational and one quadratic", x=x, y=y)
    return CurvePoint(as_rat(x), as_rat(y))


def require_field(d: int | None) -> None:
    if d is not None:
        require_imaginary_field(d)


def on_curve(E: WeierstrassModel, P: CurvePoint) -> bool:
    if P.is_infinity:
        return True
    x, y = P.x, P.y
    lhs = y * y + E.a1 * x * y + E.a3 * y
    rhs = x * x * x + E.a2 * x * x + E.a4 * x + E.a6
    return _is_zero(lhs - rhs)


def require_on_curve(E: WeierstrassModel, P: CurvePoint) -> CurvePoint:
    if not on_curve(E, P):
        raise NotOnCurve(f"{P} does not lie on {E}", point=P.to_json(), ainvs=list(E.ainvs))
    return P


def negate(E: WeierstrassModel, P: CurvePoint) -> CurvePoint:
    """-(x, y) = (x, -y - a1 x - a3)."""
    if P.is_infinity:
        return P
    return CurvePoint(P.x, -P.y - E.a1 * P.x - E.a3)


def point_add(E: WeierstrassModel, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
    """P + Q by the chord-tangent law on the long Weierstrass form."""
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    if _field_key(P.x) != _field_key(Q.x):
        raise MixedFields("points over different coordinate fields", left=str(P), right=str(Q))

    x1, y1, x2, y2 = P.x, P.y, Q.x, Q.y
    if x1 == x2:
        # Same x: either Q = -P or Q = P.
        if _is_zero(y1 + y2 + E.a1 * x2 + E.a3):
            return INFINITY
        denom = 2 * y1 + E.a1 * x1 + E.a3
        lam = (3 * x1 * x1 + 2 * E.a2 * x1 + E.a4 - E.a1 * y1) / denom
        nu = (-x1 * x1 * x1 + E.a4 * x1 + 2 * E.a6 - E.a3 * y1) / denom
    else:
        dx = x2 - x1
        lam = (y2 - y1) / dx
        nu = (y1 * x2 - y2 * x1) / dx

    x3 = lam * lam + E.a1 * lam - E.a2 - x1 - x2
    y3 = -(lam + E.a1) * x3 - nu - E.a3
    return CurvePoint(x3, y3)


def scalar_mul(E: WeierstrassModel, n: int, P: CurvePoint) -> CurvePoint:
    """n*P by double-and-add; (-n)*P = -(n*P)."""
    if n < 0:
        return negate(E, scalar_mul(E, -n, P))
    result = INFINITY
    addend = P
    while n:
        if n & 1:
            result = point_add(E, result, addend)
        n >>= 1
        if n:
            addend = point_add(E, addend, addend)
    return result
