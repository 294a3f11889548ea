"""Reduction data: point counts, Tate's algorithm, conductor and Tamagawa product, E1 membership."""

from fractions import Fraction
from math import prod

import structlog
from pydantic import BaseModel, ConfigDict, Field
from sympy import Poly, Symbol, divisors, factorint
from sympy.polys.domains import GF

from .arith import (
    RootChoice,
    _is_prime,
    embed,
    fraction_valuation,
    padic_valuation,
    require_odd_prime,
    split_root,
    vp_int,
)
from .elliptic import CurvePoint, WeierstrassModel, invariants, scalar_mul
from .errors import BadReduction, InternalConsistencyError, InvalidPrime, NonMinimal


logger = structlog.get_logger()

_T = Symbol("T")
_BRUTE_FORCE_ROOTS = 50


class FrobeniusData(BaseModel):
    """#E~(F_l) and the trace a_l = l + 1 - #E~(F_l)."""

    model_config = ConfigDict(frozen=True)

    l: int
    count: int = Field(gt=0)
    a: int


class LocalData(BaseModel):
    """Kodaira symbol, Tamagawa number, conductor exponent and v(Delta) at one prime."""

    model_config = ConfigDict(frozen=True)

    l: int
    kodaira: str
    c: int = Field(gt=0)
    f: int = Field(ge=0)
    v_delta: int = Field(ge=0)

    @property
    def is_good(self) -> bool:
        return self.f == 0

    @property
    def is_multiplicative(self) -> bool:
        return self.f == 1 and self.kodaira.startswith("I") and not self.kodaira.endswith("*")


class GlobalLocalSummary(BaseModel):
    """Conductor, Tamagawa product and the bad-prime data they are built from."""

    model_config = ConfigDict(frozen=True)

    N: int = Field(gt=0)
    tam: int = Field(gt=0)
    per_prime: list[LocalData] = Field(default_factory=list)

    def at(self, l: int) -> LocalData | None:
        return next((local for local in self.per_prime if local.l == l), None)


def _require_good(E: WeierstrassModel, l: int) -> None:
    if E.discriminant % l == 0:
        raise BadReduction(f"{E} has bad reduction at {l}", l=l, discriminant=E.discriminant)


def count_points(E: WeierstrassModel, l: int, bound: int | None = None) -> FrobeniusData:
    """Count E~(F_l) naively: exhaustive for l in {2, 3}, a residue table otherwise."""
    if isinstance(l, bool) or not isinstance(l, int) or l < 2 or not _is_prime(l):
        raise InvalidPrime(f"{l!r} is not a prime", l=l)
    if bound is not None and l > bound:
        raise InvalidPrime(f"{l} exceeds the point-count bound {bound}", l=l, bound=bound)
    _require_good(E, l)

    if l in (2, 3):
        affine = sum(
            1
            for x in range(l)
            for y in range(l)
            if (y * y + E.a1 * x * y + E.a3 * y - x**3 - E.a2 * x * x - E.a4 * x - E.a6) % l == 0
        )
    else:
        # (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6 is a bijective change of y.
        square_roots = [0] * l
        for y in range(l):
            square_roots[y * y % l] += 1
        b2, b4, b6 = E.b2 % l, 2 * E.b4 % l, E.b6 % l
        affine = sum(square_roots[(((4 * x + b2) * x + b4) * x + b6) % l] for x in range(l))

    count = affine + 1
    a = l + 1 - count
    if a * a > 4 * l:
        raise InternalConsistencyError(f"a_{l} = {a} violates the Hasse bound", l=l, a=a)
    logger.debug("Counted points", l=l, count=count, a=a)
    return FrobeniusData(l=l, count=count, a=a)


def _count_roots(coeffs: list[int], p: int) -> int:
    """Distinct roots in F_p of the polynomial with these coefficients (highest first)."""
    if p < _BRUTE_FORCE_ROOTS:
        low_first = list(reversed(coeffs))
        return sum(
            1 for t in range(p) if sum(c * t**i for i, c in enumerate(low_first)) % p == 0
        )
    poly = Poly(coeffs, _T, modulus=p)
    if poly.is_zero:
        return p
    _, factors = poly.factor_list()
    return sum(1 for factor, _ in factors if factor.degree() == 1)


def _has_root(coeffs: list[int], p: int) -> bool:
    return _count_roots(coeffs, p) > 0


class _Model:
    """Mutable a-invariants under translations x -> x + r, y -> y + s x + t (u = 1)."""

    def __init__(self, E: WeierstrassModel):
        self.a1, self.a2, self.a3, self.a4, self.a6 = E.ainvs

    def rst(self, r: int, s: int, t: int) -> None:
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        self.a1 = a1 + 2 * s
        self.a2 = a2 - s * a1 + 3 * r - s * s
        self.a3 = a3 + r * a1 + 2 * t
        self.a4 = a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t
        self.a6 = a6 + r * a4 + r * r * a2 + r**3 - t * a3 - t * t - r * t * a1

    @property
    def b6(self) -> int:
        return self.a3 * self.a3 + 4 * self.a6

    @property
    def b8(self) -> int:
        return (
            self.a1 * self.a1 * self.a6
            + 4 * self.a2 * self.a6
            - self.a1 * self.a3 * self.a4
            + self.a2 * self.a3 * self.a3
            - self.a4 * self.a4
        )


def _val(n: int, p: int) -> int | None:
    """v_p(n), None standing for infinity."""
    return None if n == 0 else vp_int(n, p)


def _at_least(n: int, p: int, k: int) -> bool:
    return n % p**k == 0


def _div(n: int, m: int) -> int:
    if n % m:
        raise InternalConsistencyError(f"{n} is not divisible by {m} inside Tate's algorithm")
    return n // m


def _inv(x: int, p: int) -> int:
    return pow(x % p, -1, p)


def tate_local(E: WeierstrassModel, l: int) -> LocalData:
    """Kodaira type, Tamagawa number and conductor exponent at ``l`` by Tate's algorithm.

    The model is only translated, never rescaled: a model that is not minimal at
    ``l`` raises NonMinimal.
    """
    if isinstance(l, bool) or not isinstance(l, int) or l < 2 or not _is_prime(l):
        raise InvalidPrime(f"{l!r} is not a prime", l=l)
    p = l
    vpd = _val(E.discriminant, p) or 0
    if vpd == 0:
        return LocalData(l=p, kodaira="I0", c=1, f=0, v_delta=0)

    C = _Model(E)
    a1, a2, a3, a4, a6 = E.ainvs
    b2, b4, b6 = E.b2, E.b4, E.b6
    c4, c6 = E.c4, E.c6

    # Move the singular point of the reduction to (0, 0).
    if p == 2:
        if b2 % 2 == 0:
            r = a4 % 2
            t = (((r + a2) * r + a4) * r + a6) % 2
        else:
            r = a3 * _inv(a1, 2)
            t = _inv(a1, 2) * (a4 + r * r)
    elif p == 3:
        r = (-b6) % 3 if b2 % 3 == 0 else -_inv(b2, 3) * b4
        t = a1 * r + a3
    else:
        if c4 % p == 0:
            r = -_inv(12, p) * b2
        else:
            r = -_inv(12 * c4, p) * (c6 + b2 * c4)
        t = -_inv(2, p) * (a1 * r + a3)
    C.rst(r % p, 0, t % p)

    if c4 % p:
        split = _has_root([1, C.a1, -C.a2], p)
        c = vpd if split else (2 if vpd % 2 == 0 else 1)
        logger.debug("Multiplicative reduction", l=p, n=vpd, split=split)
        return LocalData(l=p, kodaira=f"I{vpd}", c=c, f=1, v_delta=vpd)

    if not _at_least(C.a6, p, 2):
        return _additive(p, "II", 1, vpd, 1)
    if not _at_least(C.b8, p, 3):
        return _additive(p, "III", 2, vpd, 2)
    if not _at_least(C.b6, p, 3):
        a3t, a6t = _div(C.a3, p), _div(C.a6, p * p)
        return _additive(p, "IV", 3 if _has_root([1, a3t, -a6t], p) else 1, vpd, 3)

    # Arrange p | a1, a2; p^2 | a3, a4; p^3 | a6.
    if p == 2:
        s, t = C.a2 % 2, 2 * (_div(C.a6, 4) % 2)
    elif p == 3:
        s, t = C.a1, C.a3
    else:
        half = _inv(2, p)
        s, t = -C.a1 * half, -C.a3 * half
    C.rst(0, s, t)

    b, c, d = _div(C.a2, p), _div(C.a4, p * p), _div(C.a6, p**3)
    w = 27 * d * d - b * b * c * c + 4 * b**3 * d - 18 * b * c * d + 4 * c**3
    x = 3 * c - b * b

    if w % p:
        roots = _count_roots([1, b, c, d], p)
        return _additive(p, "I0*", 1 + roots, vpd, 5)

    if x % p:
        # Double root of T^3 + b T^2 + c T + d: move it to T = 0, then run the I_n* loop.
        if p == 2:
            r = c % 2
        elif p == 3:
            r = c * _inv(b, 3)
        else:
            r = (b * c - 9 * d) * _inv(2 * x, p)
        C.rst(p * (r % p), 0, 0)
        ix, iy, mx, my = 3, 3, p * p, p * p
        while True:
            a2t, a3t = _div(C.a2, p), _div(C.a3, my)
            a4t, a6t = _div(C.a4, p * mx), _div(C.a6, mx * my)
            if (a3t * a3t + 4 * a6t) % p:
                cp = 4 if _has_root([1, a3t, -a6t], p) else 2
                break
            t = my * ((a6t % 2) if p == 2 else (-a3t * _inv(2, p)) % p)
            C.rst(0, 0, t)
            my *= p
            iy += 1
            a2t, a3t = _div(C.a2, p), _div(C.a3, my)
            a4t, a6t = _div(C.a4, p * mx), _div(C.a6, mx * my)
            if (a4t * a4t - 4 * a6t * a2t) % p:
                cp = 4 if _has_root([a2t, a4t, a6t], p) else 2
                break
            if p == 2:
                r = mx * ((a6t * _inv(a2t, 2)) % 2)
            else:
                r = mx * ((-a4t * _inv(2 * a2t, p)) % p)
            C.rst(r, 0, 0)
            mx *= p
            ix += 1
        n = ix + iy - 5
        return _additive(p, f"I{n}*", cp, vpd, n + 5)

    # Triple root: move it to T = 0.
    if p == 2:
        r = b % 2
    elif p == 3:
        r = (-d) % 3
    else:
        r = (-b * _inv(3, p)) % p
    C.rst(p * r, 0, 0)
    a3t, a6t = _div(C.a3, p * p), _div(C.a6, p**4)
    if (a3t * a3t + 4 * a6t) % p:
        return _additive(p, "IV*", 3 if _has_root([1, a3t, -a6t], p) else 1, vpd, 7)

    if p == 2:
        t = -4 * (a6t % 2)
    else:
        t = p * p * ((-a3t * _inv(2, p)) % p)
    C.rst(0, 0, t)
    if not _at_least(C.a4, p, 4):
        return _additive(p, "III*", 2, vpd, 8)
    if not _at_least(C.a6, p, 6):
        return _additive(p, "II*", 1, vpd, 9)

    raise NonMinimal(f"{E} is not minimal at {p}", l=p, ainvs=list(E.ainvs))


def _additive(p: int, kodaira: str, c: int, vpd: int, components: int) -> LocalData:
    # Ogg: f = v(Delta) - (number of components) + 1.
    f = vpd - components + 1
    if p >= 5 and f != 2:
        raise InternalConsistencyError(
            f"conductor exponent {f} at {p} for type {kodaira}", l=p, v_delta=vpd
        )
    logger.debug("Additive reduction", l=p, kodaira=kodaira, c=c, f=f)
    return LocalData(l=p, kodaira=kodaira, c=c, f=f, v_delta=vpd)


def global_summary(E: WeierstrassModel) -> GlobalLocalSummary:
    """Run Tate's algorithm at every prime dividing the discriminant."""
    per_prime = []
    for l in sorted(factorint(abs(E.discriminant))):
        local = tate_local(E, int(l))
        if local.f > 0:
            per_prime.append(local)
    N = prod(local.l**local.f for local in per_prime)
    tam = prod(local.c for local in per_prime)
    logger.info("Computed global local data", ainvs=list(E.ainvs), conductor=N, tamagawa=tam)
    return GlobalLocalSummary(N=N, tam=tam, per_prime=per_prime)


def _require_embeddable(Q: CurvePoint, p: int, root_choice: RootChoice) -> None:
    if Q.field is not None:
        split_root(Q.field, p, 1, root_choice)


def is_in_E1(
    E: WeierstrassModel, p: int, Q: CurvePoint, root_choice: RootChoice = "small"
) -> bool:
    """True iff Q reduces to the identity mod p, i.e. v_p(x(Q)) <= -2."""
    require_odd_prime(p)
    _require_good(E, p)
    if Q.is_infinity:
        return True
    _require_embeddable(Q, p, root_choice)
    return padic_valuation(Q.x, p, root_choice) < 0


def _reduce(value: object, p: int, root_choice: RootChoice) -> int:
    """Image in F_p of a p-integral coordinate (rational or in Q(sqrt(-d)))."""
    if isinstance(value, Fraction):
        return value.numerator * _inv(value.denominator, p) % p
    # Enough digits of sqrt(-d) that the approximant agrees with the true value mod p.
    depth = 1 - min(
        0, fraction_valuation(value.u, p).value or 0, fraction_valuation(value.v, p).value or 0
    )
    approx = embed(value, p, int(depth) + 1, root_choice).value
    return approx.numerator * _inv(approx.denominator, p) % p


def reduced_order(
    E: WeierstrassModel, p: int, Q: CurvePoint, root_choice: RootChoice = "small"
) -> int:
    """Order of the reduction of Q in E~(F_p); Q must lie outside E1."""
    F = GF(p)
    reduced = CurvePoint(F(_reduce(Q.x, p, root_choice)), F(_reduce(Q.y, p, root_choice)))
    count = count_points(E, p).count
    for m in divisors(count):
        if scalar_mul(E, int(m), reduced).is_infinity:
            return int(m)
    raise InternalConsistencyError(f"order of {Q} mod {p} does not divide {count}", p=p)


def push_into_E1(
    E: WeierstrassModel, p: int, Q: CurvePoint, root_choice: RootChoice = "small"
) -> tuple[int, CurvePoint]:
    """Smallest m >= 1 with mQ in E1(Q_p), together with mQ."""
    if is_in_E1(E, p, Q, root_choice):
        return 1, Q
    m = reduced_order(E, p, Q, root_choice)
    mQ = scalar_mul(E, m, Q)
    if not is_in_E1(E, p, mQ, root_choice):
        raise InternalConsistencyError(f"{m}*Q did not land in E1 at {p}", p=p, m=m)
    logger.debug("Pushed point into E1", p=p, m=m)
    return m, mQ


def curve_local_data(ainvs: list[int], l: int | None = None) -> list[LocalData]:
    """Local data at ``l``, or at every bad prime when ``l`` is omitted."""
    E = invariants(*ainvs)
    if l is not None:
        return [tate_local(E, l)]
    return list(global_summary(E).per_prime)
