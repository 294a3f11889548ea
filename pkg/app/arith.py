"""Exact rationals, p-adic valuations, imaginary quadratic elements and residue helpers.

Rationals are ``fractions.Fraction`` throughout; valuations are exact rationals
(``Val``) so that half-integral valuations from the supersingular case keep
their parity information. Primality, factorisation, Jacobi symbols and modular
square roots are delegated to sympy.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, total_ordering
from typing import Any, ClassVar, Literal

from sympy import factorint, isprime, jacobi_symbol, sqrt_mod

from .errors import (
    InertPrime,
    InvalidPrime,
    MixedFields,
    NonResidue,
    NotSquareFree,
    PrecisionExhausted,
)


Rat = Fraction
RootChoice = Literal["small", "large"]


def as_rat(value: "int | Fraction | str") -> Fraction:
    """Coerce an integer, Fraction or ``"num/den"`` string to a reduced Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rat(value)
    raise TypeError(f"cannot interpret {value!r} as a rational number")


def parse_rat(text: str) -> Fraction:
    """Parse ``"num"`` or ``"num/den"`` (decimal integers only, no floats)."""
    cleaned = text.strip()
    num, sep, den = cleaned.partition("/")
    try:
        numerator = int(num)
        denominator = int(den) if sep else 1
    except ValueError:
        raise ValueError(f"not a rational literal: {text!r}")
    if denominator == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(numerator, denominator)


def format_rat(x: Fraction | int) -> str:
    """Serialize as ``"num/den"``, dropping the denominator when it is 1."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@lru_cache(maxsize=4096)
def _is_prime(n: int) -> bool:
    return bool(isprime(n))


def require_odd_prime(p: int) -> None:
    """Raise InvalidPrime unless ``p`` is an odd prime."""
    if isinstance(p, bool) or not isinstance(p, int) or p < 3 or not _is_prime(p):
        raise InvalidPrime(f"{p!r} is not an odd prime", p=p)


def vp_int(n: int, p: int) -> int:
    """Multiplicity of ``p`` in the nonzero integer ``n``."""
    if n == 0:
        raise ValueError("valuation of zero is infinite")
    n = abs(n)
    count = 0
    while n % p == 0:
        n //= p
        count += 1
    return count


@total_ordering
@dataclass(frozen=True, slots=True, eq=False)
class Val:
    """A p-adic valuation: an exact rational, or infinity (``value is None``)."""

    value: Fraction | None

    INF: ClassVar["Val"]

    @classmethod
    def of(cls, x: "Val | int | Fraction") -> "Val":
        if isinstance(x, Val):
            return x
        return cls(Fraction(x))

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    @property
    def is_integer(self) -> bool:
        return self.value is not None and self.value.denominator == 1

    def finite(self) -> Fraction:
        """The rational value; raises for INF."""
        if self.value is None:
            raise ValueError("valuation is infinite")
        return self.value

    def __add__(self, other: "Val | int | Fraction") -> "Val":
        other = Val.of(other)
        if self.value is None or other.value is None:
            return Val.INF
        return Val(self.value + other.value)

    __radd__ = __add__

    def __sub__(self, other: "Val | int | Fraction") -> "Val":
        other = Val.of(other)
        if other.value is None:
            raise ValueError("cannot subtract an infinite valuation")
        if self.value is None:
            return Val.INF
        return Val(self.value - other.value)

    def __mul__(self, k: int | Fraction) -> "Val":
        if self.value is None:
            if k <= 0:
                raise ValueError("infinite valuation scaled by a non-positive factor")
            return Val.INF
        return Val(self.value * k)

    __rmul__ = __mul__

    def __truediv__(self, k: int | Fraction) -> "Val":
        return self * (Fraction(1) / Fraction(k))

    def __neg__(self) -> "Val":
        return Val(-self.finite())

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int | Fraction) and not isinstance(other, bool):
            other = Val(Fraction(other))
        if not isinstance(other, Val):
            return NotImplemented
        return self.value == other.value

    def __lt__(self, other: "Val | int | Fraction") -> bool:
        other = Val.of(other)
        if self.value is None:
            return False
        if other.value is None:
            return True
        return self.value < other.value

    def __hash__(self) -> int:
        return hash(("Val", self.value))

    def __str__(self) -> str:
        if self.value is None:
            return "inf"
        return format_rat(self.value)

    def __repr__(self) -> str:
        return f"Val({self})"

    @classmethod
    def parse(cls, text: str) -> "Val":
        if text.strip().lower() == "inf":
            return cls.INF
        return cls(parse_rat(text))


Val.INF = Val(None)


def fraction_valuation(x: Fraction, p: int) -> Val:
    """v_p of a Fraction without re-checking that ``p`` is prime."""
    if x == 0:
        return Val.INF
    return Val(Fraction(vp_int(x.numerator, p) - vp_int(x.denominator, p)))


def vp_rational(x: Fraction | int, p: int) -> Val:
    """v_p(x) normalized by v_p(p) = 1; INF for zero."""
    require_odd_prime(p)
    return fraction_valuation(Fraction(x), p)


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n) for n >= 1."""
    if n < 1:
        raise ValueError(f"kronecker symbol needs n >= 1, got {n}")
    result = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    return result * int(jacobi_symbol(a % n, n))


def hensel_sqrt(a: int, p: int, k: int, root_choice: RootChoice = "small") -> int:
    """Square root of ``a`` modulo p^k lifted from a root modulo p.

    ``small`` lifts the smaller residue root in {1, ..., p-1}; ``large`` lifts
    its negative. The other root modulo p^k is p^k - r.
    """
    require_odd_prime(p)
    if k < 1:
        raise ValueError(f"precision exponent must be >= 1, got {k}")
    if kronecker(a, p) != 1:
        raise NonResidue(f"{a} is not a nonzero square modulo {p}", a=a, p=p)
    roots = sorted(int(r) for r in sqrt_mod(a % p, p, all_roots=True))
    root = roots[0] if root_choice == "small" else roots[-1]
    target = p**k
    modulus = p
    while modulus < target:
        modulus = min(modulus * modulus, target)
        root = (root - (root * root - a) * pow(2 * root, -1, modulus)) % modulus
    return root % target


def is_squarefree(n: int) -> bool:
    if n == 0:
        return False
    return all(exponent == 1 for exponent in factorint(abs(n)).values())


def require_imaginary_field(d: int) -> None:
    """Validate the parameter of K = Q(sqrt(-d)): d positive and square-free."""
    if isinstance(d, bool) or not isinstance(d, int) or d <= 0:
        raise NotSquareFree(f"d must be a positive integer, got {d!r}", d=d)
    if not is_squarefree(d):
        raise NotSquareFree(f"{d} is not square-free", d=d)


def quadratic_discriminant(d: int) -> int:
    """Disc(Q(sqrt(-d))) for square-free d > 0."""
    return -d if (-d) % 4 == 1 else -4 * d


@dataclass(frozen=True, slots=True)
class QuadElem:
    """The element u + v*sqrt(-d) of Q(sqrt(-d))."""

    d: int
    u: Fraction
    v: Fraction

    def __post_init__(self) -> None:
        if self.d <= 0:
            raise NotSquareFree("real quadratic fields are not supported", d=self.d)
        object.__setattr__(self, "u", Fraction(self.u))
        object.__setattr__(self, "v", Fraction(self.v))

    @classmethod
    def rational(cls, d: int, value: Fraction | int) -> "QuadElem":
        return cls(d, Fraction(value), Fraction(0))

    @property
    def is_rational(self) -> bool:
        return self.v == 0

    def _coerce(self, other: "QuadElem | Fraction | int") -> "QuadElem":
        if isinstance(other, QuadElem):
            if other.d != self.d:
                raise MixedFields(
                    f"cannot combine Q(sqrt(-{self.d})) with Q(sqrt(-{other.d}))",
                    left=self.d,
                    right=other.d,
                )
            return other
        if isinstance(other, int | Fraction):
            return QuadElem(self.d, Fraction(other), Fraction(0))
        return NotImplemented

    def __add__(self, other: "QuadElem | Fraction | int") -> "QuadElem":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return QuadElem(self.d, self.u + o.u, self.v + o.v)

    __radd__ = __add__

    def __neg__(self) -> "QuadElem":
        return QuadElem(self.d, -self.u, -self.v)

    def __sub__(self, other: "QuadElem | Fraction | int") -> "QuadElem":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return QuadElem(self.d, self.u - o.u, self.v - o.v)

    def __rsub__(self, other: "Fraction | int") -> "QuadElem":
        return (-self) + other

    def __mul__(self, other: "QuadElem | Fraction | int") -> "QuadElem":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return QuadElem(
            self.d,
            self.u * o.u - self.d * self.v * o.v,
            self.u * o.v + self.v * o.u,
        )

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "QuadElem":
        result = QuadElem.rational(self.d, 1)
        base = self
        if n < 0:
            base, n = base.inverse(), -n
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self) -> "QuadElem":
        return QuadElem(self.d, self.u, -self.v)

    def norm(self) -> Fraction:
        return self.u * self.u + self.d * self.v * self.v

    def inverse(self) -> "QuadElem":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(sqrt(-d))")
        return QuadElem(self.d, self.u / n, -self.v / n)

    def __truediv__(self, other: "QuadElem | Fraction | int") -> "QuadElem":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other: "Fraction | int") -> "QuadElem":
        return QuadElem.rational(self.d, other) * self.inverse()

    def __bool__(self) -> bool:
        return self.u != 0 or self.v != 0

    def to_json(self) -> dict[str, Any]:
        return {"u": format_rat(self.u), "v": format_rat(self.v), "d": self.d}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "QuadElem":
        if set(data) != {"u", "v", "d"}:
            raise ValueError(f"quadratic literal needs exactly u, v, d; got {sorted(data)}")
        d = data["d"]
        require_imaginary_field(d)
        return cls(d, as_rat(data["u"]), as_rat(data["v"]))

    def __str__(self) -> str:
        return f"{format_rat(self.u)} + {format_rat(self.v)}*sqrt(-{self.d})"


@dataclass(frozen=True, slots=True)
class PadicApprox:
    """Rational stand-in for an element of Q_p: v_p(true - value) >= error."""

    value: Fraction
    error: Val

    def valuation(self, p: int) -> Val | None:
        """v_p of the true element, or None when the error bound hides it."""
        v = fraction_valuation(self.value, p)
        if v < self.error:
            return v
        return None


def split_root(d: int, p: int, precision: int, root_choice: RootChoice = "small") -> int:
    """Image of sqrt(-d) under the embedding K -> Q_p at the chosen prime above p."""
    if kronecker(quadratic_discriminant(d), p) != 1:
        raise InertPrime(f"{p} does not split in Q(sqrt(-{d}))", p=p, d=d)
    return hensel_sqrt(-d, p, precision, root_choice)


def embed(
    x: "Fraction | int | QuadElem", p: int, precision: int, root_choice: RootChoice = "small"
) -> PadicApprox:
    """Approximate the image of ``x`` in Q_p with sqrt(-d) known mod p^precision."""
    if isinstance(x, QuadElem):
        if x.is_rational:
            return PadicApprox(x.u, Val.INF)
        root = split_root(x.d, p, precision, root_choice)
        return PadicApprox(x.u + x.v * root, fraction_valuation(x.v, p) + precision)
    return PadicApprox(Fraction(x), Val.INF)


def padic_valuation(
    x: "Fraction | int | QuadElem",
    p: int,
    root_choice: RootChoice = "small",
    precision: int = 20,
    cap: int = 2**14,
) -> Val:
    """v_p of the image of ``x`` in Q_p, raising the working precision as needed."""
    if isinstance(x, QuadElem) and not x:
        return Val.INF
    if not isinstance(x, QuadElem):
        return fraction_valuation(Fraction(x), p)
    while precision <= cap:
        v = embed(x, p, precision, root_choice).valuation(p)
        if v is not None:
            return v
        precision *= 2
    # A nonzero element always separates from its error term eventually.
    raise PrecisionExhausted(
        f"could not separate {x} from zero in Q_{p} below precision {cap}", p=p, cap=cap
    )
