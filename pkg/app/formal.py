"""Formal group of E: the invariant differential, the formal logarithm and v_p(log_w(Q))."""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import structlog
from pydantic import BaseModel, ConfigDict, field_serializer

from .arith import (
    QuadElem,
    RootChoice,
    Val,
    embed,
    fraction_valuation,
    padic_valuation,
    vp_int,
)
from .elliptic import CurvePoint, WeierstrassModel
from .errors import InternalConsistencyError, PrecisionExhausted
from .localdata import is_in_E1, push_into_E1


logger = structlog.get_logger()


@dataclass(frozen=True, slots=True)
class FormalLogSeries:
    """log_w(t) = sum_{n=1..order} c_{n-1}/n * t^n, truncated after t^order."""

    p: int | None
    order: int
    omega_coeffs: tuple[int, ...]
    log_coeffs: tuple[Fraction, ...]

    def evaluate(self, t: Fraction) -> Fraction:
        """The exact partial sum at a rational parameter."""
        total = Fraction(0)
        for coeff in reversed(self.log_coeffs):
            total = (total + coeff) * t
        return total

    def derivative(self) -> tuple[Fraction, ...]:
        """Termwise derivative of the log series; equals ``omega_coeffs``."""
        return tuple(coeff * n for n, coeff in enumerate(self.log_coeffs, start=1))


def _mul(a: list[int], b: list[int], n: int) -> list[int]:
    out = [0] * n
    for i, ai in enumerate(a[:n]):
        if ai:
            for j, bj in enumerate(b[: n - i]):
                out[i + j] += ai * bj
    return out


def _inverse(a: list[int], n: int) -> list[int]:
    """1/a mod t^n for an integer series with constant term 1."""
    if a[0] != 1:
        raise InternalConsistencyError("series inverse needs constant term 1")
    inv = [0] * n
    inv[0] = 1
    for k in range(1, n):
        inv[k] = -sum(a[i] * inv[k - i] for i in range(1, min(k, len(a) - 1) + 1))
    return inv


def _w_series(ainvs: tuple[int, ...], top: int) -> list[int]:
    """Coefficients w_0..w_top of w = -1/y as a series in t = -x/y."""
    a1, a2, a3, a4, a6 = ainvs
    w = [0] * (top + 1)
    sq = [0] * (top + 1)
    if top >= 3:
        w[3] = 1
    for n in range(4, top + 1):
        sq[n] = sum(w[i] * w[n - i] for i in range(3, n - 2))
        cube = sum(w[i] * sq[n - i] for i in range(3, n - 5))
        w[n] = a1 * w[n - 1] + a2 * w[n - 2] + a3 * sq[n] + a4 * sq[n - 1] + a6 * cube
    return w


@lru_cache(maxsize=256)
def _omega_coeffs(ainvs: tuple[int, ...], N: int) -> tuple[int, ...]:
    a1, _, a3, _, _ = ainvs
    w = _w_series(ainvs, N + 2)
    # x = V / t^2 and y = -V / t^3 with V = t^3 / w.
    V = _inverse(w[3 : N + 3], N)
    tV_prime = [n * V[n] for n in range(N)]
    numerator = [2 * V[n] - tV_prime[n] for n in range(N)]
    denominator = [2 * V[n] - (a1 * V[n - 1] if n >= 1 else 0) for n in range(N)]
    if N > 3:
        denominator[3] -= a3

    coeffs = [0] * N
    for n in range(N):
        rest = numerator[n] - sum(denominator[k] * coeffs[n - k] for k in range(1, n + 1))
        if rest % 2:
            raise InternalConsistencyError(
                "invariant differential has a non-integral coefficient", ainvs=list(ainvs), n=n
            )
        coeffs[n] = rest // 2
    return tuple(coeffs)


def invariant_differential_series(E: WeierstrassModel, N: int) -> list[int]:
    """Integer coefficients c_0..c_{N-1} of w(t)/dt, w = dx/(2y + a1 x + a3)."""
    if N < 2:
        raise ValueError(f"series order must be >= 2, got {N}")
    return list(_omega_coeffs(E.ainvs, N))


def formal_log_series(E: WeierstrassModel, N: int, p: int | None = None) -> FormalLogSeries:
    """Integrate the invariant differential termwise up to t^N."""
    omega = tuple(invariant_differential_series(E, N))
    log_coeffs = tuple(Fraction(c, n) for n, c in enumerate(omega, start=1))
    return FormalLogSeries(p=p, order=N, omega_coeffs=omega, log_coeffs=log_coeffs)


class LogCertificate(BaseModel):
    """Certified v_p(log_w(Q)) together with how it was obtained."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    v_log: Val
    m_used: int
    order: int
    certified: bool = True
    precision: int | None = None

    @field_serializer("v_log")
    def _serialize_val(self, value: Val) -> str:
        return str(value)


def _log_p_floor(n: int, p: int) -> int:
    e, power = 0, p
    while power <= n:
        e += 1
        power *= p
    return e


def tail_bound(N: int, k: int, p: int) -> int:
    """Lower bound for v_p of every omitted term c_{n-1} t^n / n with n > N when v_p(t) = k."""
    # n*k - floor(log_p n) is nondecreasing in n for k >= 1.
    return (N + 1) * k - _log_p_floor(N + 1, p)


def _certify_in_E1(
    E: WeierstrassModel,
    p: int,
    Q: CurvePoint,
    order: int,
    cap: int,
    margin: int,
    root_choice: RootChoice,
) -> tuple[Val, int, int | None]:
    """(v_p(log Q), truncation used, sqrt(-d) precision) for Q in E1(Q_p)."""
    if Q.is_infinity:
        return Val.INF, order, None

    t = -Q.x / Q.y
    k_val = padic_valuation(t, p, root_choice)
    if not k_val.is_integer or k_val < 1:
        raise InternalConsistencyError(f"parameter {t} has valuation {k_val} at {p}", p=p)
    k = int(k_val.finite())

    N = order
    while N <= cap:
        series = formal_log_series(E, N, p)
        bound = Val.of(tail_bound(N, k, p))
        precision = None
        if isinstance(t, QuadElem) and not t.is_rational:
            v_coeff = fraction_valuation(t.v, p)
            precision = max(1, (N + 1) * k + margin - int(v_coeff.finite()))
            approx = embed(t, p, precision, root_choice)
            bound = min(bound, approx.error)
            t_value = approx.value
        elif isinstance(t, QuadElem):
            t_value = t.u
        else:
            t_value = t
        partial = fraction_valuation(series.evaluate(t_value), p)
        if partial < bound:
            return partial, N, precision
        logger.debug("Log valuation not yet certified", p=p, order=N, partial=str(partial))
        N *= 2
    raise PrecisionExhausted(
        f"v_{p}(log) of {Q} not certified below series order {cap}", p=p, cap=cap
    )


def certify_log_valuation(
    E: WeierstrassModel,
    p: int,
    Q: CurvePoint,
    order: int = 20,
    cap: int = 2**14,
    margin: int = 5,
    root_choice: RootChoice = "small",
) -> LogCertificate:
    """v_p(log_w(Q)) for any Q in E(Q_p), extended from E1 by linearity."""
    if order < 2:
        raise ValueError(f"series order must be >= 2, got {order}")
    if is_in_E1(E, p, Q, root_choice):
        m, mQ = 1, Q
    else:
        m, mQ = push_into_E1(E, p, Q, root_choice)
    v_log, used, precision = _certify_in_E1(E, p, mQ, order, cap, margin, root_choice)
    v_log = v_log - vp_int(m, p)
    logger.info(
        "Certified log valuation", p=p, v_log=str(v_log), m=m, order=used, precision=precision
    )
    return LogCertificate(v_log=v_log, m_used=m, order=used, precision=precision)


def log_valuation(
    E: WeierstrassModel,
    p: int,
    Q: CurvePoint,
    order: int = 20,
    cap: int = 2**14,
    margin: int = 5,
    root_choice: RootChoice = "small",
) -> Val:
    return certify_log_valuation(E, p, Q, order, cap, margin, root_choice).v_log
