"""Valuation identities and the two non-vanishing verdict engines.

Both engines build a condition ledger, certify v_p(log_w P), and test the
threshold v_p(#Sha) + v_p(log_w P) >= 2. A positive verdict goes through one of
two branches: a large Selmer group when p divides #Sha, otherwise the point fP,
which lies in E1 and has large logarithm.
"""

from fractions import Fraction
from math import gcd
from typing import Literal

import structlog
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator
from sympy import factorint, primerange

from .arith import (
    Val,
    kronecker,
    quadratic_discriminant,
    require_imaginary_field,
    require_odd_prime,
    vp_rational,
)
from .elliptic import CurvePoint, WeierstrassModel, require_on_curve
from .errors import (
    ConditionFailed,
    HasseViolation,
    InconclusiveCondition,
    InternalConsistencyError,
    MixedFields,
)
from .formal import LogCertificate, certify_log_valuation
from .localdata import FrobeniusData, GlobalLocalSummary, count_points, global_summary
from .settings import Settings, get_settings


logger = structlog.get_logger()

ConditionStatus = Literal["VerifiedTrue", "VerifiedFalse", "AssertedByUser", "Inconclusive"]
Theorem = Literal["main1", "main2"]
Branch = Literal["sha", "point"]
Outcome = Literal["implied", "not_implied", "inconclusive"]
LogSource = Literal["certified", "lower_bound", "supplied"]

MAIN1_CONDITIONS = ("1", "2", "3", "4", "5", "6", "generator")
MAIN2_CONDITIONS = ("heegner_a", "heegner_b", "heegner_c", "1", "2", "3", "4", "generator")
HEEGNER_CONDITIONS = ("heegner_a", "heegner_b", "heegner_c")


def _val_str(value: Val | None) -> str | None:
    return None if value is None else str(value)


class HeckeData(BaseModel):
    """a_p and v_p(alpha - beta) for the roots of X^2 - a_p X + p."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    a_p: int
    p: int
    ordinary: bool
    v_alpha_minus_beta: Val

    @field_serializer("v_alpha_minus_beta")
    def _serialize_val(self, value: Val) -> str:
        return str(value)


def hecke_data(a_p: int, p: int) -> HeckeData:
    """v_p(alpha - beta) = v_p(a_p^2 - 4p) / 2, without constructing alpha or beta."""
    require_odd_prime(p)
    if a_p * a_p > 4 * p:
        raise HasseViolation(f"|a_p| = {abs(a_p)} exceeds 2*sqrt({p})", a_p=a_p, p=p)
    v = vp_rational(a_p * a_p - 4 * p, p) / 2
    return HeckeData(a_p=a_p, p=p, ordinary=a_p % p != 0, v_alpha_minus_beta=v)


class IrreducibilityResult(BaseModel):
    """A prime l whose Frobenius polynomial is irreducible mod p, or none found."""

    model_config = ConfigDict(frozen=True)

    p: int
    l: int | None = None
    a_l: int | None = None
    ell_max: int
    split_constraint: int | None = None

    @property
    def found(self) -> bool:
        return self.l is not None


def irreducibility_witness(
    E: WeierstrassModel,
    p: int,
    split_constraint: int | None = None,
    ell_max: int = 500,
    conductor: int | None = None,
) -> IrreducibilityResult:
    """Search good l <= ell_max, l not dividing pN, with a_l^2 - 4l a non-residue mod p.

    With ``split_constraint = d`` only primes split in Q(sqrt(-d)) are tried, so
    that Frobenius at l fixes K. Finding no such l proves nothing.
    """
    require_odd_prime(p)
    if ell_max < 5:
        raise ValueError(f"ell_max must be >= 5, got {ell_max}")
    N = conductor if conductor is not None else global_summary(E).N
    disc_K = quadratic_discriminant(split_constraint) if split_constraint is not None else None
    for l in primerange(2, ell_max + 1):
        l = int(l)
        if (p * N) % l == 0 or E.discriminant % l == 0:
            continue
        if disc_K is not None and kronecker(disc_K, l) != 1:
            continue
        a = count_points(E, l).a
        if kronecker(a * a - 4 * l, p) == -1:
            logger.debug("Found irreducibility witness", p=p, l=l, a_l=a)
            return IrreducibilityResult(
                p=p, l=l, a_l=a, ell_max=ell_max, split_constraint=split_constraint
            )
    logger.info("No irreducibility witness found", p=p, ell_max=ell_max)
    return IrreducibilityResult(p=p, ell_max=ell_max, split_constraint=split_constraint)


class LedgerEntry(BaseModel):
    status: ConditionStatus
    witness: str


class ConditionLedger(BaseModel):
    """Per-condition outcome of one theorem evaluation, filled append-only."""

    theorem: str
    entries: dict[str, LedgerEntry] = Field(default_factory=dict)

    def record(self, key: str, status: ConditionStatus, witness: str) -> None:
        if key in self.entries:
            raise InternalConsistencyError(f"condition {key} recorded twice", key=key)
        self.entries[key] = LedgerEntry(status=status, witness=witness)

    def merge(self, other: "ConditionLedger") -> None:
        for key, entry in other.entries.items():
            self.record(key, entry.status, entry.witness)

    def keys_with(self, status: ConditionStatus) -> list[str]:
        return [key for key, entry in self.entries.items() if entry.status == status]

    @property
    def failed(self) -> list[str]:
        return self.keys_with("VerifiedFalse")

    @property
    def inconclusive(self) -> list[str]:
        return self.keys_with("Inconclusive")

    def raise_if_failed(self) -> None:
        if self.failed:
            key = self.failed[0]
            raise ConditionFailed(
                key,
                f"condition {key} of {self.theorem} fails: {self.entries[key].witness}",
                ledger=self.summary(),
            )

    def summary(self) -> dict[str, dict[str, str]]:
        return {key: entry.model_dump() for key, entry in self.entries.items()}


def heegner_check(d: int, p: int, N: int) -> ConditionLedger:
    """Heegner hypotheses for K = Q(sqrt(-d)).

    (a) Disc(K) prime to pN, (b) every l | N split in K, (c) p split in K.
    """
    require_imaginary_field(d)
    require_odd_prime(p)
    disc = quadratic_discriminant(d)
    ledger = ConditionLedger(theorem="heegner")

    g = gcd(disc, p * N)
    ledger.record(
        "heegner_a",
        "VerifiedTrue" if g == 1 else "VerifiedFalse",
        f"gcd(Disc(K) = {disc}, pN = {p * N}) = {g}",
    )

    symbols = {int(l): kronecker(disc, int(l)) for l in factorint(N)}
    inert = [l for l, symbol in symbols.items() if symbol != 1]
    ledger.record(
        "heegner_b",
        "VerifiedFalse" if inert else "VerifiedTrue",
        ", ".join(f"({disc}|{l}) = {s}" for l, s in symbols.items()) or "N = 1",
    )

    symbol = kronecker(disc, p)
    ledger.record(
        "heegner_c", "VerifiedTrue" if symbol == 1 else "VerifiedFalse", f"({disc}|{p}) = {symbol}"
    )
    return ledger


class AnalyticInputs(BaseModel):
    """User-asserted analytic data; the flags stand in for non-computable hypotheses."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    r_an: int
    v_sha: Val = Val(Fraction(0))
    imc_assumed: bool = True
    height_nontrivial_assumed: bool = True
    pairing_nonzero_assumed: bool = True
    v_L_alg: Val | None = None
    defaulted_flags: tuple[str, ...] = ()

    @field_validator("v_sha", "v_L_alg", mode="before")
    @classmethod
    def _coerce_val(cls, value: object) -> object:
        if value is None or isinstance(value, Val):
            return value
        if isinstance(value, str):
            return Val.parse(value)
        return Val.of(value)

    @field_validator("v_sha")
    @classmethod
    def _non_negative_integer(cls, value: Val) -> Val:
        if not value.is_integer or value < 0:
            raise ValueError(f"v_sha must be a non-negative integer, got {value}")
        return value


class ValuationReport(BaseModel):
    """Valuations derived from the proved identities; None where a theorem does not use them."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    v_logP: Val
    v_S_alphabeta: Val | None = None
    v_LS_combined: Val | None = None
    v_Sp: Val | None = None
    v_LBDP_combined: Val | None = None
    v_LBDP: Val | None = None
    v_alpha_minus_beta: Val | None = None
    v_euler_factor: Val | None = None

    @field_serializer("*")
    def _serialize_vals(self, value: Val | None) -> str | None:
        return _val_str(value)


def valuations_Q(v_sha: Val, v_logP: Val, h: HeckeData) -> ValuationReport:
    """v_p(S_ab) and v_p(L' * S_ab) from v_p(#Sha(E/Q)) and v_p(log_w P)."""
    v_sha, v_logP = Val.of(v_sha), Val.of(v_logP)
    v_ab = h.v_alpha_minus_beta
    v_Sp = v_sha + v_logP * 2 - 2
    return ValuationReport(
        v_logP=v_logP,
        v_S_alphabeta=v_Sp + v_ab,
        v_LS_combined=v_sha * 2 + v_logP * 2 - 2 + v_ab,
        v_Sp=v_Sp,
        v_alpha_minus_beta=v_ab,
    )


def valuations_K(v_sha_K: Val, v_logP: Val) -> ValuationReport:
    """v_p(L'(E/K) * L^BDP(0)) from v_p(#Sha(E/K)) and v_p(log_w P)."""
    v_sha_K, v_logP = Val.of(v_sha_K), Val.of(v_logP)
    return ValuationReport(
        v_logP=v_logP,
        v_LBDP_combined=v_sha_K * 2 + v_logP * 2 - 2,
        v_LBDP=v_sha_K + v_logP * 2 - 2,
    )


def euler_factor_valuation(a_p: int, p: int) -> Val:
    """v_p(1 - a_p/p + 1/p) = v_p(#E~(F_p)) - 1."""
    return vp_rational(Fraction(p + 1 - a_p, p), p)


def unramified_point_criterion(v_log: Val, e: int, p: int) -> bool:
    """A point of E1(F_v) with this log valuation gives an everywhere unramified class.

    ``e`` is the ramification index of F_v over Q_p.
    """
    return e < p - 1 and Val.of(v_log) >= Fraction(e + 1, e)


def selmer_dimension_lower_bound(v_sha: Val, mordell_weil_rank: int) -> int:
    """dim E(F)/p + dim Sha[p], with dim Sha[p] even and so >= 2 once p divides #Sha."""
    return mordell_weil_rank + (2 if Val.of(v_sha) >= 1 else 0)


def selmer_criterion(selmer_dim_lower_bound: int, degree: int) -> bool:
    """dim Sel(F, E[p]) >= [F:Q] + 1 forces a nonzero E[p]-part."""
    return selmer_dim_lower_bound >= degree + 1


def baseline_lalg_criterion(v_L_alg: Val) -> bool:
    return Val.of(v_L_alg) >= 1


class Verdict(BaseModel):
    """Outcome of one theorem evaluation with everything needed to audit it."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    theorem: Theorem
    p: int
    implies_nonvanishing: bool
    outcome: Outcome
    branch: Branch | None = None
    witness: str | None = None
    ledger: ConditionLedger
    report: ValuationReport
    blocked_by: list[str] = Field(default_factory=list)
    warnings: list[str] = Field(default_factory=list)
    v_logP_source: LogSource = "certified"
    baseline_implies: bool | None = None
    l_alg_consistent: bool | None = None
    d: int | None = None
    frobenius: FrobeniusData | None = None
    hecke: HeckeData | None = None
    local: GlobalLocalSummary | None = None
    irreducibility: IrreducibilityResult | None = None
    log_certificate: LogCertificate | None = None


def _warn(warnings: list[str], message: str, **context: object) -> None:
    logger.warning(message, **context)
    warnings.append(message)


def conclude(
    theorem: Theorem,
    p: int,
    ledger: ConditionLedger,
    v_sha: Val,
    v_logP: Val,
    *,
    hecke: HeckeData | None = None,
    frobenius: FrobeniusData | None = None,
    v_logP_source: LogSource = "certified",
    v_L_alg: Val | None = None,
    strict: bool = False,
    warnings: list[str] | None = None,
) -> Verdict:
    """Turn a complete ledger and the two input valuations into a verdict."""
    expected = MAIN1_CONDITIONS if theorem == "main1" else MAIN2_CONDITIONS
    if set(ledger.entries) != set(expected):
        raise InternalConsistencyError(
            f"ledger for {theorem} has conditions {sorted(ledger.entries)}",
            expected=list(expected),
        )
    ledger.raise_if_failed()

    warnings = list(warnings or [])
    v_sha, v_logP = Val.of(v_sha), Val.of(v_logP)
    if v_sha.is_integer and int(v_sha.finite()) % 2:
        _warn(warnings, f"v_sha = {v_sha} is odd; #Sha of a rank-one curve is a square", p=p)

    if theorem == "main1":
        if hecke is None:
            raise InternalConsistencyError("the main1 verdict needs Hecke data")
        report = valuations_Q(v_sha, v_logP, hecke)
        combined = report.v_LS_combined
        if report.v_LS_combined != report.v_S_alphabeta + v_sha:
            raise InternalConsistencyError("v(L' S_ab) differs from v(S_ab) + v(Sha)", p=p)
    else:
        report = valuations_K(v_sha, v_logP)
        combined = report.v_LBDP_combined

    if frobenius is not None:
        report = report.model_copy(
            update={"v_euler_factor": euler_factor_valuation(frobenius.a, p)}
        )

    threshold = v_sha + v_logP >= 2
    if (combined >= 1) != threshold:
        raise InternalConsistencyError(
            f"combined valuation {combined} disagrees with v_sha + v_logP = {v_sha + v_logP}",
            p=p,
        )

    blocked = ledger.inconclusive
    degree = 1 if theorem == "main1" else 2
    # Over K the class of the Heegner point in E(K)/p is counted as well.
    selmer_bound = selmer_dimension_lower_bound(v_sha, 0 if theorem == "main1" else 1)
    branch: Branch | None = None
    witness = None
    if threshold and selmer_criterion(selmer_bound, degree):
        branch = "sha"
        field = "Q" if degree == 1 else "K"
        witness = f"p | #Sha, so dim Sel({field}, E[{p}]) >= {selmer_bound}"
    elif threshold and v_logP_source != "lower_bound":
        # fP lies in E1 and v(log fP) = v(log P) because p does not divide f.
        if unramified_point_criterion(v_logP, 1, p):
            branch = "point"
            f = frobenius.count if frobenius is not None else "#E~(F_p)"
            witness = f"f={f}, fP in E1, v_p(log)={v_logP}"

    if v_logP_source == "lower_bound" and branch is None:
        # Only a bound on v(log P) is known: the point branch cannot be ruled out.
        blocked = [*blocked, "generator"]

    implies = branch is not None and not blocked
    outcome: Outcome
    if implies:
        outcome = "implied"
    elif blocked and (threshold or v_logP_source == "lower_bound"):
        outcome = "inconclusive"
    else:
        outcome = "not_implied"

    if strict and blocked:
        raise InconclusiveCondition(
            blocked, f"conditions {', '.join(blocked)} of {theorem} are inconclusive"
        )

    baseline = None
    l_alg_consistent = None
    if v_L_alg is not None:
        l_alg_consistent = v_L_alg == v_sha
        if not l_alg_consistent:
            _warn(warnings, f"v_L_alg = {v_L_alg} differs from v_sha = {v_sha}", p=p)
    if theorem == "main1":
        baseline = baseline_lalg_criterion(v_L_alg if v_L_alg is not None else v_sha)

    logger.info(
        "Verdict computed",
        theorem=theorem,
        p=p,
        outcome=outcome,
        branch=branch,
        v_logP=str(v_logP),
        combined=str(combined),
    )
    return Verdict(
        theorem=theorem,
        p=p,
        implies_nonvanishing=implies,
        outcome=outcome,
        branch=branch,
        witness=witness,
        ledger=ledger,
        report=report,
        blocked_by=blocked,
        warnings=warnings,
        v_logP_source=v_logP_source,
        baseline_implies=baseline,
        l_alg_consistent=l_alg_consistent,
        frobenius=frobenius,
        hecke=hecke,
    )


def _assert_flag(
    ledger: ConditionLedger,
    key: str,
    flag: bool,
    description: str,
    inputs: AnalyticInputs,
    flag_name: str,
    warnings: list[str],
) -> None:
    if not flag:
        ledger.record(key, "Inconclusive", f"{description} not asserted")
        return
    if flag_name in inputs.defaulted_flags:
        _warn(warnings, f"{description} assumed by default", condition=key)
        ledger.record(key, "AssertedByUser", f"{description} (default assertion)")
    else:
        ledger.record(key, "AssertedByUser", description)


def _good_reduction_and_rank(
    ledger: ConditionLedger, key: str, E: WeierstrassModel, p: int, r_an: int, over: str
) -> None:
    if E.discriminant % p == 0:
        ledger.record(key, "VerifiedFalse", f"bad reduction at {p}")
    elif r_an != 1:
        ledger.record(key, "VerifiedFalse", f"asserted analytic rank over {over} is {r_an}, not 1")
    else:
        ledger.record(key, "AssertedByUser", f"good reduction at {p} verified; r_an = 1 asserted")
    ledger.raise_if_failed()


def _tamagawa_condition(
    ledger: ConditionLedger,
    key: str,
    p: int,
    frobenius: FrobeniusData,
    summary: GlobalLocalSummary,
    note: str = "",
) -> None:
    product = frobenius.count * summary.tam
    holds = product % p != 0
    ledger.record(
        key,
        "VerifiedTrue" if holds else "VerifiedFalse",
        f"#E~(F_{p}) = {frobenius.count}, Tam = {summary.tam}{note}",
    )
    ledger.raise_if_failed()


def _irreducibility_condition(
    ledger: ConditionLedger, key: str, result: IrreducibilityResult
) -> None:
    if result.found:
        ledger.record(
            key,
            "VerifiedTrue",
            f"X^2 - {result.a_l}X + {result.l} is irreducible mod {result.p}",
        )
    else:
        ledger.record(key, "Inconclusive", f"no witness l <= {result.ell_max}")


def _point_log(
    E: WeierstrassModel,
    p: int,
    P: CurvePoint | None,
    ledger: ConditionLedger,
    settings: Settings,
    warnings: list[str],
    field: str,
) -> tuple[Val, LogSource, LogCertificate | None]:
    if P is None:
        ledger.record(
            "generator",
            "AssertedByUser",
            f"no point supplied; v_p(log_w P) >= 1 used for E({field})",
        )
        return Val.of(1), "lower_bound", None
    if P.is_infinity:
        ledger.record("generator", "VerifiedFalse", "the point at infinity is torsion")
        ledger.raise_if_failed()
    certificate = certify_log_valuation(
        E,
        p,
        P,
        order=settings.series_order,
        cap=settings.series_cap,
        margin=settings.padic_margin,
        root_choice=settings.root_choice,
    )
    if certificate.v_log.is_infinite:
        ledger.record("generator", "VerifiedFalse", f"{P} is torsion: log_w vanishes")
        ledger.raise_if_failed()
    if certificate.precision is not None:
        _warn(
            warnings,
            f"sqrt(-{P.field}) embedded in Q_{p} to precision p^{certificate.precision}",
            root_choice=settings.root_choice,
        )
    _warn(warnings, f"{P} is treated as a generator of E({field})/tors", point=str(P))
    ledger.record("generator", "AssertedByUser", f"{P} asserted to generate E({field})/tors")
    return certificate.v_log, "certified", certificate


def verdict_Q(
    E: WeierstrassModel,
    p: int,
    P: CurvePoint | None,
    inputs: AnalyticInputs,
    settings: Settings | None = None,
) -> Verdict:
    """Evaluate the criterion over Q: v_p(L'(E,1)_alg * S_ab) >= 1 implies r(E[p]) != 0."""
    settings = settings or get_settings()
    require_odd_prime(p)
    if P is not None:
        if P.field is not None and not P.is_rational:
            raise MixedFields("the criterion over Q needs a rational point", d=P.field)
        P = require_on_curve(E, P.as_rational())

    ledger = ConditionLedger(theorem="main1")
    warnings: list[str] = []

    _good_reduction_and_rank(ledger, "1", E, p, inputs.r_an, "Q")
    _assert_flag(
        ledger, "2", inputs.imc_assumed, "Iwasawa main conjecture", inputs, "imc", warnings
    )

    frobenius = count_points(E, p, bound=settings.count_bound)
    hecke = hecke_data(frobenius.a, p)
    supersingular = not hecke.ordinary
    if supersingular:
        ledger.record("3", "VerifiedTrue", f"supersingular at {p}: vacuous")
    else:
        _assert_flag(
            ledger,
            "3",
            inputs.height_nontrivial_assumed,
            "p-adic height pairing non-trivial",
            inputs,
            "height",
            warnings,
        )

    summary = global_summary(E)
    _tamagawa_condition(ledger, "4", p, frobenius, summary)
    irreducibility = irreducibility_witness(E, p, ell_max=settings.ell_max, conductor=summary.N)
    _irreducibility_condition(ledger, "5", irreducibility)

    if supersingular:
        ledger.record("6", "VerifiedTrue", "[w, phi(w)] is a unit for supersingular reduction")
    else:
        _assert_flag(
            ledger,
            "6",
            inputs.pairing_nonzero_assumed,
            "[w, phi(w)] != 0",
            inputs,
            "pairing",
            warnings,
        )

    v_logP, source, certificate = _point_log(E, p, P, ledger, settings, warnings, "Q")
    verdict = conclude(
        "main1",
        p,
        ledger,
        inputs.v_sha,
        v_logP,
        hecke=hecke,
        frobenius=frobenius,
        v_logP_source=source,
        v_L_alg=inputs.v_L_alg,
        strict=settings.strict,
        warnings=warnings,
    )
    return verdict.model_copy(
        update={"local": summary, "irreducibility": irreducibility, "log_certificate": certificate}
    )


def verdict_K(
    E: WeierstrassModel,
    p: int,
    d: int,
    P: CurvePoint | None,
    inputs: AnalyticInputs,
    settings: Settings | None = None,
) -> Verdict:
    """Evaluate the criterion over K = Q(sqrt(-d)) through L'(E/K,1)_alg * L^BDP(0)."""
    settings = settings or get_settings()
    require_odd_prime(p)
    require_imaginary_field(d)
    if P is not None:
        if P.field is not None and P.field != d:
            raise MixedFields(f"point over Q(sqrt(-{P.field})) used with d = {d}", d=d)
        if P.field is not None and P.is_rational:
            P = P.as_rational()
        P = require_on_curve(E, P)

    ledger = ConditionLedger(theorem="main2")
    warnings: list[str] = []

    summary = global_summary(E)
    heegner = heegner_check(d, p, summary.N)
    ledger.merge(heegner)
    ledger.raise_if_failed()

    _good_reduction_and_rank(ledger, "1", E, p, inputs.r_an, "K")
    _assert_flag(
        ledger, "2", inputs.imc_assumed, "anticyclotomic main conjecture", inputs, "imc", warnings
    )

    frobenius = count_points(E, p, bound=settings.count_bound)
    hecke = hecke_data(frobenius.a, p)
    # Every bad prime splits in K, so c(E/K_w) = c(E/Q_l).
    _tamagawa_condition(
        ledger, "3", p, frobenius, summary, note=" (Tamagawa numbers over K equal those over Q)"
    )
    irreducibility = irreducibility_witness(
        E, p, split_constraint=d, ell_max=settings.ell_max, conductor=summary.N
    )
    _irreducibility_condition(ledger, "4", irreducibility)

    v_logP, source, certificate = _point_log(E, p, P, ledger, settings, warnings, "K")
    verdict = conclude(
        "main2",
        p,
        ledger,
        inputs.v_sha,
        v_logP,
        hecke=hecke,
        frobenius=frobenius,
        v_logP_source=source,
        v_L_alg=inputs.v_L_alg,
        strict=settings.strict,
        warnings=warnings,
    )
    return verdict.model_copy(
        update={
            "d": d,
            "local": summary,
            "irreducibility": irreducibility,
            "log_certificate": certificate,
        }
    )
