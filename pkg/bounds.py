"""
Inequality checks for shifted-totient orbits and the digit-square-sum harness.

Term indices in every report are 1-based (x_1 is the first seed).
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from exceptions import InputError
from factorization import is_prime
from totient import phi
from orbits import Guards, OrbitSpec, Termination, detect_cycle, iterate_terms, registry

logger = logging.getLogger(__name__)

GROWTH_PROFILE_TERMS = 1 << 16

Totient = Optional[Callable[[int], int]]


class Verdict(str, Enum):
    OK = "ok"
    FAIL = "fail"
    NON_VERDICT = "non-verdict"


def _verdict(found: bool, holds: bool) -> Verdict:
    if not found:
        return Verdict.NON_VERDICT
    return Verdict.OK if holds else Verdict.FAIL


@dataclass
class ClaimCheck:
    """Drop witnesses (r, i) with x_{r+i} < x_r for every x_r >= k^4."""
    witnesses: List[Tuple[int, int]] = field(default_factory=list)
    failures: List[int] = field(default_factory=list)
    untested: List[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def check_thm1_claim(orbit: Sequence[int], k: int, max_r: Optional[int] = None) -> ClaimCheck:
    """
    For each r with x_r >= k^4, find the least i in 1..k with x_{r+i} < x_r.

    Args:
        orbit: Terms x_1, x_2, ... of a d=1 shift-k orbit
        k: Shift, at least 2
        max_r: Only examine r <= max_r (default: every position)

    Returns:
        ClaimCheck; positions whose window runs past the end of ``orbit``
        without a drop are reported as untested, not failed.
    """
    if k < 2:
        raise InputError(f"The drop claim needs k >= 2, got {k}")
    threshold = k ** 4
    last_r = len(orbit) if max_r is None else min(max_r, len(orbit))
    check = ClaimCheck()

    for r in range(1, last_r + 1):
        x_r = orbit[r - 1]
        if x_r < threshold:
            continue
        for i in range(1, k + 1):
            if r + i > len(orbit):
                check.untested.append(r)
                break
            if orbit[r + i - 1] < x_r:
                check.witnesses.append((r, i))
                break
        else:
            check.failures.append(r)
            logger.error(f"No drop within {k} steps after x_{r}={x_r} (k={k})")
    return check


@dataclass
class Thm1Report:
    """One-term bound max{x1, k^4} + (k+1)^2 checked on one d=1 orbit."""
    x1: int
    k: int
    bound: int
    sup_seen: int
    ok: bool
    verdict: Verdict
    preperiod: Optional[int]
    period: Optional[int]
    cycle: Tuple[int, ...] = ()
    terminated: Termination = Termination.CYCLE_FOUND
    claim_drops: List[Tuple[int, int]] = field(default_factory=list)
    claim_failures: List[int] = field(default_factory=list)
    trivial_bound_ok: bool = True
    entry_ok: bool = True

    @property
    def claim_ok(self) -> bool:
        return not self.claim_failures


def _trivial_bound_holds(terms: Sequence[int], k: int) -> bool:
    if k <= 1:
        ceiling = max(terms[0], 2)
        return all(x <= ceiling for x in terms)
    return all(b <= max(a + k - 1, k + 1) for a, b in zip(terms, terms[1:]))


def _entry_bound_holds(terms: Sequence[int], k: int) -> bool:
    # First index of each stretch at or above k^4 stays below k^4 + k.
    threshold = k ** 4
    return all(
        b <= threshold + k
        for a, b in zip(terms, terms[1:])
        if a < threshold <= b
    )


def check_thm1(
    x1: int,
    k: int,
    guards: Guards = Guards(),
    totient: Totient = None
) -> Thm1Report:
    """Run x_{n+1} = phi(x_n) + k from x1 to its cycle and check every one-term inequality."""
    if x1 < 1:
        raise InputError(f"check_thm1() needs x1 >= 1, got {x1}")
    spec = OrbitSpec(d=1, k=k, kind="phi-sum", seeds=(x1,), guards=guards)
    result = detect_cycle(spec, totient)
    bound = max(x1, k ** 4) + (k + 1) ** 2

    if not result.found:
        logger.error(
            f"One-term orbit x1={x1} k={k} hit {result.terminated.value}; "
            f"counterexample candidate, sup so far {result.sup_seen}"
        )
        return Thm1Report(
            x1=x1, k=k, bound=bound, sup_seen=result.sup_seen,
            ok=result.sup_seen <= bound, verdict=Verdict.NON_VERDICT,
            preperiod=None, period=None, terminated=result.terminated,
        )

    span = result.preperiod + result.period
    terms = iterate_terms(spec, span + max(k, 1), totient)
    report = Thm1Report(
        x1=x1, k=k, bound=bound, sup_seen=result.sup_seen,
        ok=result.sup_seen <= bound,
        verdict=_verdict(True, result.sup_seen <= bound),
        preperiod=result.preperiod, period=result.period, cycle=result.cycle,
        trivial_bound_ok=_trivial_bound_holds(terms, k),
    )
    if k >= 2:
        claim = check_thm1_claim(terms, k, max_r=span)
        report.claim_drops = claim.witnesses
        report.claim_failures = claim.failures
        report.entry_ok = _entry_bound_holds(terms, k)
    if not (report.ok and report.claim_ok and report.trivial_bound_ok and report.entry_ok):
        report.verdict = Verdict.FAIL
        logger.error(f"One-term check failed for x1={x1} k={k}: {report}")
    return report


@dataclass
class Thm2Report:
    """Two-term bound 4^(X^(3^(k+1))) checked in log2 form on one d=2 orbit."""
    x1: int
    x2: int
    k: int
    X: Fraction
    log2_bound: float
    sup_seen: int
    hypothesis: bool
    parity_ok: bool
    head_ok: bool
    base_case_ok: Optional[bool]
    ok: bool
    verdict: Verdict
    preperiod: Optional[int]
    period: Optional[int]
    cycle: Tuple[int, ...] = ()
    terminated: Termination = Termination.CYCLE_FOUND


def thm2_log2_bound(X: Fraction, k: int) -> float:
    """2 * X^(3^(k+1)) in floating point, overflowing to +inf."""
    exponent = 3 ** (k + 1)
    try:
        return 2.0 * float(X) ** exponent
    except OverflowError:
        return math.inf


def check_thm2(
    x1: int,
    x2: int,
    k: int,
    guards: Guards = Guards(),
    totient: Totient = None
) -> Thm2Report:
    """Run x_{n+2} = phi(x_{n+1}) + phi(x_n) + k and check the two-term bound, parity and head."""
    if x1 < 1 or x2 < 1:
        raise InputError(f"check_thm2() needs positive seeds, got ({x1}, {x2})")
    if k < 0 or k % 2:
        raise InputError(f"check_thm2() needs an even k >= 0, got {k}")

    spec = OrbitSpec(d=2, k=k, kind="phi-sum", seeds=(x1, x2), guards=guards)
    result = detect_cycle(spec, totient)
    X = Fraction(3 * x1 + 5 * x2 + 7 * k, 2)
    log2_bound = thm2_log2_bound(X, k)
    hypothesis = max(x1, x2) >= 3 or k >= 1
    within = math.log2(result.sup_seen) <= log2_bound

    if not result.found:
        logger.error(
            f"Two-term orbit ({x1}, {x2}) k={k} hit {result.terminated.value}; "
            f"counterexample candidate, sup so far {result.sup_seen}"
        )
        return Thm2Report(
            x1=x1, x2=x2, k=k, X=X, log2_bound=log2_bound, sup_seen=result.sup_seen,
            hypothesis=hypothesis, parity_ok=False, head_ok=False, base_case_ok=None,
            ok=within, verdict=Verdict.NON_VERDICT, preperiod=None, period=None,
            terminated=result.terminated,
        )

    terms = iterate_terms(spec, max(result.preperiod + result.period + 2, 6), totient)
    if hypothesis:
        parity_ok = all(x % 2 == 0 for x in terms[4:])
        head_ok = max(terms[:6]) <= 2 * X and min(terms[2], terms[3]) >= 3
        base_case_ok = None
    else:
        parity_ok = True
        head_ok = max(terms[:6]) <= 2 * X
        base_case_ok = all(x == 2 for x in terms[2:])

    holds = within and parity_ok and head_ok and base_case_ok is not False
    report = Thm2Report(
        x1=x1, x2=x2, k=k, X=X, log2_bound=log2_bound, sup_seen=result.sup_seen,
        hypothesis=hypothesis, parity_ok=parity_ok, head_ok=head_ok,
        base_case_ok=base_case_ok, ok=within, verdict=_verdict(True, holds),
        preperiod=result.preperiod, period=result.period, cycle=result.cycle,
    )
    if not holds:
        logger.error(f"Two-term check failed for ({x1}, {x2}) k={k}: {report}")
    return report


@dataclass
class Prop1Orbit:
    seed: int
    preperiod: Optional[int]
    period: Optional[int]
    cycle: Tuple[int, ...]
    ok: bool


@dataclass
class Prop1Report:
    """limsup x_n <= max{f(m) : m <= C - 1} for a function that shrinks above C."""
    kind: str
    C: int
    rhs: int
    probe_limit: int
    precondition_ok: bool
    violations: List[int]
    orbits: List[Prop1Orbit]

    @property
    def ok(self) -> bool:
        return self.precondition_ok and all(o.ok for o in self.orbits)


def run_prop1_harness(
    seeds: Iterable[int],
    C: int = 100,
    kind: str = "digit-square-sum",
    probe_limit: int = 10 ** 5,
    guards: Guards = Guards()
) -> Prop1Report:
    """
    Check the limsup bound for d=1 orbits of ``kind``.

    The precondition f(n) < n is probed on C..probe_limit; every violation
    is reported and makes the harness fail.
    """
    if C < 1:
        raise InputError(f"Threshold C must be >= 1, got {C}")
    function = registry.build(kind)
    violations = [n for n in range(C, probe_limit + 1) if function.evaluate((n,), 0) >= n]
    if violations:
        logger.error(f"{kind} is not decreasing above C={C}: first violation at n={violations[0]}")
    rhs = max((function.evaluate((m,), 0) for m in range(1, C)), default=0)

    orbits = []
    for seed in seeds:
        result = detect_cycle(OrbitSpec(d=1, k=0, kind=kind, seeds=(seed,), guards=guards))
        cycle_ok = result.found and max(result.cycle) <= rhs
        orbits.append(Prop1Orbit(
            seed=seed,
            preperiod=result.preperiod,
            period=result.period,
            cycle=result.cycle,
            ok=cycle_ok,
        ))
    return Prop1Report(
        kind=kind, C=C, rhs=rhs, probe_limit=probe_limit,
        precondition_ok=not violations, violations=violations[:100], orbits=orbits,
    )


@dataclass
class DtermOrbit:
    seeds: Tuple[int, ...]
    terminated: Termination
    preperiod: Optional[int]
    period: Optional[int]
    sup_seen: int
    constant: bool
    lehmer_flag: bool
    growth: List[Tuple[int, float]]


@dataclass
class DtermReport:
    d: int
    k: int
    orbits: List[DtermOrbit]

    @property
    def guard_hits(self) -> List[DtermOrbit]:
        return [o for o in self.orbits if o.terminated is not Termination.CYCLE_FOUND]

    @property
    def lehmer_candidates(self) -> List[DtermOrbit]:
        return [o for o in self.orbits if o.lehmer_flag]


def diagonal_seeds(d: int, low: int, high: int) -> List[Tuple[int, ...]]:
    """Seed tuples (q, ..., q) for low <= q <= high."""
    return [(q,) * d for q in range(low, high + 1)]


def _growth_profile(spec: OrbitSpec, steps: int, totient: Totient) -> List[Tuple[int, float]]:
    count = min(steps + spec.d, GROWTH_PROFILE_TERMS)
    terms = iterate_terms(spec, count, totient)
    profile = []
    n = 1
    while n <= len(terms):
        profile.append((n, math.log2(terms[n - 1])))
        n *= 2
    if profile[-1][0] != len(terms):
        profile.append((len(terms), math.log2(terms[-1])))
    return profile


def explore_dterm(
    d: int,
    k: int,
    seed_tuples: Iterable[Sequence[int]],
    guards: Guards = Guards(),
    totient: Totient = None
) -> DtermReport:
    """
    Classify phi-sum orbits of arity d >= 3, where periodicity is open.

    Guard hits are reported as unknown with a log2 growth profile. A constant
    orbit from (q, ..., q) with composite q and phi(q) | q - 1 is flagged as a
    Lehmer counterexample candidate.
    """
    if d < 3:
        raise InputError(f"explore_dterm() is for d >= 3, got d={d}")
    if k < 0:
        raise InputError(f"Shift k must be >= 0, got {k}")

    orbits = []
    for seeds in seed_tuples:
        spec = OrbitSpec(d=d, k=k, kind="phi-sum", seeds=tuple(seeds), guards=guards)
        result = detect_cycle(spec, totient)
        constant = result.found and result.preperiod == 0 and result.period == 1
        lehmer_flag = False
        if constant:
            q = spec.seeds[0]
            phi_q = (totient or phi)(q)
            lehmer_flag = q > 1 and not is_prime(q) and (q - 1) % phi_q == 0
            if lehmer_flag:
                logger.warning(f"Lehmer counterexample candidate: constant orbit at q={q}, d={d}, k={k}")
        growth = [] if result.found else _growth_profile(spec, result.steps_used, totient)
        if not result.found:
            logger.info(f"d={d} k={k} seeds={list(spec.seeds)}: {result.terminated.value}, unknown")
        orbits.append(DtermOrbit(
            seeds=spec.seeds,
            terminated=result.terminated,
            preperiod=result.preperiod,
            period=result.period,
            sup_seen=result.sup_seen,
            constant=constant,
            lehmer_flag=lehmer_flag,
            growth=growth,
        ))
    return DtermReport(d=d, k=k, orbits=orbits)
