"""Euler's totient: single values, sieved tables, chains and scans."""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np

from exceptions import InputError, ResourceLimitError
from factorization import FactoredInteger, factor
from sieve import totient_sieve

logger = logging.getLogger(__name__)


def phi_from_factorization(factored: FactoredInteger) -> int:
    """n * prod(1 - 1/p) over the prime divisors, in exact integer arithmetic."""
    result = factored.value
    for p, _ in factored.factors:
        result = result // p * (p - 1)
    return result


def phi(n: int) -> int:
    """Euler's totient of 1 <= n < 2**64."""
    if n < 1:
        raise InputError(f"phi() needs a positive integer, got {n}")
    return phi_from_factorization(factor(n))


def phi_sieve(limit: int) -> np.ndarray:
    """
    Totients of 1..limit as an int64 array; entry i - 1 holds phi(i).

    Raises:
        InputError: If limit < 1
        ResourceLimitError: If the table would exceed the sieve memory cap
    """
    if limit < 1:
        raise InputError(f"phi_sieve() needs limit >= 1, got {limit}")
    try:
        return totient_sieve(limit)[1:]
    except MemoryError as e:
        raise ResourceLimitError(f"Out of memory sieving totients up to {limit}") from e


class TotientTable:
    """
    Immutable totient lookup backed by a sieve, with factorization fallback.

    The numpy array is frozen and a list mirror serves scalar lookups, which
    keeps per-term cost low inside orbit loops.
    """

    def __init__(self, limit: int):
        self.limit = limit
        values = totient_sieve(limit)
        values.flags.writeable = False
        self.values = values
        self._lookup: List[int] = values.tolist()

    def __call__(self, n: int) -> int:
        if 0 < n <= self.limit:
            return self._lookup[n]
        return phi(n)

    def __repr__(self) -> str:
        return f"TotientTable(limit={self.limit})"


@lru_cache(maxsize=2)
def shared_table(limit: int) -> TotientTable:
    """Process-wide table for a given limit; built once, never mutated."""
    logger.info(f"Building totient table up to {limit}")
    return TotientTable(limit)


@dataclass
class AveragePhiCheck:
    """Mean of phi over 1..n against the 3n/pi^2 main term."""
    n: int
    mean: Fraction
    reference: float
    abs_error: float

    @property
    def normalized_mean(self) -> float:
        """mean / n, which tends to 3/pi^2."""
        return float(self.mean / self.n)


def avg_phi_check(n: int, values: Optional[np.ndarray] = None) -> AveragePhiCheck:
    """
    Compare (1/n) * sum_{i<=n} phi(i) with 3n/pi^2.

    Args:
        n: Upper end of the average, at least 2
        values: Optional totient array indexed by n (entry 0 ignored)
    """
    if n < 2:
        raise InputError(f"avg_phi_check() needs n >= 2, got {n}")
    if values is None or len(values) <= n:
        values = totient_sieve(n)
    total = int(values[1:n + 1].sum())
    mean = Fraction(total, n)
    reference = 3 * n / math.pi ** 2
    return AveragePhiCheck(
        n=n,
        mean=mean,
        reference=reference,
        abs_error=abs(float(mean) - reference),
    )


@dataclass
class PhiChain:
    """Pure phi iteration from ``start`` down to 1."""
    start: int
    chain: List[int]
    pillai_n: int

    @property
    def iterations(self) -> int:
        """Number of phi applications from start to 1."""
        return self.pillai_n - 1


def phi_chain(x1: int, table: Optional[TotientTable] = None) -> PhiChain:
    """Iterate phi from x1 until the first 1; pillai_n is its 1-based index."""
    if x1 < 1:
        raise InputError(f"phi_chain() needs x1 >= 1, got {x1}")
    totient = table or phi
    chain = [x1]
    while chain[-1] != 1:
        chain.append(totient(chain[-1]))
    return PhiChain(start=x1, chain=chain, pillai_n=len(chain))


def _largest_power_exponent(base: int, bound: int) -> int:
    """Largest m >= 0 with base**m <= bound, or -1 when bound < 1."""
    if bound < 1:
        return -1
    m, power = 0, 1
    while power * base <= bound:
        power *= base
        m += 1
    return m


def pillai_bounds(x1: int) -> Tuple[int, int]:
    """
    Pillai's bracket on the number of phi applications that take x1 to 1.

    lower = floor(log_3(x1 / 2)) + 1 and upper = floor(log_2(x1)) + 1, both
    floors taken by exact power comparison (2 * 3**m <= x1, 2**m <= x1).
    For x1 = 1 the first floor is -1, so the bracket is (0, 1).

    The bracket holds for ``PhiChain.iterations`` (pillai_n - 1); the 1-based
    index itself can exceed ``upper``, e.g. 3, 2, 1 has index 3 and upper 2.
    """
    if x1 < 1:
        raise InputError(f"pillai_bounds() needs x1 >= 1, got {x1}")
    lower_floor = _largest_power_exponent(3, x1 // 2)
    upper_floor = _largest_power_exponent(2, x1)
    return lower_floor + 1, upper_floor + 1


@dataclass
class PillaiSweep:
    """Pillai's bracket checked for every 1 <= x1 <= limit."""
    limit: int
    failures: List[int]
    max_iterations: int

    @property
    def ok(self) -> bool:
        return not self.failures


def pillai_sweep(limit: int, values: Optional[np.ndarray] = None) -> PillaiSweep:
    """
    Check lower <= iterations(x1) <= upper for all x1 up to limit.

    Iteration counts are filled in increasing order from
    iterations(x) = iterations(phi(x)) + 1, since phi(x) < x for x >= 2.
    """
    if limit < 1:
        raise InputError(f"pillai_sweep() needs limit >= 1, got {limit}")
    if values is None or len(values) <= limit:
        values = totient_sieve(limit)
    totients = values.tolist()
    iterations = [0] * (limit + 1)
    failures = []
    lower, upper = pillai_bounds(1)
    for x in range(1, limit + 1):
        if x >= 2:
            iterations[x] = iterations[totients[x]] + 1
        # both floors only step up at exact powers
        if x == 2 * 3 ** lower:
            lower += 1
        if x == 2 ** upper:
            upper += 1
        if not lower <= iterations[x] <= upper:
            failures.append(x)
    if failures:
        logger.error(f"Pillai bracket fails for {len(failures)} values, first x1={failures[0]}")
    return PillaiSweep(limit=limit, failures=failures[:100], max_iterations=max(iterations))


@dataclass(frozen=True)
class LehmerHit:
    """A composite q with phi(q) | q - 1, and r = (q - 1) / phi(q)."""
    q: int
    r: int


def lehmer_scan(limit: int, values: Optional[np.ndarray] = None) -> List[LehmerHit]:
    """Every composite q <= limit whose totient divides q - 1."""
    if limit < 2:
        raise InputError(f"lehmer_scan() needs limit >= 2, got {limit}")
    if values is None or len(values) <= limit:
        values = totient_sieve(limit)

    q = np.arange(2, limit + 1, dtype=np.int64)
    phi_q = values[2:limit + 1]
    composite = phi_q != q - 1
    divides = (q - 1) % phi_q == 0
    hits = [
        LehmerHit(q=int(v), r=int((v - 1) // values[v]))
        for v in q[composite & divides]
    ]
    for hit in hits:
        logger.warning(f"Lehmer candidate q={hit.q} with (q-1)/phi(q)={hit.r}")
    logger.info(f"Lehmer scan up to {limit}: {len(hits)} composite hits")
    return hits
