"""
Chinese-remainder witness for the even-shift two-term recurrence.

Primes above X are cut into k + 1 consecutive blocks, each the shortest run
whose product of (1 - 1/p) drops below 1/2. With q_j the product of block j,
the witness y solves y = j (mod q_j) for j = 0..k. Any even m = 2y - 2j then
has every prime of q_j as a divisor, so phi(m) < (y - j) / 2.

Block ends are located with a float64 prefix sum of log(1 - 1/p) and then
certified with exact integer products, moving the end one prime at a time
until both inequalities hold exactly.
"""

import logging
import math
import os
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

import gmpy2
import numpy as np
from gmpy2 import mpz

from exceptions import FactorizationCapError, InputError, ResourceLimitError, VerificationError
from factorization import DEFAULT_CAP_BITS, UINT64_LIMIT, factor_unbounded
from mertens import EULER_GAMMA_50, euler_factor_product, product_tree
from sieve import iter_prime_segments, prime_sieve, primes_between
from totient import phi

logger = logging.getLogger(__name__)

DEFAULT_MAX_PRIME = 5 * 10 ** 7
DEFAULT_SAMPLE_SIZE = 64
DEFAULT_SAMPLE_SEED = 0x5EED


def max_prime_bound() -> int:
    """Largest prime the witness search may enumerate (``PHI_ORBITS_MAX_PRIME``)."""
    env_bound = os.getenv("PHI_ORBITS_MAX_PRIME")
    if env_bound:
        try:
            return int(float(env_bound))
        except ValueError:
            logger.warning(f"Ignoring invalid PHI_ORBITS_MAX_PRIME={env_bound!r}")
    return DEFAULT_MAX_PRIME


def estimate_prime_demand(X: int, k: int) -> float:
    """
    Rough size of the last prime needed, from the Mertens main term.

    The k + 1 blocks halve prod(1 - 1/p) k + 1 times starting from the
    primes <= X, and e^-gamma / log b = target gives the end b. Returns
    log(b) to stay finite for large k.
    """
    start = float(euler_factor_product(prime_sieve(X).tolist()))
    target = start / 2 ** (k + 1)
    return math.exp(-float(EULER_GAMMA_50)) / target


@dataclass
class CrtWitness:
    """Prime blocks above X, their products q_j, and y with y = j (mod q_j)."""
    X: int
    k: int
    blocks: List[List[int]]
    r: List[int]
    q: List[mpz]
    phi_q: List[mpz]
    y: mpz

    @property
    def prime_list(self) -> List[int]:
        return [p for block in self.blocks for p in block]


class _PrimeStream:
    """Primes above X in increasing order, in numpy chunks, with push-back."""

    def __init__(self, X: int, max_prime: int):
        self.max_prime = max_prime
        self._segments: Iterator[np.ndarray] = iter_prime_segments(X, max_prime)
        self._pending: List[np.ndarray] = []

    def chunk(self) -> np.ndarray:
        while self._pending:
            chunk = self._pending.pop()
            if chunk.size:
                return chunk
        for chunk in self._segments:
            if chunk.size:
                return chunk
        raise ResourceLimitError(
            f"Ran out of primes below {self.max_prime} while building blocks "
            f"(raise PHI_ORBITS_MAX_PRIME)"
        )

    def push_back(self, chunk: np.ndarray) -> None:
        if chunk.size:
            self._pending.append(chunk)

    def one(self) -> int:
        chunk = self.chunk()
        self.push_back(chunk[1:])
        return int(chunk[0])


def _next_block(stream: _PrimeStream) -> Tuple[List[int], mpz, mpz]:
    """Shortest run of the next primes with prod(1 - 1/p) < 1/2, certified exactly."""
    block: List[int] = []
    log_sum = 0.0
    target = -math.log(2.0)
    while True:
        chunk = stream.chunk()
        sums = log_sum + np.cumsum(np.log1p(-1.0 / chunk.astype(np.float64)))
        crossed = np.flatnonzero(sums < target)
        if crossed.size == 0:
            block.extend(chunk.tolist())
            log_sum = float(sums[-1])
            continue
        cut = int(crossed[0]) + 1
        block.extend(chunk[:cut].tolist())
        stream.push_back(chunk[cut:])
        break

    numerator = product_tree(p - 1 for p in block)
    denominator = product_tree(block)
    while 2 * numerator >= denominator:
        p = stream.one()
        block.append(p)
        numerator *= p - 1
        denominator *= p
    while len(block) > 1:
        p = block[-1]
        shorter_num, shorter_den = numerator // (p - 1), denominator // p
        if 2 * shorter_num >= shorter_den:
            break
        stream.push_back(np.array([block.pop()], dtype=np.int64))
        numerator, denominator = shorter_num, shorter_den
    return block, numerator, denominator


def crt(residues: List[int], moduli: List[mpz]) -> Tuple[mpz, mpz]:
    """
    Least non-negative x with x = residues[i] (mod moduli[i]), and the modulus product.

    Raises:
        InputError: If the moduli are not pairwise coprime
    """
    modulus = product_tree(moduli)
    result = mpz(0)
    for c, n in zip(residues, moduli):
        m = modulus // n
        if gmpy2.gcd(m, n) != 1:
            raise InputError("CRT moduli are not pairwise coprime")
        result += c * m * gmpy2.invert(m % n, n)
    return result % modulus, modulus


def build_crt_witness(X: int, k: int, max_prime: Optional[int] = None) -> CrtWitness:
    """
    Build the k + 1 prime blocks above X and the residue-system solution y.

    Args:
        X: Lower end of the primes, at least 6
        k: Even shift, at least 0
        max_prime: Prime enumeration bound (default: PHI_ORBITS_MAX_PRIME or 5e7)

    Raises:
        InputError: For X < 6 or odd/negative k
        ResourceLimitError: If the blocks need primes beyond max_prime
        VerificationError: If the result fails independent re-verification
    """
    if X < 6:
        raise InputError(f"build_crt_witness() needs X >= 6, got {X}")
    if k < 0 or k % 2:
        raise InputError(f"build_crt_witness() needs an even k >= 0, got {k}")
    max_prime = max_prime or max_prime_bound()

    log_demand = estimate_prime_demand(X, k)
    if log_demand > math.log(4 * max_prime):
        raise ResourceLimitError(
            f"X={X}, k={k} needs primes near e^{log_demand:.1f}, far beyond the bound {max_prime}"
        )

    stream = _PrimeStream(X, max_prime)
    blocks, q, phi_q, r = [], [], [], [1]
    for j in range(k + 1):
        block, numerator, denominator = _next_block(stream)
        blocks.append(block)
        q.append(denominator)
        phi_q.append(numerator)
        r.append(r[-1] + len(block))
        logger.info(f"Block {j}: {len(block)} primes {block[0]}..{block[-1]}")

    y, modulus = crt(list(range(k + 1)), q)
    if y <= X:
        y += modulus
    witness = CrtWitness(X=X, k=k, blocks=blocks, r=r, q=q, phi_q=phi_q, y=y)

    failures = reverify_witness(witness)
    if failures:
        raise VerificationError(f"Witness for X={X}, k={k} failed re-verification: {failures}")
    return witness


def reverify_witness(witness: CrtWitness) -> List[str]:
    """
    Independent re-check of a witness; returns the list of failed properties.

    Recomputes the prime run above X, both products of every block exactly,
    every congruence by direct reduction, y > X, pairwise coprimality and
    r_j <= X^(3^j).
    """
    failures = []
    X, k = witness.X, witness.k
    if len(witness.blocks) != k + 1 or len(witness.r) != k + 2:
        return [f"expected {k + 1} blocks and {k + 2} boundaries"]

    last = witness.blocks[-1][-1]
    if primes_between(X, last).tolist() != witness.prime_list:
        failures.append("blocks are not the consecutive primes above X")

    for j, block in enumerate(witness.blocks):
        if euler_factor_product(block) >= gmpy2.mpq(1, 2):
            failures.append(f"block {j}: full product is not below 1/2")
        if euler_factor_product(block[:-1]) <= gmpy2.mpq(1, 2):
            failures.append(f"block {j}: product without its last prime is not above 1/2")
        if product_tree(block) != witness.q[j]:
            failures.append(f"block {j}: q_{j} is not the block product")
        if witness.r[j + 1] - witness.r[j] != len(block):
            failures.append(f"block {j}: boundary r_{j + 1} does not match block length")
        if witness.y % witness.q[j] != j:
            failures.append(f"y is not {j} mod q_{j}")

    for a in range(k + 1):
        for b in range(a + 1, k + 1):
            if gmpy2.gcd(witness.q[a], witness.q[b]) != 1:
                failures.append(f"q_{a} and q_{b} share a factor")

    if not (witness.y >= witness.q[0] > X):
        failures.append("y >= q_0 > X does not hold")
    for j, r_j in enumerate(witness.r):
        if r_j > mpz(X) ** (3 ** j):
            failures.append(f"r_{j} = {r_j} exceeds X^(3^{j})")
    return failures


class DropOutcome(str, Enum):
    VERIFIED = "verified"
    VIOLATED = "violated"
    UNVERIFIED = "unverified"


@dataclass
class PhiDropResult:
    """phi(2y - 2j) < y - k for j = 1..k, plus sampled phi(m) <= m/2 for even m."""
    outcome: DropOutcome
    violating_j: Optional[int] = None
    methods: Dict[int, str] = field(default_factory=dict)
    samples_checked: int = 0

    @property
    def ok(self) -> Optional[bool]:
        if self.outcome is DropOutcome.UNVERIFIED:
            return None
        return self.outcome is DropOutcome.VERIFIED


def _exact_phi_of_even(m: int, block: List[int], q_j: mpz, phi_q_j: mpz, cap_bits: int) -> int:
    # m = 2^a * q_j * c with c odd; primes of c may repeat primes of q_j.
    a = (m & -m).bit_length() - 1
    odd_part = m >> a
    cofactor = int(odd_part // q_j)
    factored = factor_unbounded(cofactor, cap_bits=cap_bits)
    block_primes = set(block) if factored.factors else set()
    result = (m // 2) // int(q_j) * int(phi_q_j)
    for p, _ in factored.factors:
        if p not in block_primes:
            result = result // p * (p - 1)
    return result


def verify_phi_drop(
    witness: CrtWitness,
    cap_bits: int = DEFAULT_CAP_BITS,
    sample_size: int = DEFAULT_SAMPLE_SIZE,
    seed: int = DEFAULT_SAMPLE_SEED
) -> PhiDropResult:
    """
    Check phi(2y - 2j) < y - k for every j in 1..k.

    Each m = 2y - 2j is divisible by 2 and by every prime of q_j, which gives
    the certified bound phi(m) <= (y - j) * phi(q_j) / q_j. When that bound
    does not settle the inequality, (y - j) / q_j is at most k - j and the
    cofactor is factored in full; a cofactor past ``cap_bits`` leaves the
    outcome unverified. Blocks built by ``build_crt_witness`` always settle
    by the bound, since y >= q_0.
    """
    y, k = witness.y, witness.k
    result = PhiDropResult(outcome=DropOutcome.VERIFIED)
    if y <= 2 * k:
        logger.error(f"Witness y={y} does not exceed 2k={2 * k}")

    for j in range(1, k + 1):
        q_j, phi_q_j = witness.q[j], witness.phi_q[j]
        if (y - j) * phi_q_j < (y - k) * q_j:
            result.methods[j] = "bound"
            continue
        m = int(2 * y - 2 * j)
        try:
            exact = _exact_phi_of_even(m, witness.blocks[j], q_j, phi_q_j, cap_bits)
        except FactorizationCapError as e:
            logger.warning(f"phi(2y - {2 * j}) left unverified: {e}")
            result.methods[j] = "capped"
            result.outcome = DropOutcome.UNVERIFIED
            continue
        result.methods[j] = "exact"
        if not exact < y - k:
            result.outcome = DropOutcome.VIOLATED
            result.violating_j = j
            logger.error(f"phi(2y - {2 * j}) = {exact} is not below y - k")
            return result

    rng = random.Random(seed)
    top = int(min(2 * y - 2 * k - 2, UINT64_LIMIT - 2))
    if top >= 2:
        for _ in range(sample_size):
            m = 2 * rng.randrange(1, top // 2 + 1)
            if not (2 * phi(m) <= m and m // 2 < y - k):
                result.outcome = DropOutcome.VIOLATED
                logger.error(f"Sampled even m={m} breaks phi(m) <= m/2 < y - k")
                return result
            result.samples_checked += 1
    return result
