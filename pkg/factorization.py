"""Integer factorization for the unsigned 64-bit range.

Strategy: trial division by a cached prime table, then a deterministic
Miller-Rabin test (gmpy2 strong probable-prime checks over a fixed
base set) and Brent's variant of Pollard's rho on the survivors.
The rho splitter draws its parameters from a ``random.Random`` seeded with
a fixed value, so factorizations are reproducible run to run.
"""

import logging
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import gmpy2
import sympy
from gmpy2 import mpz

from exceptions import FactorizationCapError, InputError
from sieve import prime_sieve

logger = logging.getLogger(__name__)

UINT64_LIMIT = 1 << 64
DEFAULT_TRIAL_LIMIT = 1 << 16
DEFAULT_RHO_SEED = 0x5EED
DEFAULT_CAP_BITS = 160

# Deterministic for every n < 3.3 * 10**24, which covers the 64-bit range.
MILLER_RABIN_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@dataclass(frozen=True)
class FactoredInteger:
    """A positive integer together with its prime factorization."""
    value: int
    factors: Tuple[Tuple[int, int], ...]

    @property
    def primes(self) -> List[int]:
        return [p for p, _ in self.factors]

    def is_prime(self) -> bool:
        return len(self.factors) == 1 and self.factors[0][1] == 1

    def product(self) -> int:
        result = 1
        for p, e in self.factors:
            result *= p ** e
        return result


@lru_cache(maxsize=4)
def small_primes(limit: int = DEFAULT_TRIAL_LIMIT) -> Tuple[int, ...]:
    """Cached trial-division table of all primes <= limit."""
    return tuple(prime_sieve(limit).tolist())


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test for n < 2**64 (and beyond, to 3.3e24)."""
    if n < 2:
        return False
    for p in MILLER_RABIN_BASES:
        if n % p == 0:
            return n == p
    n = mpz(n)
    return all(gmpy2.is_strong_prp(n, a) for a in MILLER_RABIN_BASES)


def pollard_brent(n: int, rng: random.Random) -> int:
    """
    Return a nontrivial factor of the odd composite n.

    Brent's cycle-finding variant of Pollard's rho: the iterate is advanced in
    power-of-two runs and gcds are batched over ``m`` steps.
    """
    if n % 2 == 0:
        return 2
    n = mpz(n)
    g = n
    while g == n:
        y, c, m = (mpz(rng.randrange(1, n)) for _ in range(3))
        g, r, q = mpz(1), 1, mpz(1)
        while g == 1:
            x = y
            for _ in range(r):
                y = (gmpy2.powmod(y, 2, n) + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (gmpy2.powmod(y, 2, n) + c) % n
                    q = q * abs(x - y) % n
                g = gmpy2.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            # Batched gcd overshot; replay one step at a time.
            while True:
                ys = (gmpy2.powmod(ys, 2, n) + c) % n
                g = gmpy2.gcd(abs(x - ys), n)
                if g > 1:
                    break
    return int(g)


def _split_into(n: int, counts: Dict[int, int], rng: random.Random) -> None:
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            counts[m] = counts.get(m, 0) + 1
            continue
        d = pollard_brent(m, rng)
        stack.extend((d, m // d))


def factor(
    n: int,
    trial_limit: int = DEFAULT_TRIAL_LIMIT,
    seed: int = DEFAULT_RHO_SEED
) -> FactoredInteger:
    """
    Factor 1 <= n < 2**64 completely.

    Args:
        n: Integer to factor
        trial_limit: Largest prime used for trial division
        seed: Seed for the rho splitter's parameter draws

    Returns:
        FactoredInteger with strictly increasing primes

    Raises:
        InputError: If n is outside [1, 2**64)
    """
    if n < 1:
        raise InputError(f"factor() needs a positive integer, got {n}")
    if n >= UINT64_LIMIT:
        raise InputError(f"factor() is limited to n < 2**64, got {n}")

    counts: Dict[int, int] = {}
    remaining = n
    for p in small_primes(trial_limit):
        if p * p > remaining:
            break
        if remaining % p == 0:
            e = 0
            while remaining % p == 0:
                remaining //= p
                e += 1
            counts[p] = e

    if remaining > 1:
        _split_into(remaining, counts, random.Random(seed))

    return FactoredInteger(value=n, factors=tuple(sorted(counts.items())))


def factor_unbounded(
    n: int,
    cap_bits: int = DEFAULT_CAP_BITS,
    known_primes: Optional[List[int]] = None
) -> FactoredInteger:
    """
    Factor an integer of any size, up to a cofactor size cap.

    Known prime divisors are divided out first; whatever remains is handed
    to the 64-bit path when it fits and to ``sympy.factorint`` otherwise.

    Raises:
        FactorizationCapError: If the unknown cofactor exceeds cap_bits
    """
    if n < 1:
        raise InputError(f"factor_unbounded() needs a positive integer, got {n}")

    counts: Dict[int, int] = {}
    remaining = n
    for p in sorted(set(known_primes or [])):
        e = 0
        while remaining % p == 0:
            remaining //= p
            e += 1
        if e:
            counts[p] = e

    if remaining < UINT64_LIMIT:
        for p, e in factor(remaining).factors:
            counts[p] = counts.get(p, 0) + e
    elif remaining.bit_length() > cap_bits:
        raise FactorizationCapError(
            f"Cofactor of {remaining.bit_length()} bits exceeds the cap of {cap_bits} bits"
        )
    else:
        logger.debug(f"General factorization of a {remaining.bit_length()}-bit cofactor")
        for p, e in sympy.factorint(remaining).items():
            counts[int(p)] = counts.get(int(p), 0) + int(e)

    return FactoredInteger(value=n, factors=tuple(sorted(counts.items())))
