"""Prime and totient sieves backed by numpy arrays.

All sieves check their footprint against a memory cap before allocating.
The cap comes from ``PHI_ORBITS_SIEVE_MEMORY_MB`` (default 512 MB), so a
totient sieve is bounded by roughly ``cap / 9`` entries: eight bytes per
int64 totient value plus one byte per entry of the primality mask.
"""

import logging
import math
import os
from typing import Iterator

import numpy as np

from exceptions import InputError, ResourceLimitError

logger = logging.getLogger(__name__)

DEFAULT_SIEVE_MEMORY_MB = 512
DEFAULT_SEGMENT_SIZE = 1 << 22


def sieve_memory_cap_bytes() -> int:
    """Memory cap for a single sieve allocation, in bytes."""
    env_cap = os.getenv("PHI_ORBITS_SIEVE_MEMORY_MB")
    if env_cap:
        try:
            return int(env_cap) * 1024 * 1024
        except ValueError:
            logger.warning(f"Ignoring invalid PHI_ORBITS_SIEVE_MEMORY_MB={env_cap!r}")
    return DEFAULT_SIEVE_MEMORY_MB * 1024 * 1024


def ensure_within_cap(entries: int, bytes_per_entry: int, what: str) -> None:
    """Raise ResourceLimitError if an allocation would exceed the cap."""
    needed = entries * bytes_per_entry
    cap = sieve_memory_cap_bytes()
    if needed > cap:
        raise ResourceLimitError(
            f"{what} needs {needed / 2**20:.1f} MB, above the sieve memory cap of "
            f"{cap / 2**20:.1f} MB (set PHI_ORBITS_SIEVE_MEMORY_MB to raise it)"
        )


def prime_mask(limit: int) -> np.ndarray:
    """Boolean array of length limit + 1 with True exactly at the primes."""
    if limit < 0:
        raise InputError(f"Sieve limit must be non-negative, got {limit}")
    ensure_within_cap(limit + 1, 1, f"Prime sieve up to {limit}")

    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p::p] = False
    return is_prime


def prime_sieve(limit: int) -> np.ndarray:
    """All primes p <= limit as an int64 array."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    return np.flatnonzero(prime_mask(limit)).astype(np.int64)


def iter_prime_segments(
    low: int,
    high: int,
    segment_size: int = DEFAULT_SEGMENT_SIZE
) -> Iterator[np.ndarray]:
    """
    Yield the primes p with low < p <= high, one int64 array per segment.

    Only the base primes up to sqrt(high) are kept in memory, so ``high``
    can run well past the single-array sieve cap.
    """
    if high <= low or high < 2:
        return
    base = prime_sieve(math.isqrt(high) + 1)
    start = max(low + 1, 2)

    while start <= high:
        stop = min(start + segment_size, high + 1)  # exclusive
        mask = np.ones(stop - start, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= stop:
                break
            first = max(p * p, ((start + p - 1) // p) * p)
            if first < stop:
                mask[first - start::p] = False
        yield np.flatnonzero(mask).astype(np.int64) + start
        start = stop


def primes_between(low: int, high: int) -> np.ndarray:
    """All primes p with low < p <= high as one int64 array."""
    segments = list(iter_prime_segments(low, high))
    if not segments:
        return np.array([], dtype=np.int64)
    return np.concatenate(segments)


def totient_sieve(limit: int) -> np.ndarray:
    """
    Euler's totient for 0..limit as an int64 array (entry 0 is 0).

    Multiplicative layout: start from phi[n] = n and, for every prime p,
    scale each multiple of p by (1 - 1/p) exactly with integer division.
    """
    if limit < 1:
        raise InputError(f"Totient sieve limit must be >= 1, got {limit}")
    ensure_within_cap(limit + 1, 9, f"Totient sieve up to {limit}")

    phi = np.arange(limit + 1, dtype=np.int64)
    for p in prime_sieve(limit):
        p = int(p)
        phi[p::p] -= phi[p::p] // p
    logger.debug(f"Built totient sieve up to {limit}")
    return phi
