"""Tests for the numpy prime and totient sieves."""

import numpy as np
import pytest
import sympy

from exceptions import InputError, ResourceLimitError
from sieve import (
    iter_prime_segments, prime_mask, prime_sieve, primes_between,
    sieve_memory_cap_bytes, totient_sieve
)


class TestPrimeSieve:
    """Test the single-array prime sieve."""

    def test_small_primes(self):
        """Primes up to 30."""
        assert prime_sieve(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]

    @pytest.mark.parametrize("limit", [0, 1])
    def test_no_primes_below_two(self, limit):
        """Empty result below 2."""
        assert prime_sieve(limit).size == 0

    def test_matches_sympy(self):
        """Agrees with sympy.primerange up to 10^5."""
        assert prime_sieve(10 ** 5).tolist() == list(sympy.primerange(2, 10 ** 5 + 1))

    def test_mask_negative_limit(self):
        """Negative limits are rejected."""
        with pytest.raises(InputError):
            prime_mask(-1)

    def test_dtype(self):
        """Primes come back as int64."""
        assert prime_sieve(100).dtype == np.int64


class TestSegmentedSieve:
    """Test segment-by-segment enumeration."""

    def test_segments_concatenate_to_full_range(self):
        """Tiny segments still cover every prime exactly once."""
        segments = list(iter_prime_segments(0, 100, segment_size=7))
        assert np.concatenate(segments).tolist() == list(sympy.primerange(2, 101))

    def test_open_lower_end(self):
        """The lower end is excluded, the upper end included."""
        assert primes_between(7, 13).tolist() == [11, 13]

    def test_interval_above_six(self):
        """Primes in (6, 216] match the oracle."""
        primes = primes_between(6, 216).tolist()
        assert primes == list(sympy.primerange(7, 217))
        assert primes[0] == 7 and primes[-1] == 211

    def test_empty_interval(self):
        """high <= low yields nothing."""
        assert primes_between(50, 50).size == 0
        assert list(iter_prime_segments(10, 5)) == []

    def test_large_offset(self):
        """A window far from zero."""
        low, high = 10 ** 9, 10 ** 9 + 1000
        assert primes_between(low, high).tolist() == list(sympy.primerange(low + 1, high + 1))


class TestTotientSieve:
    """Test the multiplicative totient sieve."""

    def test_first_values(self):
        """phi(0..10), entry 0 is 0."""
        assert totient_sieve(10).tolist() == [0, 1, 1, 2, 2, 4, 2, 6, 4, 6, 4]

    def test_matches_sympy(self):
        """Agrees with sympy.totient on 1..5000."""
        values = totient_sieve(5000)
        assert all(values[n] == sympy.totient(n) for n in range(1, 5001))

    def test_rejects_zero_limit(self):
        """limit must be at least 1."""
        with pytest.raises(InputError):
            totient_sieve(0)


class TestMemoryCap:
    """Test the sieve memory cap."""

    def test_default_cap(self, clean_env):
        """512 MB by default."""
        assert sieve_memory_cap_bytes() == 512 * 1024 * 1024

    def test_env_override(self, clean_env):
        """PHI_ORBITS_SIEVE_MEMORY_MB sets the cap."""
        clean_env.setenv("PHI_ORBITS_SIEVE_MEMORY_MB", "64")
        assert sieve_memory_cap_bytes() == 64 * 1024 * 1024

    def test_invalid_env_falls_back(self, clean_env):
        """A non-numeric value is ignored."""
        clean_env.setenv("PHI_ORBITS_SIEVE_MEMORY_MB", "lots")
        assert sieve_memory_cap_bytes() == 512 * 1024 * 1024

    def test_cap_exceeded(self, clean_env):
        """A totient sieve above the cap raises ResourceLimitError."""
        clean_env.setenv("PHI_ORBITS_SIEVE_MEMORY_MB", "1")
        with pytest.raises(ResourceLimitError, match="sieve memory cap"):
            totient_sieve(10 ** 6)
