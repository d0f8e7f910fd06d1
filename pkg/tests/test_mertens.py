"""Tests for exact prime products and their envelopes."""

import math

import pytest
from gmpy2 import mpq, mpz

from exceptions import InputError
from mertens import (
    chebyshev_check, chebyshev_sweep, check_corollary, corollary_threshold,
    euler_factor_product, log_samples, mertens_product, mertens_sweep, product_tree
)


class TestProductTree:
    """Test the balanced product."""

    def test_empty(self):
        """The empty product is 1."""
        assert product_tree([]) == 1

    def test_factorial(self):
        """1 * 2 * ... * 10."""
        assert product_tree(range(1, 11)) == mpz(math.factorial(10))

    def test_odd_length(self):
        """An unpaired last element is carried up."""
        assert product_tree([2, 3, 5]) == 30

    def test_euler_factor_product(self):
        """(1 - 1/2)(1 - 1/3) = 1/3."""
        assert euler_factor_product([2, 3]) == mpq(1, 3)


class TestMertensEnvelope:
    """Test prod_{p<=x} (1 - 1/p) against the two-sided envelope."""

    def test_x_two(self):
        """Only the prime 2."""
        assert mertens_product(2).product == mpq(1, 2)

    def test_x_ten(self):
        """(1/2)(2/3)(4/5)(6/7) = 8/35, inside the envelope."""
        envelope = mertens_product(10)
        assert envelope.product == mpq(8, 35)
        assert envelope.rs_lower < 8 / 35 < envelope.rs_upper
        assert envelope.inside

    def test_sweep_matches_direct(self):
        """The incremental sweep reproduces direct products."""
        for envelope in mertens_sweep(200, start=2):
            if envelope.x in (2, 17, 100, 199, 200):
                assert envelope.product == mertens_product(envelope.x).product

    def test_sweep_inside(self):
        """Every x from 2 to 3000 is strictly inside."""
        outside = [e.x for e in mertens_sweep(3000) if not e.inside]
        assert outside == []

    @pytest.mark.slow
    def test_sweep_inside_full_range(self):
        """Every x from 2 to 10^4 is strictly inside."""
        outside = [e.x for e in mertens_sweep(10 ** 4) if not e.inside]
        assert outside == []

    def test_log_samples_inside(self):
        """Twenty log-spaced points up to 10^6 are strictly inside."""
        samples = log_samples(10 ** 6, count=20)
        assert len(samples) == 20
        assert all(mertens_product(x).inside for x in samples)

    def test_rejects_small_x(self):
        """x must be at least 2."""
        with pytest.raises(InputError):
            mertens_product(1)
        with pytest.raises(InputError):
            list(mertens_sweep(10, start=1))

    def test_log_samples(self):
        """Spaced points include both ends and are sorted."""
        samples = log_samples(10 ** 6, count=20)
        assert samples[0] == 2 and samples[-1] == 10 ** 6
        assert samples == sorted(set(samples))


class TestCorollary:
    """Test prod_{x<p<=x^3} (1 - 1/p) < 1/2."""

    def test_threshold_below_six(self):
        """The analytic threshold is about 5.83."""
        assert 5.8 < float(corollary_threshold()) < 6

    def test_x_six(self):
        """Primes 7..211."""
        check = check_corollary(6)
        assert check.ok
        assert check.product < mpq(1, 2)

    def test_small_range(self):
        """Every x from 6 to 40."""
        assert all(check_corollary(x).ok for x in range(6, 41))

    @pytest.mark.slow
    def test_full_range(self):
        """Every x from 6 to 100."""
        assert all(check_corollary(x).ok for x in range(6, 101))

    def test_rejects_small_x(self):
        """x < 6 is below the threshold."""
        with pytest.raises(InputError):
            check_corollary(5)


class TestChebyshev:
    """Test prod_{p<=x} p < 4^x."""

    def test_x_ten(self):
        """210 < 4^10."""
        check = chebyshev_check(10)
        assert check.ok
        assert check.margin == pytest.approx(20 - math.log2(210))

    def test_x_one(self):
        """Empty primorial."""
        assert chebyshev_check(1).ok

    def test_sweep(self):
        """Every x up to 10^4."""
        checks = list(chebyshev_sweep(10 ** 4))
        assert len(checks) == 10 ** 4
        assert all(c.ok for c in checks)

    def test_rejects_zero(self):
        """x must be positive."""
        with pytest.raises(InputError):
            chebyshev_check(0)
