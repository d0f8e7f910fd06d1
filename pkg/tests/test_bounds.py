"""Tests for the orbit inequality checks."""

import math
import os
from fractions import Fraction

import pytest

from bounds import (
    Verdict, check_thm1, check_thm1_claim, check_thm2, diagonal_seeds,
    explore_dterm, run_prop1_harness, thm2_log2_bound
)
from campaign import ScanConfig, scan_campaign
from exceptions import InputError
from orbits import Guards, Termination
from tests.conftest import HAPPY_CYCLE


class TestOneTermBound:
    """Test the d=1 bound max{x1, k^4} + (k+1)^2."""

    @pytest.mark.parametrize("x1,k,bound,sup_seen", [
        (10, 0, 11, 10),
        (5, 1, 9, 5),
        (3, 2, 25, 4),
    ])
    def test_examples(self, x1, k, bound, sup_seen):
        """Small orbits worked by hand."""
        report = check_thm1(x1, k)
        assert report.bound == bound
        assert report.sup_seen == sup_seen
        assert report.ok and report.verdict is Verdict.OK

    def test_sweep(self, small_table):
        """Every orbit with x1 <= 300 and k <= 8 stays under the bound."""
        for k in range(9):
            for x1 in range(1, 301):
                report = check_thm1(x1, k, totient=small_table)
                assert report.verdict is Verdict.OK, report
                assert report.claim_ok and report.trivial_bound_ok and report.entry_ok

    @pytest.mark.slow
    def test_sweep_full_range(self):
        """Every orbit with x1 <= 10^5 and k <= 20 stays under the bound and drops within k."""
        config = ScanConfig(d=1, k_values=tuple(range(21)), seed_low=1, seed_high=10 ** 5, table_limit=1 << 18)
        failed = [(o.k, o.seeds) for o in scan_campaign(config, workers=os.cpu_count() or 1) if o.verdict != "ok"]
        assert failed == []

    def test_large_start_drops(self, small_table):
        """A start above k^4 produces drop witnesses."""
        report = check_thm1(50000, 3, totient=small_table)
        assert report.verdict is Verdict.OK
        assert report.claim_drops[0][0] == 1

    def test_guard_gives_non_verdict(self):
        """A step budget too small for the orbit yields non-verdict."""
        report = check_thm1(10, 0, Guards(max_steps=1))
        assert report.verdict is Verdict.NON_VERDICT
        assert report.preperiod is None

    def test_rejects_zero_seed(self):
        """x1 must be positive."""
        with pytest.raises(InputError):
            check_thm1(0, 2)


class TestDropClaim:
    """Test the within-k drop claim on raw term lists."""

    def test_witness(self):
        """x_1 = 20 >= 2^4 drops at the second step."""
        check = check_thm1_claim([20, 21, 9], k=2)
        assert check.witnesses == [(1, 2), (2, 1)]
        assert check.ok

    def test_failure(self):
        """No drop within k steps."""
        check = check_thm1_claim([16, 17, 18, 1], k=2)
        assert 1 in check.failures
        assert not check.ok

    def test_untested_tail(self):
        """A window running off the list is untested, not failed."""
        check = check_thm1_claim([30], k=2)
        assert check.untested == [1]
        assert check.ok

    def test_rejects_small_k(self):
        """The claim needs k >= 2."""
        with pytest.raises(InputError):
            check_thm1_claim([1], k=1)


class TestTwoTermBound:
    """Test the d=2, even k bound and its structural checks."""

    def test_base_case(self):
        """(1, 1) with k = 0 is outside the hypothesis and settles at 2."""
        report = check_thm2(1, 1, 0)
        assert not report.hypothesis
        assert report.base_case_ok is True
        assert report.verdict is Verdict.OK

    def test_three_five(self):
        """(3, 5) with k = 0: X = 17, orbit 3, 5, 6, 6, 4, 4, ..."""
        report = check_thm2(3, 5, 0)
        assert report.X == Fraction(17)
        assert report.sup_seen == 6
        assert report.parity_ok and report.head_ok
        assert report.verdict is Verdict.OK

    def test_even_shift(self):
        """(2, 2) with k = 2 settles at 10."""
        report = check_thm2(2, 2, 2)
        assert report.X == Fraction(15)
        assert report.sup_seen == 10
        assert (report.preperiod, report.period) == (5, 1)
        assert report.verdict is Verdict.OK

    def test_rejects_odd_shift(self):
        """Odd k has no proven bound."""
        with pytest.raises(InputError):
            check_thm2(3, 5, 1)

    def test_log2_bound(self):
        """2 * X^(3^(k+1)), overflowing to infinity."""
        assert thm2_log2_bound(Fraction(17), 0) == 2 * 17 ** 3
        assert thm2_log2_bound(Fraction(100), 10) == math.inf

    def test_sweep(self, small_table):
        """Seeds up to 12 and k in {0, 2, 4}."""
        for k in (0, 2, 4):
            for x1 in range(1, 13):
                for x2 in range(1, 13):
                    report = check_thm2(x1, x2, k, totient=small_table)
                    assert report.verdict is Verdict.OK, report

    @pytest.mark.slow
    def test_sweep_full_range(self):
        """Seeds up to 2000 and every even k up to 10."""
        config = ScanConfig(d=2, k_values=(0, 2, 4, 6, 8, 10), seed_low=1, seed_high=2000, table_limit=1 << 18)
        failed = [(o.k, o.seeds) for o in scan_campaign(config, workers=os.cpu_count() or 1) if o.verdict != "ok"]
        assert failed == []


class TestProp1Harness:
    """Test the limsup bound on digit-square-sum orbits."""

    def test_digit_square_sum(self):
        """Every orbit from 1..10^4 ends at 1 or on the 8-cycle, under 162."""
        report = run_prop1_harness(range(1, 10 ** 4 + 1), C=100, probe_limit=10 ** 4)
        assert report.rhs == 162
        assert report.precondition_ok
        assert report.ok
        assert {o.cycle for o in report.orbits if o.period > 1} <= {
            tuple(HAPPY_CYCLE[i:] + HAPPY_CYCLE[:i]) for i in range(len(HAPPY_CYCLE))
        }
        assert all(o.cycle == (1,) for o in report.orbits if o.period == 1)
        assert report.rhs == max(sum(int(c) ** 2 for c in str(m)) for m in range(1, 100))

    def test_precondition_violation(self):
        """max-plus-c is not decreasing, so the harness fails."""
        report = run_prop1_harness([1], C=10, kind="max-plus-c", probe_limit=20)
        assert not report.precondition_ok
        assert report.violations[0] == 10
        assert not report.ok

    def test_rejects_bad_threshold(self):
        """C must be positive."""
        with pytest.raises(InputError):
            run_prop1_harness([1], C=0)


class TestExploreDterm:
    """Test the d >= 3 exploration."""

    def test_diagonal_seeds(self):
        """(q, ..., q) for each q."""
        assert diagonal_seeds(3, 2, 4) == [(2, 2, 2), (3, 3, 3), (4, 4, 4)]

    def test_constant_orbit_not_lehmer(self):
        """3 * phi(30) + 6 = 30 is constant; 30 is no Lehmer candidate."""
        report = explore_dterm(3, 6, [(30, 30, 30)])
        orbit = report.orbits[0]
        assert orbit.constant
        assert not orbit.lehmer_flag
        assert report.lehmer_candidates == []

    def test_guard_hits_have_growth_profile(self):
        """Orbits stopped by a guard carry a log2 growth profile."""
        report = explore_dterm(3, 1, [(5, 7, 9)], Guards(max_steps=20, max_value=10 ** 12))
        for orbit in report.guard_hits:
            assert orbit.terminated is not Termination.CYCLE_FOUND
            assert orbit.growth[0][0] == 1
        assert len(report.orbits) == 1

    def test_rejects_small_arity(self):
        """d < 3 belongs to the one- and two-term checks."""
        with pytest.raises(InputError):
            explore_dterm(2, 0, [(1, 1)])
