"""
Exact prime products: third-Mertens envelope, the (x, x^3] corollary and
the primorial bound prod_{p<=x} p < 4^x.

Products are formed exactly as gmpy2 ``mpz`` integers with a balanced
product tree and compared as integers. The Rosser-Schoenfeld envelope is
evaluated with mpmath at ENVELOPE_DPS digits from a stored 50-digit value of
Euler's constant; a comparison is accepted only when the observed gap is at
least ten times the evaluation tolerance.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, List

import mpmath
import numpy as np
from gmpy2 import mpq, mpz

from exceptions import InputError
from sieve import prime_sieve, primes_between

logger = logging.getLogger(__name__)

EULER_GAMMA_50 = "0.57721566490153286060651209008240243104215933593992"
ENVELOPE_DPS = 60
TOLERANCE_EXPONENT = -48
HALF = mpq(1, 2)


def product_tree(values: Iterable[int]) -> mpz:
    """Product of integers by pairwise reduction; the empty product is 1."""
    layer: List[mpz] = [mpz(v) for v in values]
    if not layer:
        return mpz(1)
    while len(layer) > 1:
        paired = [layer[i] * layer[i + 1] for i in range(0, len(layer) - 1, 2)]
        if len(layer) % 2:
            paired.append(layer[-1])
        layer = paired
    return layer[0]


def euler_factor_product(primes: Iterable[int]) -> mpq:
    """prod (1 - 1/p) over the given primes, exactly."""
    primes = [int(p) for p in primes]
    return mpq(product_tree(p - 1 for p in primes), product_tree(primes))


@dataclass
class MertensEnvelope:
    """prod_{p<=x} (1 - 1/p) with the two-sided Rosser-Schoenfeld bounds."""
    x: int
    product: mpq
    rs_lower: mpmath.mpf
    rs_upper: mpmath.mpf
    gap: mpmath.mpf
    tolerance: mpmath.mpf

    @property
    def inside(self) -> bool:
        """Strictly inside the envelope, with the gap clear of the evaluation tolerance."""
        return self.gap > 10 * self.tolerance


def _envelope(x: int, product: mpq) -> MertensEnvelope:
    with mpmath.workdps(ENVELOPE_DPS):
        gamma = mpmath.mpf(EULER_GAMMA_50)
        log_x = mpmath.log(x)
        main = mpmath.exp(-gamma) / log_x
        lower = main * (1 - 1 / log_x ** 2)
        upper = main * (1 + 1 / (2 * log_x ** 2))
        value = mpmath.mpf(int(product.numerator)) / mpmath.mpf(int(product.denominator))
        gap = min(value - lower, upper - value)
        tolerance = upper * mpmath.mpf(10) ** TOLERANCE_EXPONENT
    return MertensEnvelope(x=x, product=product, rs_lower=lower, rs_upper=upper, gap=gap, tolerance=tolerance)


def mertens_product(x: int) -> MertensEnvelope:
    """Exact prod_{p<=x} (1 - 1/p) for x >= 2 and its envelope."""
    if x < 2:
        raise InputError(f"mertens_product() needs x >= 2, got {x}")
    return _envelope(x, euler_factor_product(prime_sieve(x).tolist()))


def mertens_sweep(limit: int, start: int = 2) -> Iterator[MertensEnvelope]:
    """Envelope at every integer start <= x <= limit, products updated incrementally."""
    if start < 2:
        raise InputError(f"mertens_sweep() needs start >= 2, got {start}")
    primes = prime_sieve(limit).tolist()
    numerator = product_tree(p - 1 for p in primes if p <= start)
    denominator = product_tree(p for p in primes if p <= start)
    pending = iter([p for p in primes if p > start])
    next_prime = next(pending, None)

    for x in range(start, limit + 1):
        while next_prime is not None and next_prime <= x:
            numerator *= next_prime - 1
            denominator *= next_prime
            next_prime = next(pending, None)
        yield _envelope(x, mpq(numerator, denominator))


def log_samples(limit: int, count: int = 20, low: int = 2) -> List[int]:
    """``count`` logarithmically spaced integers in [low, limit], deduplicated."""
    points = np.geomspace(low, limit, count)
    return sorted({int(round(p)) for p in points})


def corollary_threshold() -> mpmath.mpf:
    """exp(sqrt(3 * (1 + 1/27))); the (x, x^3] corollary holds beyond it."""
    with mpmath.workdps(30):
        return mpmath.exp(mpmath.sqrt(3 * (1 + mpmath.mpf(1) / 27)))


@dataclass
class CorollaryCheck:
    x: int
    product: mpq
    ok: bool


def check_corollary(x: int) -> CorollaryCheck:
    """prod_{x<p<=x^3} (1 - 1/p) < 1/2, exactly, for x >= 6."""
    if x < 6:
        raise InputError(f"check_corollary() needs x >= 6, got {x}")
    product = euler_factor_product(primes_between(x, x ** 3).tolist())
    ok = product < HALF
    if not ok:
        logger.error(f"Corollary fails at x={x}: product {float(product)}")
    return CorollaryCheck(x=x, product=product, ok=ok)


@dataclass
class ChebyshevCheck:
    """prod_{p<=x} p < 4^x, decided exactly; ``margin`` = 2x - log2(primorial)."""
    x: int
    primorial_log2: float
    margin: float
    ok: bool


def _chebyshev(x: int, primorial: mpz) -> ChebyshevCheck:
    ok = primorial < (mpz(1) << (2 * x))
    with mpmath.workdps(30):
        log2_value = mpmath.log(mpmath.mpf(int(primorial)), 2)
        margin = 2 * x - log2_value
    if ok != (margin > 0):
        logger.warning(f"Float margin {margin} disagrees with exact comparison at x={x}")
    return ChebyshevCheck(x=x, primorial_log2=float(log2_value), margin=float(margin), ok=ok)


def chebyshev_check(x: int) -> ChebyshevCheck:
    """Primorial bound at one x >= 1."""
    if x < 1:
        raise InputError(f"chebyshev_check() needs x >= 1, got {x}")
    return _chebyshev(x, product_tree(prime_sieve(x).tolist()))


def chebyshev_sweep(limit: int) -> Iterator[ChebyshevCheck]:
    """Primorial bound at every 1 <= x <= limit."""
    is_prime = np.zeros(limit + 1, dtype=bool)
    is_prime[prime_sieve(limit)] = True
    primorial = mpz(1)
    for x in range(1, limit + 1):
        if is_prime[x]:
            primorial *= x
        yield _chebyshev(x, primorial)
