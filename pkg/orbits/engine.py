"""
Evaluation and cycle detection for d-term recurrences.

State index i is the d-tuple (x_{i+1}, ..., x_{i+d}) of 1-based terms, so
the seeds form state 0. A cycle-found result reports the least preperiod mu
and least period lam with state_mu == state_{mu+lam}; ``cycle`` lists the
scalar terms x_{mu+1}, ..., x_{mu+lam}. For cycle-found outcomes
``steps_used`` is mu + lam, the index of the first repeated state, and is
the same for both detectors. For guard outcomes it is the index of the
last term the naive walk would have produced, so both detectors report the
same guard, supremum and step count for every orbit.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .base import OrbitFunction
from .registry import registry
from exceptions import ArithmeticOverflowError, InputError, ResourceLimitError

logger = logging.getLogger(__name__)

UINT64_LIMIT = 1 << 64
DEFAULT_MAX_STEPS = 10 ** 7
DEFAULT_MAX_VALUE = 1 << 63
DEFAULT_MAX_STATES = 5 * 10 ** 6

State = Tuple[int, ...]


class Termination(str, Enum):
    CYCLE_FOUND = "cycle-found"
    GUARD_MAX_STEPS = "guard-max-steps"
    GUARD_MAX_VALUE = "guard-max-value"


@dataclass(frozen=True)
class Guards:
    """Evaluation budget and term ceiling for one orbit."""
    max_steps: int = DEFAULT_MAX_STEPS
    max_value: int = DEFAULT_MAX_VALUE


@dataclass(frozen=True)
class OrbitSpec:
    """Recurrence family descriptor: arity d, shift k, function kind and seeds."""
    d: int
    k: int
    kind: str
    seeds: Tuple[int, ...]
    guards: Guards = field(default_factory=Guards)

    def __post_init__(self):
        if self.d < 1:
            raise InputError(f"Arity d must be >= 1, got {self.d}")
        if self.k < 0:
            raise InputError(f"Shift k must be >= 0, got {self.k}")
        if len(self.seeds) != self.d:
            raise InputError(f"Expected {self.d} seeds, got {len(self.seeds)}")
        if any(s < 1 for s in self.seeds):
            raise InputError(f"Seeds must be positive, got {list(self.seeds)}")
        if self.guards.max_steps < 1 or self.guards.max_value < 1:
            raise InputError(f"Guards must be positive, got {self.guards}")
        if registry.get(self.kind) is None:
            raise InputError(f"Unknown function kind {self.kind!r}")
        # Normalise lists passed by callers so specs hash and compare reliably.
        object.__setattr__(self, "seeds", tuple(self.seeds))


@dataclass(frozen=True)
class OrbitResult:
    """Outcome of a cycle search; preperiod and period are None unless a cycle was found."""
    preperiod: Optional[int]
    period: Optional[int]
    cycle: Tuple[int, ...]
    sup_seen: int
    steps_used: int
    terminated: Termination

    @property
    def found(self) -> bool:
        return self.terminated is Termination.CYCLE_FOUND


class _GuardHit(Exception):
    """Internal signal that a guard stopped the walk."""

    def __init__(self, termination: Termination):
        super().__init__(termination.value)
        self.termination = termination


class _Walker:
    """
    Produces the terms of one orbit in order while enforcing guards and tracking the supremum.

    ``reach`` may exceed ``max_steps``: terms past the step budget are still
    produced but never raise the supremum or trip the value guard. When a
    state repeats within the budget every later term repeats an earlier one,
    so a later overflow or ceiling breach means the budget ran out first.
    """

    def __init__(self, spec: OrbitSpec, function: OrbitFunction, reach: Optional[int] = None):
        self.spec = spec
        self.function = function
        self.reach = spec.guards.max_steps if reach is None else reach
        self.evaluations = 0
        self.sup_seen = max(spec.seeds)

    def advance(self, state: State) -> State:
        if self.evaluations >= self.reach:
            raise _GuardHit(Termination.GUARD_MAX_STEPS)
        past_budget = self.evaluations >= self.spec.guards.max_steps
        try:
            value = _checked_evaluate(self.function, state, self.spec.k)
        except ArithmeticOverflowError:
            if past_budget:
                raise _GuardHit(Termination.GUARD_MAX_STEPS)
            raise
        self.evaluations += 1
        if past_budget:
            if value > self.spec.guards.max_value:
                raise _GuardHit(Termination.GUARD_MAX_STEPS)
            return state[1:] + (value,)
        if value > self.sup_seen:
            self.sup_seen = value
        if value > self.spec.guards.max_value:
            raise _GuardHit(Termination.GUARD_MAX_VALUE)
        return state[1:] + (value,)

    def guard_result(self, hit: _GuardHit) -> OrbitResult:
        steps = min(self.evaluations, self.spec.guards.max_steps)
        logger.debug(f"Guard {hit.termination.value} after {steps} steps for {self.spec}")
        return OrbitResult(
            preperiod=None,
            period=None,
            cycle=(),
            sup_seen=self.sup_seen,
            steps_used=steps,
            terminated=hit.termination,
        )


def _checked_evaluate(function: OrbitFunction, window: Sequence[int], k: int) -> int:
    value = function.evaluate(window, k)
    if value >= UINT64_LIMIT:
        raise ArithmeticOverflowError(
            f"{function.name} produced {value} from window {list(window)}, outside the 64-bit range"
        )
    return value


def build_function(spec: OrbitSpec, totient: Optional[Callable[[int], int]] = None) -> OrbitFunction:
    return registry.build(spec.kind, totient)


def step(
    window: Sequence[int],
    spec: OrbitSpec,
    totient: Optional[Callable[[int], int]] = None
) -> int:
    """
    Next term f(window) for the spec's function kind.

    Raises:
        InputError: If the window length differs from spec.d
        ArithmeticOverflowError: If the result leaves the 64-bit range
    """
    if len(window) != spec.d:
        raise InputError(f"Window of length {len(window)} does not match d={spec.d}")
    return _checked_evaluate(build_function(spec, totient), window, spec.k)


def iterate_terms(
    spec: OrbitSpec,
    count: int,
    totient: Optional[Callable[[int], int]] = None
) -> List[int]:
    """The first ``count`` terms x_1, ..., x_count, seeds included."""
    function = build_function(spec, totient)
    terms = list(spec.seeds[:count])
    while len(terms) < count:
        terms.append(_checked_evaluate(function, terms[-spec.d:], spec.k))
    return terms


def detect_cycle(
    spec: OrbitSpec,
    totient: Optional[Callable[[int], int]] = None
) -> OrbitResult:
    """
    Brent's cycle detection on the d-tuple state, then minimisation.

    Phase one finds the least period lam with power-of-two tortoise jumps;
    phase two walks two pointers lam apart from the seeds to find the least
    preperiod mu. Candidate equality is exact tuple comparison.

    Only phase one produces new terms. It stops by index 2 * max(mu + 1, lam)
    - 2 + lam, which is at most three times mu + lam, so it may run to three
    times ``max_steps`` before concluding that no state repeats within the
    budget. Phase two replays terms phase one already checked and is not
    charged against the guards.
    """
    budget = spec.guards.max_steps
    function = build_function(spec, totient)
    walker = _Walker(spec, function, reach=3 * budget)
    start: State = spec.seeds

    try:
        power = lam = 1
        tortoise = start
        hare = walker.advance(start)
        while tortoise != hare:
            if power == lam:
                tortoise = hare
                power *= 2
                lam = 0
            hare = walker.advance(hare)
            lam += 1
    except _GuardHit as hit:
        return walker.guard_result(hit)

    def replay(state: State) -> State:
        return state[1:] + (function.evaluate(state, spec.k),)

    tortoise = hare = start
    for _ in range(lam):
        hare = replay(hare)
    mu = 0
    while tortoise != hare:
        tortoise = replay(tortoise)
        hare = replay(hare)
        mu += 1

    if mu + lam > budget:
        return walker.guard_result(_GuardHit(Termination.GUARD_MAX_STEPS))

    cycle = []
    state = tortoise
    for _ in range(lam):
        cycle.append(state[0])
        state = replay(state)

    logger.debug(f"Brent: mu={mu} lam={lam} after {walker.evaluations} evaluations")
    return OrbitResult(
        preperiod=mu,
        period=lam,
        cycle=tuple(cycle),
        sup_seen=walker.sup_seen,
        steps_used=mu + lam,
        terminated=Termination.CYCLE_FOUND,
    )


def detect_cycle_naive(
    spec: OrbitSpec,
    totient: Optional[Callable[[int], int]] = None,
    max_states: int = DEFAULT_MAX_STATES
) -> OrbitResult:
    """
    Reference detector that remembers every visited state.

    Raises:
        ResourceLimitError: If more than max_states distinct states are stored
    """
    walker = _Walker(spec, build_function(spec, totient))
    seen: Dict[State, int] = {}
    terms: List[int] = list(spec.seeds)
    state: State = spec.seeds
    index = 0

    try:
        while state not in seen:
            if len(seen) >= max_states:
                raise ResourceLimitError(
                    f"State history exceeded {max_states} entries for {spec}"
                )
            seen[state] = index
            state = walker.advance(state)
            terms.append(state[-1])
            index += 1
    except _GuardHit as hit:
        return walker.guard_result(hit)

    mu = seen[state]
    lam = index - mu
    return OrbitResult(
        preperiod=mu,
        period=lam,
        cycle=tuple(terms[mu:mu + lam]),
        sup_seen=walker.sup_seen,
        steps_used=index,
        terminated=Termination.CYCLE_FOUND,
    )
