"""
Scan campaigns over d=1 and d=2 phi-sum orbits.

Work items are enumerated in a fixed order (k outermost, then seeds in
lexicographic order) and results are always yielded in that order, whether
they are computed in-process or by a worker pool.
"""

import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import islice, product
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from bounds import Verdict, check_thm1, check_thm2
from exceptions import ArithmeticOverflowError, InputError, ResourceLimitError
from orbits import Guards, OrbitSpec, detect_cycle
from totient import TotientTable, shared_table

logger = logging.getLogger(__name__)

DEFAULT_TABLE_LIMIT = 1 << 20
BATCH_SIZE = 4096

WorkItem = Tuple[int, Tuple[int, ...]]


@dataclass(frozen=True)
class ScanConfig:
    """A family d in {1, 2}, shifts k, and seeds drawn from seed_low..seed_high."""
    d: int
    k_values: Tuple[int, ...]
    seed_low: int
    seed_high: int
    guards: Guards = field(default_factory=Guards)
    table_limit: int = DEFAULT_TABLE_LIMIT

    def __post_init__(self):
        if self.d not in (1, 2):
            raise InputError(f"scan_campaign() covers d in {{1, 2}}, got d={self.d}")
        if any(k < 0 for k in self.k_values):
            raise InputError(f"Shifts must be >= 0, got {list(self.k_values)}")
        if self.seed_low < 1:
            raise InputError(f"Seeds must be positive, got seed_low={self.seed_low}")
        object.__setattr__(self, "k_values", tuple(self.k_values))

    @property
    def size(self) -> int:
        seeds = max(self.seed_high - self.seed_low + 1, 0)
        return len(self.k_values) * seeds ** self.d


@dataclass
class ScanOrbit:
    d: int
    k: int
    seeds: Tuple[int, ...]
    label: str
    terminated: Optional[str] = None
    preperiod: Optional[int] = None
    period: Optional[int] = None
    cycle: Tuple[int, ...] = ()
    sup_seen: Optional[int] = None
    verdict: Optional[str] = None
    error: Optional[str] = None


@dataclass
class ScanAggregate:
    """Histograms over a campaign; keys are strings so they survive JSON."""
    period_histogram: Counter = field(default_factory=Counter)
    preperiod_histogram: Counter = field(default_factory=Counter)
    termination_counts: Counter = field(default_factory=Counter)
    verdict_counts: Counter = field(default_factory=Counter)
    errors: int = 0

    def add(self, orbit: ScanOrbit) -> None:
        if orbit.error is not None:
            self.errors += 1
            return
        self.termination_counts[orbit.terminated] += 1
        self.verdict_counts[orbit.verdict] += 1
        if orbit.period is not None:
            self.period_histogram[str(orbit.period)] += 1
            self.preperiod_histogram[str(orbit.preperiod)] += 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "period_histogram": dict(sorted(self.period_histogram.items(), key=lambda kv: int(kv[0]))),
            "preperiod_histogram": dict(sorted(self.preperiod_histogram.items(), key=lambda kv: int(kv[0]))),
            "termination_counts": dict(sorted(self.termination_counts.items())),
            "verdict_counts": dict(sorted(self.verdict_counts.items())),
            "errors": self.errors,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScanAggregate":
        return cls(
            period_histogram=Counter(data.get("period_histogram", {})),
            preperiod_histogram=Counter(data.get("preperiod_histogram", {})),
            termination_counts=Counter(data.get("termination_counts", {})),
            verdict_counts=Counter(data.get("verdict_counts", {})),
            errors=data.get("errors", 0),
        )


def work_items(config: ScanConfig) -> Iterator[WorkItem]:
    seeds = range(config.seed_low, config.seed_high + 1)
    for k in config.k_values:
        for seed_tuple in product(seeds, repeat=config.d):
            yield k, seed_tuple


def _label(d: int, k: int) -> str:
    if d == 1:
        return "one-term"
    return "two-term" if k % 2 == 0 else "odd-shift"


def scan_orbit(d: int, k: int, seeds: Sequence[int], guards: Guards, totient: TotientTable) -> ScanOrbit:
    """One campaign record; engine errors are captured on the record."""
    orbit = ScanOrbit(d=d, k=k, seeds=tuple(seeds), label=_label(d, k))
    try:
        if d == 1:
            report = check_thm1(seeds[0], k, guards, totient)
        elif k % 2 == 0:
            report = check_thm2(seeds[0], seeds[1], k, guards, totient)
        else:
            report = None
            result = detect_cycle(OrbitSpec(d=d, k=k, kind="phi-sum", seeds=tuple(seeds), guards=guards), totient)
    except (ArithmeticOverflowError, ResourceLimitError) as e:
        logger.warning(f"Orbit d={d} k={k} seeds={list(seeds)} failed: {e}")
        orbit.error = f"{type(e).__name__}: {e}"
        return orbit

    if report is None:
        orbit.terminated = result.terminated.value
        orbit.preperiod = result.preperiod
        orbit.period = result.period
        orbit.cycle = result.cycle
        orbit.sup_seen = result.sup_seen
        # odd k for d=2: an observation, not a verdict
        orbit.verdict = (Verdict.OK if result.found else Verdict.NON_VERDICT).value
        return orbit

    orbit.terminated = report.terminated.value
    orbit.preperiod = report.preperiod
    orbit.period = report.period
    orbit.cycle = report.cycle
    orbit.sup_seen = report.sup_seen
    orbit.verdict = report.verdict.value
    return orbit


_worker_table: Optional[TotientTable] = None
_worker_guards: Optional[Guards] = None


def _init_worker(table_limit: int, guards: Guards) -> None:
    global _worker_table, _worker_guards
    _worker_table = shared_table(table_limit)
    _worker_guards = guards


def _run_item(item: WorkItem) -> ScanOrbit:
    k, seeds = item
    return scan_orbit(len(seeds), k, seeds, _worker_guards, _worker_table)


def scan_campaign(config: ScanConfig, start: int = 0, workers: int = 1) -> Iterator[ScanOrbit]:
    """
    Yield one ScanOrbit per work item from position ``start`` on, in config order.

    With workers > 1 items are evaluated by a process pool in batches; each
    worker builds its own read-only totient table once.
    """
    if start < 0:
        raise InputError(f"Start position must be >= 0, got {start}")
    items = islice(work_items(config), start, None)
    logger.info(f"Scanning {config.size - start} orbits (d={config.d}, k={list(config.k_values)}, workers={workers})")

    if workers <= 1:
        _init_worker(config.table_limit, config.guards)
        for item in items:
            yield _run_item(item)
        return

    with ProcessPoolExecutor(
        max_workers=workers,
        initializer=_init_worker,
        initargs=(config.table_limit, config.guards),
    ) as executor:
        while True:
            batch: List[WorkItem] = list(islice(items, BATCH_SIZE))
            if not batch:
                break
            chunksize = max(1, len(batch) // (4 * workers))
            # map() returns results in submission order
            yield from executor.map(_run_item, batch, chunksize=chunksize)
