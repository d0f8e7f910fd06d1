"""phi-orbits command line: run one verification and stream its records."""

import argparse
import logging
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, Optional, Sequence

from bounds import Verdict, check_thm1, check_thm2, diagonal_seeds, explore_dterm, run_prop1_harness
from campaign import DEFAULT_TABLE_LIMIT, ScanAggregate, ScanConfig, scan_campaign
from checkpoint import CheckpointManager
from config import OUTPUT_FORMATS, RunConfig, build_config
from crt_witness import DropOutcome, build_crt_witness, verify_phi_drop
from exceptions import (
    ArithmeticOverflowError, CheckpointError, ConfigMismatchError, FactorizationCapError,
    InputError, PhiOrbitsError, ResourceLimitError, VerificationError,
)
from mertens import (
    chebyshev_check, chebyshev_sweep, check_corollary, corollary_threshold,
    log_samples, mertens_product, mertens_sweep,
)
from orbits import OrbitSpec, detect_cycle, detect_cycle_naive, iterate_terms
from records import Record, RecordWriter, make_writer
from totient import avg_phi_check, lehmer_scan, phi_chain, pillai_bounds, pillai_sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION_FAILURE = 1
EXIT_INPUT_ERROR = 2
EXIT_NON_VERDICT = 3
EXIT_INTERNAL_ERROR = 4
EXIT_CONFIG_MISMATCH = 5

CHECKPOINT_EVERY = 1000


@dataclass
class RunStatus:
    """Worst outcome seen while emitting records."""
    failed: bool = False
    non_verdict: bool = False

    def note(self, verdict: Optional[str]) -> None:
        if verdict == Verdict.FAIL.value:
            self.failed = True
        elif verdict == Verdict.NON_VERDICT.value:
            self.non_verdict = True

    @property
    def exit_code(self) -> int:
        if self.failed:
            return EXIT_VERIFICATION_FAILURE
        if self.non_verdict:
            return EXIT_NON_VERDICT
        return EXIT_OK


def _need(params: Dict[str, Any], name: str) -> Any:
    if params.get(name) is None:
        raise InputError(f"Missing required parameter {name!r}")
    return params[name]


def _as_tuple(value: Any) -> tuple:
    return tuple(value) if isinstance(value, (list, tuple)) else (value,)


def _ok_verdict(ok: bool) -> str:
    return (Verdict.OK if ok else Verdict.FAIL).value


def _run_orbit(config: RunConfig, writer: RecordWriter, status: RunStatus) -> None:
    p = config.params
    spec = OrbitSpec(
        d=p.get("d", 1), k=p.get("k", 0), kind=p.get("kind", "phi-sum"),
        seeds=tuple(_need(p, "seeds")), guards=config.guards,
    )
    detector = detect_cycle_naive if p.get("detector") == "naive" else detect_cycle
    result = detector(spec)
    outputs = {
        "preperiod": result.preperiod,
        "period": result.period,
        "cycle": result.cycle,
        "sup_seen": result.sup_seen,
        "steps_used": result.steps_used,
        "terminated": result.terminated,
    }
    if p.get("terms"):
        outputs["terms"] = iterate_terms(spec, _need(p, "terms"))
    verdict = Verdict.OK if result.found else Verdict.NON_VERDICT
    outputs["verdict"] = verdict
    status.note(verdict.value)
    writer.write(Record("orbit", {"d": spec.d, "k": spec.k, "kind": spec.kind, "seeds": spec.seeds}, outputs))


def _run_chain(config: RunConfig, writer: RecordWriter, status: RunStatus) -> None:
    p = config.params
    if p.get("sweep"):
        sweep = pillai_sweep(_need(p, "x1"))
        status.note(_ok_verdict(sweep.ok))
        writer.write(Record("chain", {"sweep_limit": _need(p, "x1")}, {
            "ok": sweep.ok, "failures": sweep.failures, "max_iterations": sweep.max_iterations,
            "verdict": _ok_verdict(sweep.ok),
        }))
        return
    chain = phi_chain(_need(p, "x1"))
    lower, upper = pillai_bounds(_need(p, "x1"))
    ok = lower <= chain.iterations <= upper
    status.note(_ok_verdict(ok))
    writer.write(Record("chain", {"x1": _need(p, "x1")}, {
        "chain": chain.chain, "pillai_n": chain.pillai_n, "iterations": chain.iterations,
        "pillai_lower": lower, "pillai_upper": upper, "ok": ok, "verdict": _ok_verdict(ok),
    }))


def _scan_records(config: RunConfig, writer: RecordWriter, status: RunStatus) -> None:
    p = config.params
    scan = ScanConfig(
        d=p.get("d", 1),
        k_values=_as_tuple(p.get("k", [0])),
        seed_low=p.get("seed_low", 1),
        seed_high=_need(p, "seed_high"),
        guards=config.guards,
        table_limit=p.get("table_limit", DEFAULT_TABLE_LIMIT),
    )
    config_hash = config.config_hash()
    aggregate = ScanAggregate()
    position = 0
    if config.checkpoint_path is not None:
        saved = CheckpointManager.load_checkpoint(config.checkpoint_path, config_hash)
        if saved is not None:
            position = saved["position"]
            aggregate = ScanAggregate.from_dict(saved.get("aggregates", {}))
            offset = saved.get("output_offset")
            if offset is not None and config.output_path is not None:
                writer.stream.truncate(offset)

    def save() -> None:
        writer.stream.flush()
        offset = writer.stream.tell() if config.output_path is not None else None
        CheckpointManager.save_checkpoint(
            config.checkpoint_path, config_hash, position, aggregate.to_dict(), offset
        )

    for orbit in scan_campaign(scan, start=position, workers=config.workers):
        aggregate.add(orbit)
        status.note(orbit.verdict)
        if orbit.error is not None:
            status.non_verdict = True
        writer.write(Record(
            "scan-orbit",
            {"d": orbit.d, "k": orbit.k, "seeds": orbit.seeds},
            {
                "label": orbit.label, "terminated": orbit.terminated,
                "preperiod": orbit.preperiod, "period": orbit.period, "cycle": orbit.cycle,
                "sup_seen": orbit.sup_seen, "verdict": orbit.verdict, "error": orbit.error,
            },
        ))
        position += 1
        if config.checkpoint_path is not None and position % CHECKPOINT_EVERY == 0:
            save()

    if config.checkpoint_path is not None:
        save()
    writer.write(Record(
        "scan-aggregate",
        {"d": scan.d, "k": scan.k_values, "seed_low": scan.seed_low, "seed_high": scan.seed_high},
        {"orbits": position, **aggregate.to_dict()},
    ))


def _run_thm1(config: RunConfig, writer: RecordWriter, status: RunStatus) -> None:
    p = config.params
    report = check_thm1(_need(p, "x1"), p.get("k", 0), config.guards)
    status.note(report.verdict.value)
    writer.write(Record("thm1", {"x1": report.x1, "k": report.k}, report))


def _run_thm2(config: RunConfig, writer: RecordWriter, status: RunStatus) -> None:
    p = config.params
    report = check_thm2(_need(p, "x1"), _need(p, "x2"), p.get("k", 0), config.guards)
    status.note(report.verdict.value)
    writer.write(Record("thm2", {"x1": report.x1, "x2": report.x2, "k": report.k}, report))


def _run_prop1(config: RunConfig, writer: RecordWriter, status: RunStatus) -> None:
    p = config.params
    seeds = range(p.get("seed_low", 1), p.get("seed_high", 100) + 1)
    report = run_prop1_harness(
        seeds, C=p.get("C", 100), kind=p.get("kind", "digit-square-sum"),
        probe_limit=p.get("probe_limit", 10 ** 5), guards=config.guards,
    )
    status.note(_ok_verdict(report.ok))
    cycles = sorted({o.cycle for o in report.orbits if o.period is not None})
    writer.write(Record(
        "prop1",
        {"kind": report.kind, "C": report.C, "seed_low": seeds.start, "seed_high": seeds.stop - 1},
        {
            "rhs": report.rhs, "probe_limit": report.probe_limit,
            "precondition_ok": report.precondition_ok, "violations": report.violations,
            "cycles": cycles, "failed_seeds": [o.seed for o in report.orbits if not o.ok],
            "ok": report.ok, "verdict": _ok_verdict(report.ok),
        },
    ))


def _run_mertens(config: RunConfig, writer: RecordWriter, status: RunStatus) -> None:
    p = config.params
    if p.get("sweep"):
        limit = _need(p, "x")
        points = list(mertens_sweep(limit))
        extra = [mertens_product(x) for x in log_samples(_need(p, "sample_limit"), p.get("samples", 20))] \
            if p.get("sample_limit") else []
        outside = [e.x for e in points + extra if not e.inside]
        ok = not outside
        status.note(_ok_verdict(ok))
        writer.write(Record("mertens", {"sweep_limit": limit, "sample_limit": p.get("sample_limit")}, {
            "checked": len(points) + len(extra), "outside": outside[:100],
            "ok": ok, "verdict": _ok_verdict(ok),
        }))
        return
    envelope = mertens_product(_need(p, "x"))
    status.note(_ok_verdict(envelope.inside))
    writer.write(Record("mertens", {"x": envelope.x}, {
        "product": envelope.product,
        "product_float": float(envelope.product),
        "rs_lower": envelope.rs_lower, "rs_upper": envelope.rs_upper,
        "gap": envelope.gap, "ok": envelope.inside, "verdict": _ok_verdict(envelope.inside),
    }))


def _run_corollary(config: RunConfig, writer: RecordWriter, status: RunStatus) -> None:
    p = config.params
    low = _need(p, "x")
    high = p.get("x_max") or low
    threshold = float(corollary_threshold())
    for x in range(low, high + 1):
        check = check_corollary(x)
        status.note(_ok_verdict(check.ok))
        writer.write(Record("corollary", {"x": x}, {
            "product": check.product, "product_float": float(check.product),
            "threshold": threshold, "ok": check.ok, "verdict": _ok_verdict(check.ok),
        }))


def _run_chebyshev(config: RunConfig, writer: RecordWriter, status: RunStatus) -> None:
    p = config.params
    if p.get("sweep"):
        checks = list(chebyshev_sweep(_need(p, "x")))
        failures = [c.x for c in checks if not c.ok]
        ok = not failures
        status.note(_ok_verdict(ok))
        writer.write(Record("chebyshev", {"sweep_limit": _need(p, "x")}, {
            "checked": len(checks), "failures": failures[:100],
            "min_margin": min(c.margin for c in checks), "ok": ok, "verdict": _ok_verdict(ok),
        }))
        return
    check = chebyshev_check(_need(p, "x"))
    status.note(_ok_verdict(check.ok))
    writer.write(Record("chebyshev", {"x": check.x}, {
        "primorial_log2": check.primorial_log2, "margin": check.margin,
        "ok": check.ok, "verdict": _ok_verdict(check.ok),
    }))


def _run_crt_witness(config: RunConfig, writer: RecordWriter, status: RunStatus) -> None:
    p = config.params
    witness = build_crt_witness(_need(p, "X"), p.get("k", 0), p.get("max_prime"))
    outputs = {
        "blocks": [
            {"first_prime": b[0], "last_prime": b[-1], "count": len(b)} for b in witness.blocks
        ],
        "r": witness.r,
        "q": witness.q,
        "y": witness.y,
        "reverified": True,
    }
    verdict = Verdict.OK
    if not p.get("skip_drop"):
        drop = verify_phi_drop(witness, seed=config.seed)
        outputs["phi_drop"] = drop.outcome
        outputs["phi_drop_methods"] = {str(j): m for j, m in drop.methods.items()}
        outputs["phi_drop_violating_j"] = drop.violating_j
        outputs["samples_checked"] = drop.samples_checked
        if drop.outcome is DropOutcome.VIOLATED:
            verdict = Verdict.FAIL
        elif drop.outcome is DropOutcome.UNVERIFIED:
            verdict = Verdict.NON_VERDICT
    outputs["verdict"] = verdict
    status.note(verdict.value)
    writer.write(Record("crt-witness", {"X": witness.X, "k": witness.k}, outputs))


def _run_lehmer(config: RunConfig, writer: RecordWriter, status: RunStatus) -> None:
    limit = _need(config.params, "limit")
    hits = lehmer_scan(limit)
    ok = not hits
    status.note(_ok_verdict(ok))
    writer.write(Record("lehmer", {"limit": limit}, {
        "hits": [{"q": h.q, "r": h.r} for h in hits], "ok": ok, "verdict": _ok_verdict(ok),
    }))


def _run_avg_phi(config: RunConfig, writer: RecordWriter, status: RunStatus) -> None:
    p = config.params
    check = avg_phi_check(_need(p, "n"))
    tolerance = p.get("tolerance", 0.001)
    ok = abs(check.normalized_mean - 3 / math.pi ** 2) <= tolerance
    status.note(_ok_verdict(ok))
    writer.write(Record("avg-phi", {"n": check.n, "tolerance": tolerance}, {
        "normalized_mean": check.normalized_mean, "reference": check.reference,
        "abs_error": check.abs_error, "ok": ok, "verdict": _ok_verdict(ok),
    }))


def _run_explore(config: RunConfig, writer: RecordWriter, status: RunStatus) -> None:
    p = config.params
    d, k = _need(p, "d"), p.get("k", 0)
    low, high = p.get("seed_low", 1), p.get("seed_high", 10)
    if p.get("all_tuples"):
        seed_tuples = product(range(low, high + 1), repeat=d)
    else:
        seed_tuples = diagonal_seeds(d, low, high)
    report = explore_dterm(d, k, seed_tuples, config.guards)
    for orbit in report.orbits:
        if orbit.lehmer_flag:
            status.failed = True
        writer.write(Record("explore", {"d": d, "k": k, "seeds": orbit.seeds}, orbit))


HANDLERS: Dict[str, Callable[[RunConfig, RecordWriter, RunStatus], None]] = {
    "orbit": _run_orbit,
    "chain": _run_chain,
    "scan": _scan_records,
    "thm1": _run_thm1,
    "thm2": _run_thm2,
    "prop1": _run_prop1,
    "mertens": _run_mertens,
    "corollary": _run_corollary,
    "chebyshev": _run_chebyshev,
    "crt-witness": _run_crt_witness,
    "lehmer": _run_lehmer,
    "avg-phi": _run_avg_phi,
    "explore": _run_explore,
}


@contextmanager
def _output_stream(config: RunConfig) -> Iterator:
    if config.output_path is None:
        yield sys.stdout
        return
    config.output_path.parent.mkdir(parents=True, exist_ok=True)
    # resumed scans append after the records already written
    resuming = (
        config.checkpoint_path is not None
        and config.checkpoint_path.exists()
        and config.checkpoint_path.stat().st_size > 0
    )
    mode = "a" if resuming else "w"
    with open(config.output_path, mode, encoding="utf-8") as f:
        yield f


def run(config: RunConfig) -> int:
    """Dispatch one command, stream its records, and return the exit code."""
    status = RunStatus()
    handler = HANDLERS[config.command]
    logger.info(f"Running {config.command} (config {config.config_hash()[:12]})")
    try:
        with _output_stream(config) as stream:
            writer = make_writer(config.output_format, stream)
            handler(config, writer, status)
            stream.flush()
    except ConfigMismatchError as e:
        logger.error(str(e))
        return EXIT_CONFIG_MISMATCH
    except (InputError, CheckpointError) as e:
        logger.error(str(e))
        return EXIT_INPUT_ERROR
    except VerificationError as e:
        logger.error(str(e))
        return EXIT_VERIFICATION_FAILURE
    except (ResourceLimitError, FactorizationCapError, ArithmeticOverflowError) as e:
        logger.warning(f"No verdict: {e}")
        return EXIT_NON_VERDICT
    except PhiOrbitsError as e:
        logger.error(f"Unexpected error: {e}")
        return EXIT_INTERNAL_ERROR
    return status.exit_code


def _add_guard_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-steps", type=int, dest="max_steps", help="Evaluation budget per orbit")
    parser.add_argument("--max-value", type=int, dest="max_value", help="Largest admissible term")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phi-orbits",
        description="Verify shifted-totient recurrences and the prime-product inequalities behind them.",
    )
    parser.add_argument("--config", type=Path, help="TOML config file")
    parser.add_argument("--workers", type=int, help="Worker processes for scans")
    parser.add_argument("--output", type=Path, dest="output_path", help="Write records to this file")
    parser.add_argument("--output-format", choices=OUTPUT_FORMATS, dest="output_format")
    parser.add_argument("--checkpoint", type=Path, dest="checkpoint_path", help="Checkpoint file for scans")
    parser.add_argument("--seed", type=int, help="Seed for randomized subroutines")
    parser.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    _add_guard_flags(parser)

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("orbit", help="Cycle detection on one orbit")
    p.add_argument("--d", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--kind")
    p.add_argument("--seeds", type=int, nargs="+")
    p.add_argument("--detector", choices=("brent", "naive"))
    p.add_argument("--terms", type=int, help="Also emit the first N terms")

    p = sub.add_parser("chain", help="Pure phi chain and Pillai's bracket")
    p.add_argument("--x1", type=int)
    p.add_argument("--sweep", action="store_true", default=None, help="Check every x1 up to --x1")

    p = sub.add_parser("scan", help="Scan a d=1 or d=2 family")
    p.add_argument("--d", type=int)
    p.add_argument("--k", type=int, nargs="+")
    p.add_argument("--seed-low", type=int, dest="seed_low")
    p.add_argument("--seed-high", type=int, dest="seed_high")
    p.add_argument("--table-limit", type=int, dest="table_limit")

    p = sub.add_parser("thm1", help="One-term bound on one d=1 orbit")
    p.add_argument("--x1", type=int)
    p.add_argument("--k", type=int)

    p = sub.add_parser("thm2", help="Two-term bound on one d=2 orbit")
    p.add_argument("--x1", type=int)
    p.add_argument("--x2", type=int)
    p.add_argument("--k", type=int)

    p = sub.add_parser("prop1", help="Limsup harness for digit-square-sum orbits")
    p.add_argument("--seed-low", type=int, dest="seed_low")
    p.add_argument("--seed-high", type=int, dest="seed_high")
    p.add_argument("--C", type=int, dest="C")
    p.add_argument("--probe-limit", type=int, dest="probe_limit")
    p.add_argument("--kind")

    p = sub.add_parser("mertens", help="Exact prime product inside the Mertens envelope")
    p.add_argument("--x", type=int)
    p.add_argument("--sweep", action="store_true", default=None, help="Every integer 2..x")
    p.add_argument("--sample-limit", type=int, dest="sample_limit", help="Add log-spaced samples up to this")
    p.add_argument("--samples", type=int)

    p = sub.add_parser("corollary", help="prod over (x, x^3] below 1/2")
    p.add_argument("--x", type=int)
    p.add_argument("--x-max", type=int, dest="x_max")

    p = sub.add_parser("chebyshev", help="Primorial below 4^x")
    p.add_argument("--x", type=int)
    p.add_argument("--sweep", action="store_true", default=None, help="Every integer 1..x")

    p = sub.add_parser("crt-witness", help="Build and re-verify a CRT witness")
    p.add_argument("--X", type=int, dest="X")
    p.add_argument("--k", type=int)
    p.add_argument("--max-prime", type=int, dest="max_prime")
    p.add_argument("--skip-drop", action="store_true", default=None, dest="skip_drop")

    p = sub.add_parser("lehmer", help="Composite q with phi(q) | q - 1")
    p.add_argument("--limit", type=int)

    p = sub.add_parser("avg-phi", help="Mean of phi against 3n/pi^2")
    p.add_argument("--n", type=int)
    p.add_argument("--tolerance", type=float)

    p = sub.add_parser("explore", help="Classify orbits of arity d >= 3")
    p.add_argument("--d", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--seed-low", type=int, dest="seed_low")
    p.add_argument("--seed-high", type=int, dest="seed_high")
    p.add_argument("--all-tuples", action="store_true", default=None, dest="all_tuples")

    return parser


_GLOBAL_FLAGS = ("workers", "output_path", "output_format", "checkpoint_path", "seed",
                 "log_level", "max_steps", "max_value")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    namespace = vars(args).copy()
    command = namespace.pop("command")
    config_path = namespace.pop("config")
    verbose = namespace.pop("verbose")
    flags = {name: namespace.pop(name) for name in _GLOBAL_FLAGS}
    if verbose:
        flags["log_level"] = "DEBUG"
    return build_config(command, namespace, flags, config_path)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point for the phi-orbits command."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT_ERROR if e.code else EXIT_OK

    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    try:
        config = config_from_args(args)
    except InputError as e:
        logger.error(str(e))
        parser.print_usage(sys.stderr)
        return EXIT_INPUT_ERROR
    logging.getLogger().setLevel(config.log_level.upper())

    try:
        return run(config)
    except KeyboardInterrupt:
        logger.warning("Interrupted")
        return EXIT_INTERNAL_ERROR
    except Exception as e:
        logger.exception(f"Internal error: {e}")
        return EXIT_INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
