"""Output records: one JSON object per line, big integers as decimal strings.

A record is ``{"record_type", "version", "inputs", "outputs"}``. Values are
kept in their natural Python form inside a :class:`Record` and mapped to
JSON only at the edge:

- integers with absolute value >= 2**53 become decimal strings, converted
  through gmpy2 so that very long values are not subject to the interpreter's
  digit limit
- rationals become ``"num/den"`` strings
- an infinite float becomes the string ``"inf"``

``parse`` reverses each mapping, so ``parse(serialize(r)) == r``.
"""

import csv
import dataclasses
import json
import logging
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, IO, Iterable, List, Union

from gmpy2 import mpq, mpz

from exceptions import InputError

logger = logging.getLogger(__name__)

RECORD_VERSION = "1.0"
JSON_SAFE_INT = 1 << 53
SCHEMA_PATH = Path(__file__).parent / "schemas" / "record.schema.json"

_INTEGER_STRING = re.compile(r"^-?\d+$")
_RATIONAL_STRING = re.compile(r"^-?\d+/\d+$")


def to_native(value: Any) -> Any:
    """Normalize report values: dataclasses to dicts, gmpy2 to int/Fraction, tuples to lists."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, (int, type(mpz(0)))):
        return int(value)
    if isinstance(value, type(mpq(0))):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return value
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_native(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        return {str(k): to_native(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_native(v) for v in value]
    # numpy scalars and mpmath values
    if hasattr(value, "item"):
        return to_native(value.item())
    try:
        return float(value)
    except (TypeError, ValueError):
        raise InputError(f"Cannot record value of type {type(value).__name__}")


def _encode(value: Any) -> Any:
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(mpz(value)) if abs(value) >= JSON_SAFE_INT else value
    if isinstance(value, Fraction):
        return f"{mpz(value.numerator)}/{mpz(value.denominator)}"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, dict):
        return {k: _encode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_encode(v) for v in value]
    raise InputError(f"Cannot encode value of type {type(value).__name__}")


def _decode(value: Any) -> Any:
    if isinstance(value, str):
        if _INTEGER_STRING.match(value):
            return int(mpz(value))
        if _RATIONAL_STRING.match(value):
            numerator, denominator = value.split("/")
            return Fraction(int(mpz(numerator)), int(mpz(denominator)))
        if value in ("inf", "-inf"):
            return float(value)
        return value
    if isinstance(value, dict):
        return {k: _decode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_decode(v) for v in value]
    return value


@dataclass
class Record:
    """One output record; inputs and outputs are normalized on construction."""
    record_type: str
    inputs: Dict[str, Any] = field(default_factory=dict)
    outputs: Dict[str, Any] = field(default_factory=dict)
    version: str = RECORD_VERSION

    def __post_init__(self):
        self.inputs = to_native(self.inputs)
        self.outputs = to_native(self.outputs)

    def to_json(self) -> Dict[str, Any]:
        return {
            "record_type": self.record_type,
            "version": self.version,
            "inputs": _encode(self.inputs),
            "outputs": _encode(self.outputs),
        }


def serialize(record: Record) -> str:
    """Compact single-line JSON; key order follows insertion order."""
    return json.dumps(record.to_json(), separators=(",", ":"), allow_nan=False)


def parse(line: str) -> Record:
    """
    Inverse of :func:`serialize`.

    Raises:
        InputError: If the line is not a record
    """
    try:
        data = json.loads(line)
    except json.JSONDecodeError as e:
        raise InputError(f"Invalid record line: {e}") from e
    if not isinstance(data, dict) or "record_type" not in data:
        raise InputError("Invalid record: missing record_type")
    if data.get("version") != RECORD_VERSION:
        raise InputError(f"Unsupported record version: {data.get('version')}")
    return Record(
        record_type=data["record_type"],
        inputs=_decode(data.get("inputs", {})),
        outputs=_decode(data.get("outputs", {})),
        version=data["version"],
    )


def load_schema() -> Dict[str, Any]:
    with open(SCHEMA_PATH, "r", encoding="utf-8") as f:
        return json.load(f)


class JsonLinesWriter:
    """Writes records one per line to an open text stream."""

    def __init__(self, stream: IO[str]):
        self.stream = stream
        self.count = 0

    def write(self, record: Record) -> None:
        self.stream.write(serialize(record) + "\n")
        self.count += 1

    def write_all(self, records: Iterable[Record]) -> int:
        for record in records:
            self.write(record)
        self.stream.flush()
        return self.count


SCAN_CSV_COLUMNS = [
    "d", "k", "seeds", "label", "terminated", "preperiod", "period",
    "sup_seen", "verdict", "error",
]


class CsvScanWriter:
    """
    Flat rows for scan-orbit records and histogram rows for the aggregate.

    Only scan statistics are supported; other record types are skipped with
    a warning since nested values do not fit in columns.
    """

    def __init__(self, stream: IO[str]):
        self.stream = stream
        self.writer = csv.writer(stream, lineterminator="\n")
        self.count = 0
        # appending to a resumed file keeps its existing header
        if not (stream.seekable() and stream.tell() > 0):
            self.writer.writerow(["record_type"] + SCAN_CSV_COLUMNS + ["histogram", "value", "count"])

    def write(self, record: Record) -> None:
        if record.record_type == "scan-orbit":
            row = {**record.inputs, **record.outputs}
            values = []
            for column in SCAN_CSV_COLUMNS:
                value = row.get(column)
                if isinstance(value, list):
                    value = " ".join(str(v) for v in value)
                values.append("" if value is None else value)
            self.writer.writerow([record.record_type] + values + ["", "", ""])
        elif record.record_type == "scan-aggregate":
            padding = [""] * len(SCAN_CSV_COLUMNS)
            for name in ("period_histogram", "preperiod_histogram", "termination_counts"):
                for value, count in record.outputs.get(name, {}).items():
                    self.writer.writerow([record.record_type] + padding + [name, value, count])
        else:
            logger.warning(f"CSV output skips {record.record_type} records")
            return
        self.count += 1

    def write_all(self, records: Iterable[Record]) -> int:
        for record in records:
            self.write(record)
        return self.count


RecordWriter = Union[JsonLinesWriter, CsvScanWriter]


def make_writer(output_format: str, stream: IO[str]) -> RecordWriter:
    if output_format == "json-lines":
        return JsonLinesWriter(stream)
    if output_format == "csv":
        return CsvScanWriter(stream)
    raise InputError(f"Unknown output format {output_format!r}")


def read_records(path: Path) -> List[Record]:
    with open(path, "r", encoding="utf-8") as f:
        return [parse(line) for line in f if line.strip()]
