"""Tests for record encoding, parsing and writers."""

import io
import json
import math
from fractions import Fraction

import jsonschema
import numpy as np
import pytest
from gmpy2 import mpq, mpz

from bounds import Verdict
from exceptions import InputError
from orbits import Termination
from records import (
    JSON_SAFE_INT, RECORD_VERSION, CsvScanWriter, JsonLinesWriter, Record,
    make_writer, parse, read_records, serialize, to_native
)


class TestToNative:
    """Test normalization of report values."""

    def test_enums_and_gmpy(self):
        """Enums become values, mpz int and mpq Fraction."""
        assert to_native(Verdict.OK) == "ok"
        assert to_native(Termination.GUARD_MAX_STEPS) == "guard-max-steps"
        assert to_native(mpz(7)) == 7 and type(to_native(mpz(7))) is int
        assert to_native(mpq(8, 35)) == Fraction(8, 35)

    def test_numpy_scalars(self):
        """numpy integers unwrap to int."""
        assert to_native(np.int64(12)) == 12
        assert to_native([np.int64(1), (2, 3)]) == [1, [2, 3]]

    def test_bool_stays_bool(self):
        """True is not turned into 1."""
        assert to_native(True) is True

    def test_unsupported(self):
        """Objects with no numeric form are rejected."""
        with pytest.raises(InputError):
            to_native(object())


class TestSerialize:
    """Test the JSON edge mappings."""

    def test_small_int_stays_number(self):
        """Below 2^53 integers are JSON numbers."""
        line = serialize(Record("orbit", {"x1": 10}, {"sup_seen": JSON_SAFE_INT - 1}))
        assert json.loads(line)["outputs"]["sup_seen"] == JSON_SAFE_INT - 1

    def test_big_int_becomes_string(self):
        """2^53 and above become decimal strings."""
        line = serialize(Record("crt-witness", {}, {"y": 2 ** 200, "neg": -JSON_SAFE_INT}))
        outputs = json.loads(line)["outputs"]
        assert outputs["y"] == str(2 ** 200)
        assert outputs["neg"] == str(-JSON_SAFE_INT)

    def test_very_long_int(self):
        """Values past the interpreter's default digit limit survive."""
        value = mpz(7) ** 20000
        record = parse(serialize(Record("crt-witness", {}, {"y": value})))
        assert record.outputs["y"] == int(value)

    def test_fraction_and_infinity(self):
        """Rationals as n/d, infinity as a string."""
        line = serialize(Record("thm2", {"X": Fraction(17, 2)}, {"log2_bound": math.inf}))
        data = json.loads(line)
        assert data["inputs"]["X"] == "17/2"
        assert data["outputs"]["log2_bound"] == "inf"
        parsed = parse(line)
        assert parsed.inputs["X"] == Fraction(17, 2)
        assert parsed.outputs["log2_bound"] == math.inf

    def test_single_line(self):
        """Compact output with no newlines."""
        line = serialize(Record("orbit", {"seeds": [3, 5]}, {"cycle": [4]}))
        assert "\n" not in line
        assert line.startswith('{"record_type":"orbit","version":"1.0"')

    def test_parse_inverse(self):
        """parse undoes serialize for a mixed record."""
        record = Record(
            "thm1",
            {"x1": 10, "k": 0},
            {"bound": 11, "verdict": Verdict.OK, "drops": [(1, 2)], "big": 2 ** 70},
        )
        assert parse(serialize(record)) == record


class TestParse:
    """Test rejection of malformed lines."""

    @pytest.mark.parametrize("line", [
        "not json",
        '{"version": "1.0"}',
        '{"record_type": "orbit", "version": "0.9", "inputs": {}, "outputs": {}}',
        "[1, 2]",
    ])
    def test_invalid(self, line):
        """Bad JSON, missing type and wrong version."""
        with pytest.raises(InputError):
            parse(line)


class TestSchema:
    """Test records against the shipped schema."""

    def test_records_validate(self, record_schema):
        """Every encoding case is accepted."""
        records = [
            Record("orbit", {"d": 1, "k": 0, "seeds": [10]}, {"cycle": [1], "terminated": Termination.CYCLE_FOUND}),
            Record("crt-witness", {"X": 6}, {"y": 2 ** 300, "ratio": Fraction(8, 35)}),
            Record("thm2", {"x1": 1}, {"log2_bound": math.inf, "base_case_ok": None}),
        ]
        for record in records:
            jsonschema.validate(json.loads(serialize(record)), record_schema)

    def test_unknown_type_rejected(self, record_schema):
        """record_type is a closed set."""
        data = json.loads(serialize(Record("orbit")))
        data["record_type"] = "mystery"
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(data, record_schema)


class TestWriters:
    """Test the JSON-lines and CSV writers."""

    def test_json_lines(self, temp_directory):
        """One record per line, readable back."""
        path = temp_directory / "out.jsonl"
        with open(path, "w", encoding="utf-8") as f:
            writer = JsonLinesWriter(f)
            assert writer.write_all([Record("chain", {"x1": 100}, {"pillai_n": 7})] * 3) == 3
        records = read_records(path)
        assert len(records) == 3
        assert records[0].outputs == {"pillai_n": 7}
        assert records[0].version == RECORD_VERSION

    def test_csv_scan_rows(self):
        """scan-orbit rows are flat; aggregates become histogram rows."""
        stream = io.StringIO()
        writer = CsvScanWriter(stream)
        writer.write(Record("scan-orbit", {"d": 2, "k": 0, "seeds": [3, 5]},
                            {"label": "two-term", "period": 1, "preperiod": 4, "verdict": "ok"}))
        writer.write(Record("scan-aggregate", {}, {"period_histogram": {"1": 5, "2": 1}}))
        lines = stream.getvalue().splitlines()
        assert lines[0].startswith("record_type,d,k,seeds")
        assert lines[1].startswith("scan-orbit,2,0,3 5,two-term")
        assert lines[2].endswith("period_histogram,1,5")
        assert lines[3].endswith("period_histogram,2,1")

    def test_csv_skips_other_types(self, caplog):
        """Non-scan records are skipped with a warning."""
        stream = io.StringIO()
        writer = CsvScanWriter(stream)
        writer.write(Record("orbit"))
        assert writer.count == 0
        assert "skips orbit" in caplog.text

    def test_csv_append_keeps_header(self):
        """A stream that already has content gets no second header."""
        stream = io.StringIO("record_type,d\n")
        stream.seek(0, io.SEEK_END)
        CsvScanWriter(stream)
        assert stream.getvalue() == "record_type,d\n"

    def test_make_writer(self):
        """Formats map to writer classes."""
        assert isinstance(make_writer("json-lines", io.StringIO()), JsonLinesWriter)
        assert isinstance(make_writer("csv", io.StringIO()), CsvScanWriter)
        with pytest.raises(InputError):
            make_writer("xml", io.StringIO())
