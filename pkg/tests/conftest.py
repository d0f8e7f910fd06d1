"""Shared test fixtures and configuration for phi-orbits tests."""

import json
from pathlib import Path

import pytest

from orbits import Guards
from totient import TotientTable

# Orbits whose every term is known by hand
KNOWN_ORBITS = {
    # (d, k, seeds): (preperiod, period, cycle)
    (1, 0, (10,)): (3, 1, (1,)),
    (1, 1, (5,)): (0, 1, (5,)),
    (1, 2, (3,)): (1, 1, (4,)),
    (2, 0, (1, 1)): (2, 1, (2,)),
    (2, 0, (3, 5)): (4, 1, (4,)),
}

HAPPY_CYCLE = (4, 16, 37, 58, 89, 145, 42, 20)

SAMPLE_CONFIG_TOML = """
command = "scan"
workers = 1
max_steps = 100000

[params]
d = 1
k = [0, 2]
seed_low = 1
seed_high = 20
"""


@pytest.fixture
def temp_directory(tmp_path):
    """Create a temporary directory for file operations."""
    return tmp_path


@pytest.fixture(scope="session")
def small_table():
    """Totient table up to 2^16, shared across the session."""
    return TotientTable(1 << 16)


@pytest.fixture
def tight_guards():
    """Guards small enough to trip on a fast-growing orbit."""
    return Guards(max_steps=50, max_value=1000)


@pytest.fixture
def sample_config_file(temp_directory):
    """Write a TOML config for a small scan."""
    path = temp_directory / "scan.toml"
    path.write_text(SAMPLE_CONFIG_TOML)
    return path


@pytest.fixture
def record_schema():
    """The shipped record schema document."""
    path = Path(__file__).parent.parent / "schemas" / "record.schema.json"
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


@pytest.fixture
def clean_env(monkeypatch):
    """Remove PHI_ORBITS_* variables so tests see defaults."""
    for name in ("PHI_ORBITS_WORKERS", "PHI_ORBITS_SIEVE_MEMORY_MB",
                 "PHI_ORBITS_MAX_PRIME", "PHI_ORBITS_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    return monkeypatch
