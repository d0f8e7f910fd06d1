"""Run configuration: defaults < TOML file < environment < command-line flags."""

import hashlib
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from exceptions import InputError
from orbits.engine import DEFAULT_MAX_STEPS, DEFAULT_MAX_VALUE, Guards

logger = logging.getLogger(__name__)

COMMANDS = (
    "orbit", "chain", "scan", "thm1", "thm2", "prop1", "mertens",
    "corollary", "chebyshev", "crt-witness", "lehmer", "avg-phi", "explore",
)
OUTPUT_FORMATS = ("json-lines", "csv")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
DEFAULT_SEED = 0x5EED

# Settings that never change the emitted records.
_UNHASHED = {"workers", "checkpoint_path", "output_path", "log_level", "config_path"}


@dataclass
class RunConfig:
    """Everything one invocation needs; ``params`` holds the command's own arguments."""
    command: str
    params: Dict[str, Any] = field(default_factory=dict)
    workers: int = 1
    checkpoint_path: Optional[Path] = None
    output_path: Optional[Path] = None
    output_format: str = "json-lines"
    seed: int = DEFAULT_SEED
    max_steps: int = DEFAULT_MAX_STEPS
    max_value: int = DEFAULT_MAX_VALUE
    log_level: str = "INFO"
    config_path: Optional[Path] = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise InputError(f"Unknown command {self.command!r}; expected one of {', '.join(COMMANDS)}")
        if self.workers < 1:
            raise InputError(f"workers must be >= 1, got {self.workers}")
        if self.output_format not in OUTPUT_FORMATS:
            raise InputError(f"Unknown output format {self.output_format!r}")
        if self.output_format == "csv" and self.command != "scan":
            raise InputError("csv output is only available for scan statistics")
        if not 0 <= self.seed < 1 << 64:
            raise InputError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.max_steps < 1 or self.max_value < 1:
            raise InputError("Guards must be positive")
        if self.log_level.upper() not in LOG_LEVELS:
            raise InputError(f"Unknown log level {self.log_level!r}")
        if self.checkpoint_path is not None and self.command != "scan":
            raise InputError("Checkpoints are only supported for scan")

    @property
    def guards(self) -> Guards:
        return Guards(max_steps=self.max_steps, max_value=self.max_value)

    def config_hash(self) -> str:
        """SHA-256 over the canonical JSON of every setting that affects output."""
        data = {
            f.name: getattr(self, f.name)
            for f in fields(self)
            if f.name not in _UNHASHED
        }
        canonical = json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key in ("checkpoint_path", "output_path", "config_path"):
            if data[key] is not None:
                data[key] = str(data[key])
        return data


def load_config_file(path: Path) -> Dict[str, Any]:
    """
    Read a TOML config file.

    Top-level keys map to RunConfig fields; a ``[params]`` table holds
    command arguments.

    Raises:
        InputError: If the file is missing or malformed
    """
    if not path.exists():
        raise InputError(f"Config file not found: {path}")
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise InputError(f"Invalid config file {path}: {e}") from e
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise InputError(f"Unknown config keys in {path}: {', '.join(sorted(unknown))}")
    return data


def _env_int(name: str) -> Optional[int]:
    value = os.getenv(name)
    if not value:
        return None
    try:
        return int(value)
    except ValueError as e:
        raise InputError(f"{name} must be an integer, got {value!r}") from e


def env_overrides() -> Dict[str, Any]:
    """Settings taken from PHI_ORBITS_* environment variables."""
    overrides: Dict[str, Any] = {}
    workers = _env_int("PHI_ORBITS_WORKERS")
    if workers is not None:
        overrides["workers"] = workers
    log_level = os.getenv("PHI_ORBITS_LOG_LEVEL")
    if log_level:
        overrides["log_level"] = log_level.upper()
    # PHI_ORBITS_SIEVE_MEMORY_MB and PHI_ORBITS_MAX_PRIME are read where they apply.
    return overrides


def build_config(
    command: str,
    params: Dict[str, Any],
    flags: Dict[str, Any],
    config_path: Optional[Path] = None
) -> RunConfig:
    """
    Merge the layers into one RunConfig.

    Args:
        command: Subcommand name
        params: Command arguments given on the command line (None = not given)
        flags: Global settings given on the command line (None = not given)
        config_path: Optional TOML file
    """
    merged: Dict[str, Any] = {}
    merged_params: Dict[str, Any] = {}
    if config_path is not None:
        file_data = load_config_file(config_path)
        if file_data.get("command", command) != command:
            raise InputError(
                f"Config file is for {file_data['command']!r}, not {command!r}"
            )
        merged_params.update(file_data.pop("params", {}))
        merged.update(file_data)
    merged.update(env_overrides())
    merged.update({k: v for k, v in flags.items() if v is not None})
    merged_params.update({k: v for k, v in params.items() if v is not None})

    for key in ("checkpoint_path", "output_path"):
        if merged.get(key) is not None:
            merged[key] = Path(merged[key])
    merged["command"] = command
    merged["params"] = merged_params
    merged["config_path"] = config_path
    try:
        return RunConfig(**merged)
    except TypeError as e:
        raise InputError(f"Invalid configuration: {e}") from e
