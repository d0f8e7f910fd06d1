"""Checkpoints for resumable scan campaigns.

A checkpoint is a small JSON file:

    {
        "version": "1.0",
        "config_hash": "3f2a...",
        "position": 400,
        "aggregates": {"period_histogram": {"1": 398, "2": 2}, ...},
        "output_offset": 61532,
        "created_at": "2024-01-15T10:30:00"
    }

``position`` counts the work items whose records have already been written,
in configuration order. Resuming skips exactly that many items, so the
records after the checkpoint match a fresh run.
"""

import json
import os
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional
import logging

from exceptions import CheckpointError, ConfigMismatchError

logger = logging.getLogger(__name__)


class CheckpointManager:
    """Saves and restores campaign progress keyed by the run's config hash."""

    CHECKPOINT_VERSION = "1.0"

    @staticmethod
    def serialize_checkpoint(
        config_hash: str,
        position: int,
        aggregates: Dict[str, Any],
        output_offset: Optional[int] = None
    ) -> Dict[str, Any]:
        return {
            "version": CheckpointManager.CHECKPOINT_VERSION,
            "config_hash": config_hash,
            "position": position,
            "aggregates": aggregates,
            "output_offset": output_offset,
            "created_at": datetime.now().isoformat()
        }

    @staticmethod
    def save_checkpoint(
        checkpoint_path: Path,
        config_hash: str,
        position: int,
        aggregates: Dict[str, Any],
        output_offset: Optional[int] = None
    ) -> None:
        """Write the checkpoint atomically (temp file, then rename).

        ``output_offset`` is the size of the record file at this position, so a
        resumed run can drop records written after the last checkpoint.
        """
        try:
            checkpoint_path.parent.mkdir(parents=True, exist_ok=True)
            data = CheckpointManager.serialize_checkpoint(config_hash, position, aggregates, output_offset)
            tmp_path = checkpoint_path.with_suffix(checkpoint_path.suffix + ".tmp")
            with open(tmp_path, 'w', encoding='utf-8') as f:
                json.dump(data, f, indent=2)
            os.replace(tmp_path, checkpoint_path)
            logger.debug(f"Checkpoint saved to {checkpoint_path} at position {position}")
        except OSError as e:
            raise CheckpointError(f"Failed to save checkpoint: {e}") from e

    @staticmethod
    def load_checkpoint(checkpoint_path: Path, config_hash: str) -> Optional[Dict[str, Any]]:
        """Load a checkpoint for the given config.

        A missing or empty file means no progress yet and returns None.

        Raises:
            CheckpointError: If the file is unreadable or has an unsupported format
            ConfigMismatchError: If it was written by a different configuration
        """
        if not checkpoint_path.exists() or checkpoint_path.stat().st_size == 0:
            return None

        try:
            with open(checkpoint_path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise CheckpointError(f"Invalid checkpoint format: {e}") from e
        except OSError as e:
            raise CheckpointError(f"Failed to load checkpoint: {e}") from e

        if not isinstance(data, dict):
            raise CheckpointError("Invalid checkpoint format: not a dictionary")
        if data.get("version") != CheckpointManager.CHECKPOINT_VERSION:
            raise CheckpointError(f"Unsupported checkpoint version: {data.get('version')}")
        if "config_hash" not in data or "position" not in data:
            raise CheckpointError("Invalid checkpoint format: missing required fields")
        if data["config_hash"] != config_hash:
            raise ConfigMismatchError(
                f"Checkpoint {checkpoint_path} was written by config {data['config_hash'][:12]}, "
                f"current run is {config_hash[:12]}"
            )

        logger.info(f"Resuming from checkpoint {checkpoint_path} at position {data['position']}")
        return data
