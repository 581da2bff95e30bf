"""Structured log of command executions.

Every CLI command appends one line to <output_dir>/run_log.jsonl.
Each entry contains: timestamp, command, status, exit_code, duration.
"""

from __future__ import annotations

import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

logger = logging.getLogger(__name__)

RUN_LOG_NAME = "run_log.jsonl"

STATUS_BY_EXIT = {0: "pass", 1: "fail"}


class RunLogger:
    """Structured JSONL logger for experiment runs."""

    def __init__(self, log_path: str | Path = RUN_LOG_NAME):
        """Initialize the run logger.

        Args:
            log_path: Path to the JSONL log file
        """
        self.log_path = Path(log_path)
        try:
            self.log_path.parent.mkdir(parents=True, exist_ok=True)
            if not self.log_path.exists():
                self.log_path.touch()
        except OSError as e:
            logger.error(f"Cannot prepare run log {self.log_path}: {e}")

    @classmethod
    def in_directory(cls, output_dir: str | Path) -> RunLogger:
        return cls(Path(output_dir) / RUN_LOG_NAME)

    def log_run(
        self,
        command: str,
        exit_code: int,
        duration: float | None = None,
        metadata: dict[str, Any] | None = None,
    ) -> None:
        """Append one run entry.

        Args:
            command: CLI command name (e.g. 'verify-barrier')
            exit_code: Process exit code; 0 pass, 1 fail, anything else error
            duration: Wall time in seconds
            metadata: Config checksum, report paths and the like
        """
        entry: dict[str, Any] = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "command": command,
            "status": STATUS_BY_EXIT.get(exit_code, "error"),
            "exit_code": exit_code,
            "duration": duration,
        }
        # namespaced so metadata cannot overwrite the core fields
        if metadata:
            entry["metadata"] = metadata

        try:
            with open(self.log_path, "a", encoding="utf-8") as f:
                f.write(json.dumps(entry, default=str) + "\n")
        except Exception as e:
            logger.error(f"Failed to write to run log: {e}")

    def read_entries(self) -> list[dict[str, Any]]:
        """All entries logged so far, oldest first; unreadable lines are skipped."""
        if not self.log_path.exists():
            return []
        entries = []
        with open(self.log_path, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                try:
                    entries.append(json.loads(line))
                except json.JSONDecodeError:
                    logger.warning(f"Skipping malformed run log line: {line[:80]}")
        return entries
