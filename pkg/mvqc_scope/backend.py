"""
Backend implementations for storing verification decisions.
"""

import json
from abc import ABC, abstractmethod
from pathlib import Path

from mvqc_scope.core import DecisionRecord


class Backend(ABC):
    """Abstract base class for decision storage backends."""

    @abstractmethod
    def save(self, record: DecisionRecord):
        """Save a decision record."""
        pass

    @abstractmethod
    def flush(self):
        """Flush any buffered records."""
        pass

    @abstractmethod
    def load(self) -> list[DecisionRecord]:
        """Load all decision records."""
        pass


class FileBackend(Backend):
    """File-based backend that stores decisions in JSONL format.

    Records carry no timestamps, so two identical runs produce identical files.
    """

    def __init__(
        self,
        filepath: Path | None = None,
        buffer_size: int | None = None,
    ):
        """Initialize file backend.

        Args:
            filepath: Path to JSONL file. Defaults to 'decisions.jsonl' in the
                current working directory.
            buffer_size: Number of records to buffer before flush (default 10)
        """
        self.filepath = Path(filepath) if filepath is not None else Path("decisions.jsonl")

        # Ensure the parent directory exists (create if needed)
        parent = self.filepath.parent
        if str(parent) != "" and not parent.exists():
            parent.mkdir(parents=True, exist_ok=True)

        self._buffer: list[DecisionRecord] = []
        self._buffer_size = buffer_size or 10

    def save(self, record: DecisionRecord):
        """Save a decision record to the buffer."""
        self._buffer.append(record)

        if len(self._buffer) >= self._buffer_size:
            self.flush()

    def flush(self):
        """Write buffered records to file."""
        if not self._buffer:
            return

        parent = self.filepath.parent
        if str(parent) != "" and not parent.exists():
            parent.mkdir(parents=True, exist_ok=True)

        with open(self.filepath, "a", encoding="utf-8") as f:
            for record in self._buffer:
                f.write(record.model_dump_json() + "\n")

        self._buffer.clear()

    def load(self) -> list[DecisionRecord]:
        """Load all decision records from file."""
        if not self.filepath.exists():
            return []

        records = []
        with open(self.filepath, "r", encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    records.append(DecisionRecord(**json.loads(line)))

        return records


class InMemoryBackend(Backend):
    """In-memory backend for tests and per-subject collection."""

    def __init__(self):
        self.records: list[DecisionRecord] = []

    def save(self, record: DecisionRecord):
        """Save a decision record to memory."""
        self.records.append(record)

    def flush(self):
        """No-op for in-memory backend."""
        pass

    def load(self) -> list[DecisionRecord]:
        """Return all stored records."""
        return self.records.copy()
