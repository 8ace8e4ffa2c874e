"""
Tests for decision-record backends.
"""

import json

from mvqc_scope.backend import FileBackend, InMemoryBackend
from mvqc_scope.core import ClassifierKind, DecisionRecord, MomentKind


def make_record(i: int = 0, accept: bool = True) -> DecisionRecord:
    return DecisionRecord(
        subject="s001",
        sample=f"s001/g{i:02d}.pgm",
        genuine=True,
        classifier=ClassifierKind.KNN,
        moment=MomentKind.C,
        d1=128,
        b=4,
        x=float(i),
        score=0.5 * i,
        accept=accept,
    )


class TestInMemoryBackend:
    def test_save_and_load(self):
        backend = InMemoryBackend()

        backend.save(make_record(1))
        backend.save(make_record(2, accept=False))

        records = backend.load()
        assert len(records) == 2
        assert records[0].x == 1.0
        assert records[1].accept is False

    def test_flush_noop(self):
        backend = InMemoryBackend()
        backend.save(make_record())

        backend.flush()
        assert len(backend.records) == 1

    def test_load_returns_copy(self):
        backend = InMemoryBackend()
        backend.save(make_record())

        records1 = backend.load()
        records2 = backend.load()

        assert records1 is not records2
        assert len(records1) == len(records2) == 1


class TestFileBackend:
    def test_save_and_flush(self, tmp_path):
        filepath = tmp_path / "decisions.jsonl"
        backend = FileBackend(filepath=filepath)

        for i in range(15):  # More than buffer size
            backend.save(make_record(i))

        # Should have auto-flushed once
        assert len(backend._buffer) == 5

        backend.flush()
        assert len(backend._buffer) == 0

        lines = filepath.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 15
        first = json.loads(lines[0])
        assert first["classifier"] == "knn"
        assert first["sample"] == "s001/g00.pgm"

    def test_custom_buffer_size(self, tmp_path):
        filepath = tmp_path / "decisions.jsonl"
        backend = FileBackend(filepath=filepath, buffer_size=2)

        backend.save(make_record(0))
        assert not filepath.exists()
        backend.save(make_record(1))
        assert len(filepath.read_text(encoding="utf-8").splitlines()) == 2

    def test_load_from_file(self, tmp_path):
        backend = FileBackend(filepath=tmp_path / "decisions.jsonl")
        for i in range(5):
            backend.save(make_record(i))
        backend.flush()

        records = backend.load()
        assert [r.x for r in records] == [0.0, 1.0, 2.0, 3.0, 4.0]
        assert all(r.moment == MomentKind.C for r in records)

    def test_load_nonexistent_file(self, tmp_path):
        backend = FileBackend(filepath=tmp_path / "missing.jsonl")
        assert backend.load() == []

    def test_default_filepath(self):
        backend = FileBackend()
        assert backend.filepath.name == "decisions.jsonl"

    def test_creates_parent_directory(self, tmp_path):
        filepath = tmp_path / "nested" / "dir" / "decisions.jsonl"
        backend = FileBackend(filepath=filepath)
        backend.save(make_record())
        backend.flush()
        assert filepath.exists()

    def test_append_mode(self, tmp_path):
        filepath = tmp_path / "decisions.jsonl"

        backend1 = FileBackend(filepath=filepath)
        backend1.save(make_record(1))
        backend1.flush()

        # Second instance appends
        backend2 = FileBackend(filepath=filepath)
        backend2.save(make_record(2))
        backend2.flush()

        records = backend2.load()
        assert [r.x for r in records] == [1.0, 2.0]

    def test_identical_runs_identical_bytes(self, tmp_path):
        paths = [tmp_path / "a.jsonl", tmp_path / "b.jsonl"]
        for path in paths:
            backend = FileBackend(filepath=path)
            for i in range(3):
                backend.save(make_record(i))
            backend.flush()

        assert paths[0].read_bytes() == paths[1].read_bytes()
