"""
Tests for dataset manifest parsing, writing and validation.
"""

from pathlib import Path

import pytest

from mvqc_scope.core import Modality
from mvqc_scope.errors import ManifestError
from mvqc_scope.manifest import (
    DatasetManifest,
    load_manifest,
    parse_manifest,
    validate_manifest,
    write_manifest,
)

MANIFEST_TEXT = """\
# two iris subjects
modality iris
param offset1 6
param offset2 12

subject alice
genuine alice/1.pgm
genuine alice/2.pgm
subject bob
genuine bob/1.pgm
imposter bob/f1.pgm
"""


def touch_all(root: Path, manifest: DatasetManifest) -> None:
    for entry in manifest.subjects:
        for path in [*entry.genuine, *entry.imposter]:
            target = root / path
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(b"")


class TestParseManifest:
    def test_parse(self):
        manifest = parse_manifest(MANIFEST_TEXT, root=Path("/data"))
        assert manifest.modality == Modality.IRIS
        assert manifest.params == {"offset1": 6, "offset2": 12}
        assert [s.id for s in manifest.subjects] == ["alice", "bob"]
        assert manifest.subjects[1].imposter == [Path("bob/f1.pgm")]
        assert manifest.resolve_path(Path("bob/1.pgm")) == Path("/data/bob/1.pgm")
        assert manifest.resolve_path(Path("/abs/x.pgm")) == Path("/abs/x.pgm")

    @pytest.mark.parametrize(
        "text, message",
        [
            ("modality fingerprint\n", "unknown modality"),
            ("subject\n", "line 1"),
            ("genuine a.pgm\n", "before any subject"),
            ("subject a\nsample a.pgm\n", "unknown keyword"),
            ("param gamma 2\n", "param"),
            ("param t_dark high\n", "not an int"),
        ],
    )
    def test_errors(self, text, message):
        with pytest.raises(ManifestError, match=message):
            parse_manifest(text)

    def test_write_then_parse(self, tmp_path):
        manifest = parse_manifest(MANIFEST_TEXT)
        write_manifest(manifest, tmp_path / "m.txt", comment="copy")
        text = (tmp_path / "m.txt").read_text(encoding="utf-8")
        assert text.splitlines()[:4] == [
            "# copy",
            "modality iris",
            "param offset1 6",
            "param offset2 12",
        ]
        assert parse_manifest(text).subjects == manifest.subjects


class TestValidateManifest:
    def test_valid(self, tmp_path):
        manifest = parse_manifest(MANIFEST_TEXT, root=tmp_path)
        touch_all(tmp_path, manifest)
        validate_manifest(manifest, min_genuine=1)

    def test_too_few_genuine(self, tmp_path):
        manifest = parse_manifest(MANIFEST_TEXT, root=tmp_path)
        touch_all(tmp_path, manifest)
        with pytest.raises(ManifestError, match="'bob' has 1 genuine"):
            validate_manifest(manifest, min_genuine=2)

    def test_missing_file(self, tmp_path):
        manifest = parse_manifest(MANIFEST_TEXT, root=tmp_path)
        with pytest.raises(ManifestError, match="missing sample file"):
            validate_manifest(manifest, min_genuine=1)

    def test_duplicate_subject(self, tmp_path):
        manifest = parse_manifest(
            "subject a\ngenuine x.pgm\nsubject a\ngenuine y.pgm\n", root=tmp_path
        )
        touch_all(tmp_path, manifest)
        with pytest.raises(ManifestError, match="duplicate subject"):
            validate_manifest(manifest, min_genuine=1)

    def test_duplicate_path(self, tmp_path):
        manifest = parse_manifest("subject a\ngenuine x.pgm\nimposter x.pgm\n", root=tmp_path)
        touch_all(tmp_path, manifest)
        with pytest.raises(ManifestError, match="duplicate sample path"):
            validate_manifest(manifest, min_genuine=1)

    def test_unreadable_manifest(self, tmp_path):
        with pytest.raises(ManifestError, match="cannot read"):
            load_manifest(tmp_path / "absent.txt")

