"""
Line-oriented dataset manifests.

    modality iris
    param offset1 20
    subject 001
    genuine 001/1_1.pgm
    imposter 001/f_1.pgm

Blank lines and ``#`` comments are ignored; relative paths resolve against
the manifest's directory.
"""

from __future__ import annotations

from pathlib import Path

from pydantic import BaseModel, Field

from mvqc_scope.core import Modality
from mvqc_scope.errors import ManifestError

PREPROCESS_KEYS = ("t_dark", "offset1", "offset2")


class SubjectEntry(BaseModel):
    id: str
    genuine: list[Path] = Field(default_factory=list)
    imposter: list[Path] = Field(default_factory=list)


class DatasetManifest(BaseModel):
    """Subjects with their genuine and imposter sample paths.

    Relative paths resolve against `root`, the manifest's directory.
    """

    modality: Modality = Modality.SIGNATURE
    subjects: list[SubjectEntry] = Field(default_factory=list)
    params: dict[str, int] = Field(default_factory=dict)
    root: Path | None = None

    def resolve_path(self, path: Path) -> Path:
        if path.is_absolute() or self.root is None:
            return path
        return self.root / path


def parse_manifest(text: str, root: Path | None = None) -> DatasetManifest:
    """Parse ``modality``/``param``/``subject``/``genuine``/``imposter`` lines."""
    modality = Modality.SIGNATURE
    params: dict[str, int] = {}
    subjects: list[SubjectEntry] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.strip()
        if not content or content.startswith("#"):
            continue
        parts = content.split(maxsplit=1)
        if len(parts) != 2:
            raise ManifestError(f"line {lineno}: expected '<keyword> <value>'")
        keyword, value = parts[0], parts[1].strip()
        if keyword == "modality":
            try:
                modality = Modality(value)
            except ValueError:
                raise ManifestError(f"line {lineno}: unknown modality {value!r}") from None
        elif keyword == "param":
            fields = value.split()
            if len(fields) != 2 or fields[0] not in PREPROCESS_KEYS:
                raise ManifestError(
                    f"line {lineno}: expected 'param <{'|'.join(PREPROCESS_KEYS)}> <int>'"
                )
            try:
                params[fields[0]] = int(fields[1])
            except ValueError:
                raise ManifestError(f"line {lineno}: {fields[1]!r} is not an int") from None
        elif keyword == "subject":
            subjects.append(SubjectEntry(id=value))
        elif keyword in ("genuine", "imposter"):
            if not subjects:
                raise ManifestError(f"line {lineno}: {keyword} before any subject")
            getattr(subjects[-1], keyword).append(Path(value))
        else:
            raise ManifestError(f"line {lineno}: unknown keyword {keyword!r}")
    return DatasetManifest(modality=modality, subjects=subjects, params=params, root=root)


def validate_manifest(manifest: DatasetManifest, min_genuine: int = 3) -> None:
    """Check subject ids and paths are unique, files exist and genuine counts suffice."""
    seen_ids: set[str] = set()
    seen_paths: set[Path] = set()
    for entry in manifest.subjects:
        if entry.id in seen_ids:
            raise ManifestError(f"duplicate subject {entry.id!r}")
        seen_ids.add(entry.id)
        if len(entry.genuine) < min_genuine:
            raise ManifestError(
                f"subject {entry.id!r} has {len(entry.genuine)} genuine samples, "
                f"needs at least {min_genuine}"
            )
        for path in [*entry.genuine, *entry.imposter]:
            resolved = manifest.resolve_path(path)
            if resolved in seen_paths:
                raise ManifestError(f"duplicate sample path {path}")
            seen_paths.add(resolved)
            if not resolved.is_file():
                raise ManifestError(f"missing sample file {resolved}")


def load_manifest(path: str | Path, min_genuine: int = 3) -> DatasetManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ManifestError(f"cannot read manifest {path}: {e}") from e
    manifest = parse_manifest(text, root=path.parent)
    validate_manifest(manifest, min_genuine)
    return manifest


def write_manifest(
    manifest: DatasetManifest, path: str | Path, comment: str | None = None
) -> None:
    lines = [f"# {comment}"] if comment else []
    lines.append(f"modality {manifest.modality.value}")
    lines += [f"param {k} {v}" for k, v in sorted(manifest.params.items())]
    for entry in manifest.subjects:
        lines.append(f"subject {entry.id}")
        lines += [f"genuine {p.as_posix()}" for p in entry.genuine]
        lines += [f"imposter {p.as_posix()}" for p in entry.imposter]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

