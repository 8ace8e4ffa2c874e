"""
Seeded synthetic datasets standing in for the licensed iris and signature
databases.

Randomness comes from ``numpy.random.default_rng(seed)`` (PCG64) consumed in
a fixed order, so a seed always reproduces the same bytes.

Signature-like subjects are drawn on a 512x512 canvas split into d1 tiles.
A few "stable" tiles hold the same ink pattern in every genuine sample; all
other tiles hold a randomly sized ink rectangle per sample. Forgeries redraw
the stable patterns with their blob offsets stretched by (1 + margin), which
raises every second-order moment while keeping the ink mass unchanged. The
stretch is capped where the outermost blob reaches the tile border, and every
blob moves out by at least one pixel.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field

from mvqc_scope.core import NORMALIZED_SIZE, GrayImage, Modality
from mvqc_scope.imaging import save_image
from mvqc_scope.manifest import DatasetManifest, SubjectEntry, load_manifest, write_manifest
from mvqc_scope.quadtree import tile_origins

logger = logging.getLogger(__name__)

BLOB = 5
PATTERN_BLOBS = 3
_PATTERN_GRID = 4
_MAX_SPACING = 10
# adjacent blobs stay one pixel apart
_MIN_SPACING = BLOB + 1


class SubjectPlan(BaseModel):
    subject: str
    stable: list[int] = Field(description="1-based indices of the planted stable tiles")
    patterns: dict[int, list[tuple[int, int]]] = Field(
        description="Blob offsets (row, col) from the tile center, per stable tile"
    )


class SyntheticPlan(BaseModel):
    seed: int
    d1: int
    margin: float
    subjects: list[SubjectPlan]


def _reach(d1: int) -> int:
    # farthest blob center offset that keeps a 4-pixel border inside the tile
    return (d1 - 1) // 2 - 4 - BLOB // 2


def _spacing(d1: int, margin: float) -> int:
    """Widest even blob spacing whose (1 + margin) stretch still fits the tile.

    Large margins bottom out at the minimum spacing; their stretch is then
    capped by `_stretched`.
    """
    if margin <= 0:
        raise ValueError("margin must be positive")
    reach = _reach(d1)
    if 1.5 * _MIN_SPACING >= reach:
        raise ValueError(f"{d1}-pixel tiles are too small for stable patterns")
    spacing = int(min(_MAX_SPACING, reach / (1.5 * (1 + margin))))
    spacing -= spacing % 2
    return max(spacing, _MIN_SPACING)


def _stretched(offset: int, stretch: float) -> int:
    """Push a blob offset outward by (stretch - 1), at least one pixel."""
    push = max(1, int(round(abs(offset) * (stretch - 1))))
    return offset + push if offset > 0 else offset - push


def plan_dataset(
    n_subjects: int,
    seed: int,
    margin: float,
    n_stable: int = 4,
    d1: int = 128,
    rng: np.random.Generator | None = None,
) -> SyntheticPlan:
    """Choose stable tiles and their blob patterns for every subject."""
    rng = rng if rng is not None else np.random.default_rng(seed)
    spacing = _spacing(d1, margin)
    origins = tile_origins(d1)
    corners = {(0, 0), (NORMALIZED_SIZE - d1, NORMALIZED_SIZE - d1)}
    candidates = [i for i, origin in enumerate(origins, start=1) if origin not in corners]
    if not 1 <= n_stable <= len(candidates):
        raise ValueError(f"n_stable must lie in 1..{len(candidates)}")

    subjects = []
    for n in range(n_subjects):
        stable = sorted(int(i) for i in rng.choice(candidates, n_stable, replace=False))
        patterns = {}
        for tile in stable:
            cells = rng.choice(_PATTERN_GRID * _PATTERN_GRID, PATTERN_BLOBS, replace=False)
            patterns[tile] = [
                (int((cy - 1.5) * spacing), int((cx - 1.5) * spacing))
                for cy, cx in (divmod(int(c), _PATTERN_GRID) for c in cells)
            ]
        subjects.append(SubjectPlan(subject=f"s{n + 1:03d}", stable=stable, patterns=patterns))
    return SyntheticPlan(seed=seed, d1=d1, margin=margin, subjects=subjects)


def render_sample(
    plan: SubjectPlan,
    d1: int,
    rng: np.random.Generator,
    imposter: bool = False,
    margin: float = 0.0,
) -> GrayImage:
    """Draw one sample: black ink on white, corner marks fixing the bounding box."""
    canvas = np.full((NORMALIZED_SIZE, NORMALIZED_SIZE), 255, dtype=np.uint8)
    half = BLOB // 2
    for index, (r0, c0) in enumerate(tile_origins(d1), start=1):
        if index in plan.patterns:
            pattern = plan.patterns[index]
            if imposter:
                widest = max(max(abs(dy), abs(dx)) for dy, dx in pattern)
                stretch = min(1 + margin, _reach(d1) / widest)
                pattern = [(_stretched(dy, stretch), _stretched(dx, stretch)) for dy, dx in pattern]
            for dy, dx in pattern:
                r = r0 + d1 // 2 + dy
                c = c0 + d1 // 2 + dx
                canvas[r - half : r + half + 1, c - half : c + half + 1] = 0
        else:
            h, w = rng.integers(8, d1 - 40, size=2)
            top = r0 + int(rng.integers(4, d1 - 4 - h + 1))
            left = c0 + int(rng.integers(4, d1 - 4 - w + 1))
            canvas[top : top + h, left : left + w] = 0
    canvas[0, 0] = 0
    canvas[-1, -1] = 0
    return GrayImage(pixels=canvas)


def gen_synthetic(
    out_dir: str | Path,
    n_subjects: int,
    n_genuine: int,
    n_imposter: int,
    seed: int,
    margin: float,
    n_stable: int = 4,
) -> DatasetManifest:
    """Write a signature-style dataset plus its manifest and return the manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    plan = plan_dataset(n_subjects, seed, margin, n_stable, rng=rng)

    entries = []
    for subject in plan.subjects:
        genuine, imposter = [], []
        for n in range(n_genuine):
            rel = Path(subject.subject) / f"g{n + 1:02d}.pgm"
            save_image(render_sample(subject, plan.d1, rng), out_dir / rel)
            genuine.append(rel)
        for n in range(n_imposter):
            rel = Path(subject.subject) / f"f{n + 1:02d}.pgm"
            save_image(
                render_sample(subject, plan.d1, rng, imposter=True, margin=margin),
                out_dir / rel,
            )
            imposter.append(rel)
        entries.append(SubjectEntry(id=subject.subject, genuine=genuine, imposter=imposter))

    manifest_path = out_dir / "manifest.txt"
    write_manifest(
        DatasetManifest(modality=Modality.SIGNATURE, subjects=entries),
        manifest_path,
        comment=f"synthetic dataset seed={seed} margin={margin} stable={n_stable}",
    )
    logger.info("wrote %d synthetic subjects to %s", n_subjects, out_dir)
    return load_manifest(manifest_path)


def render_eye(
    width: int = 320,
    height: int = 280,
    center: tuple[int, int] = (160, 140),
    radius: int = 30,
    pupil: int = 10,
    iris: int = 150,
    background: int = 200,
    rng: np.random.Generator | None = None,
) -> GrayImage:
    """Gray eye: dark pupil disk inside a brighter iris disk; center is (x, y).

    With an rng, the iris gets radial texture kept above the default dark range.
    """
    rows, cols = np.mgrid[0:height, 0:width]
    x_c, y_c = center
    dist2 = (cols - x_c) ** 2 + (rows - y_c) ** 2
    img = np.full((height, width), background, dtype=np.uint8)
    iris_area = dist2 <= (radius * 2.5) ** 2
    img[iris_area] = iris
    if rng is not None:
        angle = np.arctan2(rows - y_c, cols - x_c)
        spokes = rng.uniform(0.5, 3.0) * np.sin(angle * int(rng.integers(6, 18)))
        texture = np.clip(iris + 25 * spokes, 140, 250).astype(np.uint8)
        img[iris_area] = texture[iris_area]
    img[dist2 <= radius * radius] = pupil
    return GrayImage(pixels=img)
