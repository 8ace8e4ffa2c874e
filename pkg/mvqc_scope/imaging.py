"""
Image ingestion and the two preprocessing pipelines: iris PIF extraction and
signature normalization.

Coordinates: x is the column and y the row, both 0-based for pixel addressing.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path

import numpy as np
from scipy import ndimage

from mvqc_scope.config import ConfigKey, resolve
from mvqc_scope.core import (
    NORMALIZED_SIZE,
    BinaryImage,
    GrayImage,
    LabelMap,
    Modality,
    PupilLocation,
    WindowRect,
)
from mvqc_scope.errors import (
    EmptySignatureError,
    NoDarkPixelsError,
    WindowError,
)
from mvqc_scope.pnm import encode_pgm, parse_pnm, rgb_to_gray

logger = logging.getLogger(__name__)

# 8-neighborhood
_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


def load_image(data: bytes) -> GrayImage:
    """Decode PGM/PPM bytes into a gray image; color is converted with fixed luma."""
    arr, _ = parse_pnm(data)
    if arr.ndim == 3:
        arr = rgb_to_gray(arr)
    return GrayImage(pixels=arr)


def read_image(path: str | Path) -> GrayImage:
    return load_image(Path(path).read_bytes())


def write_pgm(img: GrayImage) -> bytes:
    return encode_pgm(img.pixels)


def save_image(img: GrayImage, path: str | Path) -> None:
    """Write a gray image as P5 PGM."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(write_pgm(img))


def mask_to_gray(bw: BinaryImage) -> GrayImage:
    """Render a mask as black ink (0) on white (255)."""
    return GrayImage(pixels=np.where(bw.mask, 0, 255).astype(np.uint8))


def histogram(img: GrayImage) -> np.ndarray:
    """Counts of each intensity 0..255."""
    return np.bincount(img.pixels.ravel(), minlength=256).astype(np.int64)


def dark_peak(counts: np.ndarray, t_dark: int | None = None) -> int:
    """Most frequent intensity within [0, t_dark]; ties go to the darker value."""
    t_dark = resolve(ConfigKey.IMAGING_T_DARK, t_dark)
    if not 0 <= t_dark <= 255:
        raise ValueError("t_dark must lie in [0, 255]")
    window = np.asarray(counts)[: t_dark + 1]
    if not window.any():
        raise NoDarkPixelsError(t_dark)
    return int(np.argmax(window))


def threshold_leq(img: GrayImage, ind: int) -> BinaryImage:
    return BinaryImage(mask=img.pixels <= ind)


def label_components(bw: BinaryImage) -> LabelMap:
    """8-connected labeling, numbered by first raster-scan encounter."""
    raw, num = ndimage.label(bw.mask, structure=_EIGHT_CONNECTED)
    if num == 0:
        return LabelMap(labels=raw, num=0)
    flat = raw.ravel()
    found, first = np.unique(flat, return_index=True)
    keep = found > 0
    found, first = found[keep], first[keep]
    remap = np.zeros(num + 1, dtype=np.int32)
    remap[found[np.argsort(first, kind="stable")]] = np.arange(1, num + 1, dtype=np.int32)
    return LabelMap(labels=remap[raw], num=int(num))


def component_areas(lm: LabelMap) -> list[int]:
    """Pixel count per label 1..num."""
    if lm.num == 0:
        return []
    counts = np.bincount(lm.labels.ravel(), minlength=lm.num + 1)
    return [int(c) for c in counts[1:]]


def pupil_locate(img: GrayImage, t_dark: int | None = None) -> PupilLocation:
    """Locate the pupil as the largest dark component."""
    ind = dark_peak(histogram(img), t_dark)
    lm = label_components(threshold_leq(img, ind))
    areas = component_areas(lm)
    largest = int(np.argmax(areas)) + 1
    rows, cols = np.nonzero(lm.labels == largest)
    x_min, x_max = int(cols.min()), int(cols.max())
    y_min, y_max = int(rows.min()), int(rows.max())
    radius1 = (x_max - x_min) / 2
    radius2 = (y_max - y_min) / 2
    logger.debug(
        "pupil: ind=%d components=%d area=%d box=(%d..%d, %d..%d)",
        ind,
        lm.num,
        areas[largest - 1],
        x_min,
        x_max,
        y_min,
        y_max,
    )
    return PupilLocation(
        x_min=x_min,
        x_max=x_max,
        y_min=y_min,
        y_max=y_max,
        radius1=radius1,
        radius2=radius2,
        x_c=(x_max + x_min) / 2,
        y_c=(y_max + y_min) / 2,
        radius=max(radius1, radius2),
    )


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def window_rect(
    p: PupilLocation,
    offset1: int | None = None,
    offset2: int | None = None,
    bounds: tuple[int, int] | None = None,
) -> WindowRect:
    """Crop window around the pupil.

    Follows the printed convention where the left edge is derived from y_c and
    the top edge from x_c. The result is clamped to `bounds` (width, height).
    """
    offset1 = resolve(ConfigKey.IMAGING_OFFSET1, offset1)
    offset2 = resolve(ConfigKey.IMAGING_OFFSET2, offset2)
    if offset1 < 0 or offset2 < 0:
        raise ValueError("offsets must be non-negative")
    x0 = _round_half_up(p.y_c - p.radius - offset1)
    y0 = _round_half_up(p.x_c - p.radius - offset1)
    side = _round_half_up(2 * p.radius + offset2)
    x1, y1 = x0 + side, y0 + side
    if bounds is not None:
        width, height = bounds
        x0, y0 = max(x0, 0), max(y0, 0)
        x1, y1 = min(x1, width), min(y1, height)
    if x1 - x0 <= 0 or y1 - y0 <= 0:
        raise WindowError(f"degenerate window [{x0}:{x1}, {y0}:{y1}]")
    return WindowRect(x_value=x0, y_value=y0, width=x1 - x0, height=y1 - y0)


def crop(img: GrayImage, r: WindowRect) -> GrayImage:
    if (
        r.x_value < 0
        or r.y_value < 0
        or r.x_value + r.width > img.width
        or r.y_value + r.height > img.height
    ):
        raise WindowError(
            f"window {r.width}x{r.height}+{r.x_value}+{r.y_value} "
            f"outside {img.width}x{img.height} image"
        )
    return GrayImage(
        pixels=img.pixels[r.y_value : r.y_value + r.height, r.x_value : r.x_value + r.width]
    )


def _source_coords(dst: int, src: int) -> np.ndarray:
    # pixel-center alignment
    coords = (np.arange(dst, dtype=np.float64) + 0.5) * (src / dst) - 0.5
    return np.clip(coords, 0, src - 1)


def resize(
    img: GrayImage, width: int = NORMALIZED_SIZE, height: int = NORMALIZED_SIZE
) -> GrayImage:
    """Bilinear resize with pixel-center alignment."""
    if (img.width, img.height) == (width, height):
        return img
    rows = _source_coords(height, img.height)
    cols = _source_coords(width, img.width)
    grid = np.meshgrid(rows, cols, indexing="ij")
    out = ndimage.map_coordinates(
        img.pixels.astype(np.float64), grid, order=1, mode="nearest"
    )
    return GrayImage(pixels=np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8))


def resize_mask(
    bw: BinaryImage, width: int = NORMALIZED_SIZE, height: int = NORMALIZED_SIZE
) -> BinaryImage:
    """Nearest-neighbor mask resize."""
    rows = np.minimum(
        np.floor((np.arange(height) + 0.5) * (bw.height / height)).astype(int), bw.height - 1
    )
    cols = np.minimum(
        np.floor((np.arange(width) + 0.5) * (bw.width / width)).astype(int), bw.width - 1
    )
    return BinaryImage(mask=bw.mask[np.ix_(rows, cols)])


def binarize(img: GrayImage, thr: float | str = "mean") -> BinaryImage:
    """Foreground is every pixel strictly below `thr` ("mean" uses the mean intensity)."""
    if thr == "mean":
        level = float(img.pixels.mean())
    elif isinstance(thr, str):
        raise ValueError(f"unknown threshold {thr!r}")
    else:
        level = float(thr)
    return BinaryImage(mask=img.pixels < level)


def foreground_bbox(bw: BinaryImage) -> WindowRect:
    rows = np.flatnonzero(bw.mask.any(axis=1))
    cols = np.flatnonzero(bw.mask.any(axis=0))
    if rows.size == 0:
        raise EmptySignatureError()
    return WindowRect(
        x_value=int(cols[0]),
        y_value=int(rows[0]),
        width=int(cols[-1] - cols[0] + 1),
        height=int(rows[-1] - rows[0] + 1),
    )


def signature_normalize(img: GrayImage) -> BinaryImage:
    """gray -> 512x512 -> binarize(mean) -> tight bounding box -> 512x512 mask."""
    bw = binarize(resize(img), "mean")
    if not bw.mask.any():
        raise EmptySignatureError()
    box = foreground_bbox(bw)
    cropped = BinaryImage(
        mask=bw.mask[box.y_value : box.y_value + box.height, box.x_value : box.x_value + box.width]
    )
    return resize_mask(cropped)


def iris_pif(
    img: GrayImage,
    t_dark: int | None = None,
    offset1: int | None = None,
    offset2: int | None = None,
) -> GrayImage:
    """Pupil iris frame: window around the pupil, resized to 512x512."""
    pupil = pupil_locate(img, t_dark)
    rect = window_rect(pupil, offset1, offset2, bounds=(img.width, img.height))
    return resize(crop(img, rect))


def normalize(
    img: GrayImage,
    modality: Modality,
    t_dark: int | None = None,
    offset1: int | None = None,
    offset2: int | None = None,
) -> BinaryImage:
    """Produce the 512x512 binary image the quadtree stage consumes."""
    if Modality(modality) == Modality.IRIS:
        return binarize(iris_pif(img, t_dark, offset1, offset2), "mean")
    return signature_normalize(img)
