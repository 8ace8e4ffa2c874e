"""
PGM/PPM codec (P2, P3, P5, P6 with maxval <= 255).
"""

from __future__ import annotations

import numpy as np

from mvqc_scope.errors import PnmParseError

_WHITESPACE = b" \t\n\r\v\f"
_MAGICS = {b"P2": (1, False), b"P3": (3, False), b"P5": (1, True), b"P6": (3, True)}
# Luma weights for RGB -> gray
LUMA = (0.299, 0.587, 0.114)


class _Reader:
    """Token reader over a header that tolerates '#' comments."""

    def __init__(self, data: bytes, pos: int):
        self.data = data
        self.pos = pos

    def _skip_space_and_comments(self):
        data = self.data
        while self.pos < len(data):
            ch = data[self.pos : self.pos + 1]
            if ch in _WHITESPACE and ch:
                self.pos += 1
            elif ch == b"#":
                while self.pos < len(data) and data[self.pos : self.pos + 1] not in (
                    b"\n",
                    b"\r",
                ):
                    self.pos += 1
            else:
                return

    def integer(self, what: str) -> int:
        self._skip_space_and_comments()
        start = self.pos
        while self.pos < len(self.data) and 48 <= self.data[self.pos] <= 57:
            self.pos += 1
        if start == self.pos:
            if self.pos >= len(self.data):
                raise PnmParseError(f"unexpected end of data while reading {what}", start)
            raise PnmParseError(f"expected decimal {what}", start)
        return int(self.data[start : self.pos])


def parse_pnm(data: bytes) -> tuple[np.ndarray, int]:
    """Decode PNM bytes.

    Returns:
        (array, maxval) where array is (rows, cols) for PGM or (rows, cols, 3) for PPM.
    """
    magic = data[:2]
    if magic not in _MAGICS:
        raise PnmParseError(f"unsupported magic number {magic!r}", 0)
    channels, binary = _MAGICS[magic]

    reader = _Reader(data, 2)
    if reader.pos < len(data) and data[reader.pos : reader.pos + 1] not in _WHITESPACE:
        if data[reader.pos : reader.pos + 1] != b"#":
            raise PnmParseError("missing whitespace after magic number", reader.pos)
    width = reader.integer("width")
    height = reader.integer("height")
    maxval_offset = reader.pos
    maxval = reader.integer("maxval")
    if width < 1 or height < 1:
        raise PnmParseError(f"invalid dimensions {width}x{height}", maxval_offset)
    if not 0 < maxval <= 255:
        raise PnmParseError(f"maxval {maxval} outside (0, 255]", maxval_offset)

    count = width * height * channels
    if binary:
        if reader.pos >= len(data) or data[reader.pos : reader.pos + 1] not in _WHITESPACE:
            raise PnmParseError("missing whitespace before raster", reader.pos)
        start = reader.pos + 1
        end = start + count
        if end > len(data):
            raise PnmParseError(
                f"truncated raster: need {count} bytes, have {len(data) - start}", len(data)
            )
        values = np.frombuffer(data, dtype=np.uint8, count=count, offset=start)
    else:
        values = np.empty(count, dtype=np.int64)
        for n in range(count):
            values[n] = reader.integer("sample")
    if values.size and values.max() > maxval:
        raise PnmParseError(f"sample exceeds maxval {maxval}", maxval_offset)

    shape = (height, width) if channels == 1 else (height, width, 3)
    return values.astype(np.uint8).reshape(shape), maxval


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """Fixed-luma conversion, rounded half up."""
    weights = np.asarray(LUMA, dtype=np.float64)
    gray = rgb.astype(np.float64) @ weights
    return np.clip(np.floor(gray + 0.5), 0, 255).astype(np.uint8)


def encode_pgm(pixels: np.ndarray) -> bytes:
    """Encode a uint8 2-D array as binary PGM (P5, maxval 255)."""
    arr = np.ascontiguousarray(pixels, dtype=np.uint8)
    if arr.ndim != 2:
        raise ValueError("PGM encoding requires a 2-D array")
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    return header + arr.tobytes()
