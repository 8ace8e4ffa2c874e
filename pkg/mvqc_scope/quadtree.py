"""
Uniform region-quadtree decomposition into L equal tiles.

With Z-order numbering each level visits quadrants top-left, top-right,
bottom-left, bottom-right; tile indices are 1-based.
"""

from __future__ import annotations

import numpy as np

from mvqc_scope.config import ConfigKey, resolve
from mvqc_scope.core import NORMALIZED_SIZE, BinaryImage, TileGrid, TileOrder
from mvqc_scope.errors import ImageSizeError


def tile_count(M: int, d1: int) -> int:
    """L = (M/d1)^2."""
    if d1 <= 0 or M <= 0 or M % d1:
        raise ValueError(f"d1={d1} does not divide M={M}")
    side = M // d1
    return side * side


def _order(order: TileOrder | str | None) -> TileOrder:
    return TileOrder(resolve(ConfigKey.QUADTREE_ORDER, order))


def index_to_position(
    i: int,
    d1: int,
    M: int = NORMALIZED_SIZE,
    order: TileOrder | str | None = None,
) -> tuple[int, int]:
    """Pixel (row, col) of the origin of tile i."""
    L = tile_count(M, d1)
    if not 1 <= i <= L:
        raise IndexError(f"tile index {i} outside 1..{L}")
    side = M // d1
    code = i - 1
    if _order(order) == TileOrder.ROWMAJOR:
        row, col = divmod(code, side)
    else:
        # de-interleave Morton bits: odd bits are the row, even bits the column
        row = col = 0
        level = 0
        while code:
            col |= (code & 1) << level
            row |= ((code >> 1) & 1) << level
            code >>= 2
            level += 1
    return row * d1, col * d1


def tile_origins(
    d1: int, M: int = NORMALIZED_SIZE, order: TileOrder | str | None = None
) -> list[tuple[int, int]]:
    """Origins of tiles 1..L in numbering order."""
    order = _order(order)
    return [index_to_position(i, d1, M, order) for i in range(1, tile_count(M, d1) + 1)]


def decompose(
    img: BinaryImage, d1: int, order: TileOrder | str | None = None
) -> TileGrid:
    if img.width != img.height:
        raise ImageSizeError(f"expected a square image, got {img.width}x{img.height}")
    M = img.width
    if M != NORMALIZED_SIZE:
        raise ImageSizeError(f"expected {NORMALIZED_SIZE}x{NORMALIZED_SIZE}, got {M}x{M}")
    order = _order(order)
    tiles = [
        BinaryImage(mask=img.mask[r : r + d1, c : c + d1])
        for r, c in tile_origins(d1, M, order)
    ]
    return TileGrid(M=M, d1=d1, order=order, tiles=tiles)


def reassemble(grid: TileGrid) -> BinaryImage:
    """Inverse of decompose."""
    out = np.zeros((grid.M, grid.M), dtype=bool)
    for (r, c), tile in zip(tile_origins(grid.d1, grid.M, grid.order), grid.tiles):
        if tile.mask.shape != (grid.d1, grid.d1):
            raise ImageSizeError(
                f"tile of shape {tile.mask.shape} in a grid with d1={grid.d1}"
            )
        out[r : r + grid.d1, c : c + grid.d1] = tile.mask
    return BinaryImage(mask=out)
