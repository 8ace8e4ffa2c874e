"""
Raw moments, centralized moments and the three Hu-derived invariants of a
binary tile.

Pixel coordinates are 1-based: i is the row, j the column.
"""

from __future__ import annotations

import numpy as np

from mvqc_scope.config import ConfigKey, resolve
from mvqc_scope.core import BinaryImage, MomentKind, MomentSet
from mvqc_scope.errors import EmptyTileError


def _coordinates(tile: BinaryImage) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = np.nonzero(tile.mask)
    return rows.astype(np.int64) + 1, cols.astype(np.int64) + 1


def raw_moment(tile: BinaryImage, p: int, q: int) -> float:
    """m_pq = sum of i^p * j^q over foreground pixels."""
    if p < 0 or q < 0:
        raise ValueError("moment orders must be non-negative")
    i, j = _coordinates(tile)
    if i.size == 0:
        return 0.0
    return float(np.sum(i.astype(np.float64) ** p * j.astype(np.float64) ** q))


def moment_set(tile: BinaryImage) -> MomentSet:
    """All moments up to second order.

    Central moments come from exact integer sums taken relative to the
    foreground's top-left corner, then a single division, so shifting or
    quarter-turning a tile reproduces them bit for bit.
    """
    i, j = _coordinates(tile)
    n = int(i.size)
    if n == 0:
        raise EmptyTileError("central moments of an empty tile")
    u = i - i.min()
    v = j - j.min()
    su, sv = int(u.sum()), int(v.sum())
    suu, svv, suv = int((u * u).sum()), int((v * v).sum()), int((u * v).sum())
    m10, m01 = int(i.sum()), int(j.sum())
    return MomentSet(
        m00=float(n),
        m10=float(m10),
        m01=float(m01),
        a=m10 / n,
        b=m01 / n,
        M20=(n * suu - su * su) / n,
        M02=(n * svv - sv * sv) / n,
        M11=(n * suv - su * sv) / n,
    )


def central_moment(tile: BinaryImage, p: int, q: int) -> float:
    """M_pq = sum of (i - a)^p * (j - b)^q over foreground pixels."""
    ms = moment_set(tile)
    key = (p, q)
    if key == (0, 0):
        return ms.m00
    if key in ((1, 0), (0, 1)):
        return 0.0
    if key == (2, 0):
        return ms.M20
    if key == (0, 2):
        return ms.M02
    if key == (1, 1):
        return ms.M11
    i, j = _coordinates(tile)
    return float(np.sum((i - ms.a) ** p * (j - ms.b) ** q))


def moment_value(
    tile: BinaryImage, kind: MomentKind | str, normalized: bool | None = None
) -> float:
    """Moment_A, Moment_B or Moment_C of a tile; an empty tile scores 0.

    With `normalized`, Moment_B is divided by m00^4 instead of m00^2.
    """
    kind = MomentKind(kind)
    normalized = resolve(ConfigKey.MOMENTS_NORMALIZED, normalized)
    if not tile.mask.any():
        return 0.0
    ms = moment_set(tile)
    m00 = ms.m00
    if kind == MomentKind.A:
        return (ms.M20 + ms.M02) / m00**2
    if kind == MomentKind.B:
        spread = (ms.M20 - ms.M02) ** 2 + 4 * ms.M11**2
        return spread / (m00**4 if normalized else m00**2)
    return (ms.M20 * ms.M02 - ms.M11**2) / m00**4
