"""
Tests for tile moments and the three moment expressions.
"""

import numpy as np
import pytest

from mvqc_scope.config import ConfigKey, option_context
from mvqc_scope.core import BinaryImage, MomentKind
from mvqc_scope.errors import EmptyTileError
from mvqc_scope.moments import central_moment, moment_set, moment_value, raw_moment


def loop_raw(mask: np.ndarray, p: int, q: int) -> float:
    total = 0.0
    for r in range(mask.shape[0]):
        for c in range(mask.shape[1]):
            if mask[r, c]:
                total += (r + 1) ** p * (c + 1) ** q
    return total


def loop_central(mask: np.ndarray, p: int, q: int) -> float:
    n = loop_raw(mask, 0, 0)
    a, b = loop_raw(mask, 1, 0) / n, loop_raw(mask, 0, 1) / n
    total = 0.0
    for r in range(mask.shape[0]):
        for c in range(mask.shape[1]):
            if mask[r, c]:
                total += (r + 1 - a) ** p * (c + 1 - b) ** q
    return total


def random_tiles(rng, count: int, size: int = 16, low: float = 0.3, high: float = 0.7):
    tiles = []
    while len(tiles) < count:
        mask = rng.random((size, size)) < rng.uniform(low, high)
        if mask.any():
            tiles.append(mask)
    return tiles


class TestMomentSet:
    def test_single_pixel(self):
        mask = np.zeros((4, 4), dtype=bool)
        mask[1, 2] = True
        ms = moment_set(BinaryImage(mask=mask))
        assert ms.m00 == 1
        assert (ms.a, ms.b) == (2.0, 3.0)
        assert (ms.M20, ms.M02, ms.M11) == (0.0, 0.0, 0.0)

    def test_horizontal_bar(self):
        # three pixels in one row: variance along columns only
        ms = moment_set(BinaryImage(mask=[[1, 1, 1]]))
        assert ms.m00 == 3
        assert ms.M20 == 0.0
        assert ms.M02 == 2.0
        assert ms.M11 == 0.0

    def test_empty_tile(self):
        with pytest.raises(EmptyTileError):
            moment_set(BinaryImage(mask=np.zeros((3, 3), dtype=bool)))

    def test_matches_loop_oracle(self, rng):
        for mask in random_tiles(rng, 1000, low=0.05):
            tile = BinaryImage(mask=mask)
            for p, q in [(0, 0), (1, 0), (0, 1), (2, 0), (0, 2), (1, 1)]:
                assert raw_moment(tile, p, q) == pytest.approx(loop_raw(mask, p, q), rel=1e-9)
            for p, q in [(2, 0), (0, 2), (1, 1), (2, 1), (3, 0)]:
                expected = loop_central(mask, p, q)
                assert central_moment(tile, p, q) == pytest.approx(expected, rel=1e-9, abs=1e-6)

    def test_first_order_central_vanish(self, rng):
        tile = BinaryImage(mask=random_tiles(rng, 1)[0])
        assert central_moment(tile, 1, 0) == 0.0
        assert central_moment(tile, 0, 1) == 0.0
        assert central_moment(tile, 0, 0) == tile.count()

    def test_negative_order(self):
        with pytest.raises(ValueError):
            raw_moment(BinaryImage(mask=[[1]]), -1, 0)


class TestMomentValue:
    def test_matches_direct_summation(self, rng):
        for mask in random_tiles(rng, 1000, low=0.05):
            tile = BinaryImage(mask=mask)
            n = loop_raw(mask, 0, 0)
            M20, M02, M11 = (loop_central(mask, p, q) for p, q in [(2, 0), (0, 2), (1, 1)])
            assert moment_value(tile, "A") == pytest.approx((M20 + M02) / n**2, rel=1e-9)
            # B and C cancel terms; the tolerance scales with the terms' magnitude
            spread = (M20 - M02) ** 2 + 4 * M11**2
            scale = ((M20 + M02) ** 2 + 4 * M11**2) / n**2
            assert moment_value(tile, "B") == pytest.approx(
                spread / n**2, rel=1e-9, abs=1e-9 * scale
            )
            assert moment_value(tile, "B", normalized=True) == pytest.approx(
                spread / n**4, rel=1e-9, abs=1e-9 * scale / n**2
            )
            assert moment_value(tile, "C") == pytest.approx(
                (M20 * M02 - M11**2) / n**4, rel=1e-9, abs=1e-9 * (M20 * M02 + M11**2) / n**4
            )

    def test_empty_tile_scores_zero(self):
        empty = BinaryImage(mask=np.zeros((8, 8), dtype=bool))
        for kind in MomentKind:
            assert moment_value(empty, kind) == 0.0

    def test_hand_computed(self):
        # 2x2 block: M20 = M02 = 1, M11 = 0, m00 = 4
        tile = BinaryImage(mask=[[1, 1], [1, 1]])
        assert moment_value(tile, "A") == pytest.approx(2 / 16)
        assert moment_value(tile, "B") == 0.0
        assert moment_value(tile, "C") == pytest.approx(1 / 256)

    def test_bar_moment_b(self):
        tile = BinaryImage(mask=[[1, 1, 1]])
        # (M20 - M02)^2 / m00^2 = 4 / 9
        assert moment_value(tile, MomentKind.B) == pytest.approx(4 / 9)
        assert moment_value(tile, MomentKind.B, normalized=True) == pytest.approx(4 / 81)
        with option_context((ConfigKey.MOMENTS_NORMALIZED, True)):
            assert moment_value(tile, MomentKind.B) == pytest.approx(4 / 81)

    def test_normalized_leaves_a_and_c(self, rng):
        tile = BinaryImage(mask=random_tiles(rng, 1)[0])
        for kind in (MomentKind.A, MomentKind.C):
            assert moment_value(tile, kind, normalized=True) == moment_value(tile, kind)

    def test_translation_invariance(self, rng):
        for content in random_tiles(rng, 1000, size=10, low=0.1):
            values = []
            for dy, dx in [(0, 0), (6, 0), (0, 6), (3, 5)]:
                mask = np.zeros((16, 16), dtype=bool)
                mask[dy : dy + 10, dx : dx + 10] = content
                tile = BinaryImage(mask=mask)
                values.append([moment_value(tile, kind) for kind in MomentKind])
            assert all(v == values[0] for v in values[1:])

    def test_rotation_invariance(self, rng):
        for mask in random_tiles(rng, 1000, low=0.1):
            base = [moment_value(BinaryImage(mask=mask), kind) for kind in MomentKind]
            for k in (1, 2, 3):
                turned = BinaryImage(mask=np.rot90(mask, k))
                assert [moment_value(turned, kind) for kind in MomentKind] == base

    @pytest.mark.parametrize("factor", [2, 3])
    def test_block_replication(self, rng, factor):
        block = np.ones((factor, factor), dtype=bool)
        for mask in random_tiles(rng, 200):
            small = BinaryImage(mask=mask)
            big = BinaryImage(mask=np.kron(mask, block))
            for kind in (MomentKind.A, MomentKind.C):
                assert moment_value(big, kind) == pytest.approx(
                    moment_value(small, kind), rel=0.02
                )
