"""
Core data models and types for MVQC Scope.
"""

from __future__ import annotations

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Side length of the normalized image every quadtree operates on
NORMALIZED_SIZE = 512


class Modality(str, Enum):
    """Biometric trait a sample belongs to."""

    IRIS = "iris"
    SIGNATURE = "signature"


class MomentKind(str, Enum):
    """The three Hu-derived moment expressions."""

    A = "A"
    B = "B"
    C = "C"


class ClassifierKind(str, Enum):
    """Verification back-ends."""

    KMEANS_EUCLID = "kmeans-euclidean"
    KMEANS_CITY = "kmeans-cityblock"
    FUZZY_KMEANS = "fuzzy-kmeans"
    KNN = "knn"
    FUZZY_KNN = "fuzzy-knn"
    AVG = "avg"
    AVGMAX = "avgmax"


class TileOrder(str, Enum):
    """Tile numbering conventions for the quadtree leaves."""

    ZORDER = "zorder"
    ROWMAJOR = "rowmajor"


def _frozen_array(value, dtype) -> np.ndarray:
    arr = np.array(value, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


class GrayImage(BaseModel):
    """8-bit grayscale image, row-major."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    pixels: np.ndarray = Field(description="2-D uint8 array indexed [row, col]")

    @field_validator("pixels", mode="before")
    @classmethod
    def _check_pixels(cls, value):
        arr = np.asarray(value)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("pixels must be a non-empty 2-D array")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ValueError("pixel intensities must lie in [0, 255]")
        return _frozen_array(arr, np.uint8)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])


class BinaryImage(BaseModel):
    """Foreground mask; True marks foreground."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mask: np.ndarray = Field(description="2-D bool array indexed [row, col]")

    @field_validator("mask", mode="before")
    @classmethod
    def _check_mask(cls, value):
        arr = np.asarray(value)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("mask must be a non-empty 2-D array")
        if arr.dtype != np.bool_ and not np.isin(arr, (0, 1)).all():
            raise ValueError("mask values must be 0 or 1")
        return _frozen_array(arr, np.bool_)

    @property
    def width(self) -> int:
        return int(self.mask.shape[1])

    @property
    def height(self) -> int:
        return int(self.mask.shape[0])

    def count(self) -> int:
        """Number of foreground pixels."""
        return int(np.count_nonzero(self.mask))


class LabelMap(BaseModel):
    """Connected-component labels; 0 is background, components are 1..num."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    labels: np.ndarray = Field(description="2-D int array of component labels")
    num: int = Field(ge=0, description="Number of components")

    @field_validator("labels", mode="before")
    @classmethod
    def _check_labels(cls, value):
        arr = np.asarray(value)
        if arr.ndim != 2:
            raise ValueError("labels must be a 2-D array")
        if arr.size and arr.min() < 0:
            raise ValueError("labels must be non-negative")
        return _frozen_array(arr, np.int32)

    @model_validator(mode="after")
    def _check_num(self) -> LabelMap:
        top = int(self.labels.max()) if self.labels.size else 0
        if top != self.num:
            raise ValueError(f"num={self.num} but largest label is {top}")
        return self

    @property
    def width(self) -> int:
        return int(self.labels.shape[1])

    @property
    def height(self) -> int:
        return int(self.labels.shape[0])


class PupilLocation(BaseModel):
    """Bounding extremes, radii and center of the detected pupil (x = column, y = row)."""

    model_config = ConfigDict(frozen=True)

    x_min: int
    x_max: int
    y_min: int
    y_max: int
    radius1: float = Field(description="Horizontal half-extent")
    radius2: float = Field(description="Vertical half-extent")
    x_c: float
    y_c: float
    radius: float = Field(description="max(radius1, radius2)")


class WindowRect(BaseModel):
    """Crop rectangle: x_value is the left column, y_value the top row."""

    model_config = ConfigDict(frozen=True)

    x_value: int
    y_value: int
    width: int = Field(gt=0)
    height: int = Field(gt=0)


class TileGrid(BaseModel):
    """The L equal quadtree leaves of an M×M image at trie level M/d1."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    M: int = Field(default=NORMALIZED_SIZE, description="Side length of the image")
    d1: int = Field(description="Minimum subregion size")
    order: TileOrder = Field(default=TileOrder.ZORDER)
    tiles: list[BinaryImage] = Field(description="Tiles in numbering order")

    @model_validator(mode="after")
    def _check_tiles(self) -> TileGrid:
        if self.M % self.d1:
            raise ValueError(f"d1={self.d1} does not divide M={self.M}")
        if len(self.tiles) != self.L:
            raise ValueError(f"expected {self.L} tiles, got {len(self.tiles)}")
        return self

    @property
    def trie_level(self) -> int:
        return self.M // self.d1

    @property
    def L(self) -> int:
        return self.trie_level * self.trie_level


class MomentSet(BaseModel):
    """Raw and central moments of one tile (M10 = M01 = 0 are not stored)."""

    model_config = ConfigDict(frozen=True)

    m00: float
    m10: float
    m01: float
    a: float = Field(description="Centroid row (1-based)")
    b: float = Field(description="Centroid column (1-based)")
    M20: float
    M02: float
    M11: float


class FeatureVector(BaseModel):
    """Per-tile moment values of one sample."""

    model_config = ConfigDict(frozen=True)

    values: list[float]
    d1: int
    kind: MomentKind

    @model_validator(mode="after")
    def _check_length(self) -> FeatureVector:
        side = NORMALIZED_SIZE // self.d1
        if len(self.values) != side * side:
            raise ValueError(
                f"feature vector for d1={self.d1} needs {side * side} values, "
                f"got {len(self.values)}"
            )
        return self

    @property
    def L(self) -> int:
        return len(self.values)


class ClassifierParams(BaseModel):
    """Classifier parameters derived from H at enrollment."""

    c1: float = Field(description="Initial centroid of the genuine cluster")
    c2: float = Field(description="Initial centroid of the second cluster")
    threshold: float = Field(description="Value above m2 used to place c2")
    knn_k: int = Field(ge=1)
    knn_tau: float = Field(ge=0.0, description="Leave-one-out k-nn acceptance radius")


class MvqcTemplate(BaseModel):
    """Per-subject enrollment record."""

    subject: str
    modality: Modality
    kind: MomentKind
    d1: int
    b: int = Field(ge=1)
    indices: list[int] = Field(description="Selected tile indices, 1-based, ascending")
    H: list[float] = Field(description="Moment summations of the training samples")
    m1: float
    m2: float
    mean: float
    factor: float
    params: ClassifierParams
    preprocess: dict[str, int] = Field(
        default_factory=dict,
        description="Preprocessing parameters used at enrollment (t_dark, offsets)",
    )

    @model_validator(mode="after")
    def _check_invariants(self) -> MvqcTemplate:
        side = NORMALIZED_SIZE // self.d1
        if len(self.indices) != self.b:
            raise ValueError(f"template has {len(self.indices)} indices but b={self.b}")
        if any(i < 1 or i > side * side for i in self.indices):
            raise ValueError("template index out of range")
        if any(x >= y for x, y in zip(self.indices, self.indices[1:])):
            raise ValueError("template indices must be strictly increasing")
        if not self.H:
            raise ValueError("template needs at least one training value")
        if any(h < self.m1 or h > self.m2 for h in self.H):
            raise ValueError("H values must lie within [m1, m2]")
        return self

    @property
    def P(self) -> int:
        return len(self.H)


class Decision(BaseModel):
    """Outcome of verifying one probe value."""

    accept: bool
    score: float = Field(description="Distance or membership, depending on the classifier")
    cluster: int | None = Field(default=None, description="1-based cluster, if any")
    silhouette: float | None = Field(
        default=None, description="Silhouette of the probe in its final cluster, if any"
    )


class DecisionRecord(BaseModel):
    """One verification decision, as stored by a backend."""

    subject: str
    sample: str = Field(default="", description="Probe sample path or label")
    genuine: bool | None = Field(
        default=None, description="Ground truth, when known (evaluation runs)"
    )
    classifier: ClassifierKind
    moment: MomentKind
    d1: int
    b: int
    x: float = Field(description="Moment summation of the probe")
    score: float
    accept: bool
    cluster: int | None = None
    silhouette: float | None = None
