"""
Verification back-ends over scalar moment-summation features: k-means
(Euclidean and cityblock), fuzzy k-means, k-nn, fuzzy k-nn, avg and avgmax.

Cluster numbers returned to callers are 1-based; cluster 1 is seeded at the
smallest training value.
"""

from __future__ import annotations

import logging
import math
from enum import Enum
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from mvqc_scope.config import ConfigKey, resolve
from mvqc_scope.core import ClassifierKind, ClassifierParams, Decision, MvqcTemplate

logger = logging.getLogger(__name__)

_COLUMN_TOLERANCE = 1e-6


class Distance(str, Enum):
    EUCLIDEAN = "euclidean"
    CITYBLOCK = "cityblock"


class PartitionMatrix(BaseModel):
    """Fuzzy memberships U[i, j] of point j in cluster i."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    U: np.ndarray = Field(description="k x n membership grid")

    @field_validator("U", mode="before")
    @classmethod
    def _check_memberships(cls, value):
        arr = np.array(value, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("partition matrix must be 2-D")
        if arr.size and (arr.min() < 0 or arr.max() > 1):
            raise ValueError("memberships must lie in [0, 1]")
        if arr.size and np.abs(arr.sum(axis=0) - 1).max() > _COLUMN_TOLERANCE:
            raise ValueError("every column of a partition matrix must sum to 1")
        arr.setflags(write=False)
        return arr


class KMeansResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    assignments: list[int] = Field(description="1-based cluster of every point")
    centroids: list[float]
    n_iter: int
    objective: list[float] = Field(description="Within-cluster sum of squares history")


class FuzzyResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    U: PartitionMatrix
    V: list[float]
    n_iter: int
    objective: list[float] = Field(description="J_m history")


def _as_points(points: Sequence[float]) -> np.ndarray:
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("points must be a 1-D sequence of scalars")
    return x


def stable_mean(values: Sequence[float]) -> float:
    """Mean computed as min + fsum(v - min)/n; exact for constant input."""
    if len(values) == 0:
        raise ValueError("mean of an empty sequence")
    lo = min(values)
    return lo + math.fsum(v - lo for v in values) / len(values)


# ---------------------------------------------------------------------------
# k-means


def _distances(x: np.ndarray, centroids: np.ndarray, distance: Distance) -> np.ndarray:
    diff = x[None, :] - centroids[:, None]
    if distance == Distance.EUCLIDEAN:
        return np.sqrt(diff * diff)
    return np.abs(diff)


def _wcss(x: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> float:
    return float(np.sum((x - centroids[labels]) ** 2))


def kmeans(
    points: Sequence[float],
    k: int,
    distance: Distance | str = Distance.EUCLIDEAN,
    init: Sequence[float] | None = None,
    max_iter: int | None = None,
) -> KMeansResult:
    """Lloyd iteration until no centroid changes.

    Ties in assignment go to the lower cluster; an empty cluster keeps its
    previous centroid.
    """
    x = _as_points(points)
    distance = Distance(distance)
    max_iter = resolve(ConfigKey.CLASSIFY_MAX_ITER, max_iter)
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > x.size:
        raise ValueError(f"k={k} exceeds the number of points {x.size}")
    if init is None:
        ranks = np.linspace(0, x.size - 1, k).round().astype(int)
        centroids = np.sort(x)[ranks]
    else:
        centroids = np.asarray(init, dtype=np.float64)
        if centroids.shape != (k,):
            raise ValueError(f"init must hold {k} centroids")

    labels = np.argmin(_distances(x, centroids, distance), axis=0)
    objective = [_wcss(x, labels, centroids)]
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        updated = centroids.copy()
        for c in range(k):
            members = x[labels == c]
            if members.size:
                updated[c] = members.mean()
        objective.append(_wcss(x, labels, updated))
        if np.array_equal(updated, centroids):
            break
        centroids = updated
        labels = np.argmin(_distances(x, centroids, distance), axis=0)

    return KMeansResult(
        assignments=[int(c) + 1 for c in labels],
        centroids=[float(c) for c in centroids],
        n_iter=n_iter,
        objective=objective,
    )


def initial_centroids(H: Sequence[float]) -> tuple[float, float]:
    """(c1, c2) seeds: c1 = min(H), c2 halfway between min(H) and the threshold."""
    c1, c2, _ = _seed(H)
    return c1, c2


def seed_threshold(H: Sequence[float]) -> float:
    """The value above max(H) used to place the second seed."""
    return _seed(H)[2]


def _seed(H: Sequence[float]) -> tuple[float, float, float]:
    if len(H) == 0:
        raise ValueError("initial centroids need at least one training value")
    m1, m2 = float(min(H)), float(max(H))
    if m1 == m2:
        c2 = float(np.nextafter(m1, np.inf))
        return m1, c2, c2 + (c2 - m1)
    threshold = 2 * m2 - m1
    if threshold <= m2:
        threshold = float(np.nextafter(m2, np.inf))
    return m1, (m1 + threshold) / 2, threshold


# ---------------------------------------------------------------------------
# fuzzy k-means


def _memberships(x: np.ndarray, V: np.ndarray, m: float) -> np.ndarray:
    d = np.abs(x[None, :] - V[:, None])
    U = np.zeros_like(d)
    exact = d == 0
    hit = exact.any(axis=0)
    if hit.any():
        first = np.argmax(exact[:, hit], axis=0)
        U[first, np.flatnonzero(hit)] = 1.0
    rest = ~hit
    if rest.any():
        # ratios against the nearest centroid keep the powers finite
        ratio = d[:, rest] / d[:, rest].min(axis=0)
        inv = ratio ** (-2.0 / (m - 1.0))
        U[:, rest] = inv / inv.sum(axis=0)
    return U


def _fuzzy_objective(x: np.ndarray, U: np.ndarray, V: np.ndarray, m: float) -> float:
    return float(np.sum(U**m * (x[None, :] - V[:, None]) ** 2))


def fuzzy_kmeans(
    points: Sequence[float],
    c: int = 2,
    m: float | None = None,
    eps: float | None = None,
    max_iter: int | None = None,
    init: Sequence[float] | None = None,
) -> FuzzyResult:
    """Alternating membership/centroid updates until memberships settle below eps."""
    x = _as_points(points)
    m = resolve(ConfigKey.CLASSIFY_FUZZIFIER, m)
    eps = resolve(ConfigKey.CLASSIFY_EPS, eps)
    max_iter = resolve(ConfigKey.CLASSIFY_MAX_ITER, max_iter)
    if m <= 1:
        raise ValueError("fuzzifier m must exceed 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if c < 1 or c > x.size:
        raise ValueError(f"c={c} must lie in 1..{x.size}")
    if init is None:
        ranks = np.linspace(0, x.size - 1, c).round().astype(int)
        V = np.sort(x)[ranks]
    else:
        V = np.asarray(init, dtype=np.float64)
        if V.shape != (c,):
            raise ValueError(f"init must hold {c} centroids")

    U = _memberships(x, V, m)
    objective = [_fuzzy_objective(x, U, V, m)]
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        W = U**m
        mass = W.sum(axis=1)
        V = np.where(mass > 0, (W @ x) / np.where(mass > 0, mass, 1.0), V)
        U_next = _memberships(x, V, m)
        objective.append(_fuzzy_objective(x, U_next, V, m))
        delta = float(np.abs(U_next - U).max())
        U = U_next
        if delta < eps:
            break

    return FuzzyResult(
        U=PartitionMatrix(U=U), V=[float(v) for v in V], n_iter=n_iter, objective=objective
    )


def fuzzy_assign(U: PartitionMatrix | np.ndarray | Sequence[Sequence[float]]) -> list[int]:
    """1-based cluster of maximum membership per column; ties go to the lower cluster."""
    grid = U.U if isinstance(U, PartitionMatrix) else np.asarray(U, dtype=np.float64)
    if grid.ndim != 2:
        raise ValueError("partition matrix must be 2-D")
    return [int(c) + 1 for c in np.argmax(grid, axis=0)]


def silhouette(
    points: Sequence[float],
    assignments: Sequence[int],
    distance: Distance | str = Distance.CITYBLOCK,
) -> list[float]:
    """Silhouette value of each point; singleton clusters score 0."""
    x = _as_points(points)
    labels = np.asarray(assignments)
    distance = Distance(distance)
    diff = x[:, None] - x[None, :]
    d = np.sqrt(diff * diff) if distance == Distance.EUCLIDEAN else np.abs(diff)
    clusters = np.unique(labels)
    values = []
    for j in range(x.size):
        own = labels == labels[j]
        if own.sum() <= 1 or clusters.size < 2:
            values.append(0.0)
            continue
        a = d[j, own].sum() / (own.sum() - 1)
        b = min(d[j, labels == other].mean() for other in clusters if other != labels[j])
        values.append(0.0 if max(a, b) == 0 else float((b - a) / max(a, b)))
    return values


# ---------------------------------------------------------------------------
# k-nn family


def knn_k(P: int) -> int:
    """round(sqrt(P)), clamped so a leave-one-out neighbourhood exists."""
    if P < 2:
        raise ValueError("k-nn needs at least two training values")
    return min(max(int(math.floor(math.sqrt(P) + 0.5)), 1), P - 1)


def _nearest(H: np.ndarray, x: float, k: int) -> np.ndarray:
    return np.sort(np.abs(H - x))[:k]


def knn_score(H: Sequence[float], x: float, k: int) -> float:
    """Mean distance from x to its k nearest training values."""
    return float(_nearest(np.asarray(H, dtype=np.float64), x, k).mean())


def knn_threshold(H: Sequence[float], k: int) -> float:
    """Largest leave-one-out k-nn score over the training values."""
    arr = np.asarray(H, dtype=np.float64)
    if arr.size < 2:
        raise ValueError("k-nn needs at least two training values")
    return max(knn_score(np.delete(arr, j), float(arr[j]), k) for j in range(arr.size))


def avgmax_factor(H: Sequence[float]) -> float:
    """Largest deviation of a training value above the mean."""
    mean = stable_mean(H)
    return max(h - mean for h in H)


def train_parameters(H: Sequence[float]) -> ClassifierParams:
    c1, c2, threshold = _seed(H)
    k = knn_k(len(H))
    return ClassifierParams(
        c1=c1, c2=c2, threshold=threshold, knn_k=k, knn_tau=knn_threshold(H, k)
    )


def knn_verify(
    template: MvqcTemplate, x: float, slack: float | None = None
) -> Decision:
    """Accept when the k-nn score stays within the leave-one-out radius."""
    slack = resolve(ConfigKey.CLASSIFY_KNN_SLACK, slack)
    if template.P < 2:
        raise ValueError("k-nn needs at least two training values")
    score = knn_score(template.H, x, template.params.knn_k)
    return Decision(accept=score <= template.params.knn_tau * (1 + slack), score=score)


def fuzzy_knn_membership(template: MvqcTemplate, x: float, m: float | None = None) -> float:
    """Genuine-class membership against a virtual reference at distance tau."""
    m = resolve(ConfigKey.CLASSIFY_FUZZIFIER, m)
    if m <= 1:
        raise ValueError("fuzzifier m must exceed 1")
    if template.P < 2:
        raise ValueError("k-nn needs at least two training values")
    d = _nearest(np.asarray(template.H, dtype=np.float64), x, template.params.knn_k)
    if (d == 0).any():
        return 1.0
    tau = template.params.knn_tau
    if tau == 0:
        return 0.0
    with np.errstate(over="ignore"):
        # mean of w_i / w_0 with w = 1 / d^(2/(m-1))
        ratio = float(np.mean((tau / d) ** (2.0 / (m - 1.0))))
    if math.isinf(ratio):
        return 1.0
    return ratio / (ratio + 1.0)


def fuzzy_knn_verify(template: MvqcTemplate, x: float, m: float | None = None) -> Decision:
    mu = fuzzy_knn_membership(template, x, m)
    return Decision(accept=mu >= 0.5, score=mu)


def avg_verify(template: MvqcTemplate, x: float) -> Decision:
    """Accept values at or below the training mean."""
    return Decision(accept=x <= template.mean, score=x - template.mean)


def avgmax_verify(template: MvqcTemplate, x: float) -> Decision:
    """Accept when the excess over the mean is within the avgmax factor."""
    excess = x - template.mean
    return Decision(accept=excess <= template.factor, score=excess)


# ---------------------------------------------------------------------------
# dispatch


def _shares_cluster(assignments: list[int]) -> bool:
    # x is the last point; accept when a training value ends up with it
    return assignments[-1] in assignments[:-1]


def _kmeans_verify(
    template: MvqcTemplate, x: float, distance: Distance, max_iter: int | None
) -> Decision:
    points = [*template.H, x]
    result = kmeans(
        points,
        2,
        distance,
        init=(template.params.c1, template.params.c2),
        max_iter=max_iter,
    )
    cluster = result.assignments[-1]
    return Decision(
        accept=_shares_cluster(result.assignments),
        score=abs(x - result.centroids[cluster - 1]),
        cluster=cluster,
        silhouette=silhouette(points, result.assignments, distance)[-1],
    )


def _fuzzy_kmeans_verify(
    template: MvqcTemplate,
    x: float,
    m: float | None,
    eps: float | None,
    max_iter: int | None,
) -> Decision:
    points = [*template.H, x]
    result = fuzzy_kmeans(
        points,
        2,
        m=m,
        eps=eps,
        max_iter=max_iter,
        init=(template.params.c1, template.params.c2),
    )
    assignments = fuzzy_assign(result.U)
    cluster = assignments[-1]
    return Decision(
        accept=_shares_cluster(assignments),
        score=float(result.U.U[cluster - 1, -1]),
        cluster=cluster,
        silhouette=silhouette(points, assignments)[-1],
    )


def verify(
    template: MvqcTemplate,
    kind: ClassifierKind | str,
    x: float,
    *,
    slack: float | None = None,
    m: float | None = None,
    eps: float | None = None,
    max_iter: int | None = None,
) -> Decision:
    """Route a probe value to the requested back-end."""
    kind = ClassifierKind(kind)
    if kind == ClassifierKind.KMEANS_EUCLID:
        return _kmeans_verify(template, x, Distance.EUCLIDEAN, max_iter)
    if kind == ClassifierKind.KMEANS_CITY:
        return _kmeans_verify(template, x, Distance.CITYBLOCK, max_iter)
    if kind == ClassifierKind.FUZZY_KMEANS:
        return _fuzzy_kmeans_verify(template, x, m, eps, max_iter)
    if kind == ClassifierKind.KNN:
        return knn_verify(template, x, slack)
    if kind == ClassifierKind.FUZZY_KNN:
        return fuzzy_knn_verify(template, x, m)
    if kind == ClassifierKind.AVG:
        return avg_verify(template, x)
    return avgmax_verify(template, x)
