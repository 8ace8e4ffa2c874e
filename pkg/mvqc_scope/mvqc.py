"""
Minimum-variance quadtree component (MVQC) selection and templates.

A template keeps the b tiles whose moment values vary least across a
subject's genuine training samples, together with the moment summations H
of those samples over the selected tiles.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from mvqc_scope.classify import avgmax_factor, stable_mean, train_parameters
from mvqc_scope.core import (
    NORMALIZED_SIZE,
    BinaryImage,
    ClassifierParams,
    FeatureVector,
    Modality,
    MomentKind,
    MvqcTemplate,
    TileOrder,
)
from mvqc_scope.errors import EmptySignatureError, TemplateFormatError
from mvqc_scope.moments import moment_value
from mvqc_scope.quadtree import decompose, tile_count

logger = logging.getLogger(__name__)

TEMPLATE_HEADER = "mvqc-template 1"


def per_tile_features(
    img: BinaryImage,
    d1: int,
    kind: MomentKind | str,
    order: TileOrder | str | None = None,
    normalized: bool | None = None,
) -> FeatureVector:
    """Moment value of every quadtree component, in tile order."""
    kind = MomentKind(kind)
    grid = decompose(img, d1, order)
    return FeatureVector(
        values=[moment_value(tile, kind, normalized) for tile in grid.tiles],
        d1=d1,
        kind=kind,
    )


def component_variances(samples: Sequence[FeatureVector]) -> list[float]:
    """Population variance of each component across the samples."""
    if len(samples) < 2:
        raise ValueError("component variances need at least two samples")
    first = samples[0]
    if any(s.d1 != first.d1 or s.kind != first.kind for s in samples):
        raise ValueError("samples mix different d1 or moment kinds")
    matrix = np.array([s.values for s in samples], dtype=np.float64)
    return [float(v) for v in matrix.var(axis=0)]


def select_mvqc(variances: Sequence[float], b: int) -> list[int]:
    """Iteratively keep components below the average variance until at most b remain.

    A list that drops below b is refilled from the components excluded in the
    last pass, smallest variance first; a list that stops shrinking keeps its
    b smallest. Ties go to the smaller index. Returns 1-based indices, ascending.
    """
    L = len(variances)
    if not 1 <= b <= L:
        raise ValueError(f"b={b} must lie in 1..{L}")

    def rank(i: int) -> tuple[float, int]:
        return (variances[i], i)

    current = list(range(L))
    while len(current) > b:
        avg = math.fsum(variances[i] for i in current) / len(current)
        kept = [i for i in current if variances[i] < avg]
        if len(kept) == len(current):
            current = sorted(current, key=rank)[:b]
            break
        if len(kept) < b:
            excluded = sorted((i for i in current if i not in kept), key=rank)
            current = kept + excluded[: b - len(kept)]
            break
        current = kept
    return sorted(i + 1 for i in current)


def moment_summation(fv: FeatureVector, indices: Sequence[int]) -> float:
    """Sum of the feature values at the given 1-based tile indices."""
    total = 0.0
    for i in indices:
        if not 1 <= i <= fv.L:
            raise IndexError(f"tile index {i} outside 1..{fv.L}")
        total += fv.values[i - 1]
    return total


def build_template(
    subject: str,
    samples: Sequence[BinaryImage],
    d1: int,
    b: int,
    kind: MomentKind | str,
    modality: Modality | str = Modality.SIGNATURE,
    preprocess: dict[str, int] | None = None,
    order: TileOrder | str | None = None,
    normalized: bool | None = None,
) -> MvqcTemplate:
    """Enroll a subject from P >= 2 genuine, already normalized samples."""
    modality = Modality(modality)
    if len(samples) < 2:
        raise ValueError("a template needs at least two genuine samples")
    if modality == Modality.SIGNATURE:
        for n, sample in enumerate(samples):
            if not sample.mask.any():
                raise EmptySignatureError(f"training sample {n} of {subject} is blank")
    features = [per_tile_features(s, d1, kind, order, normalized) for s in samples]
    return template_from_features(subject, features, b, modality, preprocess)


def template_from_features(
    subject: str,
    features: Sequence[FeatureVector],
    b: int,
    modality: Modality | str = Modality.SIGNATURE,
    preprocess: dict[str, int] | None = None,
) -> MvqcTemplate:
    """Select components and derive H from precomputed training features."""
    if len(features) < 2:
        raise ValueError("a template needs at least two genuine samples")
    d1, kind = features[0].d1, features[0].kind
    L = tile_count(NORMALIZED_SIZE, d1)
    if not 1 <= b <= L:
        raise ValueError(f"b={b} must lie in 1..{L} for d1={d1}")

    indices = select_mvqc(component_variances(features), b)
    H = [moment_summation(fv, indices) for fv in features]
    logger.debug("template %s: indices=%s H=%s", subject, indices, H)
    return MvqcTemplate(
        subject=subject,
        modality=Modality(modality),
        kind=kind,
        d1=d1,
        b=b,
        indices=indices,
        H=H,
        m1=min(H),
        m2=max(H),
        mean=stable_mean(H),
        factor=avgmax_factor(H),
        params=train_parameters(H),
        preprocess=dict(preprocess or {}),
    )


def probe_value(
    template: MvqcTemplate,
    img: BinaryImage,
    order: TileOrder | str | None = None,
    normalized: bool | None = None,
) -> float:
    """Moment summation of a normalized probe over the template's components."""
    fv = per_tile_features(img, template.d1, template.kind, order, normalized)
    return moment_summation(fv, template.indices)


# ---------------------------------------------------------------------------
# text record


def _fmt(value: float) -> str:
    return repr(float(value))


def dump_template(t: MvqcTemplate) -> str:
    """Serialize as a versioned line-oriented ``key=value`` record."""
    lines = [
        TEMPLATE_HEADER,
        f"subject={t.subject}",
        f"modality={t.modality.value}",
        f"moment={t.kind.value}",
        f"d1={t.d1}",
        f"b={t.b}",
        "indices=" + ",".join(str(i) for i in t.indices),
        "H=" + ",".join(_fmt(h) for h in t.H),
        f"m1={_fmt(t.m1)}",
        f"m2={_fmt(t.m2)}",
        f"mean={_fmt(t.mean)}",
        f"factor={_fmt(t.factor)}",
        f"classifier.c1={_fmt(t.params.c1)}",
        f"classifier.c2={_fmt(t.params.c2)}",
        f"classifier.threshold={_fmt(t.params.threshold)}",
        f"classifier.knn_k={t.params.knn_k}",
        f"classifier.knn_tau={_fmt(t.params.knn_tau)}",
    ]
    lines += [f"preprocess.{k}={v}" for k, v in sorted(t.preprocess.items())]
    return "\n".join(lines) + "\n"


def parse_template(text: str) -> MvqcTemplate:
    lines = text.splitlines()
    if not lines or lines[0].strip() != TEMPLATE_HEADER:
        raise TemplateFormatError(f"missing header {TEMPLATE_HEADER!r}")
    fields: dict[str, str] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if "=" not in line:
            raise TemplateFormatError(f"line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        if key in fields:
            raise TemplateFormatError(f"line {lineno}: duplicate key {key!r}")
        fields[key] = value

    def take(key: str) -> str:
        try:
            return fields.pop(key)
        except KeyError:
            raise TemplateFormatError(f"missing key {key!r}") from None

    try:
        template = MvqcTemplate(
            subject=take("subject"),
            modality=Modality(take("modality")),
            kind=MomentKind(take("moment")),
            d1=int(take("d1")),
            b=int(take("b")),
            indices=[int(i) for i in take("indices").split(",") if i],
            H=[float(h) for h in take("H").split(",") if h],
            m1=float(take("m1")),
            m2=float(take("m2")),
            mean=float(take("mean")),
            factor=float(take("factor")),
            params=ClassifierParams(
                c1=float(take("classifier.c1")),
                c2=float(take("classifier.c2")),
                threshold=float(take("classifier.threshold")),
                knn_k=int(take("classifier.knn_k")),
                knn_tau=float(take("classifier.knn_tau")),
            ),
            preprocess={
                key.split(".", 1)[1]: int(fields[key])
                for key in list(fields)
                if key.startswith("preprocess.")
            },
        )
    except ValueError as e:
        if isinstance(e, TemplateFormatError):
            raise
        raise TemplateFormatError(str(e)) from e
    unknown = [k for k in fields if not k.startswith("preprocess.")]
    if unknown:
        raise TemplateFormatError(f"unknown keys {unknown}")
    return template


def save_template(t: MvqcTemplate, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_template(t), encoding="utf-8")


def load_template(path: str | Path) -> MvqcTemplate:
    return parse_template(Path(path).read_text(encoding="utf-8"))
