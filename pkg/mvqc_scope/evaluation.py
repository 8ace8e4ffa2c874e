"""
The FRR/FAR evaluation harness.

Each subject is enrolled from its first P genuine samples (manifest order);
the remaining genuine samples measure FRR and the imposter pool measures FAR.
Signature imposters are the subject's listed forgeries. Iris subjects without
listed imposters are attacked with samples of every other subject, either the
first genuine sample of each (``eval.iris_imposters = "first"``) or all of
them (``"all"``).
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterable, Sequence

import pandas as pd
from pydantic import BaseModel, Field, model_validator

from mvqc_scope.api import Verifier
from mvqc_scope.backend import Backend, InMemoryBackend
from mvqc_scope.config import ConfigKey, resolve
from mvqc_scope.core import (
    NORMALIZED_SIZE,
    ClassifierKind,
    DecisionRecord,
    FeatureVector,
    Modality,
    MomentKind,
    TileOrder,
)
from mvqc_scope.errors import ManifestError, MvqcError
from mvqc_scope.imaging import normalize, read_image
from mvqc_scope.manifest import DatasetManifest, SubjectEntry
from mvqc_scope.mvqc import moment_summation, per_tile_features, template_from_features
from mvqc_scope.quadtree import tile_count

logger = logging.getLogger(__name__)

REPORT_COLUMNS = [
    "classifier",
    "moment",
    "d1",
    "b",
    "avg_frr_pct",
    "avg_far_pct",
    "n_zero_frr",
    "n_zero_far",
]
SUMMARY_COLUMNS = ["avg_frr", "avg_far", "n_zero_frr", "n_zero_far"]
SUBJECT_COLUMNS = [
    "subject",
    "classifier",
    "moment",
    "d1",
    "b",
    "P",
    "frr_pct",
    "far_pct",
    "n_genuine",
    "n_imposter",
]

# ---------------------------------------------------------------------------
# experiments


class ExperimentConfig(BaseModel):
    P: int = Field(ge=2, description="Training samples per subject")
    b: int = Field(ge=1, description="Selected quadtree components")
    d1: int = 128
    kind: MomentKind = MomentKind.C
    classifiers: list[ClassifierKind] = Field(default_factory=lambda: list(ClassifierKind))
    seed: int = Field(default=0, description="Recorded with results; nothing is random")

    @model_validator(mode="after")
    def _check_b(self) -> ExperimentConfig:
        L = tile_count(NORMALIZED_SIZE, self.d1)
        if self.b > L:
            raise ValueError(f"b={self.b} exceeds L={L} tiles for d1={self.d1}")
        if not self.classifiers:
            raise ValueError("at least one classifier is required")
        return self


class Preset(BaseModel):
    """Database-shaped defaults for the evaluation grid."""

    modality: Modality
    P: int
    b: int
    d1: int = 128
    offset1: int | None = None
    offset2: int | None = None


PRESETS: dict[str, Preset] = {
    "casia": Preset(modality=Modality.IRIS, P=3, b=10, offset1=20, offset2=40),
    "ice": Preset(modality=Modality.IRIS, P=3, b=6, offset1=6, offset2=12),
    "mmu": Preset(modality=Modality.IRIS, P=3, b=8, offset1=20, offset2=40),
    "mcyt": Preset(modality=Modality.SIGNATURE, P=10, b=4),
}


class SubjectResult(BaseModel):
    subject: str
    classifier: ClassifierKind
    moment: MomentKind
    d1: int
    b: int
    P: int
    frr: float = Field(ge=0.0, le=1.0)
    far: float = Field(ge=0.0, le=1.0)
    n_genuine: int
    n_imposter: int


class EvalReport(BaseModel):
    results: list[SubjectResult] = Field(default_factory=list)
    skipped: list[str] = Field(
        default_factory=list, description="Subjects that failed preprocessing"
    )

    def subject_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [r.model_dump(mode="json") for r in self.results],
            columns=list(SubjectResult.model_fields),
        )

    def summary_frame(self) -> pd.DataFrame:
        """One row per (classifier, moment, d1, b), in evaluation order."""
        df = self.subject_frame()
        if df.empty:
            return pd.DataFrame(
                columns=["classifier", "moment", "d1", "b", *SUMMARY_COLUMNS]
            )
        grouped = df.groupby(["classifier", "moment", "d1", "b"], sort=False)
        summary = grouped.agg(
            avg_frr=("frr", "mean"),
            avg_far=("far", "mean"),
            n_zero_frr=("frr", lambda s: int((s == 0.0).sum())),
            n_zero_far=("far", lambda s: int((s == 0.0).sum())),
        )
        return summary.reset_index()


def zero_counts(
    report: EvalReport,
    classifier: ClassifierKind | str,
    *,
    moment: MomentKind | str | None = None,
    d1: int | None = None,
    b: int | None = None,
) -> tuple[int, int]:
    """Subjects with exactly zero FRR and zero FAR for one classifier."""
    classifier = ClassifierKind(classifier)
    moment = MomentKind(moment) if moment is not None else None
    rows = [
        r
        for r in report.results
        if r.classifier == classifier
        and (moment is None or r.moment == moment)
        and (d1 is None or r.d1 == d1)
        and (b is None or r.b == b)
    ]
    return sum(r.frr == 0.0 for r in rows), sum(r.far == 0.0 for r in rows)


SampleFeatures = dict[tuple[int, MomentKind], FeatureVector]


def preprocess_params(manifest: DatasetManifest) -> dict[str, int]:
    """Iris preprocessing parameters; manifest values win over the options."""
    if manifest.modality != Modality.IRIS:
        return {}
    return {
        "t_dark": resolve(ConfigKey.IMAGING_T_DARK, manifest.params.get("t_dark")),
        "offset1": resolve(ConfigKey.IMAGING_OFFSET1, manifest.params.get("offset1")),
        "offset2": resolve(ConfigKey.IMAGING_OFFSET2, manifest.params.get("offset2")),
    }


def _subject_features(
    manifest: DatasetManifest,
    entry: SubjectEntry,
    keys: Sequence[tuple[int, MomentKind]],
    preprocess: dict[str, int],
    order: TileOrder,
    normalized: bool,
) -> dict[str, SampleFeatures]:
    features: dict[str, SampleFeatures] = {}
    for path in [*entry.genuine, *entry.imposter]:
        img = read_image(manifest.resolve_path(path))
        bw = normalize(img, manifest.modality, **preprocess)
        features[path.as_posix()] = {
            (d1, kind): per_tile_features(bw, d1, kind, order, normalized) for d1, kind in keys
        }
        logger.debug("preprocessed %s for subject %s", path, entry.id)
    return features


def _imposter_pool(
    manifest: DatasetManifest, entry: SubjectEntry, usable: Sequence[SubjectEntry], mode: str
) -> list[str]:
    if entry.imposter or manifest.modality == Modality.SIGNATURE:
        return [p.as_posix() for p in entry.imposter]
    pool = []
    for other in usable:
        if other.id == entry.id:
            continue
        chosen = other.genuine[:1] if mode == "first" else other.genuine
        pool += [p.as_posix() for p in chosen]
    return pool


def _evaluate_subject(
    entry: SubjectEntry,
    imposters: Sequence[str],
    features: dict[str, SampleFeatures],
    configs: Sequence[ExperimentConfig],
    modality: Modality,
    preprocess: dict[str, int],
) -> tuple[list[SubjectResult], list[DecisionRecord]]:
    backend = InMemoryBackend()
    verifier = Verifier(backend)
    genuine = [p.as_posix() for p in entry.genuine]
    results = []
    for config in configs:
        key = (config.d1, config.kind)
        train = [features[p][key] for p in genuine[: config.P]]
        template = template_from_features(entry.id, train, config.b, modality, preprocess)
        probes = [(p, True) for p in genuine[config.P :]] + [(p, False) for p in imposters]
        values = [
            (p, is_genuine, moment_summation(features[p][key], template.indices))
            for p, is_genuine in probes
        ]
        n_genuine = len(genuine) - config.P
        for classifier in config.classifiers:
            rejected = accepted = 0
            for p, is_genuine, x in values:
                decision = verifier.verify_value(template, x, classifier, p, is_genuine)
                if is_genuine and not decision.accept:
                    rejected += 1
                elif not is_genuine and decision.accept:
                    accepted += 1
            results.append(
                SubjectResult(
                    subject=entry.id,
                    classifier=classifier,
                    moment=config.kind,
                    d1=config.d1,
                    b=config.b,
                    P=config.P,
                    frr=rejected / n_genuine,
                    far=accepted / len(imposters),
                    n_genuine=n_genuine,
                    n_imposter=len(imposters),
                )
            )
    return results, backend.load()


def run_grid(
    manifest: DatasetManifest,
    configs: Iterable[ExperimentConfig],
    jobs: int | None = None,
    backend: Backend | None = None,
) -> EvalReport:
    """Evaluate every configuration and classifier over all subjects.

    Samples are preprocessed once per subject; subjects run concurrently on up
    to `jobs` threads and merge in manifest order. Subjects whose samples fail
    to load or preprocess are skipped with a warning.
    """
    configs = list(configs)
    if not configs:
        raise ValueError("no experiment configurations given")
    jobs = resolve(ConfigKey.EVAL_JOBS, jobs)
    mode = resolve(ConfigKey.EVAL_IRIS_IMPOSTERS, None)
    order = TileOrder(resolve(ConfigKey.QUADTREE_ORDER, None))
    normalized = resolve(ConfigKey.MOMENTS_NORMALIZED, None)

    max_p = max(c.P for c in configs)
    for entry in manifest.subjects:
        if len(entry.genuine) < max_p + 1:
            raise ManifestError(
                f"subject {entry.id!r} has {len(entry.genuine)} genuine samples, "
                f"needs P+1={max_p + 1}"
            )
    keys = list(dict.fromkeys((c.d1, c.kind) for c in configs))
    preprocess = preprocess_params(manifest)

    def extract(entry: SubjectEntry) -> dict[str, SampleFeatures] | None:
        try:
            return _subject_features(manifest, entry, keys, preprocess, order, normalized)
        except (MvqcError, OSError) as e:
            logger.warning("skipping subject %s: %s", entry.id, e)
            return None

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        extracted = list(pool.map(extract, manifest.subjects))

    features: dict[str, SampleFeatures] = {}
    usable: list[SubjectEntry] = []
    skipped: list[str] = []
    for entry, subject_features in zip(manifest.subjects, extracted):
        if subject_features is None:
            skipped.append(entry.id)
            continue
        usable.append(entry)
        features.update(subject_features)

    pools = {entry.id: _imposter_pool(manifest, entry, usable, mode) for entry in usable}
    for entry in usable:
        if not pools[entry.id]:
            raise ManifestError(f"subject {entry.id!r} has no imposter samples")

    def evaluate(entry: SubjectEntry) -> tuple[list[SubjectResult], list[DecisionRecord]]:
        return _evaluate_subject(
            entry, pools[entry.id], features, configs, manifest.modality, preprocess
        )

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        evaluated = list(pool.map(evaluate, usable))

    results: list[SubjectResult] = []
    if evaluated:
        # config/classifier major, subjects in manifest order
        for j in range(len(evaluated[0][0])):
            results += [subject_results[j] for subject_results, _ in evaluated]
    if backend is not None:
        for _, records in evaluated:
            for record in records:
                backend.save(record)
        backend.flush()

    logger.info(
        "evaluated %d subjects over %d configurations (%d skipped)",
        len(usable),
        len(configs),
        len(skipped),
    )
    return EvalReport(results=results, skipped=skipped)


def run_experiment(
    manifest: DatasetManifest,
    config: ExperimentConfig,
    jobs: int | None = None,
    backend: Backend | None = None,
) -> EvalReport:
    return run_grid(manifest, [config], jobs, backend)


# ---------------------------------------------------------------------------
# reports


def _pct(value: float) -> str:
    return f"{value * 100:.2f}"


def report_table(report: EvalReport) -> pd.DataFrame:
    summary = report.summary_frame()
    table = pd.DataFrame(
        {
            "classifier": summary["classifier"],
            "moment": summary["moment"],
            "d1": summary["d1"],
            "b": summary["b"],
            "avg_frr_pct": summary["avg_frr"].map(_pct),
            "avg_far_pct": summary["avg_far"].map(_pct),
            "n_zero_frr": summary["n_zero_frr"],
            "n_zero_far": summary["n_zero_far"],
        },
        columns=REPORT_COLUMNS,
    )
    return table


def write_report_csv(report: EvalReport, path: str | Path) -> Path:
    """Write the summary CSV and a ``<stem>_subjects.csv`` detail file beside it.

    Returns the detail file path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    report_table(report).to_csv(path, index=False, lineterminator="\n")

    detail = report.subject_frame()
    subjects = pd.DataFrame(
        {
            "subject": detail["subject"],
            "classifier": detail["classifier"],
            "moment": detail["moment"],
            "d1": detail["d1"],
            "b": detail["b"],
            "P": detail["P"],
            "frr_pct": detail["frr"].map(_pct),
            "far_pct": detail["far"].map(_pct),
            "n_genuine": detail["n_genuine"],
            "n_imposter": detail["n_imposter"],
        },
        columns=SUBJECT_COLUMNS,
    )
    detail_path = path.with_name(f"{path.stem}_subjects.csv")
    subjects.to_csv(detail_path, index=False, lineterminator="\n")
    return detail_path


def format_summary(report: EvalReport) -> str:
    table = report_table(report)
    if table.empty:
        return "no results"
    return table.to_string(index=False)
