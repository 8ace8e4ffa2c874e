"""
Public API for the MVQC Scope verification library.
"""

from __future__ import annotations

from typing import Sequence

from mvqc_scope.backend import Backend
from mvqc_scope.classify import verify as classify_verify
from mvqc_scope.config import configure_backend
from mvqc_scope.core import (
    BinaryImage,
    ClassifierKind,
    Decision,
    DecisionRecord,
    Modality,
    MomentKind,
    MvqcTemplate,
)
from mvqc_scope.mvqc import build_template, probe_value


class Verifier:
    """Main interface: enroll subjects and verify probes, recording every decision."""

    def __init__(self, backend: Backend | None = None):
        """Initialize verifier with a backend for storing decisions.

        Args:
            backend: Backend instance for decision records. Defaults to the
                backend configured by the ``records.*`` options.
        """
        self.backend = backend or configure_backend()

    def enroll(
        self,
        subject: str,
        samples: Sequence[BinaryImage],
        d1: int,
        b: int,
        kind: MomentKind | str,
        modality: Modality | str = Modality.SIGNATURE,
        preprocess: dict[str, int] | None = None,
    ) -> MvqcTemplate:
        """Build a template from normalized genuine samples."""
        return build_template(subject, samples, d1, b, kind, modality, preprocess)

    def verify(
        self,
        template: MvqcTemplate,
        probe: BinaryImage,
        classifier: ClassifierKind | str,
        sample: str = "",
        genuine: bool | None = None,
    ) -> Decision:
        """Verify a normalized probe against a template.

        Args:
            template: Enrollment record of the claimed subject
            probe: Normalized 512x512 binary probe
            classifier: Back-end to decide with
            sample: Label stored with the decision (usually the file path)
            genuine: Ground truth, if known
        """
        return self.verify_value(
            template, probe_value(template, probe), classifier, sample, genuine
        )

    def verify_value(
        self,
        template: MvqcTemplate,
        x: float,
        classifier: ClassifierKind | str,
        sample: str = "",
        genuine: bool | None = None,
    ) -> Decision:
        """Verify an already computed moment summation."""
        classifier = ClassifierKind(classifier)
        decision = classify_verify(template, classifier, x)
        self.backend.save(
            DecisionRecord(
                subject=template.subject,
                sample=sample,
                genuine=genuine,
                classifier=classifier,
                moment=template.kind,
                d1=template.d1,
                b=template.b,
                x=x,
                score=decision.score,
                accept=decision.accept,
                cluster=decision.cluster,
                silhouette=decision.silhouette,
            )
        )
        return decision

    def flush(self):
        """Flush any pending records to the backend."""
        self.backend.flush()
