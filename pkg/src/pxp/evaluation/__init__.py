"""Reliability metrics, annotation I/O, and snapshot-corpus replay."""

from pxp.evaluation.annotations import AnnotationError, dump_annotations, load_annotations
from pxp.evaluation.metrics import (
    EmptyPredictions,
    GroundTruthAnnotation,
    MetricSummary,
    ModelReport,
    PredictionJudgment,
    ReliabilityRecord,
    aggregate_model_report,
    compute_aa,
    compute_cfr,
    compute_csa,
    compute_fmr,
    compute_reliability,
    score_annotation,
)
from pxp.evaluation.replay import (
    CorpusReport,
    ServiceUnreachable,
    Snapshot,
    SnapshotResult,
    load_snapshots,
    replay_corpus,
)

__all__ = [
    "AnnotationError",
    "dump_annotations",
    "load_annotations",
    "EmptyPredictions",
    "GroundTruthAnnotation",
    "MetricSummary",
    "ModelReport",
    "PredictionJudgment",
    "ReliabilityRecord",
    "aggregate_model_report",
    "compute_aa",
    "compute_cfr",
    "compute_csa",
    "compute_fmr",
    "compute_reliability",
    "score_annotation",
    "CorpusReport",
    "ServiceUnreachable",
    "Snapshot",
    "SnapshotResult",
    "load_snapshots",
    "replay_corpus",
]
