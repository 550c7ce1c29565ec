"""Annotation file I/O.

Annotations are stored one site per line as JSON (JSONL), so files can be
appended to mid-session and diffed line-by-line:

    {"site_id": "site01",
     "true_features": ["typos", "urgency"],
     "judgments": [
       {"feature_id": "typos", "feature_correct": true,
        "artifact_correct": true, "snippet_correct": true},
       ...
     ]}

``judgments`` must align 1:1 with the predictions being graded, in
prediction order. ``artifact_correct`` is only meaningful on rows with
``feature_correct`` true.
"""

from __future__ import annotations

import json
from pathlib import Path

from pxp.evaluation.metrics import GroundTruthAnnotation, PredictionJudgment

__all__ = ["AnnotationError", "load_annotations", "dump_annotations"]

_JUDGMENT_KEYS = {"feature_id", "feature_correct", "artifact_correct", "snippet_correct"}


class AnnotationError(Exception):
    """An annotation line is malformed; the message carries the line number."""


def _parse_judgment(data: object, where: str) -> PredictionJudgment:
    if not isinstance(data, dict):
        raise AnnotationError(f"{where}: judgment must be an object, got {type(data).__name__}")
    missing = _JUDGMENT_KEYS - data.keys()
    if missing:
        raise AnnotationError(f"{where}: judgment missing keys {sorted(missing)}")
    unknown = data.keys() - _JUDGMENT_KEYS
    if unknown:
        raise AnnotationError(f"{where}: judgment has unknown keys {sorted(unknown)}")
    if not isinstance(data["feature_id"], str) or not data["feature_id"]:
        raise AnnotationError(f"{where}: feature_id must be a non-empty string")
    for key in ("feature_correct", "artifact_correct", "snippet_correct"):
        if not isinstance(data[key], bool):
            raise AnnotationError(f"{where}: {key} must be a boolean")
    return PredictionJudgment(
        feature_id=data["feature_id"],
        feature_correct=data["feature_correct"],
        artifact_correct=data["artifact_correct"],
        snippet_correct=data["snippet_correct"],
    )


def _parse_annotation(data: object, where: str) -> GroundTruthAnnotation:
    if not isinstance(data, dict):
        raise AnnotationError(f"{where}: record must be an object")
    for key in ("site_id", "true_features", "judgments"):
        if key not in data:
            raise AnnotationError(f"{where}: missing field {key!r}")
    if not isinstance(data["site_id"], str) or not data["site_id"]:
        raise AnnotationError(f"{where}: site_id must be a non-empty string")
    truth = data["true_features"]
    if not isinstance(truth, list) or any(not isinstance(f, str) or not f for f in truth):
        raise AnnotationError(f"{where}: true_features must be a list of feature ids")
    if not isinstance(data["judgments"], list):
        raise AnnotationError(f"{where}: judgments must be a list")
    judgments = tuple(
        _parse_judgment(item, f"{where} judgment {index}")
        for index, item in enumerate(data["judgments"])
    )
    return GroundTruthAnnotation(
        site_id=data["site_id"],
        true_features=frozenset(truth),
        judgments=judgments,
    )


def load_annotations(path: str | Path) -> list[GroundTruthAnnotation]:
    """Parse a JSONL annotation file; duplicate site ids are rejected."""
    path = Path(path)
    annotations: list[GroundTruthAnnotation] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path.name}:{lineno}"
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise AnnotationError(f"{where}: invalid JSON ({exc.msg})") from exc
            annotation = _parse_annotation(data, where)
            if annotation.site_id in seen:
                raise AnnotationError(f"{where}: duplicate site_id {annotation.site_id!r}")
            seen.add(annotation.site_id)
            annotations.append(annotation)
    return annotations


def dump_annotations(annotations: list[GroundTruthAnnotation], path: str | Path) -> None:
    path = Path(path)
    lines = []
    for annotation in annotations:
        lines.append(
            json.dumps(
                {
                    "site_id": annotation.site_id,
                    "true_features": sorted(annotation.true_features),
                    "judgments": [
                        {
                            "feature_id": j.feature_id,
                            "feature_correct": j.feature_correct,
                            "artifact_correct": j.artifact_correct,
                            "snippet_correct": j.snippet_correct,
                        }
                        for j in annotation.judgments
                    ],
                },
                ensure_ascii=False,
            )
        )
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
