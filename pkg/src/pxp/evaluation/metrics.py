"""Reliability scoring for annotated warning runs.

A warning for one site is graded against expert annotation along four
axes, each a fraction in [0, 1]:

- CFR (correct feature rate): predicted features that were actually
  present, over all predicted features.
- FMR (feature miss rate): ground-truth features the warning missed,
  over all ground-truth features.
- AA (artifact accuracy): among the *correctly* identified features, the
  fraction whose extracted artifacts were accurate and grounded.
- CSA (code snippet accuracy): predicted features whose highlighted
  snippet pointed at the right markup, over all predicted features.

The composite score is ``10 × (CFR + (1 − FMR) + AA + CSA) / 4``.

Edge cases are made explicit rather than inherited from division: AA with
zero correct features is reported as 0.0 with a degenerate flag and such
records are excluded from AA aggregation; FMR with an empty ground-truth
set is 0.0 (nothing could be missed). Fractions are kept at full
precision internally — rounding is presentation-only.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

__all__ = [
    "EmptyPredictions",
    "PredictionJudgment",
    "GroundTruthAnnotation",
    "ReliabilityRecord",
    "MetricSummary",
    "ModelReport",
    "compute_cfr",
    "compute_fmr",
    "compute_aa",
    "compute_csa",
    "compute_reliability",
    "score_annotation",
    "aggregate_model_report",
]


class EmptyPredictions(Exception):
    """A per-prediction rate was requested for a site with no predictions."""


@dataclass(frozen=True)
class PredictionJudgment:
    """One coder verdict for one predicted feature.

    ``artifact_correct`` is only meaningful when ``feature_correct`` is
    true; it is ignored otherwise.
    """

    feature_id: str
    feature_correct: bool
    artifact_correct: bool
    snippet_correct: bool


@dataclass(frozen=True)
class GroundTruthAnnotation:
    """Expert annotation for one site: what was really there, and a
    judgment for each prediction, aligned 1:1 with the prediction list."""

    site_id: str
    true_features: frozenset[str]
    judgments: tuple[PredictionJudgment, ...]

    def __post_init__(self) -> None:
        if not self.site_id:
            raise ValueError("site_id must be non-empty")
        object.__setattr__(self, "true_features", frozenset(self.true_features))
        object.__setattr__(self, "judgments", tuple(self.judgments))

    @property
    def predicted_features(self) -> tuple[str, ...]:
        return tuple(j.feature_id for j in self.judgments)


def _check_fraction(name: str, value: float) -> float:
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return float(value)


def compute_cfr(judgments: tuple[PredictionJudgment, ...] | list[PredictionJudgment]) -> float:
    """Correct predictions over total predictions."""
    if not judgments:
        raise EmptyPredictions("CFR is undefined without predictions")
    return sum(1 for j in judgments if j.feature_correct) / len(judgments)


def compute_fmr(true_features, predicted_features) -> float:
    """Missed ground-truth features over total ground-truth features.

    An empty ground-truth set yields 0.0: there was nothing to miss.
    """
    truth = frozenset(true_features)
    if not truth:
        return 0.0
    missed = truth - frozenset(predicted_features)
    return len(missed) / len(truth)


def compute_aa(
    judgments: tuple[PredictionJudgment, ...] | list[PredictionJudgment],
) -> tuple[float, bool]:
    """Artifact accuracy over the correctly identified features.

    Returns ``(fraction, degenerate)``; when no feature was judged
    correct the denominator vanishes and the result is ``(0.0, True)``.
    Degenerate values must be excluded from cross-site AA aggregation.
    """
    correct = [j for j in judgments if j.feature_correct]
    if not correct:
        return 0.0, True
    return sum(1 for j in correct if j.artifact_correct) / len(correct), False


def compute_csa(judgments: tuple[PredictionJudgment, ...] | list[PredictionJudgment]) -> float:
    """Correctly located snippets over total predictions."""
    if not judgments:
        raise EmptyPredictions("CSA is undefined without predictions")
    return sum(1 for j in judgments if j.snippet_correct) / len(judgments)


def compute_reliability(cfr: float, fmr: float, aa: float, csa: float) -> float:
    """Composite warning-quality score on [0, 10]."""
    cfr = _check_fraction("cfr", cfr)
    fmr = _check_fraction("fmr", fmr)
    aa = _check_fraction("aa", aa)
    csa = _check_fraction("csa", csa)
    return 10.0 * (cfr + (1.0 - fmr) + aa + csa) / 4.0


@dataclass(frozen=True)
class ReliabilityRecord:
    """Per-site sub-metrics and the composite score derived from them."""

    site_id: str
    cfr: float
    fmr: float
    aa: float
    csa: float
    reliability: float
    aa_degenerate: bool = False

    def __post_init__(self) -> None:
        for name in ("cfr", "fmr", "aa", "csa"):
            _check_fraction(name, getattr(self, name))
        expected = compute_reliability(self.cfr, self.fmr, self.aa, self.csa)
        if abs(self.reliability - expected) > 1e-9:
            raise ValueError(
                f"reliability {self.reliability} inconsistent with parts (expected {expected})"
            )

    def to_dict(self) -> dict:
        return {
            "site_id": self.site_id,
            "cfr": self.cfr,
            "fmr": self.fmr,
            "aa": self.aa,
            "csa": self.csa,
            "reliability": self.reliability,
            "aa_degenerate": self.aa_degenerate,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReliabilityRecord":
        return cls(
            site_id=data["site_id"],
            cfr=data["cfr"],
            fmr=data["fmr"],
            aa=data["aa"],
            csa=data["csa"],
            reliability=data["reliability"],
            aa_degenerate=bool(data.get("aa_degenerate", False)),
        )


def score_annotation(annotation: GroundTruthAnnotation) -> ReliabilityRecord:
    """Derive the four sub-metrics and the composite score for one site."""
    cfr = compute_cfr(annotation.judgments)
    fmr = compute_fmr(annotation.true_features, annotation.predicted_features)
    aa, degenerate = compute_aa(annotation.judgments)
    csa = compute_csa(annotation.judgments)
    return ReliabilityRecord(
        site_id=annotation.site_id,
        cfr=cfr,
        fmr=fmr,
        aa=aa,
        csa=csa,
        reliability=compute_reliability(cfr, fmr, aa, csa),
        aa_degenerate=degenerate,
    )


@dataclass(frozen=True)
class MetricSummary:
    """Mean and standard error of one sub-metric across sites."""

    mean: float
    se: float
    count: int


def _summarize(values: list[float]) -> MetricSummary:
    if not values:
        return MetricSummary(mean=0.0, se=0.0, count=0)
    mean = statistics.fmean(values)
    se = statistics.stdev(values) / math.sqrt(len(values)) if len(values) > 1 else 0.0
    return MetricSummary(mean=mean, se=se, count=len(values))


@dataclass(frozen=True)
class ModelReport:
    """Cross-site summary: median composite score and μ ± SE per sub-metric."""

    sites: int
    median_reliability: float
    cfr: MetricSummary
    fmr: MetricSummary
    aa: MetricSummary
    csa: MetricSummary
    aa_degenerate_sites: int = 0

    def to_dict(self, round_to: int | None = None) -> dict:
        def shape(value: float) -> float:
            return round(value, round_to) if round_to is not None else value

        data = {
            "sites": self.sites,
            "median_reliability": shape(self.median_reliability),
            "aa_degenerate_sites": self.aa_degenerate_sites,
        }
        for name in ("cfr", "fmr", "aa", "csa"):
            summary: MetricSummary = getattr(self, name)
            data[name] = {
                "mean": shape(summary.mean),
                "se": shape(summary.se),
                "count": summary.count,
            }
        return data


def aggregate_model_report(records: list[ReliabilityRecord]) -> ModelReport:
    """Summarize per-site records the way a model comparison table needs.

    AA values flagged degenerate are excluded from the AA mean/SE (their
    0.0 is a placeholder, not a measurement); everything else includes
    every record.
    """
    if not records:
        raise ValueError("cannot aggregate zero records")
    aa_values = [r.aa for r in records if not r.aa_degenerate]
    return ModelReport(
        sites=len(records),
        median_reliability=statistics.median(r.reliability for r in records),
        cfr=_summarize([r.cfr for r in records]),
        fmr=_summarize([r.fmr for r in records]),
        aa=_summarize(aa_values),
        csa=_summarize([r.csa for r in records]),
        aa_degenerate_sites=sum(1 for r in records if r.aa_degenerate),
    )
