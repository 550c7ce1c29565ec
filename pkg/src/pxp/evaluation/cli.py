"""Evaluation command-line tools.

``pxp-eval`` scores annotation files, aggregates per-site records into a
model report, and replays snapshot corpora against a running service.
``pxp-annotate`` walks a predictions file interactively and records coder
judgments in the annotation format.

Tabular output rounds to two decimals; ``--json`` emits full precision
for machine consumption.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import click

from pxp.catalog import default_catalog
from pxp.evaluation.annotations import (
    AnnotationError,
    dump_annotations,
    load_annotations,
)
from pxp.evaluation.metrics import (
    GroundTruthAnnotation,
    PredictionJudgment,
    ReliabilityRecord,
    aggregate_model_report,
    score_annotation,
)
from pxp.evaluation.replay import ServiceUnreachable, replay_corpus


@click.group()
def eval_cli() -> None:
    """Score annotated warning runs and replay snapshot corpora."""


@eval_cli.command("score")
@click.argument("annotations_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--json", "as_json", is_flag=True, help="Print full-precision JSON records.")
@click.option(
    "--out",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Also write the JSON records to this file.",
)
def score_command(annotations_path: Path, as_json: bool, out: Path | None) -> None:
    """Compute per-site reliability records from an annotation file."""
    try:
        annotations = load_annotations(annotations_path)
    except AnnotationError as exc:
        raise click.ClickException(str(exc)) from exc
    if not annotations:
        raise click.ClickException(f"{annotations_path} holds no annotations")
    records = [score_annotation(a) for a in annotations]
    payload = [r.to_dict() for r in records]
    if out is not None:
        out.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    if as_json:
        click.echo(json.dumps(payload, indent=2))
        return
    click.echo(f"{'site':<12} {'CFR':>5} {'FMR':>5} {'AA':>6} {'CSA':>5} {'reliability':>11}")
    for record in records:
        star = "*" if record.aa_degenerate else " "
        click.echo(
            f"{record.site_id:<12} {record.cfr:>5.2f} {record.fmr:>5.2f} "
            f"{record.aa:>5.2f}{star} {record.csa:>5.2f} {record.reliability:>11.2f}"
        )
    if any(r.aa_degenerate for r in records):
        click.echo("* AA degenerate (no correct features); excluded from aggregation")


@eval_cli.command("report")
@click.argument("records_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--json", "as_json", is_flag=True, help="Print the full-precision report as JSON.")
def report_command(records_path: Path, as_json: bool) -> None:
    """Aggregate scored records (output of `score --out`) into a summary."""
    data = json.loads(records_path.read_text(encoding="utf-8"))
    if not isinstance(data, list) or not data:
        raise click.ClickException(f"{records_path} must hold a non-empty JSON list of records")
    try:
        records = [ReliabilityRecord.from_dict(item) for item in data]
    except (KeyError, TypeError, ValueError) as exc:
        raise click.ClickException(f"bad record in {records_path}: {exc}") from exc
    report = aggregate_model_report(records)
    if as_json:
        click.echo(json.dumps(report.to_dict(), indent=2))
        return
    click.echo(f"sites:              {report.sites}")
    click.echo(f"median reliability: {report.median_reliability:.2f}")
    for name in ("cfr", "fmr", "aa", "csa"):
        summary = getattr(report, name)
        click.echo(f"{name.upper():<4} (mu +/- SE):   {summary.mean:.2f} +/- {summary.se:.2f}")
    if report.aa_degenerate_sites:
        click.echo(f"AA excluded sites:  {report.aa_degenerate_sites} (degenerate)")


@eval_cli.command("replay")
@click.argument("snapshot_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--endpoint", default="http://127.0.0.1:8377", show_default=True)
@click.option(
    "--token",
    default=None,
    help="Shared service token (defaults to the PXP_TOKEN environment variable).",
)
@click.option("--json", "as_json", is_flag=True, help="Print the full report as JSON.")
@click.option(
    "--out",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Also write the JSON report to this file.",
)
def replay_command(
    snapshot_dir: Path, endpoint: str, token: str | None, as_json: bool, out: Path | None
) -> None:
    """Replay a snapshot corpus against a running service."""
    token = token if token is not None else os.environ.get("PXP_TOKEN")
    try:
        report = replay_corpus(snapshot_dir, endpoint, token=token)
    except (ServiceUnreachable, FileNotFoundError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    if out is not None:
        out.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    if as_json:
        click.echo(json.dumps(report.to_dict(), indent=2))
        return
    for result in report.results:
        click.echo(
            f"{result.site_id:<12} {result.status:<14} indicators={result.indicators} "
            f"latency={result.latency_ms:.0f}ms"
        )
    click.echo(f"sites:             {report.sites}")
    click.echo(f"coverage:          {report.coverage:.2f}")
    click.echo(f"median indicators: {report.median_indicators:.1f}")
    click.echo(f"median latency:    {report.median_latency_ms:.0f} ms")
    click.echo(f"peak service RSS:  {report.peak_rss_mb:.0f} MB")


def _ask_true_features(valid_ids: set[str]) -> frozenset[str]:
    while True:
        raw = click.prompt(
            "True features present (comma-separated ids, empty for none)",
            default="",
            show_default=False,
        )
        ids = frozenset(part.strip() for part in raw.split(",") if part.strip())
        unknown = ids - valid_ids
        if not unknown:
            return ids
        click.echo(f"unknown feature ids: {sorted(unknown)}; valid ids are {sorted(valid_ids)}")


@click.command()
@click.argument("predictions_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option(
    "--out",
    type=click.Path(dir_okay=False, path_type=Path),
    required=True,
    help="Annotation JSONL file to write.",
)
def annotate_cli(predictions_path: Path, out: Path) -> None:
    """Walk a predictions file (JSONL of {site_id, url, predictions}) and
    record coder judgments for each prediction."""
    valid_ids = {entry.feature_id for entry in default_catalog()}
    annotations: list[GroundTruthAnnotation] = []
    with predictions_path.open(encoding="utf-8") as handle:
        sites = [json.loads(line) for line in handle if line.strip()]
    if not sites:
        raise click.ClickException(f"{predictions_path} holds no prediction records")

    for site in sites:
        site_id = site["site_id"]
        click.echo(f"\n=== {site_id}  {site.get('url', '')}")
        true_features = _ask_true_features(valid_ids)
        judgments = []
        for index, prediction in enumerate(site.get("predictions", []), start=1):
            click.echo(f"--- prediction {index}: {prediction['feature_id']}")
            if prediction.get("explanation"):
                click.echo(f"    {prediction['explanation']}")
            if prediction.get("artifacts"):
                click.echo(f"    artifacts: {prediction['artifacts']}")
            feature_correct = click.confirm("    feature correct?", default=False)
            artifact_correct = (
                click.confirm("    artifacts correct?", default=False) if feature_correct else False
            )
            snippet_correct = click.confirm("    snippet correct?", default=False)
            judgments.append(
                PredictionJudgment(
                    feature_id=prediction["feature_id"],
                    feature_correct=feature_correct,
                    artifact_correct=artifact_correct,
                    snippet_correct=snippet_correct,
                )
            )
        annotations.append(
            GroundTruthAnnotation(
                site_id=site_id, true_features=true_features, judgments=tuple(judgments)
            )
        )

    dump_annotations(annotations, out)
    click.echo(f"\nwrote {len(annotations)} annotations to {out}")


if __name__ == "__main__":
    eval_cli()
