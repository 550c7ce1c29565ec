"""Regenerate the golden files for the fixture corpus.

Runs the engine over ``tests/fixtures/corpus`` with the recorded mock
runtime and the deterministic block-layout renderer, then writes:

- ``tests/golden/payloads/<site>.json`` — the canonical JSON of each
  warning payload's golden view (screenshots reduced to dimensions plus
  highlight-color histogram; timestamps and timings dropped);
- ``tests/golden/replay_report.json`` — the run-independent slice of the
  replay report (coverage, outcome counts, per-site indicator counts).

Run from the repository root after intentionally changing engine
behavior, then review the diff:

    python3 tools/generate_goldens.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent
CORPUS_DIR = REPO_ROOT / "tests" / "fixtures" / "corpus"
MOCK_DIR = REPO_ROOT / "tests" / "fixtures" / "mock_runtime"
GOLDEN_DIR = REPO_ROOT / "tests" / "golden"


def regenerate() -> int:
    from fastapi.testclient import TestClient

    from pxp.capture import CapturedPage
    from pxp.catalog import default_catalog
    from pxp.engine import generate_warning
    from pxp.evaluation.replay import replay_corpus
    from pxp.pipeline import MockRuntime, NoIndicatorsFound
    from pxp.rendering import BlockLayoutRenderer, canonical_json, golden_view
    from pxp.service import ServiceConfig, create_app

    catalog = default_catalog()
    runtime = MockRuntime(MOCK_DIR)
    renderer = BlockLayoutRenderer()

    payload_dir = GOLDEN_DIR / "payloads"
    payload_dir.mkdir(parents=True, exist_ok=True)
    for stale in payload_dir.glob("*.json"):
        stale.unlink()

    written = 0
    for snapshot_path in sorted(CORPUS_DIR.glob("*.json")):
        snapshot = json.loads(snapshot_path.read_text(encoding="utf-8"))
        page = CapturedPage(
            url=snapshot["url"],
            html=snapshot["html"],
            provider=snapshot.get("provider", "manual"),
        )
        try:
            payload = generate_warning(page, catalog, runtime, renderer)
        except NoIndicatorsFound:
            print(f"{snapshot_path.stem}: no_indicators (no payload golden)")
            continue
        golden_bytes = canonical_json(golden_view(payload))
        (payload_dir / f"{snapshot_path.stem}.json").write_bytes(golden_bytes)
        written += 1
        print(f"{snapshot_path.stem}: {len(payload.features)} features, "
              f"{len(golden_bytes)} golden bytes")

    app = create_app(ServiceConfig(runtime=MockRuntime(MOCK_DIR)))
    report = replay_corpus(CORPUS_DIR, "http://testserver", client=TestClient(app))
    report_path = GOLDEN_DIR / "replay_report.json"
    report_path.write_text(
        json.dumps(report.stable_view(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"replay report: coverage={report.coverage}, "
          f"median_indicators={report.median_indicators}")
    print(f"wrote {written} payload goldens and {report_path.relative_to(REPO_ROOT)}")
    return 0


if __name__ == "__main__":
    sys.exit(regenerate())
