"""Snapshot-corpus replay against a running warning service.

A corpus is a directory of ``*.json`` snapshots, each holding the
``url``/``html`` pair captured when the page was live (plus an optional
``provider``). Replay posts every snapshot to ``POST /v1/explain`` —
sequentially, matching the service's single-flight contract — and
aggregates field-study style statistics: what fraction of flagged pages
got an explainable warning (coverage), how many indicators each warning
carried, how long requests took, and the service's peak memory.
"""

from __future__ import annotations

import json
import statistics
import time
from dataclasses import dataclass
from pathlib import Path

import httpx

__all__ = [
    "ServiceUnreachable",
    "Snapshot",
    "SnapshotResult",
    "CorpusReport",
    "load_snapshots",
    "replay_corpus",
]


class ServiceUnreachable(Exception):
    """The warning service did not answer at the given endpoint."""


@dataclass(frozen=True)
class Snapshot:
    site_id: str
    url: str
    html: str
    provider: str = "manual"


@dataclass(frozen=True)
class SnapshotResult:
    site_id: str
    url: str
    status: str  # "ok" | "no_indicators" | "error"
    indicators: int
    latency_ms: float
    detail: str | None = None


@dataclass(frozen=True)
class CorpusReport:
    sites: int
    warnings: int
    no_indicators: int
    errors: int
    coverage: float
    median_indicators: float
    median_latency_ms: float
    peak_rss_mb: float
    results: tuple[SnapshotResult, ...]

    def to_dict(self) -> dict:
        return {
            "sites": self.sites,
            "warnings": self.warnings,
            "no_indicators": self.no_indicators,
            "errors": self.errors,
            "coverage": self.coverage,
            "median_indicators": self.median_indicators,
            "median_latency_ms": self.median_latency_ms,
            "peak_rss_mb": self.peak_rss_mb,
            "results": [
                {
                    "site_id": r.site_id,
                    "url": r.url,
                    "status": r.status,
                    "indicators": r.indicators,
                    "latency_ms": r.latency_ms,
                    "detail": r.detail,
                }
                for r in self.results
            ],
        }

    def stable_view(self) -> dict:
        """The run-independent slice used for golden comparison (no
        latencies, no memory — those vary by machine)."""
        return {
            "sites": self.sites,
            "warnings": self.warnings,
            "no_indicators": self.no_indicators,
            "errors": self.errors,
            "coverage": self.coverage,
            "median_indicators": self.median_indicators,
            "indicators_by_site": {r.site_id: r.indicators for r in self.results},
            "status_by_site": {r.site_id: r.status for r in self.results},
        }


def load_snapshots(snapshot_dir: str | Path) -> list[Snapshot]:
    """Read all ``*.json`` snapshots, ordered by filename."""
    snapshot_dir = Path(snapshot_dir)
    if not snapshot_dir.is_dir():
        raise FileNotFoundError(f"snapshot directory {snapshot_dir} does not exist")
    snapshots = []
    for path in sorted(snapshot_dir.glob("*.json")):
        data = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(data, dict) or "url" not in data or "html" not in data:
            raise ValueError(f"{path.name}: snapshot needs 'url' and 'html' fields")
        snapshots.append(
            Snapshot(
                site_id=path.stem,
                url=data["url"],
                html=data["html"],
                provider=data.get("provider", "manual"),
            )
        )
    return snapshots


def _median(values: list[float]) -> float:
    return float(statistics.median(values)) if values else 0.0


def replay_corpus(
    snapshot_dir: str | Path,
    endpoint: str,
    token: str | None = None,
    request_timeout_s: float = 120.0,
    client: httpx.Client | None = None,
) -> CorpusReport:
    """Replay every snapshot and aggregate the outcomes.

    ``client`` lets callers inject a preconfigured HTTP client (tests use
    an in-process one); when omitted a real client is built for
    ``endpoint``. Requests run strictly sequentially.
    """
    snapshots = load_snapshots(snapshot_dir)
    headers = {"X-PXP-Token": token} if token else {}
    own_client = client is None
    if client is None:
        client = httpx.Client(base_url=endpoint, timeout=request_timeout_s)

    results: list[SnapshotResult] = []
    try:
        try:
            client.get("/v1/health", headers=headers)
        except httpx.HTTPError as exc:
            raise ServiceUnreachable(f"no service at {endpoint}: {exc}") from exc

        for snap in snapshots:
            body = {"url": snap.url, "html": snap.html, "provider": snap.provider}
            started = time.perf_counter()
            try:
                resp = client.post("/v1/explain", json=body, headers=headers)
            except httpx.HTTPError as exc:
                raise ServiceUnreachable(f"service dropped mid-replay: {exc}") from exc
            latency_ms = (time.perf_counter() - started) * 1000.0
            data = resp.json()
            status = data.get("status")
            if status == "ok":
                indicators = len(data["payload"]["features"])
                results.append(
                    SnapshotResult(snap.site_id, snap.url, "ok", indicators, latency_ms)
                )
            elif status == "no_indicators":
                results.append(
                    SnapshotResult(snap.site_id, snap.url, "no_indicators", 0, latency_ms)
                )
            else:
                results.append(
                    SnapshotResult(
                        snap.site_id,
                        snap.url,
                        "error",
                        0,
                        latency_ms,
                        detail=f"HTTP {resp.status_code}: {data.get('error_detail')}",
                    )
                )

        peak_rss_mb = 0.0
        try:
            status_resp = client.get("/v1/status", headers=headers)
            if status_resp.status_code == 200:
                peak_rss_mb = float(status_resp.json().get("peak_rss_mb", 0.0))
        except httpx.HTTPError:
            pass
    finally:
        if own_client:
            client.close()

    ok = [r for r in results if r.status == "ok"]
    return CorpusReport(
        sites=len(results),
        warnings=len(ok),
        no_indicators=sum(1 for r in results if r.status == "no_indicators"),
        errors=sum(1 for r in results if r.status == "error"),
        coverage=len(ok) / len(results) if results else 0.0,
        median_indicators=_median([float(r.indicators) for r in ok]),
        median_latency_ms=round(_median([r.latency_ms for r in results]), 2),
        peak_rss_mb=peak_rss_mb,
        results=tuple(results),
    )
