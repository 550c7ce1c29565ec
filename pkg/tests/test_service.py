"""Tests for the loopback HTTP service.

Covers the response envelope, the full status-code matrix (400/401/403/
429/503/504/500), FIFO backpressure, crash isolation, the stats
conservation law, and the serve CLI's option parsing.
"""

from __future__ import annotations

import base64
import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

import pxp
from pxp.pipeline.runtime import (
    MockRuntime,
    RuntimeResponse,
    RuntimeUnavailable,
)
from pxp.rendering.highlight import PALETTE
from pxp.rendering.screenshot import BlockLayoutRenderer, RendererUnavailable
from pxp.service import ServiceConfig, create_app
from pxp.service.cli import main as serve_main
from pxp.service.cli import parse_palette, pick_renderer

PAGE_URL = "https://rnetflix-billing.example.test/login"
PAGE_HTML = (
    "<h1>Acount Suspended</h1>"
    "<p>Your acount was flaged. Verify within 24 hours or lose access.</p>"
    '<form action="/verify"><input type="password" name="pw"></form>'
)
# element ids by document order: 1=h1, 2=p, 3=form, 4=input

CLEAN_URL = "https://news.example.test/article"
CLEAN_HTML = "<h1>Weather</h1><p>Sunny all week, back to rain on Monday.</p>"

FIXTURE = {
    "url": PAGE_URL,
    "prompt1": {
        "findings": [
            {"element": 2, "feature": "Spelling errors and typos"},
            {"element": 3, "feature": "Requests for sensitive/inappropriate information"},
        ]
    },
    "prompt2": {
        "2:typos": {"artifacts": ["acount", "flaged"]},
        "3:sensitive-info": {"artifacts": ["password"]},
    },
}


@pytest.fixture()
def fixture_dir(tmp_path):
    mock_dir = tmp_path / "mock_runtime"
    mock_dir.mkdir()
    (mock_dir / "page1.json").write_text(json.dumps(FIXTURE), encoding="utf-8")
    return mock_dir


def make_app(fixture_dir, **overrides):
    runtime = overrides.pop("runtime", None)
    if runtime is None:
        runtime = MockRuntime(fixture_dir)
    config = ServiceConfig(runtime=runtime, **overrides)
    return create_app(config)


def post_page(client, url=PAGE_URL, html=PAGE_HTML, headers=None, **extra):
    return client.post("/v1/explain", json={"url": url, "html": html, **extra}, headers=headers)


class DelegatingRuntime:
    """Wrap the fixture-backed mock to fault-inject around it."""

    def __init__(self, inner):
        self.inner = inner

    def generate(self, request):
        return self.inner.generate(request)

    def health(self):
        return self.inner.health()


class SlowRuntime(DelegatingRuntime):
    def __init__(self, inner, delay_s):
        super().__init__(inner)
        self.delay_s = delay_s

    def generate(self, request):
        time.sleep(self.delay_s)
        return self.inner.generate(request)


class DownRuntime:
    def generate(self, request):
        raise RuntimeUnavailable("connection refused")

    def health(self):
        return False


class GarbageRuntime:
    """Returns prose with no JSON object, on every attempt."""

    def generate(self, request):
        return RuntimeResponse(text="the page looks fine to me", payload=None, generate_ms=0.1)

    def health(self):
        return True


class ExplodeOnceRuntime(DelegatingRuntime):
    def __init__(self, inner):
        super().__init__(inner)
        self.exploded = False

    def generate(self, request):
        if not self.exploded:
            self.exploded = True
            raise RuntimeError("kaboom")
        return self.inner.generate(request)


class UnhealthyRuntime(DelegatingRuntime):
    def health(self):
        return False


class BoomRenderer:
    def render(self, annotated_html, viewport):
        raise RendererUnavailable("no backend")

    def health(self):
        return False


class ForcePeer:
    """ASGI wrapper that rewrites the client address seen by the app."""

    def __init__(self, app, host):
        self.app = app
        self.host = host

    async def __call__(self, scope, receive, send):
        if scope["type"] == "http":
            scope = dict(scope)
            scope["client"] = (self.host, 55555)
        await self.app(scope, receive, send)


class TestExplainEndpoint:
    def test_ok_envelope(self, fixture_dir):
        client = TestClient(make_app(fixture_dir))
        resp = post_page(client)
        assert resp.status_code == 200
        data = resp.json()
        assert data["status"] == "ok"
        assert data["error_detail"] is None

        payload = data["payload"]
        assert payload["url"] == PAGE_URL
        png = base64.b64decode(payload["screenshot"]["png_base64"])
        assert png.startswith(b"\x89PNG")
        assert payload["screenshot"]["width"] == 1280
        assert payload["screenshot"]["height"] == 1024
        assert "generated_at" in payload
        assert set(payload["timings_ms"]) == {
            "parse_ms",
            "llm_ms",
            "render_ms",
            "total_ms",
            "runtime_calls",
        }

        first, second = payload["features"]
        assert first["element_id"] == 2
        assert first["feature_id"] == "typos"
        assert first["name"] == "Spelling errors and typos"
        assert first["color"] == PALETTE[0]
        assert first["artifacts"] == ["acount", "flaged"]
        assert "acount" in first["explanation"]
        assert first["snippet"] == (
            "<p>Your acount was flaged. Verify within 24 hours or lose access.</p>"
        )
        assert second["element_id"] == 3
        assert second["feature_id"] == "sensitive-info"
        assert second["color"] == PALETTE[1]

    def test_no_indicators(self, fixture_dir):
        client = TestClient(make_app(fixture_dir))
        resp = post_page(client, url=CLEAN_URL, html=CLEAN_HTML)
        assert resp.status_code == 200
        data = resp.json()
        assert data["status"] == "no_indicators"
        assert data["payload"] is None

    def test_both_modes_accepted(self, fixture_dir):
        client = TestClient(make_app(fixture_dir))
        assert post_page(client, mode="override").status_code == 200
        assert post_page(client, mode="on_demand").status_code == 200

    def test_known_provider_accepted(self, fixture_dir):
        client = TestClient(make_app(fixture_dir))
        assert post_page(client, provider="gsb").status_code == 200

    @pytest.mark.parametrize(
        "body",
        [
            {"url": PAGE_URL},  # html missing
            {"html": PAGE_HTML},  # url missing
            {"url": PAGE_URL, "html": PAGE_HTML, "surprise": 1},  # unknown field
            {"url": PAGE_URL, "html": 5},  # wrong type
            {"url": "not-a-url", "html": PAGE_HTML},  # relative url
            {"url": "https://x.test/a\nb", "html": PAGE_HTML},  # control char in url
            {"url": PAGE_URL, "html": PAGE_HTML, "mode": "sometimes"},  # bad enum
            {"url": PAGE_URL, "html": PAGE_HTML, "provider": "wild-guess"},
        ],
        ids=[
            "html-missing",
            "url-missing",
            "extra-field",
            "html-not-string",
            "relative-url",
            "newline-url",
            "bad-mode",
            "bad-provider",
        ],
    )
    def test_schema_violations_yield_400(self, fixture_dir, body):
        client = TestClient(make_app(fixture_dir))
        resp = client.post("/v1/explain", json=body)
        assert resp.status_code == 400
        data = resp.json()
        assert data["status"] == "error"
        assert data["payload"] is None
        assert data["error_detail"]

    def test_non_json_body_yields_400(self, fixture_dir):
        client = TestClient(make_app(fixture_dir))
        resp = client.post(
            "/v1/explain",
            content=b"{definitely not json",
            headers={"Content-Type": "application/json"},
        )
        assert resp.status_code == 400


class TestAuth:
    def test_token_checked_when_configured(self, fixture_dir):
        client = TestClient(make_app(fixture_dir, token="hunter2"))
        assert post_page(client).status_code == 401
        assert post_page(client, headers={"X-PXP-Token": "wrong"}).status_code == 401
        assert post_page(client, headers={"X-PXP-Token": "hunter2"}).status_code == 200
        assert client.get("/v1/status").status_code == 401
        assert client.get("/v1/health").status_code == 401
        assert client.get("/v1/status", headers={"X-PXP-Token": "hunter2"}).status_code == 200

    def test_token_disabled_when_unset(self, fixture_dir):
        client = TestClient(make_app(fixture_dir))
        assert post_page(client).status_code == 200
        assert client.get("/v1/status").status_code == 200

    def test_non_loopback_peer_rejected(self, fixture_dir):
        app = make_app(fixture_dir)
        remote = TestClient(ForcePeer(app, "203.0.113.9"))
        assert post_page(remote).status_code == 403
        assert remote.get("/v1/status").status_code == 403
        assert remote.get("/v1/health").status_code == 403
        # the same app still serves loopback traffic
        assert post_page(TestClient(app)).status_code == 200


class TestBackpressure:
    def test_queue_full_yields_429(self, fixture_dir):
        app = make_app(fixture_dir, max_queue=1)
        client = TestClient(app)
        with app.state.llm_gate.acquire(timeout_s=1.0):
            resp = post_page(client)
        assert resp.status_code == 429
        assert resp.json()["status"] == "error"
        # after the gate frees up the same request goes through
        assert post_page(client).status_code == 200

    def test_budget_exceeded_yields_504(self, fixture_dir):
        slow = SlowRuntime(MockRuntime(fixture_dir), delay_s=0.4)
        client = TestClient(make_app(fixture_dir, runtime=slow, budget_ms=150))
        resp = post_page(client)
        assert resp.status_code == 504
        assert "budget" in resp.json()["error_detail"]

    def test_gate_wait_beyond_budget_yields_504(self, fixture_dir):
        app = make_app(fixture_dir, budget_ms=300)
        client = TestClient(app)
        release = threading.Event()

        def hold_renderer():
            with app.state.render_gate.acquire(timeout_s=1.0):
                release.wait(5.0)

        holder = threading.Thread(target=hold_renderer)
        holder.start()
        time.sleep(0.05)
        try:
            resp = post_page(client)
        finally:
            release.set()
            holder.join()
        assert resp.status_code == 504
        assert "render" in resp.json()["error_detail"]

    def test_concurrent_requests_all_complete(self, fixture_dir):
        app = make_app(fixture_dir, max_queue=16)

        def one_request(_):
            return post_page(TestClient(app)).status_code

        with ThreadPoolExecutor(max_workers=6) as pool:
            codes = list(pool.map(one_request, range(6), timeout=60))
        assert codes == [200] * 6
        snapshot = app.state.stats.snapshot()
        assert snapshot["requests"] == snapshot["ok"] == 6
        assert app.state.llm_gate.depth() == 0


class TestFailureMapping:
    def test_runtime_down_yields_503(self, fixture_dir):
        client = TestClient(make_app(fixture_dir, runtime=DownRuntime()))
        resp = post_page(client)
        assert resp.status_code == 503
        assert "connection refused" in resp.json()["error_detail"]

    def test_renderer_down_yields_503(self, fixture_dir):
        client = TestClient(make_app(fixture_dir, renderer=BoomRenderer()))
        resp = post_page(client)
        assert resp.status_code == 503

    def test_unparseable_model_output_yields_500(self, fixture_dir):
        client = TestClient(make_app(fixture_dir, runtime=GarbageRuntime()))
        resp = post_page(client)
        assert resp.status_code == 500
        assert "model output invalid" in resp.json()["error_detail"]

    def test_crash_is_isolated_to_one_request(self, fixture_dir):
        app = make_app(fixture_dir, runtime=ExplodeOnceRuntime(MockRuntime(fixture_dir)))
        client = TestClient(app)
        first = post_page(client)
        assert first.status_code == 500
        assert "internal error" in first.json()["error_detail"]
        # the service keeps working and its gates are clean
        assert post_page(client).status_code == 200
        assert app.state.llm_gate.depth() == 0
        snapshot = app.state.stats.snapshot()
        assert (snapshot["errors"], snapshot["ok"]) == (1, 1)


class TestStatsAndStatus:
    def test_conservation_over_mixed_outcomes(self, fixture_dir):
        app = make_app(fixture_dir, token="tok", max_queue=1)
        client = TestClient(app)
        remote = TestClient(ForcePeer(app, "198.51.100.7"))
        good = {"X-PXP-Token": "tok"}

        assert post_page(client, headers=good).status_code == 200
        assert post_page(client, headers=good).status_code == 200
        assert post_page(client, url=CLEAN_URL, html=CLEAN_HTML, headers=good).status_code == 200
        assert post_page(client).status_code == 401
        assert client.post("/v1/explain", json={"url": PAGE_URL}, headers=good).status_code == 400
        with app.state.llm_gate.acquire(timeout_s=1.0):
            assert post_page(client, headers=good).status_code == 429
        assert post_page(remote, headers=good).status_code == 403

        status = client.get("/v1/status", headers=good)
        assert status.status_code == 200
        data = status.json()
        assert data["requests"] == 7
        assert data["ok"] == 2
        assert data["no_indicators"] == 1
        assert data["errors"] == 4
        assert data["requests"] == data["ok"] + data["no_indicators"] + data["errors"]

    def test_status_reports_operational_fields(self, fixture_dir):
        app = make_app(fixture_dir)
        client = TestClient(app)
        post_page(client)
        data = client.get("/v1/status").json()
        assert data["model"]
        assert data["queue_depth"] == 0
        assert data["uptime_s"] >= 0
        assert data["peak_rss_mb"] > 0
        assert data["latency_ms"]["median"] > 0
        assert data["latency_ms"]["p95"] >= data["latency_ms"]["median"]

    def test_status_reads_do_not_count_as_requests(self, fixture_dir):
        client = TestClient(make_app(fixture_dir))
        post_page(client)
        client.get("/v1/status")
        client.get("/v1/health")
        assert client.get("/v1/status").json()["requests"] == 1


class TestHealth:
    def test_healthy(self, fixture_dir):
        client = TestClient(make_app(fixture_dir))
        resp = client.get("/v1/health")
        assert resp.status_code == 200
        data = resp.json()
        assert data["status"] == "healthy"
        assert data["runtime"] is True
        assert data["renderer"] is True
        assert data["version"] == pxp.__version__

    def test_degraded_runtime(self, fixture_dir):
        runtime = UnhealthyRuntime(MockRuntime(fixture_dir))
        client = TestClient(make_app(fixture_dir, runtime=runtime))
        resp = client.get("/v1/health")
        assert resp.status_code == 503
        assert resp.json() == {
            "status": "degraded",
            "runtime": False,
            "renderer": True,
            "model": resp.json()["model"],
            "version": pxp.__version__,
        }

    def test_degraded_renderer(self, fixture_dir):
        client = TestClient(make_app(fixture_dir, renderer=BoomRenderer()))
        resp = client.get("/v1/health")
        assert resp.status_code == 503
        assert resp.json()["renderer"] is False


class TestServeCli:
    def test_parse_palette_roundtrip(self):
        assert parse_palette(",".join(PALETTE)) == PALETTE
        assert parse_palette(" #111111 , #222222,#333333,#444444 ")[0] == "#111111"

    @pytest.mark.parametrize(
        "spec",
        [
            "#111111,#222222,#333333",  # too few
            "#111111,#222222,#333333,#444444,#555555",  # too many
            "#111111,#222222,#333333,not-a-color",
            "#111111,#111111,#222222,#333333",  # duplicates
        ],
    )
    def test_parse_palette_rejects(self, spec):
        import click

        with pytest.raises(click.BadParameter):
            parse_palette(spec)

    def test_pick_renderer_explicit_block(self):
        assert isinstance(pick_renderer("block", mock=False), BlockLayoutRenderer)

    def test_pick_renderer_auto_prefers_block_for_mock(self):
        assert isinstance(pick_renderer("auto", mock=True), BlockLayoutRenderer)

    def test_pick_renderer_without_chromium(self, monkeypatch):
        import click

        class NoChromium:
            def health(self):
                return False

        monkeypatch.setattr("pxp.service.cli.ChromiumRenderer", NoChromium)
        with pytest.raises(click.ClickException):
            pick_renderer("chromium", mock=False)
        assert isinstance(pick_renderer("auto", mock=False), BlockLayoutRenderer)

    def test_cli_help_lists_options(self):
        result = CliRunner().invoke(serve_main, ["--help"])
        assert result.exit_code == 0
        for flag in ("--port", "--model", "--catalog", "--palette", "--budget-ms", "--mock-runtime"):
            assert flag in result.output

    def test_cli_rejects_bad_palette_before_serving(self):
        result = CliRunner().invoke(serve_main, ["--palette", "#111111,#222222"])
        assert result.exit_code != 0


def test_create_app_requires_runtime():
    with pytest.raises(ValueError):
        create_app(ServiceConfig())
