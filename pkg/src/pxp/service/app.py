"""Loopback HTTP daemon serving explainable warnings.

Endpoints (bodies documented in the repo README, bit-exactly):

- ``POST /v1/explain`` — run the full workflow for one captured page.
- ``GET /v1/status``  — counters, latency distribution, peak memory.
- ``GET /v1/health``  — runtime/renderer health for the extension's probe.

Access control is double-layered: the server binds to loopback, and when a
shared token is configured (env ``PXP_TOKEN``) every request must present it
in the ``X-PXP-Token`` header. Status codes: 400 schema violation, 401 bad
token, 403 non-loopback peer, 429 queue full, 503 runtime or renderer
unavailable, 504 latency budget exceeded.

Concurrency: requests are accepted in parallel but the LLM stage and the
render stage each run single-flight behind a FIFO gate, so one stuck page
cannot starve the queue and the memory-bound model is never invoked twice
at once. Every request that reaches the explain endpoint terminates in
exactly one stats bucket (ok / no_indicators / errors), so the
``requests == ok + no_indicators + errors`` conservation holds over any mix.
"""

from __future__ import annotations

import logging
import time

import anyio.to_thread
from dataclasses import dataclass, field
from typing import Literal

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, ValidationError

import pxp
from pxp.capture import CapturedPage
from pxp.catalog import FeatureCatalog, default_catalog
from pxp.engine import analyze_page, render_warning
from pxp.pipeline import (
    DEFAULT_MODEL,
    ExplainOptions,
    InvalidModelOutput,
    LlmRuntime,
    NoIndicatorsFound,
    RuntimeUnavailable,
)
from pxp.rendering import (
    PALETTE,
    BlockLayoutRenderer,
    RendererUnavailable,
    RenderTimeout,
    Viewport,
    payload_to_dict,
)
from pxp.service.gates import FifoGate, GateTimeout, QueueFull, ServiceStats

log = logging.getLogger(__name__)

DEFAULT_BUDGET_MS = 30_000
DEFAULT_MAX_QUEUE = 4

_LOOPBACK_HOSTS = {"127.0.0.1", "::1", "localhost", "testclient"}


class AuthFailed(Exception):
    pass


class BudgetExceeded(Exception):
    pass


class ExplainRequestModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    url: str
    html: str
    provider: str = "manual"
    mode: Literal["override", "on_demand"] = "override"


@dataclass
class ServiceConfig:
    catalog: FeatureCatalog = field(default_factory=default_catalog)
    runtime: LlmRuntime = None  # type: ignore[assignment]
    renderer: object = field(default_factory=BlockLayoutRenderer)
    viewport: Viewport = field(default_factory=Viewport)
    palette: tuple[str, ...] = PALETTE
    model: str = DEFAULT_MODEL
    budget_ms: int = DEFAULT_BUDGET_MS
    max_queue: int = DEFAULT_MAX_QUEUE
    token: str | None = None
    render_timeout_s: float = 10.0


def _error_body(status: str, detail: str) -> dict:
    return {"status": status, "payload": None, "error_detail": detail}


def create_app(config: ServiceConfig) -> FastAPI:
    if config.runtime is None:
        raise ValueError("ServiceConfig.runtime is required")

    app = FastAPI(title="pxp explain service", version=pxp.__version__, docs_url=None)
    stats = ServiceStats()
    llm_gate = FifoGate("llm", max_depth=config.max_queue)
    render_gate = FifoGate("render", max_depth=None)
    options = ExplainOptions(model=config.model)

    app.state.stats = stats
    app.state.config = config
    app.state.llm_gate = llm_gate
    app.state.render_gate = render_gate

    @app.exception_handler(RequestValidationError)
    async def validation_to_400(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content=_error_body("error", str(exc)))

    def _check_peer(request: Request) -> None:
        client = request.client
        if client is not None and client.host not in _LOOPBACK_HOSTS:
            raise PermissionError(f"non-loopback peer {client.host}")

    def _check_token(request: Request) -> None:
        if config.token is None:
            return
        if request.headers.get("X-PXP-Token") != config.token:
            raise AuthFailed("missing or wrong X-PXP-Token header")

    @app.post("/v1/explain")
    async def explain_endpoint(request: Request):
        body = await request.body()
        return await anyio.to_thread.run_sync(_explain_sync, request, body)

    def _explain_sync(request: Request, body_bytes: bytes):
        started = time.perf_counter()
        deadline = started + config.budget_ms / 1000.0

        def remaining() -> float:
            left = deadline - time.perf_counter()
            if left <= 0:
                raise BudgetExceeded(f"budget of {config.budget_ms} ms exceeded")
            return left

        def finish(outcome: str, status_code: int, body: dict) -> JSONResponse:
            stats.record(outcome, (time.perf_counter() - started) * 1000.0)
            return JSONResponse(status_code=status_code, content=body)

        try:
            _check_peer(request)
            _check_token(request)
            model = ExplainRequestModel.model_validate_json(body_bytes)
            page = CapturedPage(url=model.url, html=model.html, provider=model.provider)

            with llm_gate.acquire(timeout_s=remaining()):
                remaining()
                analysis = analyze_page(page, config.catalog, config.runtime, options)
            with render_gate.acquire(timeout_s=remaining()):
                payload = render_warning(
                    page,
                    analysis,
                    config.catalog,
                    config.renderer,
                    viewport=config.viewport,
                    render_timeout_s=min(config.render_timeout_s, remaining()),
                    palette=config.palette,
                )
            return finish(
                "ok",
                200,
                {"status": "ok", "payload": payload_to_dict(payload), "error_detail": None},
            )
        except NoIndicatorsFound as exc:
            return finish(
                "no_indicators",
                200,
                {"status": "no_indicators", "payload": None, "error_detail": str(exc)},
            )
        except PermissionError as exc:
            return finish("errors", 403, _error_body("error", str(exc)))
        except AuthFailed as exc:
            return finish("errors", 401, _error_body("error", str(exc)))
        except (ValidationError, ValueError) as exc:
            return finish("errors", 400, _error_body("error", str(exc)))
        except QueueFull as exc:
            return finish("errors", 429, _error_body("error", str(exc)))
        except (RuntimeUnavailable, RendererUnavailable) as exc:
            return finish("errors", 503, _error_body("error", str(exc)))
        except (BudgetExceeded, GateTimeout, RenderTimeout) as exc:
            return finish("errors", 504, _error_body("error", str(exc)))
        except InvalidModelOutput as exc:
            return finish("errors", 500, _error_body("error", f"model output invalid: {exc}"))
        except Exception as exc:  # crash isolation: state stays consistent
            log.exception("explain failed")
            return finish("errors", 500, _error_body("error", f"internal error: {exc}"))

    @app.get("/v1/status")
    async def status_endpoint(request: Request):
        try:
            _check_peer(request)
            _check_token(request)
        except PermissionError as exc:
            return JSONResponse(status_code=403, content=_error_body("error", str(exc)))
        except AuthFailed as exc:
            return JSONResponse(status_code=401, content=_error_body("error", str(exc)))
        snapshot = stats.snapshot()
        snapshot["model"] = config.model
        snapshot["queue_depth"] = llm_gate.depth()
        return snapshot

    @app.get("/v1/health")
    async def health_endpoint(request: Request):
        try:
            _check_peer(request)
            _check_token(request)
        except PermissionError as exc:
            return JSONResponse(status_code=403, content=_error_body("error", str(exc)))
        except AuthFailed as exc:
            return JSONResponse(status_code=401, content=_error_body("error", str(exc)))
        runtime_ok = bool(config.runtime.health())
        renderer_ok = bool(getattr(config.renderer, "health", lambda: True)())
        body = {
            "status": "healthy" if runtime_ok and renderer_ok else "degraded",
            "runtime": runtime_ok,
            "renderer": renderer_ok,
            "model": config.model,
            "version": pxp.__version__,
        }
        return JSONResponse(status_code=200 if runtime_ok and renderer_ok else 503, content=body)

    return app
