"""Model runtime clients.

The pipeline talks to "a runtime" through a tiny protocol: send a prompt
with decoding options, get text (hopefully JSON) back. Two implementations
ship: `HttpRuntime` for a local inference server speaking the common
`/api/generate` wire format, and `MockRuntime`, which replays canned
responses from a fixture directory and is a first-class mode — the entire
acceptance suite runs on it.
"""

from __future__ import annotations

import json
import logging
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import httpx

log = logging.getLogger(__name__)

# 4-bit quantized 3B instruct model; small enough to load on demand.
DEFAULT_MODEL = "llama3.2:3b-instruct-q4_K_M"
DEFAULT_RUNTIME_URL = "http://127.0.0.1:11434"


class RuntimeUnavailable(Exception):
    """The model runtime cannot be reached or refused the request."""


@dataclass(frozen=True)
class RuntimeRequest:
    model: str
    prompt: str
    temperature: float = 0.0
    max_tokens: int = 512


@dataclass(frozen=True)
class RuntimeResponse:
    text: str
    payload: dict | list | None
    generate_ms: float
    load_ms: float = 0.0


class LlmRuntime(Protocol):
    def generate(self, request: RuntimeRequest) -> RuntimeResponse: ...

    def health(self) -> bool: ...


_BRACES_RE = re.compile(r"\{.*\}", re.DOTALL)


def parse_json_payload(text: str) -> dict | list | None:
    """Parse model output as JSON, salvaging the outermost object if the
    model wrapped it in prose."""
    try:
        return json.loads(text)
    except (json.JSONDecodeError, ValueError):
        pass
    match = _BRACES_RE.search(text)
    if match:
        try:
            return json.loads(match.group())
        except (json.JSONDecodeError, ValueError):
            return None
    return None


class HttpRuntime:
    """Client for a local inference server (`POST {base}/api/generate`).

    The server may load the model on demand; the reported load duration is
    surfaced on the response so callers can account for cold starts.
    """

    def __init__(
        self,
        base_url: str = DEFAULT_RUNTIME_URL,
        model: str = DEFAULT_MODEL,
        timeout_s: float = 120.0,
        client: httpx.Client | None = None,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.timeout_s = timeout_s
        self._client = client or httpx.Client(timeout=timeout_s)

    def generate(self, request: RuntimeRequest) -> RuntimeResponse:
        body = {
            "model": request.model or self.model,
            "prompt": request.prompt,
            "stream": False,
            "format": "json",
            "options": {
                "temperature": request.temperature,
                "num_predict": request.max_tokens,
            },
        }
        started = time.perf_counter()
        try:
            response = self._client.post(f"{self.base_url}/api/generate", json=body)
        except httpx.HTTPError as exc:
            raise RuntimeUnavailable(f"model runtime at {self.base_url}: {exc}") from exc
        if response.status_code != 200:
            raise RuntimeUnavailable(
                f"model runtime returned HTTP {response.status_code}: {response.text[:200]}"
            )
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        data = response.json()
        text = data.get("response", "")
        load_ms = float(data.get("load_duration", 0)) / 1e6  # reported in ns
        generate_ms = float(data.get("total_duration", 0)) / 1e6 or elapsed_ms
        return RuntimeResponse(
            text=text,
            payload=parse_json_payload(text),
            generate_ms=generate_ms,
            load_ms=load_ms,
        )

    def health(self) -> bool:
        try:
            response = self._client.get(f"{self.base_url}/api/tags", timeout=2.0)
        except httpx.HTTPError:
            return False
        return response.status_code == 200

    def close(self) -> None:
        self._client.close()


_PAGE_LINE_RE = re.compile(r"^Page: (.*)$", re.MULTILINE)
_ELEMENT_LINE_RE = re.compile(r"^Element: (\d+)$", re.MULTILINE)
_FEATURE_ID_LINE_RE = re.compile(r"^Feature id: (.*)$", re.MULTILINE)
_URL_BLOCK_RE = re.compile(r"\[ELEMENT 0 START\]\n([^\n]*)\n\[ELEMENT 0 END\]")


@dataclass
class MockCall:
    url: str
    kind: str  # "prompt1" or "prompt2"
    key: str | None  # "element:feature" for prompt2


class MockRuntime:
    """Replays canned responses from one JSON file per page.

    File shape::

        {
          "url": "https://...",
          "prompt1": {"findings": [{"element": 1, "feature": "..."}]},
          "prompt2": {"1:typos": {"artifacts": ["acount"]}}
        }

    Lookup is stateless: the page URL and, for artifact prompts, the
    element/feature key are read back out of the prompt itself, so replay
    is a pure function of the prompt text. Unknown pages and missing keys
    fall back to empty findings/artifacts.
    """

    def __init__(self, fixture_dir: str | Path) -> None:
        self.fixture_dir = Path(fixture_dir)
        if not self.fixture_dir.is_dir():
            raise FileNotFoundError(f"mock runtime fixture dir not found: {fixture_dir}")
        self._pages: dict[str, dict] = {}
        for path in sorted(self.fixture_dir.glob("*.json")):
            data = json.loads(path.read_text(encoding="utf-8"))
            self._pages[data["url"]] = data
        self._lock = threading.Lock()
        self.calls: list[MockCall] = []

    def generate(self, request: RuntimeRequest) -> RuntimeResponse:
        call = self._classify(request.prompt)
        with self._lock:
            self.calls.append(call)
        page = self._pages.get(call.url, {})
        if call.kind == "prompt1":
            payload = page.get("prompt1", {"findings": []})
        else:
            payload = page.get("prompt2", {}).get(call.key, {"artifacts": []})
        text = json.dumps(payload)
        return RuntimeResponse(text=text, payload=payload, generate_ms=0.1)

    @staticmethod
    def _classify(prompt: str) -> MockCall:
        feature = _FEATURE_ID_LINE_RE.search(prompt)
        if feature:
            element = _ELEMENT_LINE_RE.search(prompt)
            url = _PAGE_LINE_RE.search(prompt)
            if element is None or url is None:
                raise ValueError("artifact prompt is missing its header lines")
            return MockCall(
                url=url.group(1),
                kind="prompt2",
                key=f"{element.group(1)}:{feature.group(1)}",
            )
        url_block = _URL_BLOCK_RE.search(prompt)
        if url_block is None:
            raise ValueError("prompt carries no page URL")
        return MockCall(url=url_block.group(1), kind="prompt1", key=None)

    def health(self) -> bool:
        return True

    def reset_calls(self) -> None:
        with self._lock:
            self.calls.clear()
