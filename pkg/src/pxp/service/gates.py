"""Single-flight FIFO gates and service statistics.

The model runtime and the renderer are each a scarce resource: exactly one
request may hold each at a time. `FifoGate` hands the resource to waiters
strictly in arrival order, with an optional depth cap (excess arrivals are
bounced immediately) and a wait deadline so a queued request can give up
when its latency budget runs out.
"""

from __future__ import annotations

import statistics
import threading
import time
from collections import deque
from contextlib import contextmanager

import psutil


class QueueFull(Exception):
    """Too many requests already waiting on the gate."""


class GateTimeout(Exception):
    """Gave up waiting for the gate within the deadline."""


class FifoGate:
    def __init__(self, name: str, max_depth: int | None = None) -> None:
        self.name = name
        self.max_depth = max_depth
        self._cond = threading.Condition()
        self._waiting: deque[object] = deque()
        self._active = False

    def depth(self) -> int:
        with self._cond:
            return len(self._waiting) + (1 if self._active else 0)

    @contextmanager
    def acquire(self, timeout_s: float):
        ticket = object()
        with self._cond:
            if (
                self.max_depth is not None
                and len(self._waiting) + (1 if self._active else 0) >= self.max_depth
            ):
                raise QueueFull(f"{self.name}: {self.max_depth} requests already queued")
            self._waiting.append(ticket)
            deadline = time.monotonic() + timeout_s
            try:
                while self._active or self._waiting[0] is not ticket:
                    remaining = deadline - time.monotonic()
                    if remaining <= 0:
                        raise GateTimeout(f"{self.name}: gave up after {timeout_s:.1f}s")
                    self._cond.wait(remaining)
                self._waiting.popleft()
                self._active = True
            except BaseException:
                if ticket in self._waiting:
                    self._waiting.remove(ticket)
                self._cond.notify_all()
                raise
        try:
            yield
        finally:
            with self._cond:
                self._active = False
                self._cond.notify_all()


def _percentile(values: list[float], fraction: float) -> float:
    ordered = sorted(values)
    index = min(len(ordered) - 1, max(0, round(fraction * (len(ordered) - 1))))
    return ordered[index]


class ServiceStats:
    """Thread-safe counters with the conservation guarantee

        requests == ok + no_indicators + errors

    — every request that reaches the explain endpoint lands in exactly one
    outcome bucket, including rejected ones (auth, schema, full queue),
    which count as errors."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._started = time.time()
        self.requests = 0
        self.ok = 0
        self.no_indicators = 0
        self.errors = 0
        self._latencies_ms: list[float] = []
        self._peak_rss = 0
        self._process = psutil.Process()

    def record(self, outcome: str, latency_ms: float) -> None:
        if outcome not in ("ok", "no_indicators", "errors"):
            raise ValueError(f"unknown outcome {outcome!r}")
        rss = self._process.memory_info().rss
        with self._lock:
            self.requests += 1
            setattr(self, outcome, getattr(self, outcome) + 1)
            self._latencies_ms.append(latency_ms)
            if len(self._latencies_ms) > 10_000:
                del self._latencies_ms[0]
            self._peak_rss = max(self._peak_rss, rss)

    def snapshot(self) -> dict:
        with self._lock:
            latencies = list(self._latencies_ms)
            data = {
                "requests": self.requests,
                "ok": self.ok,
                "no_indicators": self.no_indicators,
                "errors": self.errors,
                "peak_rss_mb": round(self._peak_rss / (1024 * 1024), 1),
                "uptime_s": round(time.time() - self._started, 1),
            }
        data["latency_ms"] = {
            "median": round(statistics.median(latencies), 2) if latencies else 0.0,
            "p95": round(_percentile(latencies, 0.95), 2) if latencies else 0.0,
        }
        return data
