"""Captured-page input contract.

A capture is produced upstream (by the browser extension) once the page has
finished loading and the network has been idle; this module only validates
and carries it. The URL is the canonical one after all redirections.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from urllib.parse import urlparse

PROVIDERS = (
    "gsb",
    "bitdefender_trafficlight",
    "norton_safe_web",
    "avast_online_security",
    "trend_micro_toolbar",
    "manual",
)


def is_absolute_url(url: str) -> bool:
    try:
        parsed = urlparse(url)
    except ValueError:
        return False
    return bool(parsed.scheme) and bool(parsed.netloc)


@dataclass(frozen=True)
class CapturedPage:
    """URL plus fully rendered client-side source of a flagged page."""

    url: str
    html: str
    captured_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))
    provider: str = "manual"

    def __post_init__(self) -> None:
        if not self.url or not is_absolute_url(self.url):
            raise ValueError(f"url must be a non-empty absolute URL, got {self.url!r}")
        if any(c in self.url for c in "\r\n\t"):
            raise ValueError("url must not contain control characters")
        if not self.html:
            raise ValueError("html must be non-empty")
        if self.provider not in PROVIDERS:
            raise ValueError(f"unknown provider {self.provider!r}, expected one of {PROVIDERS}")
