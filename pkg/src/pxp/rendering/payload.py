"""The warning payload handed to the UI, and its wire encoding.

A payload carries everything a warning page needs: the annotated screenshot
(PNG), one entry per explained feature with its assigned color, and timing
metadata. Encoding is plain JSON with the screenshot base64-encoded;
`golden_view` is the stable projection used for golden-file comparison —
volatile fields (timestamp, timings) are dropped and the screenshot is
reduced to dimensions plus a palette color histogram.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

from PIL import Image

from pxp.capture import CapturedPage
from pxp.catalog import FeatureCatalog
from pxp.pipeline.explain import ExplainedFeature
from pxp.rendering.highlight import PALETTE
from pxp.rendering.screenshot import color_histogram, png_bytes


@dataclass(frozen=True)
class PayloadFeature:
    element_id: int
    feature_id: str
    name: str
    explanation: str
    artifacts: tuple[str, ...]
    color: str
    snippet: str


@dataclass(frozen=True)
class WarningPayload:
    url: str
    screenshot_png: bytes
    width: int
    height: int
    features: tuple[PayloadFeature, ...]
    generated_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))
    timings_ms: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 1 <= len(self.features) <= 4:
            raise ValueError("a warning carries 1 to 4 features")
        colors = [f.color for f in self.features]
        if len(colors) != len(set(colors)):
            raise ValueError("feature colors must be unique within a payload")


def assemble_warning(
    page: CapturedPage,
    features: list[ExplainedFeature],
    catalog: FeatureCatalog,
    image: Image.Image,
    timings_ms: dict[str, float] | None = None,
    palette: tuple[str, ...] = PALETTE,
) -> WarningPayload:
    """Combine explained features and the rendered image into a payload.

    Colors are positional: the k-th feature gets the k-th palette color,
    matching the outlines the renderer drew.
    """
    if not features:
        raise ValueError("assemble_warning needs at least one feature")
    entries = []
    for index, explained in enumerate(features):
        entry = catalog.get(explained.identification.feature_id)
        if entry is None:
            raise ValueError(f"feature {explained.identification.feature_id} not in catalog")
        entries.append(
            PayloadFeature(
                element_id=explained.identification.element_id,
                feature_id=entry.feature_id,
                name=entry.name,
                explanation=explained.explanation,
                artifacts=explained.artifacts,
                color=palette[index],
                snippet=explained.snippet,
            )
        )
    return WarningPayload(
        url=page.url,
        screenshot_png=png_bytes(image),
        width=image.width,
        height=image.height,
        features=tuple(entries),
        timings_ms=dict(timings_ms or {}),
    )


def payload_to_dict(payload: WarningPayload) -> dict:
    return {
        "url": payload.url,
        "screenshot": {
            "png_base64": base64.b64encode(payload.screenshot_png).decode("ascii"),
            "width": payload.width,
            "height": payload.height,
        },
        "features": [
            {
                "element_id": f.element_id,
                "feature_id": f.feature_id,
                "name": f.name,
                "explanation": f.explanation,
                "artifacts": list(f.artifacts),
                "color": f.color,
                "snippet": f.snippet,
            }
            for f in payload.features
        ],
        "generated_at": payload.generated_at.isoformat(),
        "timings_ms": dict(payload.timings_ms),
    }


def payload_from_dict(data: dict) -> WarningPayload:
    return WarningPayload(
        url=data["url"],
        screenshot_png=base64.b64decode(data["screenshot"]["png_base64"]),
        width=data["screenshot"]["width"],
        height=data["screenshot"]["height"],
        features=tuple(
            PayloadFeature(
                element_id=f["element_id"],
                feature_id=f["feature_id"],
                name=f["name"],
                explanation=f["explanation"],
                artifacts=tuple(f["artifacts"]),
                color=f["color"],
                snippet=f["snippet"],
            )
            for f in data["features"]
        ),
        generated_at=datetime.fromisoformat(data["generated_at"]),
        timings_ms=dict(data["timings_ms"]),
    )


def golden_view(payload: WarningPayload) -> dict:
    """Deterministic projection for golden files: no timestamp, no timings,
    screenshot as dimensions + palette histogram."""
    from io import BytesIO

    with Image.open(BytesIO(payload.screenshot_png)) as image:
        histogram = color_histogram(image.convert("RGB"))
    data = payload_to_dict(payload)
    data.pop("generated_at")
    data.pop("timings_ms")
    data["screenshot"] = {
        "width": payload.width,
        "height": payload.height,
        "palette_histogram": histogram,
    }
    return data


def canonical_json(data: dict) -> bytes:
    """Stable byte encoding for golden comparison."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
