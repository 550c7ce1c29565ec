"""Highlight injection, screenshot backends, and warning payload assembly."""

from pxp.rendering.highlight import (
    PALETTE,
    HighlightPlan,
    HighlightTarget,
    SpanDrift,
    build_plan,
    inject_highlights,
    strip_highlights,
    style_block,
)
from pxp.rendering.payload import (
    PayloadFeature,
    WarningPayload,
    assemble_warning,
    canonical_json,
    golden_view,
    payload_from_dict,
    payload_to_dict,
)
from pxp.rendering.screenshot import (
    DEFAULT_RENDER_TIMEOUT_S,
    URL_BANNER_HEIGHT,
    BlockLayoutRenderer,
    ChromiumRenderer,
    RendererUnavailable,
    RenderTimeout,
    Viewport,
    color_histogram,
    compose_url_banner,
    png_bytes,
    render_screenshot,
)

__all__ = [
    "PALETTE",
    "HighlightPlan",
    "HighlightTarget",
    "SpanDrift",
    "build_plan",
    "inject_highlights",
    "strip_highlights",
    "style_block",
    "PayloadFeature",
    "WarningPayload",
    "assemble_warning",
    "canonical_json",
    "golden_view",
    "payload_from_dict",
    "payload_to_dict",
    "DEFAULT_RENDER_TIMEOUT_S",
    "URL_BANNER_HEIGHT",
    "BlockLayoutRenderer",
    "ChromiumRenderer",
    "RendererUnavailable",
    "RenderTimeout",
    "Viewport",
    "color_histogram",
    "compose_url_banner",
    "png_bytes",
    "render_screenshot",
]
