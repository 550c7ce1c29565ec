"""End-to-end warning generation for one captured page.

Split into two stages so the service can serialize each behind its own
single-flight gate: `analyze_page` (delimit + two-prompt workflow, the LLM
stage) and `render_warning` (highlights + screenshot + payload assembly,
the renderer stage). `generate_warning` composes both for callers without
gating needs, such as the evaluation replay.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from pxp.capture import CapturedPage
from pxp.catalog import FeatureCatalog
from pxp.delimiting import DelimitedDocument, parse_and_delimit
from pxp.pipeline import ExplainOptions, ExplainResult, LlmRuntime, explain
from pxp.rendering import (
    Viewport,
    WarningPayload,
    assemble_warning,
    build_plan,
    compose_url_banner,
    inject_highlights,
    render_screenshot,
)
from pxp.rendering.highlight import PALETTE
from pxp.rendering.screenshot import DEFAULT_RENDER_TIMEOUT_S


@dataclass
class Analysis:
    doc: DelimitedDocument
    result: ExplainResult
    parse_ms: float
    llm_ms: float


def analyze_page(
    page: CapturedPage,
    catalog: FeatureCatalog,
    runtime: LlmRuntime,
    options: ExplainOptions | None = None,
) -> Analysis:
    """Delimit the page and run the two-prompt workflow (the LLM stage).

    Raises NoIndicatorsFound, InvalidModelOutput, or RuntimeUnavailable.
    """
    parse_start = time.perf_counter()
    doc = parse_and_delimit(page)
    parse_ms = (time.perf_counter() - parse_start) * 1000.0

    llm_start = time.perf_counter()
    result = explain(doc, catalog, runtime, options)
    llm_ms = (time.perf_counter() - llm_start) * 1000.0
    return Analysis(doc=doc, result=result, parse_ms=parse_ms, llm_ms=llm_ms)


def render_warning(
    page: CapturedPage,
    analysis: Analysis,
    catalog: FeatureCatalog,
    renderer,
    viewport: Viewport | None = None,
    render_timeout_s: float = DEFAULT_RENDER_TIMEOUT_S,
    palette: tuple[str, ...] = PALETTE,
) -> WarningPayload:
    """Highlight, screenshot, and assemble the payload (the render stage).

    Raises RendererUnavailable or RenderTimeout.
    """
    viewport = viewport or Viewport()
    render_start = time.perf_counter()
    plan = build_plan(
        [
            (
                f.identification.element_id,
                analysis.doc.elements[f.identification.element_id].source_span,
            )
            for f in analysis.result.features
        ],
        palette=palette,
    )
    annotated = inject_highlights(page.html, plan)
    image = render_screenshot(annotated, viewport, renderer, timeout_s=render_timeout_s)
    banner_colors = [t.color for t in plan.targets if t.source_span is None]
    if banner_colors:
        image = compose_url_banner(image, page.url, banner_colors)
    render_ms = (time.perf_counter() - render_start) * 1000.0

    return assemble_warning(
        page,
        analysis.result.features,
        catalog,
        image,
        timings_ms={
            "parse_ms": analysis.parse_ms,
            "llm_ms": analysis.llm_ms,
            "render_ms": render_ms,
            "total_ms": analysis.parse_ms + analysis.llm_ms + render_ms,
            "runtime_calls": float(analysis.result.runtime_calls),
        },
        palette=palette,
    )


def generate_warning(
    page: CapturedPage,
    catalog: FeatureCatalog,
    runtime: LlmRuntime,
    renderer,
    viewport: Viewport | None = None,
    options: ExplainOptions | None = None,
    render_timeout_s: float = DEFAULT_RENDER_TIMEOUT_S,
    palette: tuple[str, ...] = PALETTE,
) -> WarningPayload:
    """Produce the full warning payload for one flagged page."""
    analysis = analyze_page(page, catalog, runtime, options)
    return render_warning(
        page,
        analysis,
        catalog,
        renderer,
        viewport=viewport,
        render_timeout_s=render_timeout_s,
        palette=tuple(palette),
    )
