"""Colored-outline highlight injection.

Each identified element's opening tag gains a ``pxp-hl-<k>`` class and a
single style block defines an outline per palette slot. Colors are assigned
positionally — feature k gets palette color k — so the legend in the warning
UI can match by order. The URL pseudo-element (id 0) is never outlined
in-page; it becomes a banner strip at screenshot composition time.

Injection is reversible: `strip_highlights` removes the style block and the
injected classes and restores the input byte-for-byte (provided the page did
not already use the ``pxp-hl-`` namespace).
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

log = logging.getLogger(__name__)

# Colorblind-safe, high-contrast (Okabe-Ito selections).
PALETTE: tuple[str, str, str, str] = ("#E69F00", "#56B4E9", "#009E73", "#CC79A7")

STYLE_MARKER = 'data-pxp-highlights="v1"'

_TAG_NAME_RE = re.compile(r"<([a-zA-Z][a-zA-Z0-9:_-]*)")
_CLASS_ATTR_RE = re.compile(r"\bclass\s*=\s*([\"'])")
_STYLE_BLOCK_RE = re.compile(r"<style data-pxp-highlights=\"v1\">.*?</style>", re.DOTALL)
_INJECTED_ATTR_RE = re.compile(r" class=\"pxp-hl-\d+\"")
_INJECTED_TOKEN_RE = re.compile(r"(class\s*=\s*[\"'])pxp-hl-\d+ ")


class SpanDrift(Exception):
    """A highlight span no longer matches the markup it was computed from."""


@dataclass(frozen=True)
class HighlightTarget:
    element_id: int
    source_span: tuple[int, int] | None  # None for the URL banner
    color: str


@dataclass(frozen=True)
class HighlightPlan:
    targets: tuple[HighlightTarget, ...]
    palette: tuple[str, ...] = PALETTE

    def __post_init__(self) -> None:
        if len(self.palette) != 4 or len(set(self.palette)) != 4:
            raise ValueError("palette must hold 4 distinct colors")
        if len(self.targets) > len(self.palette):
            raise ValueError("more targets than palette colors")
        for index, target in enumerate(self.targets):
            if target.color != self.palette[index]:
                raise ValueError("colors must follow palette order")

    def banner_target(self) -> HighlightTarget | None:
        return next((t for t in self.targets if t.source_span is None), None)

    def outline_targets(self) -> list[HighlightTarget]:
        return [t for t in self.targets if t.source_span is not None]


def build_plan(
    identified: list[tuple[int, tuple[int, int] | None]],
    palette: tuple[str, ...] = PALETTE,
) -> HighlightPlan:
    """Plan for (element_id, source_span) pairs in feature order; spans are
    None only for element 0."""
    targets = tuple(
        HighlightTarget(element_id=eid, source_span=span, color=palette[index])
        for index, (eid, span) in enumerate(identified)
    )
    return HighlightPlan(targets=targets, palette=tuple(palette))


def style_block(palette: tuple[str, ...] = PALETTE) -> str:
    rules = "".join(
        f".pxp-hl-{index}{{outline:3px solid {color} !important;outline-offset:2px;}}"
        for index, color in enumerate(palette)
    )
    return f'<style {STYLE_MARKER}>{rules}</style>'


def _inject_one(html: str, target: HighlightTarget, index: int) -> str | None:
    """Insert the class for one target; None signals span drift."""
    lo, hi = target.source_span  # type: ignore[misc]
    if not (0 <= lo < hi <= len(html)):
        return None
    match = _TAG_NAME_RE.match(html, lo)
    if match is None:
        return None
    open_end = html.find(">", match.end(), hi)
    if open_end == -1:
        return None
    class_match = _CLASS_ATTR_RE.search(html, match.end(), open_end)
    if class_match:
        at = class_match.end()
        return html[:at] + f"pxp-hl-{index} " + html[at:]
    at = match.end(1)
    return html[:at] + f' class="pxp-hl-{index}"' + html[at:]


def inject_highlights(html: str, plan: HighlightPlan) -> str:
    """Annotated markup: style block prepended, target tags classed.

    Targets are applied back-to-front so earlier spans stay valid; a target
    whose span no longer matches an opening tag is skipped and logged
    (span drift), never fatal.
    """
    annotated = html
    indexed = [
        (index, target)
        for index, target in enumerate(plan.targets)
        if target.source_span is not None
    ]
    for index, target in sorted(indexed, key=lambda pair: -pair[1].source_span[0]):
        result = _inject_one(annotated, target, index)
        if result is None:
            log.warning(
                "span drift: element %d at %s no longer matches, skipping highlight",
                target.element_id,
                target.source_span,
            )
            continue
        annotated = result
    return style_block(plan.palette) + annotated


def strip_highlights(annotated: str) -> str:
    """Inverse of inject_highlights for pages that didn't already use the
    pxp-hl namespace."""
    text = _STYLE_BLOCK_RE.sub("", annotated, count=1)
    text = _INJECTED_ATTR_RE.sub("", text)
    return _INJECTED_TOKEN_RE.sub(r"\1", text)
