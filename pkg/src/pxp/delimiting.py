"""Element delimiting over captured page source.

Rewrites a page's markup so that every user-facing element of the watched
tag categories is wrapped in uniquely indexed textual markers,

    [ELEMENT 3 START]<form ...>...</form>[ELEMENT 3 END]

with the page URL prepended as ELEMENT 0. The markers give a language model
an unambiguous way to point at a specific element. Ten tag categories are
watched (headings h1 through h6 count as one category); when identical
categories nest, only the outermost instance is wrapped.

The scanner is a tolerant, span-tracking tokenizer over the raw string: it
never mutates or re-serializes the input, it only records offsets. That is
what makes the rewrite exactly reversible, which `strip_delimiters`
implements and the test suite checks byte for byte.

Pages that already contain the literal text ``[ELEMENT`` would make the
markers ambiguous; those occurrences are escaped by inserting a zero-width
space between ``[`` and ``ELEMENT`` (one more per occurrence if the page
already contains escaped forms), and `strip_delimiters` removes exactly one.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from pxp.capture import CapturedPage

log = logging.getLogger(__name__)

# Watched categories; "h" covers h1 through h6.
WATCHED_CATEGORIES = ("p", "ol", "h", "a", "iframe", "ul", "form", "button", "li", "input")

_TAG_TO_CATEGORY = {
    "p": "p",
    "ol": "ol",
    "a": "a",
    "iframe": "iframe",
    "ul": "ul",
    "form": "form",
    "button": "button",
    "li": "li",
    "input": "input",
    "h1": "h",
    "h2": "h",
    "h3": "h",
    "h4": "h",
    "h5": "h",
    "h6": "h",
}

# Elements that never take a closing tag.
VOID_TAGS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)

# Content of these is raw text up to the matching close tag; tags inside are
# not real markup (script strings, iframe fallback, etc.).
RAWTEXT_TAGS = frozenset(
    "script style textarea title iframe xmp noembed noframes noscript".split()
)

_TAG_NAME_RE = re.compile(r"[a-zA-Z][a-zA-Z0-9:_-]*")

_SENTINEL = "​"  # zero-width space between "[" and "ELEMENT"
_ESCAPE_RE = re.compile(r"\[(​*)ELEMENT")
_UNESCAPE_RE = re.compile(r"\[​(​*)ELEMENT")
_MARKER_RE = re.compile(r"\n\[ELEMENT \d+ (?:START|END)\]\n")
_URL_HEADER_RE = re.compile(r"\A\[ELEMENT 0 START\]\n[^\n]*\n\[ELEMENT 0 END\]\n")

DEFAULT_PROMPT_BUDGET = 60_000


class MalformedMarkup(Exception):
    """Scanner could not recover any element structure."""


class DelimiterCollision(Exception):
    """Page already contains marker-like text (handled by escaping)."""


@dataclass(frozen=True)
class ElementRecord:
    element_id: int
    tag_category: str
    source_span: tuple[int, int] | None  # offsets into the captured source; None for the URL
    raw_snippet: str


@dataclass(frozen=True)
class DelimitedDocument:
    url: str
    source_html: str
    delimited_html: str
    elements: dict[int, ElementRecord]
    collision_count: int = 0
    fallback: bool = False

    @property
    def url_element(self) -> ElementRecord:
        return self.elements[0]

    def content_elements(self) -> list[ElementRecord]:
        """All elements except the URL pseudo-element, in document order."""
        return [rec for eid, rec in self.elements.items() if eid != 0]


def _scan_tag_end(html: str, lt: int) -> tuple[int, bool] | None:
    """From an opening ``<``, find the true end of the tag.

    Quote-aware so ``>`` inside attribute values does not terminate the tag.
    Returns (offset after ``>``, self_closing) or None when the tag never
    closes before EOF.
    """
    n = len(html)
    j = lt + 1
    quote: str | None = None
    while j < n:
        c = html[j]
        if quote is not None:
            if c == quote:
                quote = None
        elif c in "\"'":
            quote = c
        elif c == ">":
            return j + 1, html[j - 1] == "/"
        j += 1
    return None


def _find_rawtext_close(html: str, lower: str, name: str, start: int) -> int:
    """Offset of the ``</name`` that ends a raw text element, or -1.

    The character after the name must terminate it, so ``</script`` does not
    match ``</scriptx>``.
    """
    needle = "</" + name
    pos = start
    while True:
        hit = lower.find(needle, pos)
        if hit == -1:
            return -1
        after = hit + len(needle)
        if after >= len(html) or html[after] in " \t\n\r\f/>":
            return hit
        pos = hit + 1


def _iter_tag_events(html: str) -> list[tuple]:
    """Tolerant scan producing ("start", name, lt, end, self_closing) and
    ("end", name, lt, end) events with exact source offsets.

    Comments, doctypes, CDATA and processing instructions are skipped; raw
    text element content is not scanned for tags; anything unparseable is
    treated as text.
    """
    events: list[tuple] = []
    lower = html.lower()
    i, n = 0, len(html)
    while i < n:
        lt = html.find("<", i)
        if lt == -1:
            break
        nxt = html[lt + 1] if lt + 1 < n else ""
        if nxt == "!":
            if html.startswith("<!--", lt):
                close = html.find("-->", lt + 4)
                i = n if close == -1 else close + 3
            elif html.startswith("<![CDATA[", lt):
                close = html.find("]]>", lt + 9)
                i = n if close == -1 else close + 3
            else:
                gt = html.find(">", lt)
                i = n if gt == -1 else gt + 1
            continue
        if nxt == "?":
            gt = html.find(">", lt)
            i = n if gt == -1 else gt + 1
            continue
        if nxt == "/":
            m = _TAG_NAME_RE.match(html, lt + 2)
            if m is None:
                i = lt + 1
                continue
            scan = _scan_tag_end(html, lt)
            if scan is None:
                break  # unterminated end tag at EOF: rest is text
            end, _ = scan
            events.append(("end", m.group().lower(), lt, end))
            i = end
            continue
        m = _TAG_NAME_RE.match(html, lt + 1)
        if m is None:
            i = lt + 1  # stray "<" is text
            continue
        scan = _scan_tag_end(html, lt)
        if scan is None:
            break  # unterminated start tag at EOF: rest is text
        end, self_closing = scan
        name = m.group().lower()
        events.append(("start", name, lt, end, self_closing))
        i = end
        if name in RAWTEXT_TAGS and not self_closing:
            close_at = _find_rawtext_close(html, lower, name, end)
            if close_at == -1:
                break  # unclosed raw text runs to EOF; element closed there
            close_scan = _scan_tag_end(html, close_at)
            if close_scan is None:
                break
            close_end, _ = close_scan
            events.append(("end", name, close_at, close_end))
            i = close_end
    return events


def _collect_spans(html: str) -> list[tuple[str, int, int]]:
    """Match start and end tags into (category, start, end) spans for the
    watched categories.

    Matching is by tag name on a stack, so spans are properly nested or
    disjoint. Stray end tags are ignored; an end tag that matches a deeper
    open tag implicitly closes everything above it at its own position;
    anything still open at EOF closes there.
    """
    open_stack: list[tuple[str, int]] = []
    spans: list[tuple[str, int, int]] = []

    def close_top(end_at: int) -> None:
        name, start = open_stack.pop()
        cat = _TAG_TO_CATEGORY.get(name)
        if cat is not None:
            spans.append((cat, start, end_at))

    for ev in _iter_tag_events(html):
        if ev[0] == "start":
            _, name, lt, end, self_closing = ev
            if self_closing or name in VOID_TAGS:
                cat = _TAG_TO_CATEGORY.get(name)
                if cat is not None:
                    spans.append((cat, lt, end))
            else:
                open_stack.append((name, lt))
        else:
            _, name, lt, end = ev
            if not any(entry[0] == name for entry in open_stack):
                continue
            while open_stack[-1][0] != name:
                close_top(lt)
            close_top(end)
    while open_stack:
        close_top(len(html))
    return spans


def _outermost_only(spans: list[tuple[str, int, int]]) -> list[tuple[str, int, int]]:
    """Drop any span strictly contained in another span of the same category."""
    kept: list[tuple[str, int, int]] = []
    cover_end: dict[str, int] = {}
    for cat, start, end in sorted(spans, key=lambda s: (s[1], -s[2])):
        if start < cover_end.get(cat, -1):
            continue  # nested inside the current outer span of this category
        cover_end[cat] = end
        kept.append((cat, start, end))
    kept.sort(key=lambda s: s[1])
    return kept


def _escape_segment(segment: str) -> tuple[str, int]:
    return _ESCAPE_RE.subn(lambda m: "[" + _SENTINEL + m.group(1) + "ELEMENT", segment)


def _url_header(url: str) -> str:
    return f"[ELEMENT 0 START]\n{url}\n[ELEMENT 0 END]\n"


def _start_marker(element_id: int) -> str:
    return f"\n[ELEMENT {element_id} START]\n"


def _end_marker(element_id: int) -> str:
    return f"\n[ELEMENT {element_id} END]\n"


def _render_range(
    html: str,
    elements: list[ElementRecord],
    lo: int,
    hi: int,
) -> tuple[str, int]:
    """Render html[lo:hi] with markers for the given elements inserted and
    collision escaping applied to the source segments in between.

    Returns (text, number of escaped collisions). At equal offsets END
    markers come before START markers, inner ENDs before outer ENDs, so
    marker pairs never interleave.
    """
    inserts: list[tuple[int, tuple[int, int], str]] = []
    for rec in elements:
        start, end = rec.source_span  # type: ignore[misc]
        inserts.append((start, (1, rec.element_id), _start_marker(rec.element_id)))
        inserts.append((end, (0, -rec.element_id), _end_marker(rec.element_id)))
    inserts.sort(key=lambda item: (item[0], item[1]))

    parts: list[str] = []
    collisions = 0
    pos = lo
    for offset, _, text in inserts:
        segment, hits = _escape_segment(html[pos:offset])
        parts.append(segment)
        parts.append(text)
        collisions += hits
        pos = offset
    segment, hits = _escape_segment(html[pos:hi])
    parts.append(segment)
    collisions += hits
    return "".join(parts), collisions


def parse_and_delimit(page: CapturedPage) -> DelimitedDocument:
    """Wrap every watched element of the page in indexed markers.

    Element ids are assigned in document order of the opening tag, starting
    at 1; the URL is always element 0 and heads the delimited text. If the
    scanner fails outright the whole page is kept as a single element so a
    warning can still be produced.
    """
    html = page.html
    try:
        spans = _outermost_only(_collect_spans(html))
        fallback = False
    except Exception:
        log.exception("scanner failed, keeping the whole page as one element")
        spans = [("p", 0, len(html))]
        fallback = True

    elements: dict[int, ElementRecord] = {
        0: ElementRecord(0, "url", None, page.url)
    }
    records: list[ElementRecord] = []
    for idx, (cat, start, end) in enumerate(spans, start=1):
        rec = ElementRecord(idx, cat, (start, end), html[start:end])
        records.append(rec)
        elements[idx] = rec

    body, collisions = _render_range(html, records, 0, len(html))
    return DelimitedDocument(
        url=page.url,
        source_html=html,
        delimited_html=_url_header(page.url) + body,
        elements=elements,
        collision_count=collisions,
        fallback=fallback,
    )


def strip_delimiters(doc: DelimitedDocument) -> str:
    """Inverse of `parse_and_delimit`: recover the original source exactly."""
    text = _URL_HEADER_RE.sub("", doc.delimited_html, count=1)
    text = _MARKER_RE.sub("", text)
    return _UNESCAPE_RE.sub(lambda m: "[" + m.group(1) + "ELEMENT", text)


def _top_level(records: list[ElementRecord]) -> list[ElementRecord]:
    tops: list[ElementRecord] = []
    cover = -1
    for rec in sorted(records, key=lambda r: r.source_span[0]):  # type: ignore[index]
        start, end = rec.source_span  # type: ignore[misc]
        if start >= cover:
            tops.append(rec)
            cover = end
    return tops


def render_prompt_source(doc: DelimitedDocument, budget: int = DEFAULT_PROMPT_BUDGET) -> tuple[str, list[int]]:
    """Delimited text to embed in a prompt, kept within a character budget.

    Within budget this is the full delimited page. Over budget the text is
    rebuilt from the elements alone and whole elements are dropped from the
    end (highest ids first) until it fits; elements are never split.
    Returns (text, ids of the elements represented, id 0 included).
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    if len(doc.delimited_html) <= budget:
        return doc.delimited_html, sorted(doc.elements)

    records = doc.content_elements()
    header = _url_header(doc.url)
    marker_cost = {
        rec.element_id: len(_start_marker(rec.element_id)) + len(_end_marker(rec.element_id))
        for rec in records
    }
    top_ids = {rec.element_id for rec in _top_level(records)}

    total = len(header)
    best_k = 0
    for rec in records:  # ids are 1..n in order
        total += marker_cost[rec.element_id]
        if rec.element_id in top_ids:
            total += len(rec.raw_snippet)
        if total > budget:
            break
        best_k = rec.element_id

    kept = [rec for rec in records if rec.element_id <= best_k]
    parts = [header]
    for top in _top_level(kept):
        lo, hi = top.source_span  # type: ignore[misc]
        inner = [rec for rec in kept if lo <= rec.source_span[0] and rec.source_span[1] <= hi]  # type: ignore[index]
        text, _ = _render_range(doc.source_html, inner, lo, hi)
        parts.append(text)
    return "".join(parts), [0] + [rec.element_id for rec in kept]
