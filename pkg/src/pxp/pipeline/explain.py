"""Two-prompt explanation workflow.

Prompt 1 maps delimited elements to catalog features (at most four);
Prompt 2 runs once per identified feature and extracts the artifacts that
fill the feature's template. Everything the model says is schema-validated
and grounded against the page before it can reach a warning:

- structurally invalid responses are re-requested (bounded retry budget);
- items citing unknown elements or non-catalog features are dropped;
- more than four items are truncated in model order;
- artifacts that do not occur in the snippet (case-insensitive,
  whitespace-normalized) trigger one corrective re-prompt, then are dropped;
- a feature whose template needs artifacts but got none grounded is omitted.

With a deterministic runtime the whole of `explain` is a pure function of
the document and catalog.
"""

from __future__ import annotations

import html
import logging
import re
from dataclasses import dataclass, field

from pxp.catalog import FeatureCatalog, FeatureEntry, fill_template
from pxp.delimiting import DEFAULT_PROMPT_BUDGET, DelimitedDocument
from pxp.pipeline.prompts import build_prompt1, build_prompt2, build_prompt2_retry
from pxp.pipeline.runtime import DEFAULT_MODEL, LlmRuntime, RuntimeRequest

log = logging.getLogger(__name__)

MAX_FEATURES = 4
RETRY_BUDGET = 2  # re-requests per prompt on schema-invalid output


class InvalidModelOutput(Exception):
    """Model kept returning schema-invalid output past the retry budget."""


class NoIndicatorsFound(Exception):
    """No user-facing feature survived validation; no warning to build."""


class ArtifactsUngrounded(Exception):
    """Every proposed artifact failed grounding for a slot-bearing feature."""


class UnknownElement(Exception):
    """An element id that is not part of the document."""


@dataclass(frozen=True)
class FeatureIdentification:
    element_id: int
    feature_id: str


@dataclass(frozen=True)
class IdentificationSet:
    items: tuple[FeatureIdentification, ...]

    def __post_init__(self) -> None:
        if len(self.items) > MAX_FEATURES:
            raise ValueError(f"at most {MAX_FEATURES} features per warning")
        pairs = [(i.element_id, i.feature_id) for i in self.items]
        if len(pairs) != len(set(pairs)):
            raise ValueError("duplicate (element, feature) pairs")

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


@dataclass(frozen=True)
class ExplainedFeature:
    identification: FeatureIdentification
    artifacts: tuple[str, ...]
    explanation: str
    snippet: str


@dataclass(frozen=True)
class ExplainOptions:
    model: str = DEFAULT_MODEL
    max_tokens: int = 512
    retry_budget: int = RETRY_BUDGET
    source_budget: int = DEFAULT_PROMPT_BUDGET


_WS_RE = re.compile(r"\s+")


def _normalize(text: str) -> str:
    return _WS_RE.sub(" ", text).casefold().strip()


def is_grounded(artifact: str, snippet: str) -> bool:
    """Does the artifact occur in the snippet, modulo case, whitespace runs,
    and HTML entity encoding?"""
    needle = _normalize(artifact)
    if not needle:
        return False
    return needle in _normalize(snippet) or needle in _normalize(html.unescape(snippet))


def _generate_validated(
    runtime: LlmRuntime,
    prompt: str,
    validate,
    options: ExplainOptions,
    counter: list[int],
):
    """Send a prompt, re-requesting up to the retry budget while the
    response fails structural validation. `validate` returns None for
    structurally invalid payloads and the repaired value otherwise."""
    request = RuntimeRequest(
        model=options.model, prompt=prompt, temperature=0.0, max_tokens=options.max_tokens
    )
    for attempt in range(options.retry_budget + 1):
        response = runtime.generate(request)
        counter[0] += 1
        result = validate(response.payload)
        if result is not None:
            return result
        log.warning("schema-invalid model output (attempt %d): %.120s", attempt + 1, response.text)
    raise InvalidModelOutput(f"no valid response after {options.retry_budget + 1} attempts")


def _normalized_name_index(catalog: FeatureCatalog) -> dict[str, FeatureEntry]:
    return {_normalize(entry.name): entry for entry in catalog}


def _validate_findings(payload, doc: DelimitedDocument, catalog: FeatureCatalog):
    """None when the payload shape is wrong; otherwise the repaired item
    list (invalid items dropped, duplicates dropped, capped at four)."""
    if not isinstance(payload, dict) or not isinstance(payload.get("findings"), list):
        return None
    by_name = _normalized_name_index(catalog)
    items: list[FeatureIdentification] = []
    seen: set[tuple[int, str]] = set()
    for raw in payload["findings"]:
        if not isinstance(raw, dict):
            continue
        element = raw.get("element")
        feature = raw.get("feature")
        if isinstance(element, bool) or not isinstance(element, int):
            continue
        if not isinstance(feature, str):
            continue
        entry = by_name.get(_normalize(feature))
        if entry is None or element not in doc.elements:
            continue
        key = (element, entry.feature_id)
        if key in seen:
            continue
        seen.add(key)
        items.append(FeatureIdentification(element_id=element, feature_id=entry.feature_id))
    return items[:MAX_FEATURES]


def identify_features(
    doc: DelimitedDocument,
    catalog: FeatureCatalog,
    runtime: LlmRuntime,
    options: ExplainOptions | None = None,
    _counter: list[int] | None = None,
) -> IdentificationSet:
    """Run Prompt 1 and validate the response into an IdentificationSet."""
    options = options or ExplainOptions()
    counter = _counter if _counter is not None else [0]
    prompt = build_prompt1(doc, catalog, budget=options.source_budget)
    items = _generate_validated(
        runtime, prompt, lambda payload: _validate_findings(payload, doc, catalog),
        options, counter,
    )
    if not items:
        raise NoIndicatorsFound(f"no user-facing indicators for {doc.url}")
    return IdentificationSet(items=tuple(items))


def hydrate(identification: FeatureIdentification, doc: DelimitedDocument) -> str:
    """The verbatim source snippet for an identification (element 0 → URL)."""
    record = doc.elements.get(identification.element_id)
    if record is None:
        raise UnknownElement(f"element {identification.element_id} not in document")
    return record.raw_snippet


def _validate_artifacts(payload, entry: FeatureEntry):
    """None when the payload shape is wrong; otherwise the proposed
    artifact list (non-strings and empties dropped, deduplicated, capped
    at the template's slot count)."""
    if not isinstance(payload, dict) or not isinstance(payload.get("artifacts"), list):
        return None
    proposed: list[str] = []
    seen: set[str] = set()
    for raw in payload["artifacts"]:
        if not isinstance(raw, str) or not raw.strip() or "\x00" in raw:
            continue
        key = _normalize(raw)
        if key in seen:
            continue
        seen.add(key)
        proposed.append(raw.strip())
    return proposed[: entry.max_artifacts]


def extract_artifacts(
    identification: FeatureIdentification,
    snippet: str,
    entry: FeatureEntry,
    runtime: LlmRuntime,
    url: str,
    options: ExplainOptions | None = None,
    _counter: list[int] | None = None,
) -> ExplainedFeature:
    """Run Prompt 2 for one identified feature and fill its template."""
    options = options or ExplainOptions()
    counter = _counter if _counter is not None else [0]
    prompt = build_prompt2(identification.element_id, snippet, entry, url)
    proposed = _generate_validated(
        runtime, prompt, lambda payload: _validate_artifacts(payload, entry), options, counter
    )
    grounded = [a for a in proposed if is_grounded(a, snippet)]
    rejected = [a for a in proposed if not is_grounded(a, snippet)]

    if rejected:
        retry_prompt = build_prompt2_retry(
            identification.element_id, snippet, entry, url, rejected
        )
        try:
            second = _generate_validated(
                runtime, retry_prompt, lambda payload: _validate_artifacts(payload, entry),
                options, counter,
            )
        except InvalidModelOutput:
            second = []
        regrounded = [a for a in second if is_grounded(a, snippet)]
        if regrounded:
            grounded = regrounded

    if entry.max_artifacts > 0 and not grounded:
        raise ArtifactsUngrounded(
            f"{entry.feature_id} on element {identification.element_id}: "
            f"nothing survived grounding"
        )
    explanation = fill_template(entry, grounded)
    return ExplainedFeature(
        identification=identification,
        artifacts=tuple(grounded),
        explanation=explanation,
        snippet=snippet,
    )


@dataclass
class ExplainResult:
    features: list[ExplainedFeature]
    runtime_calls: int


def explain(
    doc: DelimitedDocument,
    catalog: FeatureCatalog,
    runtime: LlmRuntime,
    options: ExplainOptions | None = None,
) -> ExplainResult:
    """Full workflow: identify features, then explain each one.

    Features whose artifacts all fail grounding are omitted; if that leaves
    nothing, NoIndicatorsFound is raised just as when Prompt 1 finds
    nothing. Runtime calls total 1 + |identifications| plus any bounded
    retries, reported on the result.
    """
    options = options or ExplainOptions()
    counter = [0]
    identifications = identify_features(doc, catalog, runtime, options, _counter=counter)
    explained: list[ExplainedFeature] = []
    for identification in identifications:
        snippet = hydrate(identification, doc)
        entry = catalog.get(identification.feature_id)
        assert entry is not None  # guaranteed by identify_features validation
        try:
            explained.append(
                extract_artifacts(
                    identification, snippet, entry, runtime, doc.url, options, _counter=counter
                )
            )
        except ArtifactsUngrounded as exc:
            log.info("omitting feature: %s", exc)
    if not explained:
        raise NoIndicatorsFound(f"every identified feature was dropped for {doc.url}")
    return ExplainResult(features=explained, runtime_calls=counter[0])
