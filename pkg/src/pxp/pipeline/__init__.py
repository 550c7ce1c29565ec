"""Two-prompt explanation pipeline over a local model runtime."""

from pxp.pipeline.explain import (
    MAX_FEATURES,
    ArtifactsUngrounded,
    ExplainedFeature,
    ExplainOptions,
    ExplainResult,
    FeatureIdentification,
    IdentificationSet,
    InvalidModelOutput,
    NoIndicatorsFound,
    UnknownElement,
    explain,
    extract_artifacts,
    hydrate,
    identify_features,
    is_grounded,
)
from pxp.pipeline.prompts import build_prompt1, build_prompt2, build_prompt2_retry
from pxp.pipeline.runtime import (
    DEFAULT_MODEL,
    DEFAULT_RUNTIME_URL,
    HttpRuntime,
    LlmRuntime,
    MockRuntime,
    RuntimeRequest,
    RuntimeResponse,
    RuntimeUnavailable,
    parse_json_payload,
)

__all__ = [
    "MAX_FEATURES",
    "ArtifactsUngrounded",
    "ExplainedFeature",
    "ExplainOptions",
    "ExplainResult",
    "FeatureIdentification",
    "IdentificationSet",
    "InvalidModelOutput",
    "NoIndicatorsFound",
    "UnknownElement",
    "explain",
    "extract_artifacts",
    "hydrate",
    "identify_features",
    "is_grounded",
    "build_prompt1",
    "build_prompt2",
    "build_prompt2_retry",
    "DEFAULT_MODEL",
    "DEFAULT_RUNTIME_URL",
    "HttpRuntime",
    "LlmRuntime",
    "MockRuntime",
    "RuntimeRequest",
    "RuntimeResponse",
    "RuntimeUnavailable",
    "parse_json_payload",
]
