"""Prompt assembly from versioned template files.

Wording lives in templates/*.txt with named placeholders so prompt changes
are reviewable as plain-text diffs; this module only substitutes values.
"""

from __future__ import annotations

import json
from functools import cache
from importlib import resources
from string import Template

from pxp.catalog import FeatureCatalog, FeatureEntry
from pxp.delimiting import DEFAULT_PROMPT_BUDGET, DelimitedDocument, render_prompt_source


@cache
def _template(name: str) -> Template:
    text = resources.files("pxp").joinpath(f"pipeline/templates/{name}").read_text(encoding="utf-8")
    return Template(text)


def build_prompt1(
    doc: DelimitedDocument,
    catalog: FeatureCatalog,
    budget: int = DEFAULT_PROMPT_BUDGET,
) -> str:
    """Prompt asking for at most four (element, feature) pairs."""
    source, _ = render_prompt_source(doc, budget)
    feature_list = "\n".join(f"- {name}" for name in catalog.names())
    return _template("prompt1.txt").substitute(
        feature_list=feature_list,
        delimited_source=source,
    )


def _prompt2_fields(element_id: int, snippet: str, entry: FeatureEntry, url: str) -> dict[str, str]:
    return {
        "url": url,
        "element_id": str(element_id),
        "feature_name": entry.name,
        "feature_id": entry.feature_id,
        "template": entry.template,
        "max_artifacts": str(entry.max_artifacts),
        "snippet": snippet,
    }


def build_prompt2(element_id: int, snippet: str, entry: FeatureEntry, url: str) -> str:
    """Prompt asking for grounded artifacts for one identified feature."""
    return _template("prompt2.txt").substitute(_prompt2_fields(element_id, snippet, entry, url))


def build_prompt2_retry(
    element_id: int,
    snippet: str,
    entry: FeatureEntry,
    url: str,
    rejected: list[str],
) -> str:
    """Corrective artifact prompt naming the rejected proposals."""
    fields = _prompt2_fields(element_id, snippet, entry, url)
    fields["rejected"] = json.dumps(rejected, ensure_ascii=False)
    return _template("prompt2_retry.txt").substitute(fields)
