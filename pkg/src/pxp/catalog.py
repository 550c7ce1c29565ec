"""Fixed table of user-visible phishing features with fill-slot templates.

The catalog is the closed world for the whole engine: anything the model
proposes that is not in here gets dropped. It ships as a versioned YAML
file (see data/feature_catalog.yaml for the schema) so coders can extend
it without touching code; `load_catalog` validates the file and the result
is immutable afterwards, so a single instance can be shared across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

SLOT = "[fill here]"

# a slot together with the quote pair the template wraps it in, if any
_SLOT_PATTERN = (
    r"(?:“" + re.escape(SLOT) + r"”"
    r"|\"" + re.escape(SLOT) + r"\""
    r"|‘" + re.escape(SLOT) + r"’"
    r"|'" + re.escape(SLOT) + r"'"
    r"|" + re.escape(SLOT) + r")"
)
_LEADING_SEP_SLOT = re.compile(r"(?:\s*,\s*(?:and\s+)?|\s+and\s+)" + _SLOT_PATTERN)
_TRAILING_SEP_SLOT = re.compile(_SLOT_PATTERN + r"(?:\s*,\s*(?:and\s+)?|\s+and\s+)")
_BARE_SLOT = re.compile(_SLOT_PATTERN)
_EMPTY_PARENS = re.compile(r"\s*\(\s*\)")
_SPACE_BEFORE_PUNCT = re.compile(r"\s+([.,;:!?])")

DEFAULT_CATALOG_VERSION = "1.0"


class CatalogInvalid(Exception):
    """Catalog file violates the schema; message names the first violation."""


class TooManyArtifacts(Exception):
    """More artifacts supplied than the template has slots."""


@dataclass(frozen=True)
class FeatureEntry:
    feature_id: str
    name: str
    template: str
    provenance: str = "reconstructed"

    @property
    def max_artifacts(self) -> int:
        return self.template.count(SLOT)


@dataclass(frozen=True)
class FeatureCatalog:
    version: str
    entries: tuple[FeatureEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def get(self, feature_id: str) -> FeatureEntry | None:
        return next((e for e in self.entries if e.feature_id == feature_id), None)

    def by_name(self, name: str) -> FeatureEntry | None:
        return next((e for e in self.entries if e.name == name), None)

    def names(self) -> list[str]:
        return [e.name for e in self.entries]


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise CatalogInvalid(message)


def load_catalog(path: str | Path) -> FeatureCatalog:
    """Load and validate a catalog file, failing on the first violation."""
    path = Path(path)
    _require(path.is_file(), f"catalog file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise CatalogInvalid(f"catalog file is not valid YAML: {exc}") from exc

    _require(isinstance(raw, dict), "catalog root must be a mapping")
    version = raw.get("version")
    _require(isinstance(version, str) and bool(version), "catalog needs a version string")
    records = raw.get("entries")
    _require(isinstance(records, list) and bool(records), "catalog needs a non-empty entries list")

    entries: list[FeatureEntry] = []
    seen_ids: set[str] = set()
    seen_names: set[str] = set()
    for index, record in enumerate(records):
        where = f"entry {index}"
        _require(isinstance(record, dict), f"{where}: must be a mapping")
        unknown = set(record) - {"id", "name", "template", "provenance", "max_artifacts"}
        _require(not unknown, f"{where}: unknown keys {sorted(unknown)}")
        feature_id = record.get("id")
        name = record.get("name")
        template = record.get("template")
        provenance = record.get("provenance", "reconstructed")
        for label, value in (("id", feature_id), ("name", name), ("template", template)):
            _require(isinstance(value, str) and bool(value), f"{where}: {label} must be a non-empty string")
            _require("\x00" not in value, f"{where}: {label} must not contain NUL")
        _require(
            provenance in ("codebook", "reconstructed"),
            f"{where}: provenance must be 'codebook' or 'reconstructed'",
        )
        _require(feature_id not in seen_ids, f"{where}: duplicate feature id {feature_id!r}")
        _require(name not in seen_names, f"{where}: duplicate feature name {name!r}")
        seen_ids.add(feature_id)
        seen_names.add(name)
        entry = FeatureEntry(feature_id, name, template, provenance)
        declared = record.get("max_artifacts")
        if declared is not None:
            _require(
                isinstance(declared, int) and declared == entry.max_artifacts,
                f"{where}: max_artifacts {declared!r} does not match "
                f"{entry.max_artifacts} slot(s) in the template",
            )
        entries.append(entry)
    return FeatureCatalog(version=version, entries=tuple(entries))


def default_catalog_path() -> Path:
    return Path(str(resources.files("pxp").joinpath("data/feature_catalog.yaml")))


def default_catalog() -> FeatureCatalog:
    """The shipped 26-feature catalog."""
    return load_catalog(default_catalog_path())


def _drop_one_slot(text: str) -> str:
    for pattern in (_LEADING_SEP_SLOT, _TRAILING_SEP_SLOT, _BARE_SLOT):
        out, hits = pattern.subn("", text, count=1)
        if hits:
            return out
    return text


def fill_template(entry: FeatureEntry, artifacts: list[str]) -> str:
    """Substitute artifacts into the template slots, left to right.

    Unused trailing slots are removed together with an adjacent "and"/comma
    separator (and their quote pair) so the sentence still reads; when every
    slot is filled the template text around the slots is untouched.
    """
    if len(artifacts) > entry.max_artifacts:
        raise TooManyArtifacts(
            f"{entry.feature_id}: {len(artifacts)} artifacts for "
            f"{entry.max_artifacts} slot(s)"
        )
    if any(not a or "\x00" in a for a in artifacts):
        raise ValueError("artifacts must be non-empty and NUL-free")

    # protect the filled slots with tokens so trimming (and the artifacts
    # themselves, which may contain slot-like text) can't disturb them
    tokens = [f"\x00{i}\x00" for i in range(len(artifacts))]
    text = entry.template
    for token in tokens:
        text = text.replace(SLOT, token, 1)
    if SLOT in text:
        while SLOT in text:
            text = _drop_one_slot(text)
        text = _EMPTY_PARENS.sub("", text)
        text = _SPACE_BEFORE_PUNCT.sub(r"\1", text)
        text = re.sub(r"[ \t]{2,}", " ", text).strip()
    for token, artifact in zip(tokens, artifacts):
        text = text.replace(token, artifact, 1)
    return text
