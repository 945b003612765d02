"""Synthetic corpus generation and the surrounding review workflow.

Generation runs in three stages: render a prompt from a spec, call a chat
backend, and parse the model text into a corpus record. Token-level records
come back with inline entity markup, a pair of identical ``[KIND]``
delimiters around each span; the parser strips the markers, tokenizes, and
re-encodes the spans as IOB2 tags. Items whose markup cannot be decoded
(unbalanced or nested markers, empty spans) are rejected with diagnostics
rather than silently patched, because rejected items feed the human-review
exchange files.
"""

from __future__ import annotations

import enum
import json
import re
import string
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .backends import ChatBackend, PromptSpec
from .bio import EntityKind, encode_spans, EntitySpan
from .corpus import (
    LegalDomain,
    NerRecord,
    NliLabel,
    NliRecord,
    Provenance,
    _iter_jsonl,
    ner_record_from_dict,
    ner_record_to_dict,
    nli_record_from_dict,
    nli_record_to_dict,
)
from .errors import BackendError, PromptError, SchemaError, SpanError

__all__ = [
    "GenMode",
    "NerGenSpec",
    "NliGenSpec",
    "GeneratedNer",
    "RejectedItem",
    "tokenize",
    "render_summary_prompt",
    "render_ner_gen_prompt",
    "render_nli_gen_prompt",
    "parse_generated_ner",
    "generate_batch",
    "export_review",
    "import_review",
]


_PUNCT = set(string.punctuation)


def tokenize(text: str) -> list[str]:
    """Whitespace tokenization with leading/trailing punctuation detached.

    Internal punctuation stays put, so contractions ("won't") and hyphenated
    words survive as single tokens while a trailing period becomes its own
    token.
    """
    tokens: list[str] = []
    for chunk in text.split():
        leading: list[str] = []
        while chunk and chunk[0] in _PUNCT:
            leading.append(chunk[0])
            chunk = chunk[1:]
        trailing: list[str] = []
        while chunk and chunk[-1] in _PUNCT:
            trailing.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(leading)
        if chunk:
            tokens.append(chunk)
        tokens.extend(reversed(trailing))
    return tokens


class GenMode(enum.Enum):
    """Explicit generation asks for several entity kinds in a fixed order;
    implicit generation asks only for violation-describing content."""

    EXPLICIT = "explicit"
    IMPLICIT = "implicit"


@dataclass(frozen=True)
class NerGenSpec:
    """Parameters for one token-level generation call."""

    mode: GenMode
    cause_of_action: str
    industry: str
    context: str
    examples: tuple[str, ...] = ()
    kinds: tuple[EntityKind, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "examples", tuple(self.examples))
        object.__setattr__(self, "kinds", tuple(self.kinds))

    @property
    def effective_kinds(self) -> tuple[EntityKind, ...]:
        if self.mode is GenMode.IMPLICIT:
            return (EntityKind.VIOLATION,)
        return self.kinds


@dataclass(frozen=True)
class NliGenSpec:
    """Parameters for one premise/hypothesis generation call."""

    premise: str
    target_label: NliLabel
    age: int | None = None
    gender: str | None = None
    text_format: str = "online review"
    domain: LegalDomain | None = None

    def __post_init__(self) -> None:
        if not self.premise or not self.premise.strip():
            raise PromptError("premise must be nonempty")


def render_summary_prompt(document_sections: Sequence[str]) -> PromptSpec:
    """Prompt for condensing legal document sections down to the violation
    content, dropping background and procedural boilerplate."""
    if not document_sections:
        raise PromptError("need at least one document section to summarize")
    instructions = (
        "Summarize the legal document sections below. Keep only the content "
        "that describes the legal violation and the grounds for it; remove "
        "background, procedural history, and boilerplate. Write a concise "
        "paragraph."
    )
    return PromptSpec(
        instructions=instructions,
        labels="",
        examples=(),
        input="Sections:\n\n" + "\n\n".join(document_sections),
    )


def _marker(kind: EntityKind) -> str:
    return f"[{kind.tag_name}]"


def render_ner_gen_prompt(spec: NerGenSpec) -> PromptSpec:
    """Prompt for generating a marked-up violation narrative.

    Explicit mode names every required kind and the order they must appear
    in; implicit mode requests only the violation content. Both carry the
    cause of action, industry, and context parameters.
    """
    if spec.mode is GenMode.EXPLICIT and not spec.kinds:
        raise PromptError("explicit generation needs at least one entity kind")
    kinds = spec.effective_kinds

    if spec.mode is GenMode.EXPLICIT:
        ordered = ", ".join(_marker(k) for k in kinds)
        instructions = (
            "Write a short first-person narrative describing a legal violation "
            "scenario grounded in the parameters below. Mark every entity "
            "inline by wrapping it in a pair of identical markers, for example "
            f"{_marker(kinds[0])} some text {_marker(kinds[0])}. Include one "
            f"entity for each of these kinds, appearing in exactly this order: "
            f"{ordered}. Do not nest markers."
        )
    else:
        instructions = (
            "Write a short first-person narrative that describes experiencing "
            "a legal violation, grounded in the parameters below. Wrap only "
            "the passage that describes the violation itself in a pair of "
            f"identical {_marker(EntityKind.VIOLATION)} markers. Do not mark "
            "anything else and do not nest markers."
        )
    return PromptSpec(
        instructions=instructions,
        labels=", ".join(_marker(k) for k in kinds),
        examples=spec.examples,
        input=(
            f"Cause of action: {spec.cause_of_action}\n"
            f"Industry: {spec.industry}\n"
            f"Context: {spec.context}"
        ),
    )


_LABEL_GUIDANCE = {
    NliLabel.ENTAILMENT: (
        "The narrator must describe personally experiencing the situation the "
        "grounds cover, so the account is supported by them."
    ),
    NliLabel.CONTRADICTION: (
        "The narrator must describe circumstances that contradict the grounds: "
        "someone explicitly not affected by this violation."
    ),
    NliLabel.NEUTRAL: (
        "The account must stay on topic but be neither supported nor "
        "contradicted by the grounds."
    ),
}


def render_nli_gen_prompt(spec: NliGenSpec) -> PromptSpec:
    """Prompt for generating a first-person account against summarized legal
    grounds, with persona and format attributes varied per spec."""
    persona = []
    if spec.age is not None:
        persona.append(f"Writer age: {spec.age}")
    if spec.gender is not None:
        persona.append(f"Writer gender: {spec.gender}")
    persona.append(f"Text format: {spec.text_format}")
    instructions = (
        "Write a short first-person account that mimics a real-world text of "
        "the given format, in the voice of the described writer. "
        + _LABEL_GUIDANCE[spec.target_label]
        + " Output only the account itself."
    )
    return PromptSpec(
        instructions=instructions,
        labels=spec.target_label.surface,
        examples=(),
        input="\n".join(persona) + f"\nGrounds: {spec.premise}",
    )


# ---------------------------------------------------------------------------
# generated-output parsing
# ---------------------------------------------------------------------------

_MARKER_RE = re.compile(r"\[(LAW|VIOLATION|VIOLATED[ _]BY|VIOLATED[ _]ON)\]")
_UNKNOWN_MARKER_RE = re.compile(r"\[([A-Z][A-Z _-]{1,30})\]")


@dataclass(frozen=True)
class GeneratedNer:
    """Parse result for one generated narrative: the raw text, the decoded
    record when the markup is usable, and diagnostics either way."""

    raw: str
    record: NerRecord | None
    diagnostics: tuple[str, ...] = ()

    @property
    def accepted(self) -> bool:
        return self.record is not None


def parse_generated_ner(raw: str, record_id: str = "generated",
                        cause_of_action: str | None = None,
                        industry: str | None = None) -> GeneratedNer:
    """Decode inline ``[KIND] ... [KIND]`` markup into a tagged record.

    Total: malformed markup yields a rejected result with diagnostics, never
    an exception. Nested or crossing markers are rejected because IOB2
    cannot represent them.
    """
    diagnostics: list[str] = []
    for match in _UNKNOWN_MARKER_RE.finditer(raw):
        if not _MARKER_RE.fullmatch(match.group(0)):
            diagnostics.append(f"unknown marker kind left as text: {match.group(0)}")
    parts = _MARKER_RE.split(raw)
    tokens: list[str] = []
    spans: list[EntitySpan] = []
    open_kind: EntityKind | None = None
    open_start = 0

    for i, part in enumerate(parts):
        if i % 2 == 0:
            tokens.extend(tokenize(part))
            continue
        kind = EntityKind.from_string(part)
        if open_kind is None:
            open_kind = kind
            open_start = len(tokens)
        elif open_kind is kind:
            if len(tokens) == open_start:
                diagnostics.append(f"empty {kind.tag_name} span (no tokens between markers)")
                return GeneratedNer(raw=raw, record=None, diagnostics=tuple(diagnostics))
            spans.append(EntitySpan(open_kind, open_start, len(tokens)))
            open_kind = None
        else:
            diagnostics.append(
                f"nested or crossing markers: {kind.tag_name} opened inside {open_kind.tag_name}"
            )
            return GeneratedNer(raw=raw, record=None, diagnostics=tuple(diagnostics))

    if open_kind is not None:
        diagnostics.append(f"unbalanced marker: {open_kind.tag_name} never closed")
        return GeneratedNer(raw=raw, record=None, diagnostics=tuple(diagnostics))
    if not tokens:
        diagnostics.append("generated text has no tokens")
        return GeneratedNer(raw=raw, record=None, diagnostics=tuple(diagnostics))

    try:
        tags = encode_spans(spans, len(tokens))
    except SpanError as e:
        diagnostics.append(f"span encoding failed: {e}")
        return GeneratedNer(raw=raw, record=None, diagnostics=tuple(diagnostics))
    record = NerRecord(
        id=record_id,
        tokens=tuple(tokens),
        tags=tuple(tags),
        cause_of_action=cause_of_action,
        industry=industry,
        provenance=Provenance.GENERATED,
    )
    return GeneratedNer(raw=raw, record=record, diagnostics=tuple(diagnostics))


# ---------------------------------------------------------------------------
# batch generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RejectedItem:
    item_id: str
    raw: str | None
    diagnostics: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {"item_id": self.item_id, "raw": self.raw, "diagnostics": list(self.diagnostics)}


def generate_batch(specs: Sequence[NerGenSpec | NliGenSpec], backend: ChatBackend,
                   dedup: bool = False) -> tuple[list, list[RejectedItem]]:
    """Render, call, and parse every spec; never aborts on a single item.

    Returns accepted records and rejected items, both in input order, with
    ``len(accepted) + len(rejected) == len(specs)``. With ``dedup``, exact
    repeats (same token sequence, or same premise/hypothesis pair) are
    rejected as duplicates.
    """
    accepted: list = []
    rejected: list[RejectedItem] = []
    seen: set = set()

    for i, spec in enumerate(specs):
        item_id = f"gen-{i:04d}"
        try:
            if isinstance(spec, NerGenSpec):
                prompt = render_ner_gen_prompt(spec)
            else:
                prompt = render_nli_gen_prompt(spec)
        except PromptError as e:
            rejected.append(RejectedItem(item_id, None, (f"prompt error: {e}",)))
            continue
        try:
            raw = backend.complete(prompt)
        except BackendError as e:
            rejected.append(RejectedItem(item_id, None, (f"backend error: {e}",)))
            continue

        if isinstance(spec, NerGenSpec):
            result = parse_generated_ner(raw, record_id=item_id,
                                         cause_of_action=spec.cause_of_action,
                                         industry=spec.industry)
            if not result.accepted:
                rejected.append(RejectedItem(item_id, raw, result.diagnostics))
                continue
            key = ("ner", result.record.tokens)
            record = result.record
        else:
            hypothesis = raw.strip()
            if not hypothesis:
                rejected.append(RejectedItem(item_id, raw, ("generated hypothesis is empty",)))
                continue
            record = NliRecord(
                id=item_id,
                premise=spec.premise,
                hypothesis=hypothesis,
                label=spec.target_label,
                domain=spec.domain if spec.domain is not None else LegalDomain("Unspecified"),
            )
            key = ("nli", spec.premise, hypothesis)

        if dedup:
            if key in seen:
                rejected.append(RejectedItem(item_id, raw, ("exact duplicate of an earlier generation",)))
                continue
            seen.add(key)
        accepted.append(record)
    return accepted, rejected


# ---------------------------------------------------------------------------
# review exchange
# ---------------------------------------------------------------------------

def _record_payload(record) -> tuple[str, dict]:
    if isinstance(record, NerRecord):
        return "ner", ner_record_to_dict(record)
    return "nli", nli_record_to_dict(record)


def export_review(accepted: Sequence, rejected: Sequence[RejectedItem], path: str | Path) -> None:
    """Write a review JSONL: one line per item, verdict left blank for the
    annotators to fill in (accept, reject, or edit)."""
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        for record in accepted:
            task, payload = _record_payload(record)
            fh.write(json.dumps({
                "item_id": record.id,
                "task": task,
                "raw": None,
                "parsed": payload,
                "diagnostics": [],
                "verdict": None,
            }, ensure_ascii=False) + "\n")
        for item in rejected:
            fh.write(json.dumps({
                "item_id": item.item_id,
                "task": None,
                "raw": item.raw,
                "parsed": None,
                "diagnostics": list(item.diagnostics),
                "verdict": None,
            }, ensure_ascii=False) + "\n")


def import_review(path: str | Path) -> tuple[list, list[str]]:
    """Merge annotator verdicts back in: accepted and edited items become
    records, everything else is skipped. Returns (records, skipped ids)."""
    records: list = []
    skipped: list[str] = []
    for lineno, obj in _iter_jsonl(Path(path)):
        item_id = str(obj.get("item_id", lineno))
        verdict = obj.get("verdict")
        if verdict == "edit":
            payload = obj.get("edited_record")
        elif verdict == "accept":
            payload = obj.get("parsed")
        else:
            skipped.append(item_id)
            continue
        if not isinstance(payload, dict):
            raise SchemaError(f"item {item_id}: verdict {verdict!r} but no record payload", line=lineno)
        task = obj.get("task")
        if task == "ner" or (task is None and "tokens" in payload):
            records.append(ner_record_from_dict(payload, default_id=item_id))
        else:
            records.append(nli_record_from_dict(payload, default_id=item_id))
    return records, skipped
