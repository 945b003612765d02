"""Canonical data model and file I/O for the two corpora.

Two record shapes are supported:

* token-level violation records (``NerRecord``): tokenized text with one
  IOB2 tag per token over the four entity kinds, plus optional cause of
  action, industry, and provenance;
* entailment-matching records (``NliRecord``): a premise/hypothesis pair
  labeled entailed, contradict, or neutral and tagged with a legal domain.

The canonical on-disk format is JSON lines, UTF-8, LF line endings (CRLF is
tolerated on input). A two-column CoNLL format (``token<TAB>tag``, blank
line between records) is supported for token-level records. ``field_map``
arguments let callers adapt externally-named fields to the canonical schema
without rewriting files.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .bio import BioTag, EntityKind, RepairPolicy, decode_spans, parse_tag
from .errors import LabelError, SchemaError, TagError

__all__ = [
    "EntityKind",
    "NliLabel",
    "Provenance",
    "LegalDomain",
    "CANONICAL_DOMAINS",
    "NerRecord",
    "NliRecord",
    "CorpusStats",
    "load_ner",
    "save_ner",
    "load_nli",
    "save_nli",
    "ner_record_to_dict",
    "nli_record_to_dict",
    "ner_record_from_dict",
    "nli_record_from_dict",
    "compute_stats",
]


class NliLabel(enum.Enum):
    """The three inference classes, with their single-token surface forms."""

    ENTAILMENT = "entailed"
    CONTRADICTION = "contradict"
    NEUTRAL = "neutral"

    @classmethod
    def from_string(cls, s: str) -> "NliLabel":
        """Normalize a label string case-insensitively; long forms accepted."""
        key = s.strip().lower()
        mapping = {
            "entailed": cls.ENTAILMENT,
            "entailment": cls.ENTAILMENT,
            "contradict": cls.CONTRADICTION,
            "contradiction": cls.CONTRADICTION,
            "neutral": cls.NEUTRAL,
        }
        if key not in mapping:
            raise LabelError(f"unknown inference label: {s!r}")
        return mapping[key]

    @property
    def surface(self) -> str:
        return self.value


class Provenance(enum.Enum):
    """Where a record came from: machine generation, a human author, or unknown."""

    GENERATED = "generated"
    HUMAN = "human"
    UNKNOWN = "unknown"

    @classmethod
    def from_string(cls, s: str) -> "Provenance":
        key = s.strip().lower()
        for p in cls:
            if p.value == key:
                return p
        raise SchemaError(f"unknown provenance: {s!r}")


@dataclass(frozen=True)
class LegalDomain:
    """A legal domain tag. Four canonical domains, plus an open escape.

    Unknown domain names are preserved verbatim rather than rejected, so
    corpora covering new legal areas load without schema changes.
    """

    name: str

    CANONICAL_NAMES = ("Consumer Protection", "Privacy", "TCPA", "Wage")

    def __post_init__(self) -> None:
        if not self.name or not self.name.strip():
            raise SchemaError("legal domain name must be nonempty")

    @classmethod
    def from_string(cls, s: str) -> "LegalDomain":
        t = s.strip()
        for canonical in cls.CANONICAL_NAMES:
            if t.lower() == canonical.lower():
                return cls(canonical)
        return cls(t)

    @property
    def is_canonical(self) -> bool:
        return self.name in self.CANONICAL_NAMES

    @property
    def sort_key(self) -> tuple[int, float | str]:
        """Canonical domains in fixed order first, then others by name."""
        if self.is_canonical:
            return (0, float(self.CANONICAL_NAMES.index(self.name)))
        return (1, self.name)

    def __str__(self) -> str:
        return self.name


CONSUMER_PROTECTION = LegalDomain("Consumer Protection")
PRIVACY = LegalDomain("Privacy")
TCPA = LegalDomain("TCPA")
WAGE = LegalDomain("Wage")
CANONICAL_DOMAINS = (CONSUMER_PROTECTION, PRIVACY, TCPA, WAGE)


@dataclass(frozen=True)
class NerRecord:
    """One tokenized text with an IOB2 tag per token."""

    id: str
    tokens: tuple[str, ...]
    tags: tuple[BioTag, ...]
    cause_of_action: str | None = None
    industry: str | None = None
    provenance: Provenance = Provenance.UNKNOWN

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "tags", tuple(self.tags))
        if not self.tokens:
            raise SchemaError(f"record {self.id}: empty token list", record_id=self.id)
        if len(self.tags) != len(self.tokens):
            raise SchemaError(
                f"record {self.id}: {len(self.tokens)} tokens but {len(self.tags)} tags",
                record_id=self.id,
            )


@dataclass(frozen=True)
class NliRecord:
    """One premise/hypothesis pair with a label and a legal domain."""

    id: str
    premise: str
    hypothesis: str
    label: NliLabel
    domain: LegalDomain

    def __post_init__(self) -> None:
        if not self.premise or not self.premise.strip():
            raise SchemaError(f"record {self.id}: empty premise", record_id=self.id)
        if not self.hypothesis or not self.hypothesis.strip():
            raise SchemaError(f"record {self.id}: empty hypothesis", record_id=self.id)


@dataclass(frozen=True)
class CorpusStats:
    """Distribution statistics over the two corpora."""

    span_counts: Mapping[EntityKind, int]
    total_spans: int
    nli_counts: Mapping[LegalDomain, Mapping[NliLabel, int]]
    domain_totals: Mapping[LegalDomain, int]
    total_nli: int

    def to_json_dict(self) -> dict:
        domains = sorted(self.nli_counts, key=lambda d: d.sort_key)
        return {
            "ner": {
                "span_counts": {k.label: self.span_counts[k] for k in EntityKind},
                "total_spans": self.total_spans,
            },
            "nli": {
                "by_domain": {
                    d.name: {
                        "by_label": {lab.surface: self.nli_counts[d].get(lab, 0) for lab in NliLabel},
                        "total": self.domain_totals[d],
                    }
                    for d in domains
                },
                "total": self.total_nli,
            },
        }


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _mapped(obj: Mapping, canonical: str, field_map: Mapping[str, str] | None):
    key = field_map.get(canonical, canonical) if field_map else canonical
    return obj.get(key)


def ner_record_to_dict(record: NerRecord) -> dict:
    out: dict = {
        "id": record.id,
        "tokens": list(record.tokens),
        "ner_tags": [str(t) for t in record.tags],
    }
    if record.cause_of_action is not None:
        out["cause_of_action"] = record.cause_of_action
    if record.industry is not None:
        out["industry"] = record.industry
    if record.provenance is not Provenance.UNKNOWN:
        out["provenance"] = record.provenance.value
    return out


def ner_record_from_dict(obj: Mapping, *, field_map: Mapping[str, str] | None = None,
                         default_id: str | None = None) -> NerRecord:
    rec_id = _mapped(obj, "id", field_map)
    if rec_id is None:
        if default_id is None:
            raise SchemaError("missing id field")
        rec_id = default_id
    tokens = _mapped(obj, "tokens", field_map)
    if not isinstance(tokens, list):
        raise SchemaError(f"record {rec_id}: missing or non-list tokens field", record_id=str(rec_id))
    raw_tags = _mapped(obj, "ner_tags", field_map)
    if not isinstance(raw_tags, list):
        raise SchemaError(f"record {rec_id}: missing or non-list ner_tags field", record_id=str(rec_id))
    tags = []
    for t in raw_tags:
        if not isinstance(t, str):
            raise TagError(f"record {rec_id}: non-string tag {t!r} (integer-coded tags need a label mapping)")
        tags.append(parse_tag(t))
    coa = _mapped(obj, "cause_of_action", field_map)
    industry = _mapped(obj, "industry", field_map)
    prov_raw = _mapped(obj, "provenance", field_map)
    provenance = Provenance.from_string(prov_raw) if prov_raw is not None else Provenance.UNKNOWN
    return NerRecord(
        id=str(rec_id),
        tokens=tuple(str(t) for t in tokens),
        tags=tuple(tags),
        cause_of_action=coa,
        industry=industry,
        provenance=provenance,
    )


def nli_record_to_dict(record: NliRecord) -> dict:
    return {
        "id": record.id,
        "premise": record.premise,
        "hypothesis": record.hypothesis,
        "label": record.label.surface,
        "legal_act": record.domain.name,
    }


def nli_record_from_dict(obj: Mapping, *, field_map: Mapping[str, str] | None = None,
                         default_id: str | None = None) -> NliRecord:
    rec_id = _mapped(obj, "id", field_map)
    if rec_id is None:
        if default_id is None:
            raise SchemaError("missing id field")
        rec_id = default_id
    premise = _mapped(obj, "premise", field_map)
    hypothesis = _mapped(obj, "hypothesis", field_map)
    if not premise:
        raise SchemaError(f"record {rec_id}: missing premise", record_id=str(rec_id))
    if not hypothesis:
        raise SchemaError(f"record {rec_id}: missing hypothesis", record_id=str(rec_id))
    label_raw = _mapped(obj, "label", field_map)
    if label_raw is None:
        raise SchemaError(f"record {rec_id}: missing label", record_id=str(rec_id))
    domain_raw = _mapped(obj, "legal_act", field_map)
    if domain_raw is None:
        raise SchemaError(f"record {rec_id}: missing legal_act", record_id=str(rec_id))
    return NliRecord(
        id=str(rec_id),
        premise=str(premise),
        hypothesis=str(hypothesis),
        label=NliLabel.from_string(str(label_raw)),
        domain=LegalDomain.from_string(str(domain_raw)),
    )


# ---------------------------------------------------------------------------
# loaders / writers
# ---------------------------------------------------------------------------

def _iter_jsonl(path: Path) -> Iterable[tuple[int, dict]]:
    with open(path, "r", encoding="utf-8-sig") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaError(f"invalid JSON: {e}", line=lineno) from e
            if not isinstance(obj, dict):
                raise SchemaError("line is not a JSON object", line=lineno)
            yield lineno, obj


def load_ner(path: str | Path, fmt: str = "jsonl",
             field_map: Mapping[str, str] | None = None) -> list[NerRecord]:
    """Load token-level records from a JSONL or CoNLL file, in file order."""
    path = Path(path)
    if fmt == "jsonl":
        return _load_ner_jsonl(path, field_map)
    if fmt == "conll":
        return _load_ner_conll(path)
    raise ValueError(f"unknown format: {fmt!r} (expected 'jsonl' or 'conll')")


def _load_ner_jsonl(path: Path, field_map: Mapping[str, str] | None) -> list[NerRecord]:
    records = []
    for lineno, obj in _iter_jsonl(path):
        try:
            records.append(ner_record_from_dict(obj, field_map=field_map, default_id=str(len(records))))
        except SchemaError as e:
            raise SchemaError(str(e), line=lineno, record_id=e.record_id) from e
        except TagError as e:
            raise TagError(str(e), line=lineno) from e
    return records


def _load_ner_conll(path: Path) -> list[NerRecord]:
    records: list[NerRecord] = []
    tokens: list[str] = []
    tags: list[BioTag] = []

    def flush() -> None:
        nonlocal tokens, tags
        if tokens:
            records.append(NerRecord(id=str(len(records)), tokens=tuple(tokens), tags=tuple(tags)))
            tokens, tags = [], []

    with open(path, "r", encoding="utf-8-sig") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                flush()
                continue
            fields = line.split("\t") if "\t" in line else line.split()
            if len(fields) != 2 or not fields[0]:
                raise SchemaError(f"expected 'token<TAB>tag', got {line!r}", line=lineno)
            try:
                tag = parse_tag(fields[1])
            except TagError as e:
                raise TagError(str(e), line=lineno) from e
            tokens.append(fields[0])
            tags.append(tag)
    flush()
    return records


def save_ner(records: Sequence[NerRecord], path: str | Path, fmt: str = "jsonl") -> None:
    """Write token-level records as JSONL or CoNLL, UTF-8 with LF endings."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if fmt == "jsonl":
            for r in records:
                fh.write(json.dumps(ner_record_to_dict(r), ensure_ascii=False) + "\n")
        elif fmt == "conll":
            for r in records:
                for token, tag in zip(r.tokens, r.tags):
                    fh.write(f"{token}\t{tag}\n")
                fh.write("\n")
        else:
            raise ValueError(f"unknown format: {fmt!r} (expected 'jsonl' or 'conll')")


def load_nli(path: str | Path, field_map: Mapping[str, str] | None = None) -> list[NliRecord]:
    """Load premise/hypothesis records from a JSONL file, in file order."""
    records = []
    for lineno, obj in _iter_jsonl(Path(path)):
        try:
            records.append(nli_record_from_dict(obj, field_map=field_map, default_id=str(len(records))))
        except SchemaError as e:
            raise SchemaError(str(e), line=lineno, record_id=e.record_id) from e
        except LabelError as e:
            raise LabelError(str(e), line=lineno) from e
    return records


def save_nli(records: Sequence[NliRecord], path: str | Path) -> None:
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(json.dumps(nli_record_to_dict(r), ensure_ascii=False) + "\n")


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------

def compute_stats(ner: Sequence[NerRecord], nli: Sequence[NliRecord],
                  policy: RepairPolicy = RepairPolicy.PROMOTE) -> CorpusStats:
    """Count decoded entity spans per kind and label/domain buckets.

    Spans are decoded with ``policy`` (PROMOTE by default, so records with
    stray ``I-`` tags still contribute; on a well-formed corpus the policy
    makes no difference).
    """
    span_counts: dict[EntityKind, int] = {k: 0 for k in EntityKind}
    for record in ner:
        for span in decode_spans(record.tags, policy):
            span_counts[span.kind] += 1
    total_spans = sum(span_counts.values())

    nli_counts: dict[LegalDomain, dict[NliLabel, int]] = {}
    domain_totals: dict[LegalDomain, int] = {}
    for record in nli:
        bucket = nli_counts.setdefault(record.domain, {lab: 0 for lab in NliLabel})
        bucket[record.label] += 1
        domain_totals[record.domain] = domain_totals.get(record.domain, 0) + 1

    return CorpusStats(
        span_counts=span_counts,
        total_spans=total_spans,
        nli_counts=nli_counts,
        domain_totals=domain_totals,
        total_nli=len(nli),
    )
