"""Detect-then-match flow over unstructured text.

Stage one tags the input tokens and keeps VIOLATION spans whose confidence
clears the configured threshold. Stage two compares each qualifying input
pair-wise against a corpus of settled cases: the case summary is the
premise, the full input text is the hypothesis, and a candidate is flagged
only when the aggregated label is entailment. Everything below that
threshold, and every non-VIOLATION span, stays in the report but never
triggers a comparison.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .backends import NerTagger, NliClassifier, span_confidence
from .bio import EntityKind, RepairPolicy, decode_spans
from .corpus import LegalDomain, NliLabel, _iter_jsonl
from .datagen import tokenize
from .errors import BackendError, PipelineError, SchemaError, UnparseableLabelError

__all__ = [
    "SettlementCase",
    "PipelineConfig",
    "SpanInfo",
    "MatchCandidate",
    "InputReport",
    "PipelineReport",
    "load_cases",
    "save_cases",
    "identify",
    "resolve",
    "run",
]


@dataclass(frozen=True)
class SettlementCase:
    """A resolved class-action case: its summarized legal grounds plus metadata."""

    id: str
    summary: str
    domain: LegalDomain
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.summary or not self.summary.strip():
            raise SchemaError(f"case {self.id}: empty summary", record_id=self.id)

    def to_json_dict(self) -> dict:
        return {"id": self.id, "summary": self.summary,
                "domain": self.domain.name, "metadata": dict(self.metadata)}


def load_cases(path: str | Path) -> list[SettlementCase]:
    cases = []
    for lineno, obj in _iter_jsonl(Path(path)):
        try:
            cases.append(SettlementCase(
                id=str(obj.get("id", len(cases))),
                summary=obj.get("summary", ""),
                domain=LegalDomain.from_string(obj.get("domain", "")),
                metadata={str(k): str(v) for k, v in (obj.get("metadata") or {}).items()},
            ))
        except SchemaError as e:
            raise SchemaError(str(e), line=lineno, record_id=e.record_id) from e
    return cases


def save_cases(cases: Sequence[SettlementCase], path: str | Path) -> None:
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        for case in cases:
            fh.write(json.dumps(case.to_json_dict(), ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class PipelineConfig:
    """Thresholds and knobs for a pipeline run.

    ``tau`` is the minimum span confidence for a violation to qualify for
    resolution; it is an engine default, not a property of any dataset, and
    should be tuned per deployment.
    """

    tau: float = 0.5
    policy: RepairPolicy = RepairPolicy.PROMOTE
    nli_repeats: int = 1
    domains: frozenset[LegalDomain] | None = None
    max_concurrency: int = 1

    def __post_init__(self) -> None:
        if not (0.0 <= self.tau <= 1.0):
            raise ValueError(f"tau must be in [0, 1], got {self.tau}")
        if self.nli_repeats < 1:
            raise ValueError(f"nli_repeats must be >= 1, got {self.nli_repeats}")
        if self.domains is not None:
            object.__setattr__(self, "domains", frozenset(self.domains))


@dataclass(frozen=True)
class SpanInfo:
    """A detected span with its source text and threshold outcome."""

    kind: EntityKind
    start: int
    end: int
    text: str
    confidence: float
    qualified: bool

    def to_json_dict(self) -> dict:
        return {"kind": self.kind.label, "start": self.start, "end": self.end,
                "text": self.text, "confidence": self.confidence, "qualified": self.qualified}


@dataclass(frozen=True)
class MatchCandidate:
    """One (input, case) comparison outcome."""

    input_id: str
    case_id: str
    span: SpanInfo
    labels: tuple[NliLabel, ...]
    aggregated: NliLabel | None
    flagged: bool
    error: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "input_id": self.input_id,
            "case_id": self.case_id,
            "span": self.span.to_json_dict(),
            "labels": [lab.surface for lab in self.labels],
            "aggregated": self.aggregated.surface if self.aggregated else None,
            "flagged": self.flagged,
            "error": self.error,
        }


@dataclass(frozen=True)
class InputReport:
    input_id: str
    spans: tuple[SpanInfo, ...]
    comparisons: int
    candidates: tuple[MatchCandidate, ...]
    error: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "input_id": self.input_id,
            "spans": [s.to_json_dict() for s in self.spans],
            "comparisons": self.comparisons,
            "candidates": [c.to_json_dict() for c in self.candidates],
            "error": self.error,
        }


@dataclass(frozen=True)
class PipelineReport:
    inputs: tuple[InputReport, ...]
    n_inputs: int
    n_qualifying: int
    n_comparisons: int
    n_flagged: int
    n_failed: int

    def to_json_dict(self) -> dict:
        return {
            "inputs": [i.to_json_dict() for i in self.inputs],
            "totals": {
                "inputs": self.n_inputs,
                "qualifying_inputs": self.n_qualifying,
                "comparisons": self.n_comparisons,
                "flagged": self.n_flagged,
                "failed": self.n_failed,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, ensure_ascii=False)


def _detect_spans(tokens: Sequence[str], ner_backend: NerTagger, config: PipelineConfig) -> list[SpanInfo]:
    prediction = ner_backend.predict_tags(tokens)
    spans = decode_spans(prediction.tags, config.policy)
    infos = []
    for span in spans:
        confidence = span.confidence if span.confidence is not None else span_confidence(span, prediction.confidences)
        qualified = span.kind is EntityKind.VIOLATION and confidence >= config.tau
        infos.append(SpanInfo(
            kind=span.kind,
            start=span.start,
            end=span.end,
            text=" ".join(tokens[span.start:span.end]),
            confidence=confidence,
            qualified=qualified,
        ))
    return infos


def identify(tokens: Sequence[str], ner_backend: NerTagger, config: PipelineConfig) -> list[SpanInfo]:
    """Detect VIOLATION spans whose confidence reaches the threshold.

    Other entity kinds and sub-threshold violations are never returned here;
    :func:`run` still records them in its report.
    """
    if not tokens:
        raise PipelineError("cannot identify spans in an empty token list")
    return [s for s in _detect_spans(tokens, ner_backend, config) if s.qualified]


def _majority(labels: Sequence[NliLabel]) -> NliLabel:
    # ties resolve to neutral: never flag on ambiguity
    counts = Counter(labels)
    top = counts.most_common()
    if len(top) > 1 and top[0][1] == top[1][1]:
        return NliLabel.NEUTRAL
    return top[0][0]


def resolve(input_id: str, input_text: str, spans: Sequence[SpanInfo],
            cases: Sequence[SettlementCase], nli_backend: NliClassifier,
            config: PipelineConfig) -> list[MatchCandidate]:
    """Compare one input pair-wise against every candidate case.

    The premise is the case summary and the hypothesis is the full input
    text (detected spans ride along as evidence; they are routinely
    truncated and make for a weaker hypothesis on their own). A candidate is
    flagged only when the repeat-aggregated label is entailment; ties and
    unparseable outputs count as neutral. A backend failure marks that
    candidate errored without touching the others.
    """
    if not spans:
        raise PipelineError("resolve needs at least one qualifying span", input_id=input_id)
    evidence = max(spans, key=lambda s: (s.confidence, -s.start))
    candidates = [c for c in cases if config.domains is None or c.domain in config.domains]

    def compare(case: SettlementCase) -> MatchCandidate:
        labels: list[NliLabel] = []
        for _ in range(config.nli_repeats):
            try:
                labels.append(nli_backend.classify(case.summary, input_text))
            except UnparseableLabelError:
                labels.append(NliLabel.NEUTRAL)
            except BackendError as e:
                return MatchCandidate(
                    input_id=input_id, case_id=case.id, span=evidence,
                    labels=tuple(labels), aggregated=None, flagged=False,
                    error=f"{type(e).__name__}: {e}",
                )
        aggregated = _majority(labels)
        return MatchCandidate(
            input_id=input_id, case_id=case.id, span=evidence,
            labels=tuple(labels), aggregated=aggregated,
            flagged=aggregated is NliLabel.ENTAILMENT,
        )

    if config.max_concurrency > 1 and len(candidates) > 1:
        with ThreadPoolExecutor(max_workers=config.max_concurrency) as pool:
            results = list(pool.map(compare, candidates))
    else:
        results = [compare(case) for case in candidates]
    return sorted(results, key=lambda c: (c.input_id, c.case_id))


def run(inputs: Sequence[tuple[str, str]], cases: Sequence[SettlementCase],
        ner_backend: NerTagger, nli_backend: NliClassifier,
        config: PipelineConfig) -> PipelineReport:
    """Identify then resolve every input; inputs with no qualifying span make
    zero comparisons. Deterministic whenever the backends are."""
    ids = [input_id for input_id, _ in inputs]
    if len(set(ids)) != len(ids):
        raise PipelineError("input ids must be unique")

    candidate_count = len([c for c in cases if config.domains is None or c.domain in config.domains])
    reports: list[InputReport] = []
    for input_id, text in inputs:
        tokens = tokenize(text)
        if not tokens:
            reports.append(InputReport(input_id=input_id, spans=(), comparisons=0,
                                       candidates=(), error="input has no tokens"))
            continue
        try:
            spans = _detect_spans(tokens, ner_backend, config)
        except BackendError as e:
            reports.append(InputReport(input_id=input_id, spans=(), comparisons=0,
                                       candidates=(), error=f"{type(e).__name__}: {e}"))
            continue
        qualifying = [s for s in spans if s.qualified]
        if not qualifying:
            reports.append(InputReport(input_id=input_id, spans=tuple(spans),
                                       comparisons=0, candidates=()))
            continue
        candidates = resolve(input_id, text, qualifying, cases, nli_backend, config)
        reports.append(InputReport(
            input_id=input_id,
            spans=tuple(spans),
            comparisons=candidate_count,
            candidates=tuple(candidates),
        ))

    return PipelineReport(
        inputs=tuple(reports),
        n_inputs=len(reports),
        n_qualifying=sum(1 for r in reports if any(s.qualified for s in r.spans)),
        n_comparisons=sum(r.comparisons for r in reports),
        n_flagged=sum(1 for r in reports for c in r.candidates if c.flagged),
        n_failed=sum(1 for r in reports if r.error is not None),
    )
