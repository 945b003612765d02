"""Model-inference plumbing.

Provides a uniform contract over anything that can tag tokens or label a
premise/hypothesis pair: an HTTP client for chat-completion endpoints,
few-shot prompt assembly, total parsers that turn free-form model text into
tags and labels, and a batch runner that repeats calls and keeps results
keyed by (input id, repeat index).

Chat backends implement one method, ``complete(prompt) -> str``; the
scripted variants answer from a fixed rule table so that every flow in this
package can run offline and deterministically.
"""

from __future__ import annotations

import enum
import os
import random
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Mapping, Protocol, Sequence

import requests

from .bio import (
    OUTSIDE,
    BioTag,
    EntityKind,
    EntitySpan,
    RepairPolicy,
    decode_spans,
    encode_spans,
    parse_tag,
    validate,
)
from .corpus import NerRecord, NliLabel, NliRecord
from .errors import (
    AuthError,
    BackendError,
    HttpStatusError,
    PromptError,
    RequestTimeoutError,
    ResponseFormatError,
    TagError,
    TransportError,
    UnparseableLabelError,
)

__all__ = [
    "Task",
    "BackendConfig",
    "FewShotSpec",
    "PromptSpec",
    "TaggedPrediction",
    "PredictionResult",
    "ChatBackend",
    "HttpChatBackend",
    "ScriptedChatBackend",
    "NerTagger",
    "NliClassifier",
    "FewShotNerTagger",
    "FewShotNliClassifier",
    "ScriptedNerTagger",
    "ScriptedNliClassifier",
    "build_fewshot_prompt",
    "chat_complete",
    "parse_ner_output",
    "parse_nli_output",
    "predict_batch",
    "span_confidence",
]


class Task(enum.Enum):
    NER = "ner"
    NLI = "nli"


DEFAULT_RESPONSE_PATH: tuple[str | int, ...] = ("choices", 0, "message", "content")


@dataclass(frozen=True)
class BackendConfig:
    """Connection settings for a chat-completion endpoint.

    The credential is read from the named environment variable at call time
    and is never part of the serialized config.
    """

    endpoint: str
    model: str
    credential_env: str = "OPENAI_API_KEY"
    timeout: float = 30.0
    retries: int = 3
    backoff: float = 0.5
    max_concurrency: int = 4
    temperature: float = 0.7
    response_path: tuple[str | int, ...] = DEFAULT_RESPONSE_PATH

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.max_concurrency < 1:
            raise ValueError(f"max_concurrency must be >= 1, got {self.max_concurrency}")
        object.__setattr__(self, "response_path", tuple(self.response_path))

    def to_json_dict(self) -> dict:
        return {
            "endpoint": self.endpoint,
            "model": self.model,
            "credential_env": self.credential_env,
            "timeout": self.timeout,
            "retries": self.retries,
            "backoff": self.backoff,
            "max_concurrency": self.max_concurrency,
            "temperature": self.temperature,
            "response_path": list(self.response_path),
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "BackendConfig":
        kwargs = dict(obj)
        if "response_path" in kwargs:
            kwargs["response_path"] = tuple(kwargs["response_path"])
        return cls(**kwargs)


@dataclass(frozen=True)
class FewShotSpec:
    """How many examples to show, how often to repeat each call, and the seed
    driving example sampling."""

    task: Task
    shots: int = 9
    seed: int = 0
    repeats: int = 5

    def __post_init__(self) -> None:
        if self.shots < 0:
            raise ValueError(f"shots must be >= 0, got {self.shots}")
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")


@dataclass(frozen=True)
class PromptSpec:
    """A structured prompt: instructions, label inventory, worked examples,
    and the query input, rendered in that order with the input last."""

    instructions: str
    labels: str
    examples: tuple[str, ...]
    input: str

    def __post_init__(self) -> None:
        if not self.input.strip():
            raise PromptError("prompt input section must be nonempty")
        object.__setattr__(self, "examples", tuple(self.examples))

    def render(self) -> str:
        blocks = [self.instructions]
        if self.labels:
            blocks.append(f"Labels: {self.labels}")
        for i, example in enumerate(self.examples, start=1):
            blocks.append(f"Example {i}:\n{example}")
        blocks.append(self.input)
        return "\n\n".join(blocks)

    @property
    def text(self) -> str:
        return self.render()


NER_INSTRUCTIONS = (
    "You are labeling legal text for violation entities. For each token of "
    "the Input sentence, write one line containing the token, a space, and "
    "its IOB2 tag. Use B- for the first token of an entity and I- for the "
    "rest; use O for tokens outside any entity. After the Output line, write "
    "the tag lines and nothing else."
)

NLI_INSTRUCTIONS = (
    "You are deciding whether a first-person account is covered by summarized "
    "legal grounds. Given the Premise (the grounds) and the Hypothesis (the "
    "account), answer with exactly one word: entailed if the premise supports "
    "the hypothesis, contradict if the hypothesis contradicts the premise, or "
    "neutral if neither holds."
)


def _ner_labels_inventory() -> str:
    tags = ["O"]
    for kind in EntityKind:
        tags.append(f"B-{kind.tag_name}")
        tags.append(f"I-{kind.tag_name}")
    return ", ".join(tags)


def _render_ner_block(tokens: Sequence[str], tags: Sequence[BioTag] | None) -> str:
    lines = [f"Input: {' '.join(tokens)}", "Output:"]
    if tags is not None:
        lines.extend(f"{token} {tag}" for token, tag in zip(tokens, tags))
    return "\n".join(lines)


def _render_nli_block(premise: str, hypothesis: str, label: NliLabel | None) -> str:
    lines = [f"Premise: {premise}", f"Hypothesis: {hypothesis}"]
    lines.append(f"Label: {label.surface}" if label is not None else "Label:")
    return "\n".join(lines)


def build_fewshot_prompt(task: Task, examples: Sequence, input_record, spec: FewShotSpec) -> PromptSpec:
    """Assemble a few-shot prompt: instructions, then the label inventory,
    then one block per example, then the unlabeled query input.

    For token tagging, ``input_record`` may be a :class:`NerRecord` or a
    plain token sequence; for pair labeling, a :class:`NliRecord` or a
    ``(premise, hypothesis)`` pair. Examples must be labeled records of the
    matching task.
    """
    if task is not spec.task:
        raise PromptError(f"spec is for task {spec.task.value}, got {task.value}")
    if len(examples) != spec.shots:
        raise PromptError(f"expected {spec.shots} examples, got {len(examples)}")

    if task is Task.NER:
        for ex in examples:
            if not isinstance(ex, NerRecord):
                raise PromptError(f"NER prompts need NerRecord examples, got {type(ex).__name__}")
        tokens = input_record.tokens if isinstance(input_record, NerRecord) else tuple(input_record)
        return PromptSpec(
            instructions=NER_INSTRUCTIONS,
            labels=_ner_labels_inventory(),
            examples=tuple(_render_ner_block(ex.tokens, ex.tags) for ex in examples),
            input=_render_ner_block(tokens, None),
        )

    for ex in examples:
        if not isinstance(ex, NliRecord):
            raise PromptError(f"NLI prompts need NliRecord examples, got {type(ex).__name__}")
    if isinstance(input_record, NliRecord):
        premise, hypothesis = input_record.premise, input_record.hypothesis
    else:
        premise, hypothesis = input_record
    return PromptSpec(
        instructions=NLI_INSTRUCTIONS,
        labels=", ".join(lab.surface for lab in NliLabel),
        examples=tuple(_render_nli_block(ex.premise, ex.hypothesis, ex.label) for ex in examples),
        input=_render_nli_block(premise, hypothesis, None),
    )


# ---------------------------------------------------------------------------
# HTTP chat completion
# ---------------------------------------------------------------------------

_RETRYABLE_STATUSES = frozenset({429, 500, 502, 503, 504})


def _extract_response_text(body, path: Sequence[str | int], raw: str) -> str:
    node = body
    for step in path:
        try:
            node = node[step]
        except (KeyError, IndexError, TypeError):
            raise ResponseFormatError(
                f"response body missing field at path {list(path)}", excerpt=raw[:200]
            ) from None
    if not isinstance(node, str):
        raise ResponseFormatError(
            f"response field at path {list(path)} is not text", excerpt=raw[:200]
        )
    return node


def chat_complete(config: BackendConfig, prompt: PromptSpec) -> str:
    """POST the prompt to the configured endpoint and return the model text.

    The request body is ``{model, temperature, messages: [{role, content}]}``
    with a single user message. Transient failures (connect errors,
    timeouts, 429 and 5xx statuses) are retried with exponential backoff up
    to the configured retry count; other failures raise immediately.
    """
    key = os.environ.get(config.credential_env)
    if not key:
        raise AuthError(f"credential environment variable {config.credential_env!r} is not set")
    payload = {
        "model": config.model,
        "temperature": config.temperature,
        "messages": [{"role": "user", "content": prompt.render()}],
    }
    headers = {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}

    last_error: BackendError | None = None
    for attempt in range(config.retries + 1):
        if attempt:
            time.sleep(config.backoff * (2 ** (attempt - 1)))
        try:
            resp = requests.post(config.endpoint, json=payload, headers=headers, timeout=config.timeout)
        except requests.Timeout as e:
            last_error = RequestTimeoutError(f"request timed out after {config.timeout}s: {e}")
            continue
        except requests.RequestException as e:
            last_error = TransportError(f"request failed: {e}")
            continue
        if resp.status_code in _RETRYABLE_STATUSES:
            last_error = HttpStatusError(f"endpoint answered {resp.status_code}", status=resp.status_code)
            continue
        if resp.status_code in (401, 403):
            raise AuthError(f"endpoint rejected the credential ({resp.status_code})")
        if not (200 <= resp.status_code < 300):
            raise HttpStatusError(f"endpoint answered {resp.status_code}", status=resp.status_code)
        try:
            body = resp.json()
        except ValueError:
            raise ResponseFormatError("response body is not JSON", excerpt=resp.text[:200]) from None
        return _extract_response_text(body, config.response_path, resp.text)
    assert last_error is not None
    raise last_error


class ChatBackend(Protocol):
    def complete(self, prompt: PromptSpec) -> str: ...


class HttpChatBackend:
    """Chat backend over an HTTP chat-completion endpoint."""

    def __init__(self, config: BackendConfig):
        self.config = config

    def complete(self, prompt: PromptSpec) -> str:
        return chat_complete(self.config, prompt)


class ScriptedChatBackend:
    """Deterministic backend answering from substring rules.

    ``rules`` is an ordered list of (contains, reply) pairs; the first rule
    whose ``contains`` text occurs in the rendered prompt wins. ``default``
    answers anything unmatched; with no default, unmatched prompts raise.
    A callable ``fn(prompt)`` overrides the rule table entirely.
    """

    def __init__(self, rules: Sequence[tuple[str, str]] = (), default: str | None = None,
                 fn: Callable[[PromptSpec], str] | None = None):
        self.rules = list(rules)
        self.default = default
        self.fn = fn
        self.calls: list[PromptSpec] = []

    def complete(self, prompt: PromptSpec) -> str:
        self.calls.append(prompt)
        if self.fn is not None:
            return self.fn(prompt)
        text = prompt.render()
        for contains, reply in self.rules:
            if contains in text:
                return reply
        if self.default is not None:
            return self.default
        raise BackendError("no scripted response matches the prompt")


# ---------------------------------------------------------------------------
# output parsing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TaggedPrediction:
    """Per-token tags recovered from raw model text, with diagnostics for
    every coercion that was needed along the way."""

    tags: tuple[BioTag, ...]
    confidences: tuple[float, ...] | None
    raw: str
    diagnostics: tuple[str, ...] = ()


_OUTPUT_FENCE = re.compile(r"(?i)\boutput\b\s*:")


def parse_ner_output(raw: str, tokens: Sequence[str], policy: RepairPolicy = RepairPolicy.PROMOTE) -> TaggedPrediction:
    """Recover one tag per input token from free-form model text. Total:
    never raises, whatever the text looks like.

    Parsing anchors on the last ``Output:`` fence when present. Each
    nonempty line contributes the tag in its last whitespace-separated
    field; unrecognized tags become O. The sequence is truncated or padded
    with O to the token count, then repaired under ``policy`` (STRICT keeps
    the parsed tags verbatim and only records scheme violations, since this
    parser must always return a usable sequence).
    """
    diagnostics: list[str] = []
    fences = list(_OUTPUT_FENCE.finditer(raw))
    section = raw[fences[-1].end():] if fences else raw
    lines = [line for line in section.splitlines() if line.strip()]

    tags: list[BioTag] = []
    if len(lines) == 1 and len(tokens) > 1:
        # tolerate a single space-separated tag list ("O O B-LAW I-LAW")
        fields = lines[0].split()
        try:
            tags = [parse_tag(f) for f in fields]
            diagnostics.append("single-line tag list accepted")
        except TagError:
            tags = []
    if not tags:
        for i, line in enumerate(lines):
            candidate = line.split()[-1]
            try:
                tags.append(parse_tag(candidate))
            except TagError:
                tags.append(OUTSIDE)
                diagnostics.append(f"output line {i}: unrecognized tag {candidate!r}, using O")

    if len(tags) > len(tokens):
        diagnostics.append(f"output has {len(tags)} tags for {len(tokens)} tokens, truncated")
        tags = tags[: len(tokens)]
    elif len(tags) < len(tokens):
        diagnostics.append(f"output has {len(tags)} tags for {len(tokens)} tokens, padded with O")
        tags = tags + [OUTSIDE] * (len(tokens) - len(tags))

    if policy is RepairPolicy.STRICT:
        for violation in validate(tags):
            diagnostics.append(f"scheme violation at token {violation.index}: {violation.description}")
    else:
        repaired = encode_spans(decode_spans(tags, policy), len(tags))
        if repaired != tags:
            diagnostics.append(f"tag sequence repaired under {policy.value} policy")
            tags = repaired

    return TaggedPrediction(
        tags=tuple(tags),
        confidences=None,
        raw=raw,
        diagnostics=tuple(diagnostics),
    )


_LABEL_TOKENS: tuple[tuple[str, NliLabel], ...] = (
    ("entailment", NliLabel.ENTAILMENT),
    ("entailed", NliLabel.ENTAILMENT),
    ("contradiction", NliLabel.CONTRADICTION),
    ("contradict", NliLabel.CONTRADICTION),
    ("neutral", NliLabel.NEUTRAL),
)


def parse_nli_output(raw: str) -> NliLabel:
    """Find the earliest label token in the text, case-insensitively.

    Accepts the single-token surface forms and the long forms "entailment"
    and "contradiction". Raises :class:`UnparseableLabelError` when no label
    token occurs anywhere; callers decide the fallback.
    """
    low = raw.lower()
    best: tuple[int, NliLabel] | None = None
    for token, label in _LABEL_TOKENS:
        pos = low.find(token)
        if pos != -1 and (best is None or pos < best[0]):
            best = (pos, label)
    if best is None:
        excerpt = raw[:80]
        raise UnparseableLabelError(f"no label token found in model output: {excerpt!r}")
    return best[1]


def span_confidence(span: EntitySpan, confidences: Sequence[float] | None) -> float:
    """Mean per-token confidence over the span; 1.0 when no confidences exist."""
    if confidences is None:
        return 1.0
    window = confidences[span.start:span.end]
    return sum(window) / len(window)


# ---------------------------------------------------------------------------
# batch prediction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PredictionResult:
    """One model call's outcome, keyed by input id and repeat index."""

    input_id: str
    repeat: int
    raw: str | None = None
    tagged: TaggedPrediction | None = None
    label: NliLabel | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _example_rng(seed: int, input_id: str, repeat: int) -> random.Random:
    # string seeds hash via SHA-512 inside Random, stable across processes
    return random.Random(f"{seed}:{input_id}:{repeat}")


def predict_batch(backend: ChatBackend, spec: FewShotSpec, train_pool: Sequence,
                  inputs: Sequence, *, policy: RepairPolicy = RepairPolicy.PROMOTE,
                  max_concurrency: int | None = None) -> list[PredictionResult]:
    """Run ``spec.repeats`` independent predictions per input.

    Few-shot examples are freshly sampled from ``train_pool`` for every
    (input, repeat) pair, deterministically from the spec seed. The train
    pool must be id-disjoint from the inputs. Per-item backend failures are
    recorded on their result instead of aborting the batch. Results come
    back sorted by (input id, repeat index).
    """
    pool_ids = {r.id for r in train_pool}
    overlap = pool_ids & {r.id for r in inputs}
    if overlap:
        raise PromptError(f"train pool and inputs share record ids: {sorted(overlap)[:5]}")
    if spec.shots > len(train_pool):
        raise PromptError(f"cannot sample {spec.shots} examples from a pool of {len(train_pool)}")

    pool = list(train_pool)

    def run_one(record, repeat: int) -> PredictionResult:
        rng = _example_rng(spec.seed, record.id, repeat)
        examples = rng.sample(pool, spec.shots)
        prompt = build_fewshot_prompt(spec.task, examples, record, spec)
        try:
            raw = backend.complete(prompt)
        except BackendError as e:
            return PredictionResult(input_id=record.id, repeat=repeat,
                                    error=f"{type(e).__name__}: {e}")
        if spec.task is Task.NER:
            tagged = parse_ner_output(raw, record.tokens, policy)
            return PredictionResult(input_id=record.id, repeat=repeat, raw=raw, tagged=tagged)
        try:
            label = parse_nli_output(raw)
        except UnparseableLabelError as e:
            return PredictionResult(input_id=record.id, repeat=repeat, raw=raw,
                                    error=f"{type(e).__name__}: {e}")
        return PredictionResult(input_id=record.id, repeat=repeat, raw=raw, label=label)

    jobs = [(record, repeat) for record in inputs for repeat in range(spec.repeats)]
    workers = max_concurrency
    if workers is None:
        config = getattr(backend, "config", None)
        workers = config.max_concurrency if config is not None else 1
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool_exec:
            results = list(pool_exec.map(lambda job: run_one(*job), jobs))
    else:
        results = [run_one(record, repeat) for record, repeat in jobs]
    return sorted(results, key=lambda r: (r.input_id, r.repeat))


# ---------------------------------------------------------------------------
# classifier contracts for the pipeline
# ---------------------------------------------------------------------------

class NerTagger(Protocol):
    def predict_tags(self, tokens: Sequence[str]) -> TaggedPrediction: ...


class NliClassifier(Protocol):
    def classify(self, premise: str, hypothesis: str) -> NliLabel: ...


class FewShotNerTagger:
    """Token tagger backed by a chat backend with few-shot prompting."""

    def __init__(self, backend: ChatBackend, spec: FewShotSpec, train_pool: Sequence[NerRecord],
                 policy: RepairPolicy = RepairPolicy.PROMOTE):
        if spec.task is not Task.NER:
            raise PromptError("FewShotNerTagger needs a NER few-shot spec")
        self.backend = backend
        self.spec = spec
        self.train_pool = list(train_pool)
        self.policy = policy

    def predict_tags(self, tokens: Sequence[str]) -> TaggedPrediction:
        rng = _example_rng(self.spec.seed, " ".join(tokens), 0)
        if self.spec.shots > len(self.train_pool):
            raise PromptError(f"cannot sample {self.spec.shots} examples from a pool of {len(self.train_pool)}")
        examples = rng.sample(self.train_pool, self.spec.shots)
        prompt = build_fewshot_prompt(Task.NER, examples, tuple(tokens), self.spec)
        raw = self.backend.complete(prompt)
        prediction = parse_ner_output(raw, tokens, self.policy)
        if prediction.confidences is None:
            prediction = TaggedPrediction(
                tags=prediction.tags,
                confidences=None,
                raw=prediction.raw,
                diagnostics=prediction.diagnostics
                + ("no token probabilities from backend; span confidence defaults to 1.0",),
            )
        return prediction


class FewShotNliClassifier:
    """Pair classifier backed by a chat backend with few-shot prompting."""

    def __init__(self, backend: ChatBackend, spec: FewShotSpec, train_pool: Sequence[NliRecord]):
        if spec.task is not Task.NLI:
            raise PromptError("FewShotNliClassifier needs an NLI few-shot spec")
        self.backend = backend
        self.spec = spec
        self.train_pool = list(train_pool)

    def classify(self, premise: str, hypothesis: str) -> NliLabel:
        rng = _example_rng(self.spec.seed, f"{premise[:64]}|{hypothesis[:64]}", 0)
        if self.spec.shots > len(self.train_pool):
            raise PromptError(f"cannot sample {self.spec.shots} examples from a pool of {len(self.train_pool)}")
        examples = rng.sample(self.train_pool, self.spec.shots)
        prompt = build_fewshot_prompt(Task.NLI, examples, (premise, hypothesis), self.spec)
        return parse_nli_output(self.backend.complete(prompt))


class ScriptedNerTagger:
    """Tagger answering from a fixed table keyed by the space-joined tokens.

    ``table`` maps the joined token text to a tag-string list; optional
    ``confidences`` maps the same key to per-token confidence values.
    Unknown inputs get all-O tags.
    """

    def __init__(self, table: Mapping[str, Sequence[str]],
                 confidences: Mapping[str, Sequence[float]] | None = None):
        self.table = {k: [parse_tag(t) for t in v] for k, v in table.items()}
        self.confidences = {k: tuple(float(c) for c in v) for k, v in (confidences or {}).items()}

    def predict_tags(self, tokens: Sequence[str]) -> TaggedPrediction:
        key = " ".join(tokens)
        tags = self.table.get(key)
        diagnostics: tuple[str, ...] = ()
        if tags is None:
            tags = [OUTSIDE] * len(tokens)
            diagnostics = ("no scripted tags for input, using all O",)
        if len(tags) != len(tokens):
            raise BackendError(f"scripted tags for {key!r} have length {len(tags)}, expected {len(tokens)}")
        return TaggedPrediction(
            tags=tuple(tags),
            confidences=self.confidences.get(key),
            raw="",
            diagnostics=diagnostics,
        )


class ScriptedNliClassifier:
    """Classifier answering from substring rules over the premise and hypothesis.

    ``rules`` is an ordered list of dicts with optional ``premise_contains``
    and ``hypothesis_contains`` conditions plus a ``label``; the first rule
    whose conditions all hold wins, else ``default`` applies.
    """

    def __init__(self, rules: Sequence[Mapping] = (), default: str = "neutral"):
        self.rules = [
            (r.get("premise_contains"), r.get("hypothesis_contains"), NliLabel.from_string(r["label"]))
            for r in rules
        ]
        self.default = NliLabel.from_string(default)

    def classify(self, premise: str, hypothesis: str) -> NliLabel:
        for premise_sub, hypothesis_sub, label in self.rules:
            if premise_sub is not None and premise_sub not in premise:
                continue
            if hypothesis_sub is not None and hypothesis_sub not in hypothesis:
                continue
            return label
        return self.default
