"""IOB2 tag scheme: parsing, validation, span decoding/encoding, and repair.

The tag grammar is ``O | (B|I) "-" KIND`` where KIND is one of the four
violation-detection entity kinds. Prefixes are case-sensitive; kinds are
matched after underscore/space normalization, so ``B-VIOLATED_BY`` and
``B-VIOLATED BY`` name the same tag (the underscore form is always emitted,
because CoNLL tags must be whitespace-free).

Decoding is policy-driven: a *dangling* ``I-`` tag (one with no compatible
preceding tag) is either rejected, promoted to a span start, or dropped.
Model predictions are usually decoded with :data:`RepairPolicy.PROMOTE`,
since generative taggers frequently miss the ``B-`` token at span starts.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import SchemeError, SpanError, TagError


class EntityKind(enum.Enum):
    """The four entity kinds used for violation detection."""

    LAW = "LAW"
    VIOLATION = "VIOLATION"
    VIOLATED_BY = "VIOLATED BY"
    VIOLATED_ON = "VIOLATED ON"

    @classmethod
    def from_string(cls, s: str) -> "EntityKind":
        """Parse a kind name, accepting space and underscore forms, any case."""
        key = s.strip().upper().replace("_", " ")
        for kind in cls:
            if kind.value == key:
                return kind
        raise TagError(f"unknown entity kind: {s!r}")

    @property
    def label(self) -> str:
        """Display form with spaces, e.g. ``"VIOLATED BY"``."""
        return self.value

    @property
    def tag_name(self) -> str:
        """Tag-safe form with underscores, e.g. ``"VIOLATED_BY"``."""
        return self.name


@dataclass(frozen=True)
class BioTag:
    """One IOB2 tag: outside, or a (prefix, kind) pair.

    ``prefix`` is ``"B"``, ``"I"``, or ``None`` for outside; ``kind`` is set
    exactly when ``prefix`` is.
    """

    prefix: str | None = None
    kind: EntityKind | None = None

    def __post_init__(self) -> None:
        if (self.prefix is None) != (self.kind is None):
            raise TagError(f"prefix and kind must be set together, got ({self.prefix!r}, {self.kind!r})")
        if self.prefix not in (None, "B", "I"):
            raise TagError(f"invalid tag prefix: {self.prefix!r}")

    @classmethod
    def outside(cls) -> "BioTag":
        return OUTSIDE

    @classmethod
    def begin(cls, kind: EntityKind) -> "BioTag":
        return cls("B", kind)

    @classmethod
    def inside(cls, kind: EntityKind) -> "BioTag":
        return cls("I", kind)

    @property
    def is_outside(self) -> bool:
        return self.prefix is None

    @property
    def is_begin(self) -> bool:
        return self.prefix == "B"

    @property
    def is_inside(self) -> bool:
        return self.prefix == "I"

    def __str__(self) -> str:
        if self.prefix is None:
            return "O"
        return f"{self.prefix}-{self.kind.tag_name}"


OUTSIDE = BioTag()


def parse_tag(s: str) -> BioTag:
    """Parse a tag string into a :class:`BioTag`.

    >>> str(parse_tag("B-VIOLATED BY"))
    'B-VIOLATED_BY'
    """
    t = s.strip()
    if t == "O":
        return OUTSIDE
    prefix, sep, kind = t.partition("-")
    if sep and prefix in ("B", "I"):
        return BioTag(prefix, EntityKind.from_string(kind))
    raise TagError(f"not a valid IOB2 tag: {s!r}")


def format_tag(tag: BioTag) -> str:
    return str(tag)


@dataclass(frozen=True)
class EntitySpan:
    """A decoded entity span over token indices, end-exclusive."""

    kind: EntityKind
    start: int
    end: int
    confidence: float | None = None

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.end):
            raise SpanError(f"invalid span bounds [{self.start}, {self.end})")
        if self.confidence is not None and not (0.0 <= self.confidence <= 1.0):
            raise SpanError(f"confidence {self.confidence} outside [0, 1]")


class RepairPolicy(enum.Enum):
    """How to treat a dangling ``I-`` tag while decoding.

    STRICT rejects the sequence, PROMOTE treats the tag as a span start,
    DROP treats it as outside.
    """

    STRICT = "strict"
    PROMOTE = "promote"
    DROP = "drop"


@dataclass(frozen=True)
class SchemeViolation:
    """One diagnosed scheme problem: the token index and what is wrong."""

    index: int
    description: str


def decode_spans(tags: list[BioTag] | tuple[BioTag, ...], policy: RepairPolicy = RepairPolicy.STRICT) -> list[EntitySpan]:
    """Decode a tag sequence into maximal, sorted, non-overlapping spans.

    A span starts at a ``B-`` tag (or at a promoted dangling ``I-`` under
    PROMOTE) and extends through consecutive ``I-`` tags of the same kind.
    An outside tag or a kind change terminates the open span.

    Raises :class:`SchemeError` only under STRICT, at the first dangling
    ``I-`` tag.
    """
    spans: list[EntitySpan] = []
    open_kind: EntityKind | None = None
    open_start = 0

    def close(end: int) -> None:
        nonlocal open_kind
        if open_kind is not None:
            spans.append(EntitySpan(open_kind, open_start, end))
            open_kind = None

    for i, tag in enumerate(tags):
        if tag.is_begin:
            close(i)
            open_kind = tag.kind
            open_start = i
        elif tag.is_inside:
            if tag.kind == open_kind:
                continue
            # dangling: no open span of this kind to continue
            if policy is RepairPolicy.STRICT:
                raise SchemeError(f"dangling I-{tag.kind.tag_name} at index {i}", index=i)
            close(i)
            if policy is RepairPolicy.PROMOTE:
                open_kind = tag.kind
                open_start = i
        else:
            close(i)
    close(len(tags))
    return spans


def encode_spans(spans: list[EntitySpan] | tuple[EntitySpan, ...], length: int) -> list[BioTag]:
    """Encode non-overlapping spans into an IOB2 sequence of ``length`` tags.

    Inverse of strict decoding: ``decode_spans(encode_spans(s, n)) == s``.
    """
    if length < 0:
        raise SpanError(f"negative sequence length {length}")
    ordered = sorted(spans, key=lambda s: (s.start, s.end))
    prev_end = 0
    for span in ordered:
        if span.end > length:
            raise SpanError(f"span [{span.start}, {span.end}) exceeds sequence length {length}")
        if span.start < prev_end:
            raise SpanError(f"overlapping spans at index {span.start}")
        prev_end = span.end
    tags: list[BioTag] = [OUTSIDE] * length
    for span in ordered:
        tags[span.start] = BioTag.begin(span.kind)
        for i in range(span.start + 1, span.end):
            tags[i] = BioTag.inside(span.kind)
    return tags


def validate(tags: list[BioTag] | tuple[BioTag, ...]) -> list[SchemeViolation]:
    """Diagnose every dangling ``I-`` tag in a sequence.

    Returns an empty list exactly when strict decoding succeeds. A tag is
    dangling when it is ``I-KIND`` and the tag before it is not ``B-KIND``
    or ``I-KIND``.
    """
    violations: list[SchemeViolation] = []
    for i, tag in enumerate(tags):
        if not tag.is_inside:
            continue
        prev = tags[i - 1] if i > 0 else OUTSIDE
        if prev.is_outside:
            violations.append(SchemeViolation(i, f"I-{tag.kind.tag_name} with no preceding entity tag"))
        elif prev.kind != tag.kind:
            violations.append(
                SchemeViolation(i, f"I-{tag.kind.tag_name} after {prev.kind.tag_name} tag (kind mismatch)")
            )
    return violations
