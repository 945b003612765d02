"""Evaluation and validation arithmetic.

Covers entity-level precision/recall/F1 with exact-span matching, label-level
macro-F1 with a confusion matrix, error-class counting, chance-corrected
annotator agreement, mean/std aggregation over repeated runs, and
machine-vs-human text-similarity statistics.

Conventions, fixed here so every report is comparable:

* zero-denominator precision, recall, and F1 are 0, never NaN;
* label-level macro-F1 averages all three classes even when a class is
  absent from a fold (the absent class contributes 0);
* the overall entity score is micro-averaged over spans; a macro average
  over kinds is reported alongside it;
* kappa on degenerate input (chance agreement 1) is 1 when the raters agree
  everywhere, else 0.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

from .bio import EntityKind, RepairPolicy, decode_spans
from .corpus import NerRecord, NliLabel
from .errors import AggregationError, EvaluationError

__all__ = [
    "PrfScores",
    "NerEvalReport",
    "ConfusionMatrix",
    "ErrorClassReport",
    "RunAggregate",
    "AgreementReport",
    "TextStatsReport",
    "CorpusTextStats",
    "f1_from_pr",
    "eval_ner",
    "eval_nli",
    "error_classes",
    "cohen_kappa",
    "aggregate_runs",
    "text_stats",
    "agreement_report",
    "crude_surface_tags",
    "NLI_LABEL_ORDER",
]


def f1_from_pr(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if not (0.0 <= precision <= 1.0):
        raise ValueError(f"precision {precision} outside [0, 1]")
    if not (0.0 <= recall <= 1.0):
        raise ValueError(f"recall {recall} outside [0, 1]")
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class PrfScores:
    """Precision/recall/F1 plus the gold support behind them."""

    precision: float
    recall: float
    f1: float
    support: int

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "PrfScores":
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        return cls(precision, recall, f1_from_pr(precision, recall), tp + fn)

    def to_json_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall,
                "f1": self.f1, "support": self.support}


@dataclass(frozen=True)
class NerEvalReport:
    """Micro scores over all spans, per-kind breakdown, and the kind macro-F1."""

    overall: PrfScores
    per_kind: Mapping[EntityKind, PrfScores]
    macro_f1: float

    def to_json_dict(self) -> dict:
        out = self.overall.to_json_dict()
        out["macro_f1"] = self.macro_f1
        out["per_kind"] = {k.label: self.per_kind[k].to_json_dict() for k in EntityKind}
        return out


def _span_key_sets(tag_seqs: Sequence[Sequence],
                   policy: RepairPolicy) -> list[set[tuple[EntityKind, int, int]]]:
    out = []
    for tags in tag_seqs:
        spans = decode_spans(tuple(tags), policy)
        out.append({(s.kind, s.start, s.end) for s in spans})
    return out


def eval_ner(gold: Sequence[NerRecord], pred: Sequence[Sequence],
             policy: RepairPolicy = RepairPolicy.PROMOTE) -> NerEvalReport:
    """Exact-span evaluation: a predicted span counts iff its (kind, start,
    end) triple matches a gold span of the same record.

    ``pred`` is one tag sequence per gold record, aligned by position and
    token length. Both sides are decoded under ``policy``; on well-formed
    gold the policy only affects predictions.
    """
    if len(pred) != len(gold):
        raise EvaluationError(f"{len(gold)} gold records but {len(pred)} predictions")
    for record, tags in zip(gold, pred):
        if len(tags) != len(record.tokens):
            raise EvaluationError(
                f"record {record.id}: {len(record.tokens)} tokens but {len(tags)} predicted tags"
            )

    gold_sets = _span_key_sets([r.tags for r in gold], policy)
    pred_sets = _span_key_sets(pred, policy)

    tp: dict[EntityKind, int] = {k: 0 for k in EntityKind}
    fp: dict[EntityKind, int] = {k: 0 for k in EntityKind}
    fn: dict[EntityKind, int] = {k: 0 for k in EntityKind}
    for gset, pset in zip(gold_sets, pred_sets):
        for kind, _, _ in gset & pset:
            tp[kind] += 1
        for kind, _, _ in pset - gset:
            fp[kind] += 1
        for kind, _, _ in gset - pset:
            fn[kind] += 1

    per_kind = {k: PrfScores.from_counts(tp[k], fp[k], fn[k]) for k in EntityKind}
    overall = PrfScores.from_counts(sum(tp.values()), sum(fp.values()), sum(fn.values()))
    # macro over kinds that occur in gold or predictions; empty kinds would
    # only dilute the average with structural zeros
    active = [k for k in EntityKind if tp[k] + fp[k] + fn[k] > 0]
    macro_f1 = sum(per_kind[k].f1 for k in active) / len(active) if active else 0.0
    return NerEvalReport(overall=overall, per_kind=per_kind, macro_f1=macro_f1)


NLI_LABEL_ORDER = (NliLabel.ENTAILMENT, NliLabel.CONTRADICTION, NliLabel.NEUTRAL)


@dataclass(frozen=True)
class ConfusionMatrix:
    """3x3 counts indexed (gold, predicted) in NLI_LABEL_ORDER."""

    counts: tuple[tuple[int, int, int], ...]

    @classmethod
    def from_pairs(cls, gold: Sequence[NliLabel], pred: Sequence[NliLabel]) -> "ConfusionMatrix":
        index = {lab: i for i, lab in enumerate(NLI_LABEL_ORDER)}
        m = [[0, 0, 0] for _ in range(3)]
        for g, p in zip(gold, pred):
            m[index[g]][index[p]] += 1
        return cls(tuple(tuple(row) for row in m))

    def count(self, gold: NliLabel, pred: NliLabel) -> int:
        index = {lab: i for i, lab in enumerate(NLI_LABEL_ORDER)}
        return self.counts[index[gold]][index[pred]]

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    @property
    def off_diagonal(self) -> int:
        return self.total - sum(self.counts[i][i] for i in range(3))

    def to_json_dict(self) -> dict:
        return {
            "labels": [lab.surface for lab in NLI_LABEL_ORDER],
            "counts": [list(row) for row in self.counts],
        }


def eval_nli(gold: Sequence[NliLabel], pred: Sequence[NliLabel]) -> tuple[float, ConfusionMatrix]:
    """Macro-F1 (unweighted mean over the three classes) plus the confusion matrix."""
    if len(gold) != len(pred):
        raise EvaluationError(f"{len(gold)} gold labels but {len(pred)} predictions")
    if not gold:
        raise EvaluationError("cannot evaluate an empty label list")
    matrix = ConfusionMatrix.from_pairs(gold, pred)
    f1s = []
    for i, _ in enumerate(NLI_LABEL_ORDER):
        tp = matrix.counts[i][i]
        fp = sum(matrix.counts[j][i] for j in range(3)) - tp
        fn = sum(matrix.counts[i]) - tp
        f1s.append(PrfScores.from_counts(tp, fp, fn).f1)
    return sum(f1s) / 3.0, matrix


@dataclass(frozen=True)
class ErrorClassReport:
    """Counts of the two error families in label-level predictions.

    ``first_class`` counts entailed/contradict confusions in either
    direction; ``second_class`` counts gold entailed or contradict pairs
    predicted neutral.
    """

    first_class: int
    second_class: int

    def to_json_dict(self) -> dict:
        return {"first_class": self.first_class, "second_class": self.second_class}


def error_classes(matrix: ConfusionMatrix) -> ErrorClassReport:
    E, C, N = NliLabel.ENTAILMENT, NliLabel.CONTRADICTION, NliLabel.NEUTRAL
    return ErrorClassReport(
        first_class=matrix.count(C, E) + matrix.count(E, C),
        second_class=matrix.count(C, N) + matrix.count(E, N),
    )


def cohen_kappa(a: Sequence[Hashable], b: Sequence[Hashable]) -> float:
    """Chance-corrected agreement between two label vectors.

    kappa = (po - pe) / (1 - pe), with po the observed agreement rate and pe
    the chance rate from the raters' marginal label frequencies. When pe is
    1 (both raters constant), returns 1 if they agree everywhere, else 0.
    """
    if len(a) != len(b):
        raise ValueError(f"label vectors differ in length: {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("cannot compute agreement on empty vectors")
    n = len(a)
    po = sum(1 for x, y in zip(a, b) if x == y) / n
    labels = set(a) | set(b)
    pe = 0.0
    for lab in labels:
        pa = sum(1 for x in a if x == lab) / n
        pb = sum(1 for y in b if y == lab) / n
        pe += pa * pb
    if pe >= 1.0:
        return 1.0 if po == 1.0 else 0.0
    return (po - pe) / (1.0 - pe)


@dataclass(frozen=True)
class RunAggregate:
    """Per-metric mean and sample standard deviation over repeated runs."""

    mean: Mapping[str, float]
    std: Mapping[str, float]
    runs: int

    def to_json_dict(self) -> dict:
        keys = sorted(self.mean)
        return {
            "runs": self.runs,
            "mean": {k: self.mean[k] for k in keys},
            "std": {k: self.std[k] for k in keys},
        }


def aggregate_runs(runs: Sequence[Mapping[str, float]]) -> RunAggregate:
    """Aggregate metric maps from repeated runs; std uses the n-1 denominator
    and is 0 for a single run."""
    if not runs:
        raise AggregationError("no runs to aggregate")
    keys = set(runs[0])
    for i, run in enumerate(runs):
        if set(run) != keys:
            raise AggregationError(f"run {i} has metric keys {sorted(run)}, expected {sorted(keys)}")
    mean = {k: statistics.fmean(run[k] for run in runs) for k in keys}
    if len(runs) == 1:
        std = {k: 0.0 for k in keys}
    else:
        std = {k: statistics.stdev([run[k] for run in runs]) for k in keys}
    return RunAggregate(mean=mean, std=std, runs=len(runs))


# ---------------------------------------------------------------------------
# annotator agreement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AgreementReport:
    """Pairwise kappa between annotators, plus per-annotator scores against
    ground truth when one is supplied."""

    pair_kappas: Mapping[tuple[str, str], float]
    annotator_scores: Mapping[str, PrfScores]

    def to_json_dict(self) -> dict:
        return {
            "pairs": [
                {"annotators": list(pair), "kappa": self.pair_kappas[pair]}
                for pair in sorted(self.pair_kappas)
            ],
            "annotators": {
                name: self.annotator_scores[name].to_json_dict()
                for name in sorted(self.annotator_scores)
            },
        }


def agreement_report(annotations: Mapping[str, Sequence[Hashable]],
                     truth: Sequence[Hashable] | None = None,
                     positive_label: Hashable = "generated") -> AgreementReport:
    """Compute pairwise kappa over all annotator pairs and, when ``truth``
    is given, each annotator's binary scores with ``positive_label`` as the
    positive class (typically machine provenance)."""
    names = sorted(annotations)
    if not names:
        raise ValueError("no annotators given")
    length = len(annotations[names[0]])
    for name in names:
        if len(annotations[name]) != length:
            raise ValueError(f"annotator {name} labeled {len(annotations[name])} items, expected {length}")
    if truth is not None and len(truth) != length:
        raise ValueError(f"truth has {len(truth)} items, expected {length}")

    pair_kappas = {}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            pair_kappas[(a, b)] = cohen_kappa(annotations[a], annotations[b])

    annotator_scores: dict[str, PrfScores] = {}
    if truth is not None:
        for name in names:
            labels = annotations[name]
            tp = sum(1 for x, t in zip(labels, truth) if x == positive_label and t == positive_label)
            fp = sum(1 for x, t in zip(labels, truth) if x == positive_label and t != positive_label)
            fn = sum(1 for x, t in zip(labels, truth) if x != positive_label and t == positive_label)
            annotator_scores[name] = PrfScores.from_counts(tp, fp, fn)
    return AgreementReport(pair_kappas=pair_kappas, annotator_scores=annotator_scores)


# ---------------------------------------------------------------------------
# text statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorpusTextStats:
    mean_sentence_length: float
    mean_char_count: float

    def to_json_dict(self) -> dict:
        return {"mean_sentence_length": self.mean_sentence_length,
                "mean_char_count": self.mean_char_count}


@dataclass(frozen=True)
class TextStatsReport:
    """Surface statistics for two corpora plus per-tag count differences.

    The relative difference for a tag is |count_a - count_b| / max(count_a,
    count_b), expressed as a percentage; the average and median run over
    every tag present in either corpus.
    """

    corpus_a: CorpusTextStats
    corpus_b: CorpusTextStats
    per_tag_diff_pct: Mapping[str, float]
    average_diff_pct: float
    median_diff_pct: float

    def to_json_dict(self) -> dict:
        return {
            "corpus_a": self.corpus_a.to_json_dict(),
            "corpus_b": self.corpus_b.to_json_dict(),
            "per_tag_diff_pct": {k: self.per_tag_diff_pct[k] for k in sorted(self.per_tag_diff_pct)},
            "average_diff_pct": self.average_diff_pct,
            "median_diff_pct": self.median_diff_pct,
        }


TaggedCorpus = Sequence[tuple[Sequence[str], Sequence[str]]]


def _corpus_surface(corpus: TaggedCorpus) -> CorpusTextStats:
    lengths = [len(tokens) for tokens, _ in corpus]
    chars = [len(" ".join(tokens)) for tokens, _ in corpus]
    return CorpusTextStats(statistics.fmean(lengths), statistics.fmean(chars))


def _tag_totals(corpus: TaggedCorpus) -> dict[str, int]:
    totals: dict[str, int] = {}
    for _, tags in corpus:
        for tag in tags:
            totals[tag] = totals.get(tag, 0) + 1
    return totals


def text_stats(corpus_a: TaggedCorpus, corpus_b: TaggedCorpus) -> TextStatsReport:
    """Compare two token/tag corpora: surface means per corpus and relative
    per-tag count differences across them.

    ``tags`` are caller-supplied categorical annotations, one per token
    (see :func:`crude_surface_tags` for a built-in non-linguistic option).
    Character counts treat each record as its tokens joined by single
    spaces.
    """
    for name, corpus in (("a", corpus_a), ("b", corpus_b)):
        if not corpus:
            raise ValueError(f"corpus {name} is empty")
        for tokens, tags in corpus:
            if len(tokens) != len(tags):
                raise ValueError(f"corpus {name}: {len(tokens)} tokens but {len(tags)} tags")

    totals_a = _tag_totals(corpus_a)
    totals_b = _tag_totals(corpus_b)
    per_tag: dict[str, float] = {}
    for tag in sorted(set(totals_a) | set(totals_b)):
        ca = totals_a.get(tag, 0)
        cb = totals_b.get(tag, 0)
        per_tag[tag] = abs(ca - cb) / max(ca, cb) * 100.0
    diffs = list(per_tag.values())
    return TextStatsReport(
        corpus_a=_corpus_surface(corpus_a),
        corpus_b=_corpus_surface(corpus_b),
        per_tag_diff_pct=per_tag,
        average_diff_pct=statistics.fmean(diffs) if diffs else 0.0,
        median_diff_pct=statistics.median(diffs) if diffs else 0.0,
    )


_PUNCT = set("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~")


def crude_surface_tags(tokens: Sequence[str]) -> list[str]:
    """Assign coarse surface-pattern buckets to tokens.

    Not a linguistic part-of-speech tagger: buckets are decided by character
    shape and a few suffixes only. Useful when two corpora must be compared
    with *some* consistent per-token annotation and none is available.
    """
    tags = []
    for token in tokens:
        lower = token.lower()
        if all(ch in _PUNCT for ch in token):
            tags.append("PUNCT")
        elif token.replace(",", "").replace(".", "").isdigit():
            tags.append("NUM")
        elif lower.endswith("ly"):
            tags.append("ADV")
        elif lower.endswith(("ing", "ed")):
            tags.append("VERB")
        elif lower.endswith(("ous", "ful", "ive", "able", "al")):
            tags.append("ADJ")
        elif token[:1].isupper():
            tags.append("CAP")
        else:
            tags.append("WORD")
    return tags
