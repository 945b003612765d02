"""Acceptance suite.

One test per release criterion; every test prints a single PASS line (or a
SKIP line for the checks that need the published datasets on disk). Run with
``pytest tests/test_acceptance.py -v -s`` to see the lines.

The published datasets are not bundled. To run the dataset-count checks,
place them as JSONL under tests/fixtures/published/ (ner.jsonl, nli.jsonl)
or point LEXVIOL_NER_DATA / LEXVIOL_NLI_DATA at them.
"""

import json
import os
import random
import re
from pathlib import Path

import pytest
from sklearn.metrics import cohen_kappa_score, f1_score

from lexviol.backends import ScriptedNerTagger, ScriptedNliClassifier
from lexviol.bio import (
    EntityKind,
    RepairPolicy,
    decode_spans,
    encode_spans,
    validate,
)
from lexviol.corpus import (
    CANONICAL_DOMAINS,
    NliLabel,
    WAGE,
    compute_stats,
    load_ner,
    load_nli,
)
from lexviol.errors import SchemeError
from lexviol.metrics import cohen_kappa, eval_ner, eval_nli, f1_from_pr
from lexviol.pipeline import PipelineConfig, SettlementCase, run as pipeline_run
from lexviol.splits import coa_split, leave_one_out
from lexviol.datagen import parse_generated_ner
from lexviol.cli import main as cli_main

from conftest import (
    make_ner_record,
    make_nli_record,
    random_tags,
    random_wellformed_tags,
)
from test_bio import reference_decode

FIXTURES = Path(__file__).parent / "fixtures" / "published"


def report(criterion: int, message: str) -> None:
    print(f"[acceptance] criterion {criterion}: PASS: {message}")


def fixture_path(env_var: str, name: str) -> Path | None:
    env = os.environ.get(env_var)
    if env:
        return Path(env)
    candidate = FIXTURES / name
    return candidate if candidate.exists() else None


# ---------------------------------------------------------------------------
# 1. metric identity against the published precision/recall/F1 row
# ---------------------------------------------------------------------------

def test_criterion_1_f1_identity():
    value = f1_from_pr(0.5658, 0.7030)
    assert abs(value - 0.6269) <= 0.0005
    report(1, f"f1_from_pr(0.5658, 0.7030) = {value:.6f}, within 0.0005 of 0.6269")


# ---------------------------------------------------------------------------
# 2. published dataset counts (fixture-dependent)
# ---------------------------------------------------------------------------

EXPECTED_SPANS = {
    EntityKind.LAW: 292,
    EntityKind.VIOLATION: 1326,
    EntityKind.VIOLATED_BY: 292,
    EntityKind.VIOLATED_ON: 292,
}
EXPECTED_NLI_DOMAIN_TOTALS = {"Consumer Protection": 62, "Privacy": 163, "TCPA": 74, "Wage": 13}
EXPECTED_WAGE_SPLIT = {  # contradiction / neutral / entailment
    NliLabel.CONTRADICTION: 6,
    NliLabel.NEUTRAL: 3,
    NliLabel.ENTAILMENT: 4,
}


def test_criterion_2_published_dataset_counts():
    ner_path = fixture_path("LEXVIOL_NER_DATA", "ner.jsonl")
    nli_path = fixture_path("LEXVIOL_NLI_DATA", "nli.jsonl")
    if ner_path is None or nli_path is None:
        print("[acceptance] criterion 2: SKIP: published dataset fixtures not present "
              "(see module docstring); counts are pinned and checked when they are")
        pytest.skip("published dataset fixtures not available")
    ner = load_ner(ner_path)
    nli = load_nli(nli_path)
    stats = compute_stats(ner, nli)
    # pinned interpretation: the published per-entity figures count decoded
    # spans, matching the table caption's 2202 total
    assert {k: stats.span_counts[k] for k in EntityKind} == EXPECTED_SPANS
    assert stats.total_spans == 2202
    assert stats.total_nli == 312
    totals = {d.name: n for d, n in stats.domain_totals.items()}
    assert totals == EXPECTED_NLI_DOMAIN_TOTALS
    wage_bucket = stats.nli_counts[WAGE]
    assert {lab: wage_bucket[lab] for lab in EXPECTED_WAGE_SPLIT} == EXPECTED_WAGE_SPLIT
    report(2, "span counts 292/1326/292/292 (total 2202), 312 pairs, "
              "domain totals 62/163/74/13, Wage split 6/3/4")


# ---------------------------------------------------------------------------
# 3. entity evaluation equals a brute-force oracle
# ---------------------------------------------------------------------------

def oracle_prf(gold_sets, pred_sets):
    tp = sum(len(g & p) for g, p in zip(gold_sets, pred_sets))
    n_pred = sum(len(p) for p in pred_sets)
    n_gold = sum(len(g) for g in gold_sets)
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_gold if n_gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def test_criterion_3_ner_eval_oracle_equivalence():
    rng = random.Random(0xACCE55)
    corpora = 0
    for _ in range(1000):
        n_records = rng.randint(1, 10)
        gold = [make_ner_record(str(i), tags=random_wellformed_tags(rng, rng.randint(1, 20)))
                for i in range(n_records)]
        preds = [random_wellformed_tags(rng, len(r.tokens)) for r in gold]
        result = eval_ner(gold, preds, RepairPolicy.STRICT)

        gold_sets = [{(s.kind, s.start, s.end) for s in decode_spans(r.tags)} for r in gold]
        pred_sets = [{(s.kind, s.start, s.end) for s in decode_spans(tuple(p))} for p in preds]
        precision, recall, f1 = oracle_prf(gold_sets, pred_sets)
        assert abs(result.overall.precision - precision) < 1e-12
        assert abs(result.overall.recall - recall) < 1e-12
        assert abs(result.overall.f1 - f1) < 1e-12
        for kind in EntityKind:
            kind_gold = [{key for key in g if key[0] is kind} for g in gold_sets]
            kind_pred = [{key for key in p if key[0] is kind} for p in pred_sets]
            kp, kr, kf = oracle_prf(kind_gold, kind_pred)
            assert abs(result.per_kind[kind].precision - kp) < 1e-12
            assert abs(result.per_kind[kind].recall - kr) < 1e-12
            assert abs(result.per_kind[kind].f1 - kf) < 1e-12
        corpora += 1
    assert corpora == 1000
    report(3, "eval_ner equals the span-set-intersection oracle on 1000 random corpora "
              "(overall and per kind, |diff| < 1e-12)")


# ---------------------------------------------------------------------------
# 4. kappa and macro-F1 equal independent oracles
# ---------------------------------------------------------------------------

def test_criterion_4_kappa_and_macro_f1_oracles():
    assert cohen_kappa([1, 0, 1], [1, 0, 1]) == 1.0
    assert abs(cohen_kappa([1, 0, 1, 1], [1, 1, 1, 0]) - (-1 / 3)) < 1e-12
    macro, _ = eval_nli(
        [NliLabel.ENTAILMENT, NliLabel.CONTRADICTION, NliLabel.NEUTRAL, NliLabel.ENTAILMENT],
        [NliLabel.ENTAILMENT, NliLabel.NEUTRAL, NliLabel.NEUTRAL, NliLabel.CONTRADICTION])
    assert abs(macro - 4 / 9) < 1e-12

    labels = list(NliLabel)
    rng = random.Random(0xCAFE)
    checked_kappa = 0
    checked_macro = 0
    for _ in range(1000):
        n = rng.randint(2, 40)
        a = [rng.randrange(3) for _ in range(n)]
        b = [rng.randrange(3) for _ in range(n)]
        if not (len(set(a)) == 1 and a == b):  # library convention covers the 0/0 case
            expected = cohen_kappa_score(a, b)
            assert abs(cohen_kappa(a, b) - expected) < 1e-12
            checked_kappa += 1
        gold = [labels[i] for i in a]
        pred = [labels[i] for i in b]
        macro, _ = eval_nli(gold, pred)
        expected_macro = f1_score(a, b, labels=[0, 1, 2], average="macro", zero_division=0)
        assert abs(macro - expected_macro) < 1e-12
        checked_macro += 1
    assert checked_macro == 1000 and checked_kappa > 900
    report(4, f"kappa matches the reference implementation on {checked_kappa} vectors and "
              f"macro-F1 on {checked_macro}, plus the fixed hand-derived cases")


# ---------------------------------------------------------------------------
# 5. IOB2 round-trip and repair-policy semantics
# ---------------------------------------------------------------------------

def test_criterion_5_bio_roundtrip_and_policies():
    rng = random.Random(0xB10)
    for _ in range(10_000):
        length = rng.randint(1, 20)
        tags = random_wellformed_tags(rng, length)
        assert encode_spans(decode_spans(tags), length) == tags
    for _ in range(10_000):
        length = rng.randint(1, 20)
        tags = random_tags(rng, length)
        violations = validate(tags)
        try:
            strict = decode_spans(tags, RepairPolicy.STRICT)
            assert violations == []
            assert encode_spans(strict, length) == tags
        except SchemeError as e:
            assert violations and violations[0].index == e.index
        promoted = decode_spans(tags, RepairPolicy.PROMOTE)
        dropped = decode_spans(tags, RepairPolicy.DROP)
        assert promoted == reference_decode(tags, RepairPolicy.PROMOTE)
        assert dropped == reference_decode(tags, RepairPolicy.DROP)
        assert len(promoted) >= len(dropped)
        for spans in (promoted, dropped):
            prev_end = 0
            for span in spans:
                assert 0 <= span.start < span.end <= length
                assert span.start >= prev_end
                prev_end = span.end
    report(5, "encode/decode identity on 10000 well-formed sequences; all three policies "
              "match their reference semantics on 10000 arbitrary sequences")


# ---------------------------------------------------------------------------
# 6. split safety
# ---------------------------------------------------------------------------

def synthetic_published_nli():
    shape = {
        CANONICAL_DOMAINS[0]: (16, 17, 29),
        CANONICAL_DOMAINS[1]: (56, 54, 53),
        CANONICAL_DOMAINS[2]: (26, 27, 21),
        CANONICAL_DOMAINS[3]: (6, 3, 4),
    }
    order = (NliLabel.CONTRADICTION, NliLabel.NEUTRAL, NliLabel.ENTAILMENT)
    records = []
    for domain, counts in shape.items():
        for label, count in zip(order, counts):
            for _ in range(count):
                records.append(make_nli_record(f"n{len(records)}", domain, label))
    return records


def test_criterion_6_split_safety():
    rng = random.Random(0x5EED)
    for trial in range(500):
        coas = [rng.choice(["A", "B", "C", "D", "E", "F", None]) for _ in range(rng.randint(4, 40))]
        if len({c for c in coas if c}) < 2:
            continue
        records = [make_ner_record(f"r{i}", coa=c) for i, c in enumerate(coas)]
        fraction = rng.uniform(0.1, 0.9)
        seed = rng.randrange(2**31)
        plan = coa_split(records, fraction, seed)
        assert plan.train_ids | plan.test_ids == {r.id for r in records}
        assert not (plan.train_ids & plan.test_ids)
        by_id = {r.id: r.cause_of_action for r in records}
        train_coas = {by_id[i] for i in plan.train_ids if by_id[i]}
        test_coas = {by_id[i] for i in plan.test_ids if by_id[i]}
        assert not (train_coas & test_coas)
        assert plan == coa_split(records, fraction, seed)

    nli_path = fixture_path("LEXVIOL_NLI_DATA", "nli.jsonl")
    records = load_nli(nli_path) if nli_path else synthetic_published_nli()
    source = "published data" if nli_path else "a synthetic corpus with the published distribution"
    plan = leave_one_out(records)
    assert len(plan.folds) == 4
    wage = next(f for f in plan.folds if f.held_out_domain == WAGE)
    assert len(wage.test_ids) == 13
    union = set().union(*(set(f.test_ids) for f in plan.folds))
    assert union == {r.id for r in records}
    report(6, f"500 random corpora split disjointly and deterministically; "
              f"leave-one-out on {source} gives 4 folds with a Wage fold of 13")


# ---------------------------------------------------------------------------
# 7. pipeline determinism and semantics with scripted backends
# ---------------------------------------------------------------------------

def test_criterion_7_pipeline_semantics():
    violation_text = "they keep calling my phone without consent"
    tagger = ScriptedNerTagger(
        {violation_text: ["O", "B-VIOLATION", "I-VIOLATION", "I-VIOLATION", "O", "O", "O"]},
        confidences={violation_text: [1.0, 0.9, 0.9, 0.9, 1.0, 1.0, 1.0]},
    )
    classifier = ScriptedNliClassifier(
        rules=[{"premise_contains": "unsolicited calls", "label": "entailed"}],
        default="neutral")
    inputs = [("in1", violation_text), ("in2", "a perfectly calm afternoon")]
    cases = [
        SettlementCase(id="C1", summary="robocall settlement grounds", domain=CANONICAL_DOMAINS[2]),
        SettlementCase(id="C7", summary="unsolicited calls without consent", domain=CANONICAL_DOMAINS[2]),
        SettlementCase(id="C9", summary="data sold to third parties", domain=CANONICAL_DOMAINS[1]),
    ]

    result = pipeline_run(inputs, cases, tagger, classifier, PipelineConfig(tau=0.5))
    assert result.n_comparisons == 3
    flagged = [c for r in result.inputs for c in r.candidates if c.flagged]
    assert [c.case_id for c in flagged] == ["C7"]
    assert all(c.aggregated is NliLabel.ENTAILMENT for c in flagged)

    previous = None
    for tau in (0.0, 0.25, 0.5, 0.75, 1.0):
        r = pipeline_run(inputs, cases, tagger, classifier, PipelineConfig(tau=tau))
        counts = (r.n_qualifying, r.n_comparisons, r.n_flagged)
        if previous is not None:
            assert all(c <= p for c, p in zip(counts, previous))
        previous = counts

    again = pipeline_run(inputs, cases, tagger, classifier, PipelineConfig(tau=0.5))
    assert result.to_json() == again.to_json()
    report(7, "3 comparisons for 2 inputs x 3 cases, only the entailed pair flagged, "
              "tau-monotone across {0, .25, .5, .75, 1}, byte-identical reruns")


# ---------------------------------------------------------------------------
# 8. few-shot configuration conformance over a live local endpoint
# ---------------------------------------------------------------------------

def test_criterion_8_fewshot_defaults_conformance(chat_server, tmp_path, monkeypatch):
    from click.testing import CliRunner

    monkeypatch.setenv("ACCEPT_CHAT_KEY", "local-test")
    train = tmp_path / "train.jsonl"
    rows = [
        {"id": f"t{i}", "premise": f"grounds {i}", "hypothesis": f"account {i}",
         "label": "neutral", "legal_act": "Wage"}
        for i in range(12)
    ]
    train.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
    inputs = tmp_path / "inputs.jsonl"
    input_rows = [
        {"id": "q1", "premise": "pq1", "hypothesis": "hq1", "label": "neutral", "legal_act": "Wage"},
        {"id": "q2", "premise": "pq2", "hypothesis": "hq2", "label": "neutral", "legal_act": "Wage"},
    ]
    inputs.write_text("\n".join(json.dumps(r) for r in input_rows) + "\n", encoding="utf-8")
    backend = tmp_path / "backend.json"
    backend.write_text(json.dumps({
        "kind": "http",
        "endpoint": chat_server.url,
        "model": "local-test-model",
        "credential_env": "ACCEPT_CHAT_KEY",
        "retries": 0,
    }), encoding="utf-8")
    out = tmp_path / "pred.jsonl"

    result = CliRunner().invoke(cli_main, [
        "fewshot", "predict", "--task", "nli", "--train", str(train),
        "--inputs", str(inputs), "--backend", str(backend), "--out", str(out),
    ])
    assert result.exit_code == 0, result.output

    payloads = [r["body"] for r in chat_server.requests]
    assert len(payloads) == 10  # 2 inputs x default 5 repeats
    per_input = {"pq1": 0, "pq2": 0}
    for body in payloads:
        assert body["temperature"] == 0.7
        content = body["messages"][0]["content"]
        assert len(re.findall(r"(?m)^Example \d+:", content)) == 9
        for key in per_input:
            if f"Premise: {key}" in content.split("Example 9:")[-1]:
                per_input[key] += 1
    assert per_input == {"pq1": 5, "pq2": 5}
    produced = [json.loads(line) for line in out.read_text(encoding="utf-8").splitlines()]
    assert len(produced) == 10
    report(8, "captured payloads carry temperature 0.7, exactly 9 example blocks, "
              "and 5 repeats per input under default flags")


# ---------------------------------------------------------------------------
# 9. generated-record round-trip on marked excerpts
# ---------------------------------------------------------------------------

def test_criterion_9_generated_roundtrip():
    excerpts = [
        ("I've been getting these [VIOLATION] constant calls on my cell phone from some "
         "company that won't quit [VIOLATION].", EntityKind.VIOLATION),
        ("They've been [VIOLATION] failing to disclose that their educational programs "
         "were underperforming [VIOLATION].", EntityKind.VIOLATION),
        ("They broke [LAW] the TCPA [LAW] yesterday", EntityKind.LAW),
    ]
    for raw, kind in excerpts:
        result = parse_generated_ner(raw)
        assert result.accepted, result.diagnostics
        spans = decode_spans(result.record.tags)
        assert [s.kind for s in spans] == [kind]
        assert encode_spans(spans, len(result.record.tokens)) == list(result.record.tags)
        marked = raw.split(f"[{kind.tag_name}]")[1].strip()
        span = spans[0]
        covered = result.record.tokens[span.start:span.end]
        assert list(covered) == [t for t in covered]  # contiguous token run
        assert " ".join(covered).startswith(marked.split()[0])

    rejected = parse_generated_ner("some text [LAW] left open forever")
    assert not rejected.accepted
    assert any("unbalanced" in d for d in rejected.diagnostics)
    report(9, "marked excerpts decode to spans whose re-encoding reproduces the "
              "marker-implied tags; unbalanced markers are rejected with diagnostics")


# ---------------------------------------------------------------------------
# 10. figures that need external model runs or annotation exports
# ---------------------------------------------------------------------------

EXTERNAL_REFERENCE_FIGURES = {
    # reported by the upstream study; they depend on GPU fine-tuning runs and
    # private annotation exports, so they are documented rather than asserted
    "violation_detection_best_f1": 0.6269,
    "matching_best_macro_f1": 0.8102,
    "annotator_kappas": (0.0821, 0.2149, 0.0988),
    "human_vs_machine_f1": 0.4486,
    "pos_diff_average_pct": 26.0,
    "pos_diff_median_pct": 16.0,
}


def test_criterion_10_external_figures_documented():
    from lexviol.metrics import agreement_report, text_stats

    # the arithmetic those figures come from is implemented and oracle-tested
    # (criteria 3 and 4); here we check the report shapes line up with them
    annotations = {
        "annotator1": ["generated", "human", "generated", "human"],
        "annotator2": ["human", "human", "generated", "generated"],
        "annotator3": ["generated", "generated", "human", "human"],
    }
    truth = ["generated", "human", "human", "generated"]
    agreement = agreement_report(annotations, truth, positive_label="generated")
    assert len(agreement.pair_kappas) == len(EXTERNAL_REFERENCE_FIGURES["annotator_kappas"])
    assert all(-1.0 <= k <= 1.0 for k in agreement.pair_kappas.values())
    assert set(agreement.annotator_scores) == set(annotations)

    stats = text_stats([(["a", "b"], ["X", "Y"])], [(["a"], ["X"])])
    assert {"average_diff_pct", "median_diff_pct"} <= set(stats.to_json_dict())
    report(10, "external reference figures are recorded as non-reproducible; the "
               "formulas behind them are implemented and oracle-tested (criteria 3-4)")
