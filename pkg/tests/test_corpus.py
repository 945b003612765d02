import json
import random

import pytest
from hypothesis import given, strategies as st

from lexviol.bio import BioTag, EntityKind, OUTSIDE, decode_spans, parse_tag
from lexviol.corpus import (
    CANONICAL_DOMAINS,
    LegalDomain,
    NerRecord,
    NliLabel,
    NliRecord,
    Provenance,
    WAGE,
    compute_stats,
    load_ner,
    load_nli,
    save_ner,
    save_nli,
)
from lexviol.errors import LabelError, SchemaError, TagError

from conftest import make_ner_record, make_nli_record, random_wellformed_tags


class TestNliLabel:
    def test_surface_forms(self):
        assert NliLabel.from_string("entailed") is NliLabel.ENTAILMENT
        assert NliLabel.from_string("CONTRADICT") is NliLabel.CONTRADICTION
        assert NliLabel.from_string(" Neutral ") is NliLabel.NEUTRAL

    def test_long_forms(self):
        assert NliLabel.from_string("entailment") is NliLabel.ENTAILMENT
        assert NliLabel.from_string("Contradiction") is NliLabel.CONTRADICTION

    def test_unknown_rejected(self):
        with pytest.raises(LabelError):
            NliLabel.from_string("maybe")

    def test_normalization_injective_on_canonical_forms(self):
        surfaces = [lab.surface for lab in NliLabel]
        parsed = [NliLabel.from_string(s) for s in surfaces]
        assert len(set(parsed)) == 3
        assert [p.surface for p in parsed] == surfaces


class TestLegalDomain:
    def test_canonical_roundtrip(self):
        for domain in CANONICAL_DOMAINS:
            assert LegalDomain.from_string(domain.name) == domain
            assert str(LegalDomain.from_string(domain.name.lower())) == domain.name

    def test_unknown_preserved(self):
        other = LegalDomain.from_string("Environmental")
        assert not other.is_canonical
        assert other.name == "Environmental"

    def test_sort_order(self):
        domains = [LegalDomain("Aviation"), WAGE, CANONICAL_DOMAINS[0]]
        ordered = sorted(domains, key=lambda d: d.sort_key)
        assert [d.name for d in ordered] == ["Consumer Protection", "Wage", "Aviation"]

    def test_empty_rejected(self):
        with pytest.raises(SchemaError):
            LegalDomain("  ")


class TestRecordInvariants:
    def test_length_mismatch_names_record(self):
        with pytest.raises(SchemaError) as excinfo:
            NerRecord(id="r7", tokens=("a", "b", "c", "d", "e"), tags=(OUTSIDE,) * 4)
        assert "r7" in str(excinfo.value)

    def test_empty_tokens_rejected(self):
        with pytest.raises(SchemaError):
            NerRecord(id="r0", tokens=(), tags=())

    def test_nli_empty_fields_rejected(self):
        with pytest.raises(SchemaError):
            NliRecord(id="n0", premise=" ", hypothesis="h", label=NliLabel.NEUTRAL, domain=WAGE)
        with pytest.raises(SchemaError):
            NliRecord(id="n0", premise="p", hypothesis="", label=NliLabel.NEUTRAL, domain=WAGE)


class TestConll:
    def test_minimal_wellformed(self, tmp_path):
        path = tmp_path / "t.conll"
        path.write_text("Acme\tB-VIOLATED_BY\n.\tO\n\n", encoding="utf-8")
        records = load_ner(path, "conll")
        assert len(records) == 1
        assert records[0].tokens == ("Acme", ".")
        assert records[0].tags == (BioTag.begin(EntityKind.VIOLATED_BY), OUTSIDE)
        assert records[0].id == "0"

    def test_ids_are_ordinals(self, tmp_path):
        path = tmp_path / "t.conll"
        path.write_text("a\tO\n\nb\tO\n\n", encoding="utf-8")
        assert [r.id for r in load_ner(path, "conll")] == ["0", "1"]

    def test_missing_final_blank_line_tolerated(self, tmp_path):
        path = tmp_path / "t.conll"
        path.write_text("a\tO", encoding="utf-8")
        assert len(load_ner(path, "conll")) == 1

    def test_bad_line_reports_lineno(self, tmp_path):
        path = tmp_path / "t.conll"
        path.write_text("a\tO\nbroken-line\n\n", encoding="utf-8")
        with pytest.raises(SchemaError) as excinfo:
            load_ner(path, "conll")
        assert excinfo.value.line == 2

    def test_unknown_tag_reports_lineno(self, tmp_path):
        path = tmp_path / "t.conll"
        path.write_text("a\tB-JUDGE\n\n", encoding="utf-8")
        with pytest.raises(TagError) as excinfo:
            load_ner(path, "conll")
        assert excinfo.value.line == 1

    def test_crlf_tolerated(self, tmp_path):
        path = tmp_path / "t.conll"
        path.write_bytes(b"Acme\tB-LAW\r\n\r\n")
        records = load_ner(path, "conll")
        assert records[0].tokens == ("Acme",)


class TestJsonl:
    def test_roundtrip_preserves_fields(self, tmp_path):
        rng = random.Random(11)
        records = [
            NerRecord(
                id=f"r{i}",
                tokens=tuple(f"w{j}" for j in range(6)),
                tags=tuple(random_wellformed_tags(rng, 6)),
                cause_of_action="breach" if i % 2 else None,
                industry="telecom" if i % 3 else None,
                provenance=Provenance.GENERATED if i % 2 else Provenance.UNKNOWN,
            )
            for i in range(8)
        ]
        path = tmp_path / "r.jsonl"
        save_ner(records, path)
        assert load_ner(path) == records

    def test_mismatch_error_names_record_and_line(self, tmp_path):
        path = tmp_path / "r.jsonl"
        lines = [
            json.dumps({"id": "ok", "tokens": ["a"], "ner_tags": ["O"]}),
            json.dumps({"id": "bad5", "tokens": list("abcde"), "ner_tags": ["O"] * 4}),
        ]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        with pytest.raises(SchemaError) as excinfo:
            load_ner(path)
        assert "bad5" in str(excinfo.value)
        assert excinfo.value.line == 2

    def test_invalid_json_reports_lineno(self, tmp_path):
        path = tmp_path / "r.jsonl"
        path.write_text('{"id": "a", "tokens": ["x"], "ner_tags": ["O"]}\n{oops\n', encoding="utf-8")
        with pytest.raises(SchemaError) as excinfo:
            load_ner(path)
        assert excinfo.value.line == 2

    def test_field_map_adapts_names(self, tmp_path):
        path = tmp_path / "r.jsonl"
        path.write_text(json.dumps({"id": "x", "words": ["Acme"], "labels": ["B-LAW"]}) + "\n",
                        encoding="utf-8")
        records = load_ner(path, field_map={"tokens": "words", "ner_tags": "labels"})
        assert records[0].tokens == ("Acme",)

    def test_missing_id_gets_ordinal(self, tmp_path):
        path = tmp_path / "r.jsonl"
        path.write_text(json.dumps({"tokens": ["a"], "ner_tags": ["O"]}) + "\n", encoding="utf-8")
        assert load_ner(path)[0].id == "0"

    def test_integer_tags_rejected_with_hint(self, tmp_path):
        path = tmp_path / "r.jsonl"
        path.write_text(json.dumps({"id": "x", "tokens": ["a"], "ner_tags": [3]}) + "\n",
                        encoding="utf-8")
        with pytest.raises(TagError):
            load_ner(path)

    def test_conll_jsonl_convert_preserves_tokens_and_tags(self, tmp_path):
        rng = random.Random(5)
        records = [make_ner_record(str(i), tags=random_wellformed_tags(rng, 4)) for i in range(3)]
        conll = tmp_path / "a.conll"
        save_ner(records, conll, "conll")
        back = load_ner(conll, "conll")
        assert [r.tokens for r in back] == [r.tokens for r in records]
        assert [r.tags for r in back] == [r.tags for r in records]


class TestNliIO:
    def test_label_normalized(self, tmp_path):
        path = tmp_path / "n.jsonl"
        path.write_text(json.dumps({
            "id": "n1", "premise": "p", "hypothesis": "h",
            "label": "entailed", "legal_act": "Wage",
        }) + "\n", encoding="utf-8")
        records = load_nli(path)
        assert records[0].label is NliLabel.ENTAILMENT
        assert records[0].domain == WAGE

    def test_unknown_label_reports_value(self, tmp_path):
        path = tmp_path / "n.jsonl"
        path.write_text(json.dumps({
            "id": "n1", "premise": "p", "hypothesis": "h",
            "label": "maybe", "legal_act": "Wage",
        }) + "\n", encoding="utf-8")
        with pytest.raises(LabelError) as excinfo:
            load_nli(path)
        assert "maybe" in str(excinfo.value)

    def test_missing_premise_is_schema_error(self, tmp_path):
        path = tmp_path / "n.jsonl"
        path.write_text(json.dumps({"id": "n1", "hypothesis": "h", "label": "neutral",
                                    "legal_act": "Wage"}) + "\n", encoding="utf-8")
        with pytest.raises(SchemaError):
            load_nli(path)

    def test_roundtrip(self, tmp_path):
        records = [
            make_nli_record("a", WAGE, NliLabel.ENTAILMENT),
            make_nli_record("b", LegalDomain("Maritime"), NliLabel.CONTRADICTION),
        ]
        path = tmp_path / "n.jsonl"
        save_nli(records, path)
        assert load_nli(path) == records


class TestStats:
    def test_empty(self):
        stats = compute_stats([], [])
        assert stats.total_spans == 0
        assert stats.total_nli == 0
        assert all(v == 0 for v in stats.span_counts.values())

    def test_single_record_hand_decoded(self):
        tags = [parse_tag(t) for t in ["B-LAW", "I-LAW", "O"]]
        stats = compute_stats([make_ner_record("r", tags=tags)], [])
        assert stats.span_counts[EntityKind.LAW] == 1
        assert stats.total_spans == 1

    def test_nli_buckets(self):
        records = [
            make_nli_record("1", WAGE, NliLabel.ENTAILMENT),
            make_nli_record("2", WAGE, NliLabel.ENTAILMENT),
            make_nli_record("3", WAGE, NliLabel.NEUTRAL),
        ]
        stats = compute_stats([], records)
        assert stats.domain_totals[WAGE] == 3
        assert stats.nli_counts[WAGE][NliLabel.ENTAILMENT] == 2
        assert stats.total_nli == 3

    @given(st.integers(0, 2**32 - 1))
    def test_totals_equal_sum_of_parts(self, seed):
        rng = random.Random(seed)
        ner = [make_ner_record(str(i), tags=random_wellformed_tags(rng, rng.randint(1, 12)))
               for i in range(rng.randint(0, 8))]
        domains = [*CANONICAL_DOMAINS, LegalDomain("Other Area")]
        nli = [make_nli_record(str(i), rng.choice(domains), rng.choice(list(NliLabel)))
               for i in range(rng.randint(0, 8))]
        stats = compute_stats(ner, nli)
        assert stats.total_spans == sum(stats.span_counts.values())
        assert stats.total_nli == sum(stats.domain_totals.values())
        for domain, bucket in stats.nli_counts.items():
            assert stats.domain_totals[domain] == sum(bucket.values())
        decoded = sum(len(decode_spans(r.tags)) for r in ner)
        assert stats.total_spans == decoded
