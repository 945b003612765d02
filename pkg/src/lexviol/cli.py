"""Batch command-line surface.

Every subcommand is a thin shell over one library operation: results go to
stdout (or ``--out``) as JSON, diagnostics go to stderr, and exit codes are
stable: 0 success, 1 operational failure, 2 invalid invocation, 3 validation
failures found.
"""

from __future__ import annotations

import functools
import json
import sys
from collections import defaultdict
from pathlib import Path

import click

from . import backends as be
from . import datagen as dg
from . import metrics as mx
from . import pipeline as pl
from . import splits as sp
from .bio import EntityKind, RepairPolicy, parse_tag, validate as validate_tags
from .corpus import (
    LegalDomain,
    NerRecord,
    NliLabel,
    compute_stats,
    load_ner,
    load_nli,
    ner_record_to_dict,
    nli_record_to_dict,
    save_ner,
    save_nli,
)
from .errors import EvaluationError, LexviolError, SchemaError

EXIT_VALIDATION_FAILURES = 3


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (LexviolError, OSError, ValueError) as e:
            raise click.ClickException(str(e))
    return wrapper


def _emit(data, out: str | None, pretty: bool) -> None:
    text = json.dumps(data, indent=2 if pretty else None, sort_keys=True, ensure_ascii=False)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        click.echo(f"wrote {out}", err=True)
    else:
        click.echo(text)


def _parse_field_map(raw: str | None) -> dict[str, str] | None:
    if not raw:
        return None
    mapping = {}
    for pair in raw.split(","):
        canonical, _, actual = pair.partition("=")
        if not canonical or not actual:
            raise click.BadParameter(f"field-map entry {pair!r} is not canonical=actual")
        mapping[canonical.strip()] = actual.strip()
    return mapping


def _policy(name: str) -> RepairPolicy:
    return RepairPolicy(name)


def _read_jsonl(path: str) -> list[dict]:
    rows = []
    with open(path, "r", encoding="utf-8-sig") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise SchemaError(f"invalid JSON: {e}", line=lineno) from e
    return rows


def _chat_backend(obj: dict) -> be.ChatBackend:
    kind = obj.get("kind", "http")
    if kind == "http":
        cfg = {k: v for k, v in obj.items() if k != "kind"}
        return be.HttpChatBackend(be.BackendConfig.from_json_dict(cfg))
    if kind == "scripted":
        rules = [(r["contains"], r["reply"]) for r in obj.get("rules", [])]
        return be.ScriptedChatBackend(rules=rules, default=obj.get("default"))
    raise click.ClickException(f"unknown chat backend kind: {kind!r}")


def _ner_tagger(obj: dict) -> be.NerTagger:
    kind = obj.get("kind")
    if kind == "scripted-tagger":
        return be.ScriptedNerTagger(obj.get("tags", {}), obj.get("confidences"))
    if kind == "fewshot":
        chat = _chat_backend(obj["chat"])
        spec = be.FewShotSpec(task=be.Task.NER, shots=obj.get("shots", 9),
                              seed=obj.get("seed", 0), repeats=1)
        train = load_ner(obj["train"])
        return be.FewShotNerTagger(chat, spec, train, _policy(obj.get("policy", "promote")))
    raise click.ClickException(f"unknown tagger kind: {kind!r}")


def _nli_classifier(obj: dict) -> be.NliClassifier:
    kind = obj.get("kind")
    if kind == "scripted-nli":
        return be.ScriptedNliClassifier(obj.get("rules", []), obj.get("default", "neutral"))
    if kind == "fewshot":
        chat = _chat_backend(obj["chat"])
        spec = be.FewShotSpec(task=be.Task.NLI, shots=obj.get("shots", 9),
                              seed=obj.get("seed", 0), repeats=1)
        train = load_nli(obj["train"])
        return be.FewShotNliClassifier(chat, spec, train)
    raise click.ClickException(f"unknown NLI backend kind: {kind!r}")


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON file of default flag values, mirrored by command name.")
@click.pass_context
def main(ctx: click.Context, config_path: str | None) -> None:
    """Violation detection and resolution toolkit."""
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            ctx.default_map = json.load(fh)


# ---------------------------------------------------------------------------
# corpus commands
# ---------------------------------------------------------------------------

@main.command()
@click.option("--records", "path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--task", type=click.Choice(["ner", "nli"]), default="ner", show_default=True)
@click.option("--from", "src_fmt", type=click.Choice(["jsonl", "conll"]), default="jsonl", show_default=True)
@click.option("--to", "dst_fmt", type=click.Choice(["jsonl", "conll"]), default="jsonl", show_default=True)
@click.option("--field-map", default=None, help="canonical=actual pairs, comma separated.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@_guarded
def convert(path: str, task: str, src_fmt: str, dst_fmt: str, field_map: str | None, out: str) -> None:
    """Convert a corpus between formats, normalizing fields on the way."""
    mapping = _parse_field_map(field_map)
    if task == "ner":
        save_ner(load_ner(path, src_fmt, mapping), out, dst_fmt)
    else:
        if "conll" in (src_fmt, dst_fmt):
            raise click.ClickException("premise/hypothesis records only support jsonl")
        save_nli(load_nli(path, mapping), out)
    click.echo(f"wrote {out}", err=True)


@main.command()
@click.option("--ner", "ner_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--nli", "nli_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--format", "fmt", type=click.Choice(["jsonl", "conll"]), default="jsonl", show_default=True)
@click.option("--policy", type=click.Choice([p.value for p in RepairPolicy]), default="promote", show_default=True)
@click.option("--out", default=None, type=click.Path(dir_okay=False))
@click.option("--pretty", is_flag=True)
@_guarded
def stats(ner_path: str | None, nli_path: str | None, fmt: str, policy: str,
          out: str | None, pretty: bool) -> None:
    """Span and label distribution statistics for one or both corpora."""
    if not ner_path and not nli_path:
        raise click.UsageError("give --ner and/or --nli")
    ner = load_ner(ner_path, fmt) if ner_path else []
    nli = load_nli(nli_path) if nli_path else []
    _emit(compute_stats(ner, nli, _policy(policy)).to_json_dict(), out, pretty)


@main.command("validate")
@click.option("--records", "path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["jsonl", "conll"]), default="jsonl", show_default=True)
@click.option("--out", default=None, type=click.Path(dir_okay=False))
@click.option("--pretty", is_flag=True)
@_guarded
def validate_cmd(path: str, fmt: str, out: str | None, pretty: bool) -> None:
    """Check every record's tag sequence; exit 3 when violations exist."""
    records = load_ner(path, fmt)
    findings = []
    for record in records:
        for violation in validate_tags(record.tags):
            findings.append({"record_id": record.id, "index": violation.index,
                             "description": violation.description})
    _emit({"records_checked": len(records), "violations": findings}, out, pretty)
    if findings:
        sys.exit(EXIT_VALIDATION_FAILURES)


# ---------------------------------------------------------------------------
# splits
# ---------------------------------------------------------------------------

@main.group()
def split() -> None:
    """Leakage-safe dataset partitioning."""


@split.command()
@click.option("--records", "path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["jsonl", "conll"]), default="jsonl", show_default=True)
@click.option("--fraction", type=float, default=0.2, show_default=True,
              help="Target test fraction (engine default, reached by whole groups).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", default=None, type=click.Path(dir_okay=False))
@click.option("--pretty", is_flag=True)
@_guarded
def coa(path: str, fmt: str, fraction: float, seed: int, out: str | None, pretty: bool) -> None:
    """Cause-of-action disjoint train/test split."""
    plan = sp.coa_split(load_ner(path, fmt), fraction, seed)
    _emit(plan.to_json_dict(), out, pretty)


@split.command()
@click.option("--records", "path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default=None, type=click.Path(dir_okay=False))
@click.option("--pretty", is_flag=True)
@_guarded
def loo(path: str, out: str | None, pretty: bool) -> None:
    """Leave-one-domain-out folds."""
    plan = sp.leave_one_out(load_nli(path))
    _emit(plan.to_json_dict(), out, pretty)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

@main.group("eval")
def eval_group() -> None:
    """Score predictions against gold data."""


def _group_runs(rows: list[dict]) -> dict[int, dict[str, dict]]:
    runs: dict[int, dict[str, dict]] = defaultdict(dict)
    for row in rows:
        runs[int(row.get("run", 0))][str(row["id"])] = row
    return dict(runs)


@eval_group.command("ner")
@click.option("--gold", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["jsonl", "conll"]), default="jsonl", show_default=True)
@click.option("--pred", required=True, type=click.Path(exists=True, dir_okay=False),
              help="JSONL of {id, tags, [run]} rows; multiple runs are aggregated.")
@click.option("--policy", type=click.Choice([p.value for p in RepairPolicy]), default="promote", show_default=True)
@click.option("--out", default=None, type=click.Path(dir_okay=False))
@click.option("--pretty", is_flag=True)
@_guarded
def eval_ner_cmd(gold: str, fmt: str, pred: str, policy: str, out: str | None, pretty: bool) -> None:
    """Entity-level exact-span evaluation."""
    gold_records = load_ner(gold, fmt)
    runs = _group_runs(_read_jsonl(pred))
    per_run = {}
    for run_id in sorted(runs):
        rows = runs[run_id]
        sequences = []
        for record in gold_records:
            if record.id not in rows:
                raise EvaluationError(f"run {run_id}: no prediction for record {record.id}")
            sequences.append([parse_tag(t) for t in rows[record.id]["tags"]])
        per_run[run_id] = mx.eval_ner(gold_records, sequences, _policy(policy))
    if len(per_run) == 1:
        report = next(iter(per_run.values()))
        _emit(report.to_json_dict(), out, pretty)
        return
    metric_maps = [
        {"precision": r.overall.precision, "recall": r.overall.recall,
         "f1": r.overall.f1, "macro_f1": r.macro_f1}
        for _, r in sorted(per_run.items())
    ]
    _emit({
        "per_run": {str(k): v.to_json_dict() for k, v in per_run.items()},
        "aggregate": mx.aggregate_runs(metric_maps).to_json_dict(),
    }, out, pretty)


@eval_group.command("nli")
@click.option("--gold", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--pred", required=True, type=click.Path(exists=True, dir_okay=False),
              help="JSONL of {id, label, [run]} rows; multiple runs are aggregated.")
@click.option("--out", default=None, type=click.Path(dir_okay=False))
@click.option("--pretty", is_flag=True)
@_guarded
def eval_nli_cmd(gold: str, pred: str, out: str | None, pretty: bool) -> None:
    """Label-level macro-F1, confusion matrix, and error classes."""
    gold_records = load_nli(gold)
    runs = _group_runs(_read_jsonl(pred))
    per_run = {}
    for run_id in sorted(runs):
        rows = runs[run_id]
        gold_labels, pred_labels = [], []
        for record in gold_records:
            if record.id not in rows:
                raise EvaluationError(f"run {run_id}: no prediction for record {record.id}")
            gold_labels.append(record.label)
            pred_labels.append(NliLabel.from_string(rows[record.id]["label"]))
        macro, matrix = mx.eval_nli(gold_labels, pred_labels)
        per_run[run_id] = {
            "macro_f1": macro,
            "confusion": matrix.to_json_dict(),
            "error_classes": mx.error_classes(matrix).to_json_dict(),
        }
    if len(per_run) == 1:
        _emit(next(iter(per_run.values())), out, pretty)
        return
    metric_maps = [{"macro_f1": r["macro_f1"]} for _, r in sorted(per_run.items())]
    _emit({
        "per_run": {str(k): v for k, v in per_run.items()},
        "aggregate": mx.aggregate_runs(metric_maps).to_json_dict(),
    }, out, pretty)


@main.command()
@click.argument("annotations", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--truth", "truth_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="JSONL with the ground-truth field per id.")
@click.option("--truth-field", default="label", show_default=True,
              help="Field holding the truth value (e.g. provenance).")
@click.option("--positive-label", default="generated", show_default=True)
@click.option("--min-kappa", type=float, default=None,
              help="Exit 3 when any annotator pair falls below this agreement.")
@click.option("--out", default=None, type=click.Path(dir_okay=False))
@click.option("--pretty", is_flag=True)
@_guarded
def agreement(annotations: tuple[str, ...], truth_path: str | None, truth_field: str,
              positive_label: str, min_kappa: float | None, out: str | None, pretty: bool) -> None:
    """Pairwise annotator agreement, plus per-annotator scores versus truth.

    Each annotation file is JSONL of {id, label}; files must cover the same
    ids.
    """
    if len(annotations) < 2:
        raise click.UsageError("need at least two annotation files")
    by_annotator: dict[str, dict[str, str]] = {}
    for path in annotations:
        rows = {str(r["id"]): str(r["label"]) for r in _read_jsonl(path)}
        by_annotator[Path(path).stem] = rows
    id_sets = [set(rows) for rows in by_annotator.values()]
    common = id_sets[0]
    for ids in id_sets[1:]:
        if ids != common:
            raise click.ClickException("annotation files do not cover the same record ids")
    ordered_ids = sorted(common)
    vectors = {name: [rows[i] for i in ordered_ids] for name, rows in by_annotator.items()}

    truth = None
    if truth_path:
        truth_rows = {str(r["id"]): str(r[truth_field]) for r in _read_jsonl(truth_path)}
        missing = [i for i in ordered_ids if i not in truth_rows]
        if missing:
            raise click.ClickException(f"truth file missing ids: {missing[:5]}")
        truth = [truth_rows[i] for i in ordered_ids]

    report = mx.agreement_report(vectors, truth, positive_label)
    _emit(report.to_json_dict(), out, pretty)
    if min_kappa is not None and any(k < min_kappa for k in report.pair_kappas.values()):
        sys.exit(EXIT_VALIDATION_FAILURES)


@main.command()
@click.option("--a", "path_a", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--b", "path_b", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--tag-field", default="ner_tags", show_default=True)
@click.option("--naive-pos", is_flag=True,
              help="Ignore stored tags and bucket tokens by surface shape (non-linguistic).")
@click.option("--out", default=None, type=click.Path(dir_okay=False))
@click.option("--pretty", is_flag=True)
@_guarded
def textstats(path_a: str, path_b: str, tag_field: str, naive_pos: bool,
              out: str | None, pretty: bool) -> None:
    """Surface statistics and per-tag count differences between two corpora."""
    def read_corpus(path: str):
        corpus = []
        for row in _read_jsonl(path):
            tokens = [str(t) for t in row["tokens"]]
            if naive_pos:
                tags = mx.crude_surface_tags(tokens)
            else:
                tags = [str(t) for t in row[tag_field]]
            corpus.append((tokens, tags))
        return corpus

    report = mx.text_stats(read_corpus(path_a), read_corpus(path_b))
    _emit(report.to_json_dict(), out, pretty)


# ---------------------------------------------------------------------------
# model-backed commands
# ---------------------------------------------------------------------------

@main.group("pipeline")
def pipeline_group() -> None:
    """Detect violations and match them against settled cases."""


@pipeline_group.command("run")
@click.option("--inputs", required=True, type=click.Path(exists=True, dir_okay=False),
              help="JSONL of {id, text} rows.")
@click.option("--cases", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--backend", "backend_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help='JSON file: {"ner": {...}, "nli": {...}} backend configs.')
@click.option("--tau", type=float, default=0.5, show_default=True)
@click.option("--policy", type=click.Choice([p.value for p in RepairPolicy]), default="promote", show_default=True)
@click.option("--repeats", type=int, default=1, show_default=True)
@click.option("--domains", default=None, help="Comma-separated domain filter.")
@click.option("--out", default=None, type=click.Path(dir_okay=False))
@click.option("--pretty", is_flag=True)
@_guarded
def pipeline_run(inputs: str, cases: str, backend_path: str, tau: float, policy: str,
                 repeats: int, domains: str | None, out: str | None, pretty: bool) -> None:
    """Run the full identify-then-resolve flow."""
    rows = _read_jsonl(inputs)
    input_pairs = [(str(r["id"]), str(r["text"])) for r in rows]
    case_list = pl.load_cases(cases)
    with open(backend_path, "r", encoding="utf-8") as fh:
        backend_cfg = json.load(fh)
    config = pl.PipelineConfig(
        tau=tau,
        policy=_policy(policy),
        nli_repeats=repeats,
        domains=frozenset(LegalDomain.from_string(d) for d in domains.split(",")) if domains else None,
    )
    report = pl.run(input_pairs, case_list, _ner_tagger(backend_cfg["ner"]),
                    _nli_classifier(backend_cfg["nli"]), config)
    _emit(report.to_json_dict(), out, pretty)
    if report.n_inputs and report.n_failed == report.n_inputs:
        raise click.ClickException("every input failed")


@main.group()
def fewshot() -> None:
    """Few-shot prediction against a chat-completion backend."""


@fewshot.command("predict")
@click.option("--task", type=click.Choice(["ner", "nli"]), required=True)
@click.option("--train", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--inputs", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--backend", "backend_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--shots", type=int, default=9, show_default=True)
@click.option("--repeats", type=int, default=5, show_default=True)
@click.option("--temperature", type=float, default=None,
              help="Overrides the backend file's temperature (backend default 0.7).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--policy", type=click.Choice([p.value for p in RepairPolicy]), default="promote", show_default=True)
@click.option("--out", default=None, type=click.Path(dir_okay=False))
@_guarded
def fewshot_predict(task: str, train: str, inputs: str, backend_path: str, shots: int,
                    repeats: int, temperature: float | None, seed: int, policy: str,
                    out: str | None) -> None:
    """Predict every input with freshly sampled examples, repeats times.

    Output is JSONL, one row per (input, repeat): {id, repeat, tags|label,
    raw, error}.
    """
    with open(backend_path, "r", encoding="utf-8") as fh:
        backend_cfg = json.load(fh)
    if temperature is not None and backend_cfg.get("kind", "http") == "http":
        backend_cfg = dict(backend_cfg)
        backend_cfg["temperature"] = temperature
    backend = _chat_backend(backend_cfg)

    task_kind = be.Task(task)
    if task_kind is be.Task.NER:
        train_pool = load_ner(train)
        input_records = load_ner(inputs)
    else:
        train_pool = load_nli(train)
        input_records = load_nli(inputs)
    spec = be.FewShotSpec(task=task_kind, shots=shots, seed=seed, repeats=repeats)
    results = be.predict_batch(backend, spec, train_pool, input_records, policy=_policy(policy))

    lines = []
    for result in results:
        row: dict = {"id": result.input_id, "repeat": result.repeat, "error": result.error}
        if result.tagged is not None:
            row["tags"] = [str(t) for t in result.tagged.tags]
            row["diagnostics"] = list(result.tagged.diagnostics)
        if result.label is not None:
            row["label"] = result.label.surface
        lines.append(json.dumps(row, ensure_ascii=False, sort_keys=True))
    text = "\n".join(lines) + ("\n" if lines else "")
    if out:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out}", err=True)
    else:
        click.echo(text, nl=False)
    failures = sum(1 for r in results if not r.ok)
    if results and failures == len(results):
        raise click.ClickException("every prediction failed")


# ---------------------------------------------------------------------------
# data generation
# ---------------------------------------------------------------------------

@main.group()
def datagen() -> None:
    """Synthetic corpus generation and review exchange."""


def _write_records(records, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            payload = ner_record_to_dict(record) if isinstance(record, NerRecord) else nli_record_to_dict(record)
            fh.write(json.dumps(payload, ensure_ascii=False) + "\n")


@datagen.command("ner")
@click.option("--specs", required=True, type=click.Path(exists=True, dir_okay=False),
              help="JSONL of {mode, cause_of_action, industry, context, [kinds], [examples]}.")
@click.option("--backend", "backend_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--dedup", is_flag=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--review", "review_path", default=None, type=click.Path(dir_okay=False))
@_guarded
def datagen_ner(specs: str, backend_path: str, dedup: bool, out: str, review_path: str | None) -> None:
    """Generate marked-up violation narratives and parse them into records."""
    spec_objs = []
    for row in _read_jsonl(specs):
        spec_objs.append(dg.NerGenSpec(
            mode=dg.GenMode(row["mode"]),
            cause_of_action=row["cause_of_action"],
            industry=row["industry"],
            context=row["context"],
            examples=tuple(row.get("examples", [])),
            kinds=tuple(EntityKind.from_string(k) for k in row.get("kinds", [])),
        ))
    with open(backend_path, "r", encoding="utf-8") as fh:
        backend = _chat_backend(json.load(fh))
    accepted, rejected = dg.generate_batch(spec_objs, backend, dedup)
    _write_records(accepted, out)
    click.echo(f"accepted {len(accepted)}, rejected {len(rejected)}", err=True)
    if review_path:
        dg.export_review(accepted, rejected, review_path)
        click.echo(f"wrote {review_path}", err=True)


@datagen.command("nli")
@click.option("--specs", required=True, type=click.Path(exists=True, dir_okay=False),
              help="JSONL of {premise, label, [age], [gender], [text_format], [domain]}.")
@click.option("--backend", "backend_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--dedup", is_flag=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--review", "review_path", default=None, type=click.Path(dir_okay=False))
@_guarded
def datagen_nli(specs: str, backend_path: str, dedup: bool, out: str, review_path: str | None) -> None:
    """Generate first-person accounts for premises and wrap them as records."""
    spec_objs = []
    for row in _read_jsonl(specs):
        spec_objs.append(dg.NliGenSpec(
            premise=row["premise"],
            target_label=NliLabel.from_string(row["label"]),
            age=row.get("age"),
            gender=row.get("gender"),
            text_format=row.get("text_format", "online review"),
            domain=LegalDomain.from_string(row["domain"]) if row.get("domain") else None,
        ))
    with open(backend_path, "r", encoding="utf-8") as fh:
        backend = _chat_backend(json.load(fh))
    accepted, rejected = dg.generate_batch(spec_objs, backend, dedup)
    _write_records(accepted, out)
    click.echo(f"accepted {len(accepted)}, rejected {len(rejected)}", err=True)
    if review_path:
        dg.export_review(accepted, rejected, review_path)
        click.echo(f"wrote {review_path}", err=True)


@datagen.command("review-export")
@click.option("--records", "path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--task", type=click.Choice(["ner", "nli"]), default="ner", show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@_guarded
def review_export(path: str, task: str, out: str) -> None:
    """Wrap an existing corpus as review items with blank verdicts."""
    records = load_ner(path) if task == "ner" else load_nli(path)
    dg.export_review(records, [], out)
    click.echo(f"wrote {out}", err=True)


@datagen.command("review-import")
@click.option("--review", "path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@_guarded
def review_import(path: str, out: str) -> None:
    """Apply annotator verdicts: keep accepted and edited records."""
    records, skipped = dg.import_review(path)
    _write_records(records, out)
    click.echo(f"imported {len(records)}, skipped {len(skipped)}", err=True)


if __name__ == "__main__":
    main()
