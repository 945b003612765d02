"""lexviol: legal-violation detection and resolution toolkit.

Detect violation entities in unstructured text with IOB2 tagging, match the
flagged text pair-wise against settled class-action cases via entailment,
and evaluate all of it: exact-span scores, macro-F1, annotator agreement,
leakage-safe splits, and few-shot LLM orchestration.
"""

from .bio import (
    OUTSIDE,
    BioTag,
    EntityKind,
    EntitySpan,
    RepairPolicy,
    SchemeViolation,
    decode_spans,
    encode_spans,
    parse_tag,
    validate,
)
from .corpus import (
    CANONICAL_DOMAINS,
    CorpusStats,
    LegalDomain,
    NerRecord,
    NliLabel,
    NliRecord,
    Provenance,
    compute_stats,
    load_ner,
    load_nli,
    save_ner,
    save_nli,
)
from .metrics import (
    AgreementReport,
    ConfusionMatrix,
    ErrorClassReport,
    NerEvalReport,
    PrfScores,
    RunAggregate,
    TextStatsReport,
    aggregate_runs,
    agreement_report,
    cohen_kappa,
    error_classes,
    eval_ner,
    eval_nli,
    f1_from_pr,
    text_stats,
)
from .splits import Fold, FoldPlan, SplitPlan, coa_split, leave_one_out
from .backends import (
    BackendConfig,
    FewShotSpec,
    PromptSpec,
    TaggedPrediction,
    Task,
    build_fewshot_prompt,
    chat_complete,
    parse_ner_output,
    parse_nli_output,
    predict_batch,
)
from .pipeline import (
    MatchCandidate,
    PipelineConfig,
    PipelineReport,
    SettlementCase,
    identify,
    resolve,
    run,
)
from .datagen import (
    GeneratedNer,
    GenMode,
    NerGenSpec,
    NliGenSpec,
    generate_batch,
    parse_generated_ner,
    render_ner_gen_prompt,
    render_nli_gen_prompt,
    render_summary_prompt,
    tokenize,
)
from .errors import LexviolError

__version__ = "0.1.0"
