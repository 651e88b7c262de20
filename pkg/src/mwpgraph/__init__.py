"""Executable computational-graph engine and evaluation harness for
distractor-augmented math word problems."""

from .answers import ExtractedAnswer, NoAnswerFound, extract_answer, normalize_numerals, numeric_match
from .augment import (
    AugmentedProblem,
    AugmentationResult,
    DistractorSentence,
    VerificationVerdict,
    apply_insertions,
    augment_dataset,
    augment_problem,
    parse_verdict,
    split_sentences,
)
from .executor import ExecError, ExecErrorKind, ExecOutcome, apply_op, execute
from .graph import (
    GraphParseError,
    GraphSpec,
    MalformedJson,
    NodeSpec,
    OpKind,
    SchemaViolation,
    UnknownOp,
    ValidationReport,
    op_node_count,
    parse_graph,
    serialize,
    validate,
)
from .metrics import (
    EvalRecord,
    RegressionFit,
    SplitWeights,
    accuracy,
    build_report,
    delta_accuracy,
    distractor_stats,
    error_rate_by_type,
    fit_tokens_vs_complexity,
    weighted_accuracy,
    weighted_tokens,
)
from .prompts import build_prompt, template_text
from .reward import RewardBreakdown, score, score_group

__version__ = "0.1.0"

__all__ = [
    "AugmentationResult",
    "AugmentedProblem",
    "DistractorSentence",
    "EvalRecord",
    "ExecError",
    "ExecErrorKind",
    "ExecOutcome",
    "ExtractedAnswer",
    "GraphParseError",
    "GraphSpec",
    "MalformedJson",
    "NoAnswerFound",
    "NodeSpec",
    "OpKind",
    "RegressionFit",
    "RewardBreakdown",
    "SchemaViolation",
    "SplitWeights",
    "UnknownOp",
    "ValidationReport",
    "VerificationVerdict",
    "accuracy",
    "apply_insertions",
    "apply_op",
    "augment_dataset",
    "augment_problem",
    "build_prompt",
    "build_report",
    "delta_accuracy",
    "distractor_stats",
    "error_rate_by_type",
    "execute",
    "extract_answer",
    "fit_tokens_vs_complexity",
    "normalize_numerals",
    "numeric_match",
    "op_node_count",
    "parse_graph",
    "parse_verdict",
    "score",
    "score_group",
    "serialize",
    "split_sentences",
    "template_text",
    "validate",
    "weighted_accuracy",
    "weighted_tokens",
]
